#include "cldmd/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cldmd/errors.hpp"

namespace cldmd {

KernelOperator KernelConfig::make_operator(int control_dim) const {
  if (coupling.size() == 0) {
    return KernelOperator(scalar(), control_dim + 1);
  }
  if (coupling.rows() != control_dim + 1) {
    std::ostringstream os;
    os << "KernelConfig: coupling is " << coupling.rows() << "x"
       << coupling.cols() << " but the augmented control space has dimension "
       << control_dim + 1;
    throw std::invalid_argument(os.str());
  }
  return KernelOperator(scalar(), coupling);
}

namespace {

double spd_condition_estimate(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a,
                                                    Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return hi / std::max(lo, 1e-300);
}

Eigen::MatrixXd anchors_of(const Decomposition& dec) {
  if (dec.basis_kind == BasisSpec::Kind::kernel_centers) return dec.centers;
  Eigen::MatrixXd starts(static_cast<Eigen::Index>(dec.basis_paths.size()),
                         dec.state_dim);
  for (std::size_t i = 0; i < dec.basis_paths.size(); ++i) {
    starts.row(static_cast<Eigen::Index>(i)) = dec.basis_paths[i].states.row(0);
  }
  return starts;
}

}  // namespace

Eigen::MatrixXcd normalize_gram_columns(const Eigen::MatrixXcd& columns,
                                        const Eigen::MatrixXd& gram_reg) {
  const Eigen::MatrixXcd gc = gram_reg.cast<std::complex<double>>();
  Eigen::MatrixXcd out = columns;
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    const std::complex<double> q = columns.col(j).dot(gc * columns.col(j));
    const double norm2 = q.real();
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
      std::ostringstream os;
      os << "normalize_gram_columns: column " << j
         << " has non-positive Gram norm " << norm2;
      throw numeric_error(os.str());
    }
    out.col(j) /= std::sqrt(norm2);
  }
  return out;
}

Eigen::MatrixXd identity_inner_products(const Decomposition& dec) {
  if (dec.basis_kind == BasisSpec::Kind::kernel_centers) {
    return dec.centers.transpose();
  }
  Eigen::MatrixXd c(dec.state_dim,
                    static_cast<Eigen::Index>(dec.basis_paths.size()));
  for (std::size_t j = 0; j < dec.basis_paths.size(); ++j) {
    const auto& tr = dec.basis_paths[j];
    const Eigen::VectorXd coef = trajectory_quad_coefficients(tr);
    c.col(static_cast<Eigen::Index>(j)) = tr.states.transpose() * coef;
  }
  return c;
}

Eigen::MatrixXcd modes_from(const Eigen::MatrixXcd& coefficients,
                            const Eigen::MatrixXd& gram_basis_reg,
                            const Eigen::MatrixXd& identity_columns) {
  // xi = C (V^T G)^-1, solved through the transposed system
  // (V^T G)^T xi^T = C^T.
  const Eigen::MatrixXcd vt_g =
      coefficients.transpose() * gram_basis_reg.cast<std::complex<double>>();
  const Eigen::MatrixXcd rhs =
      identity_columns.transpose().cast<std::complex<double>>();
  return solve_complex(vt_g.transpose(), rhs).transpose();
}

Decomposition decompose(const Dataset& ds, const BasisSpec& basis,
                        const KernelConfig& kernel, const FeedbackLaw& law,
                        double eps_control, double eps_basis,
                        OperatorMatrices* matrices_out) {
  ds.validate();
  basis.validate(ds);
  if (eps_control < 0.0 || eps_basis < 0.0) {
    throw std::invalid_argument("decompose: regularization must be >= 0");
  }
  const KernelOperator kop = kernel.make_operator(ds.control_dim);
  const GaussianKernel k = kernel.scalar();

  OperatorMatrices om;
  om.eps_control = eps_control;
  om.eps_basis = eps_basis;
  try {
    om.gram_control = gram_control_occupation(ds, kop);
    if (basis.kind == BasisSpec::Kind::kernel_centers) {
      om.gram_basis = gram_alpha_kernel(basis.centers, k);
      om.interaction_feedback =
          interaction_feedback_kernel(basis.centers, ds, kop, law);
      om.interaction_liouville =
          interaction_liouville_kernel(basis.centers, ds, k);
    } else {
      om.gram_basis = gram_alpha_occupation(ds, basis.indices, k);
      om.interaction_feedback =
          interaction_feedback_occupation(ds, basis.indices, kop, law);
      om.interaction_liouville =
          interaction_liouville_occupation(ds, basis.indices, k);
    }
  } catch (const numeric_error& e) {
    throw numeric_error(std::string("decompose[assembly]: ") + e.what());
  }
  if (matrices_out != nullptr) *matrices_out = om;

  Eigen::MatrixXd finite_rank;
  try {
    finite_rank = finite_rank_matrix(om);
  } catch (const singular_matrix_error& e) {
    throw singular_matrix_error(std::string("decompose[finite-rank]: ") +
                                e.what());
  }

  EigenPairs eig;
  try {
    eig = eig_general(finite_rank);
  } catch (const numeric_error& e) {
    throw numeric_error(std::string("decompose[eigensolve]: ") + e.what());
  }

  Eigen::MatrixXd gram_basis_reg = om.gram_basis;
  gram_basis_reg.diagonal().array() += eps_basis;

  Decomposition dec;
  dec.eigenvalues = eig.values;
  dec.coefficients = normalize_gram_columns(eig.vectors, gram_basis_reg);
  dec.kernel = kernel;
  dec.eps_control = eps_control;
  dec.eps_basis = eps_basis;
  dec.basis_kind = basis.kind;
  dec.state_dim = ds.state_dim;
  if (basis.kind == BasisSpec::Kind::kernel_centers) {
    dec.centers = basis.centers;
  } else {
    dec.basis_paths.reserve(basis.indices.size());
    for (int idx : basis.indices) {
      dec.basis_paths.push_back(
          ds.trajectories[static_cast<std::size_t>(idx)]);
    }
  }

  try {
    dec.modes = modes_from(dec.coefficients, gram_basis_reg,
                           identity_inner_products(dec));
  } catch (const singular_matrix_error& e) {
    throw singular_matrix_error(std::string("decompose[modes]: ") + e.what());
  }

  Eigen::MatrixXd gram_control_reg = om.gram_control;
  gram_control_reg.diagonal().array() += eps_control;
  dec.diagnostics.gram_control_condition =
      spd_condition_estimate(gram_control_reg);
  dec.diagnostics.gram_basis_condition = spd_condition_estimate(gram_basis_reg);

  const Eigen::MatrixXd anchors = anchors_of(dec);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < anchors.rows(); ++i) {
    const Eigen::VectorXcd rec =
        dec.modes * eigenfunctions_at(dec, anchors.row(i).transpose());
    acc += (rec - anchors.row(i).transpose().cast<std::complex<double>>())
               .norm();
  }
  dec.diagnostics.identity_residual_mean =
      acc / static_cast<double>(anchors.rows());
  return dec;
}

Eigen::VectorXd basis_values_at(const Decomposition& dec,
                                const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != dec.state_dim) {
    std::ostringstream os;
    os << "basis_values_at: point dimension " << x.size()
       << " does not match state dimension " << dec.state_dim;
    throw std::invalid_argument(os.str());
  }
  const GaussianKernel k = dec.kernel.scalar();
  if (dec.basis_kind == BasisSpec::Kind::kernel_centers) {
    return k.cross(dec.centers, x.transpose()).col(0);
  }
  Eigen::VectorXd vals(static_cast<Eigen::Index>(dec.basis_paths.size()));
  for (std::size_t i = 0; i < dec.basis_paths.size(); ++i) {
    const auto& tr = dec.basis_paths[i];
    const Eigen::VectorXd coef = trajectory_quad_coefficients(tr);
    vals[static_cast<Eigen::Index>(i)] =
        coef.dot(k.cross(tr.states, x.transpose()).col(0));
  }
  return vals;
}

Eigen::VectorXcd eigenfunctions_at(const Decomposition& dec,
                                   const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::VectorXd vals = basis_values_at(dec, x);
  return dec.coefficients.transpose() * vals.cast<std::complex<double>>();
}

Prediction predict_direct(const Decomposition& dec,
                          const Eigen::Ref<const Eigen::VectorXd>& x0,
                          const Eigen::Ref<const Eigen::VectorXd>& times,
                          int top_modes) {
  for (Eigen::Index k = 1; k < times.size(); ++k) {
    if (!(times[k] >= times[k - 1])) {
      throw std::invalid_argument("predict_direct: times must be ascending");
    }
  }
  const Eigen::VectorXcd phi0 = eigenfunctions_at(dec, x0);
  Eigen::MatrixXcd contrib = dec.modes * phi0.asDiagonal();
  if (top_modes > 0 && top_modes < dec.size()) {
    // keep the eigenpairs with the largest contribution |xi_j phi_j(x0)|
    std::vector<Eigen::Index> order(static_cast<std::size_t>(dec.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return contrib.col(a).norm() > contrib.col(b).norm();
                     });
    for (std::size_t r = static_cast<std::size_t>(top_modes);
         r < order.size(); ++r) {
      contrib.col(order[r]).setZero();
    }
  }

  Prediction out;
  out.times = times;
  out.states.resize(times.size(), dec.state_dim);
  double imag_max = 0.0;
  Eigen::VectorXcd expv(dec.size());
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    for (Eigen::Index j = 0; j < dec.size(); ++j) {
      expv[j] = std::exp(dec.eigenvalues[j] * times[k]);
    }
    const Eigen::VectorXcd state = contrib * expv;
    out.states.row(k) = state.real().transpose();
    imag_max = std::max(imag_max, state.imag().cwiseAbs().maxCoeff());
  }
  out.imag_residual = imag_max;
  return out;
}

Eigen::VectorXd reconstruct_field(const Decomposition& dec,
                                  const Eigen::Ref<const Eigen::VectorXd>& x,
                                  double* imag_inf_out) {
  const Eigen::VectorXcd phi = eigenfunctions_at(dec, x);
  const Eigen::VectorXcd field =
      dec.modes * dec.eigenvalues.cwiseProduct(phi);
  if (imag_inf_out != nullptr) {
    *imag_inf_out = field.imag().cwiseAbs().maxCoeff();
  }
  return field.real();
}

Prediction predict_indirect(const Decomposition& dec,
                            const Eigen::Ref<const Eigen::VectorXd>& x0,
                            double t_end, double step,
                            Prediction* partial_out) {
  if (!(step > 0.0) || !(t_end > 0.0) || step > t_end) {
    throw std::invalid_argument(
        "predict_indirect: need 0 < step <= t_end");
  }
  if (x0.size() != dec.state_dim) {
    throw std::invalid_argument("predict_indirect: x0 dimension mismatch");
  }
  const auto steps = static_cast<Eigen::Index>(std::llround(t_end / step));

  Prediction out;
  out.times.resize(steps + 1);
  out.states.resize(steps + 1, dec.state_dim);
  out.times[0] = 0.0;
  out.states.row(0) = x0.transpose();

  double imag_max = 0.0;
  auto field = [&](const Eigen::VectorXd& x) {
    double im = 0.0;
    Eigen::VectorXd f = reconstruct_field(dec, x, &im);
    imag_max = std::max(imag_max, im);
    return f;
  };

  Eigen::VectorXd x = x0;
  for (Eigen::Index k = 1; k <= steps; ++k) {
    const Eigen::VectorXd k1 = field(x);
    const Eigen::VectorXd k2 = field(x + 0.5 * step * k1);
    const Eigen::VectorXd k3 = field(x + 0.5 * step * k2);
    const Eigen::VectorXd k4 = field(x + step * k3);
    x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(x.norm() <= 1e6)) {
      std::ostringstream os;
      os << "predict_indirect: state norm exceeded 1e6 at t = "
         << static_cast<double>(k) * step << "; last valid state ("
         << out.states.row(k - 1) << ")";
      if (partial_out != nullptr) {
        partial_out->times = out.times.head(k);
        partial_out->states = out.states.topRows(k);
        partial_out->imag_residual = imag_max;
      }
      throw divergence_error(os.str(), static_cast<double>(k - 1) * step);
    }
    out.times[k] = static_cast<double>(k) * step;
    out.states.row(k) = x.transpose();
  }
  out.imag_residual = imag_max;
  return out;
}

RmsReport relative_rms(const Prediction& pred, const Prediction& truth) {
  if (pred.times.size() != truth.times.size() ||
      pred.states.cols() != truth.states.cols()) {
    throw std::invalid_argument("relative_rms: shape mismatch");
  }
  if ((pred.times - truth.times).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("relative_rms: time grids differ");
  }
  const auto n = pred.states.cols();
  const auto count = static_cast<double>(pred.times.size());

  RmsReport report;
  report.values.resize(n);
  report.absolute.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index d = 0; d < n; ++d) {
    const double num = std::sqrt(
        (pred.states.col(d) - truth.states.col(d)).squaredNorm() / count);
    const double den =
        std::sqrt(truth.states.col(d).squaredNorm() / count);
    if (den < 1e-12) {
      report.values[d] = num;
      report.absolute[static_cast<std::size_t>(d)] = true;
    } else {
      report.values[d] = num / den;
    }
  }
  return report;
}

namespace {

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw schema_error("decomposition file: ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

nlohmann::ordered_json cmatrix_to_json(const Eigen::MatrixXcd& m) {
  nlohmann::ordered_json out;
  out["re"] = matrix_to_json(m.real());
  out["im"] = matrix_to_json(m.imag());
  return out;
}

Eigen::MatrixXcd cmatrix_from_json(const nlohmann::json& j) {
  const Eigen::MatrixXd re = matrix_from_json(j.at("re"));
  const Eigen::MatrixXd im = matrix_from_json(j.at("im"));
  if (re.rows() != im.rows() || re.cols() != im.cols()) {
    throw schema_error("decomposition file: real/imag shape mismatch");
  }
  Eigen::MatrixXcd m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

}  // namespace

void save_decomposition(const Decomposition& dec,
                        const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format"] = "cldmd-decomposition";
  j["version"] = 1;
  j["state_dim"] = dec.state_dim;

  auto eigs = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < dec.eigenvalues.size(); ++i) {
    eigs.push_back({dec.eigenvalues[i].real(), dec.eigenvalues[i].imag()});
  }
  j["eigenvalues"] = std::move(eigs);
  j["coefficients"] = cmatrix_to_json(dec.coefficients);
  j["modes"] = cmatrix_to_json(dec.modes);

  nlohmann::ordered_json kernel;
  kernel["type"] = "gaussian";
  kernel["width"] = dec.kernel.width;
  if (dec.kernel.coupling.size() == 0) {
    kernel["operator"] = {{"type", "diagonal"}};
  } else {
    kernel["operator"] = {{"type", "matrix"},
                          {"A", matrix_to_json(dec.kernel.coupling)}};
  }
  j["kernel"] = std::move(kernel);
  j["regularization"] = {{"eps", dec.eps_control},
                         {"eps_tilde", dec.eps_basis}};

  nlohmann::ordered_json basis;
  if (dec.basis_kind == BasisSpec::Kind::kernel_centers) {
    basis["type"] = "kernel";
    basis["centers"] = matrix_to_json(dec.centers);
  } else {
    basis["type"] = "data_centric";
    auto paths = nlohmann::ordered_json::array();
    for (const auto& tr : dec.basis_paths) {
      nlohmann::ordered_json p;
      p["t0"] = tr.t0;
      p["dt"] = tr.dt;
      p["states"] = matrix_to_json(tr.states);
      p["controls"] = matrix_to_json(tr.controls);
      paths.push_back(std::move(p));
    }
    basis["trajectories"] = std::move(paths);
  }
  j["basis"] = std::move(basis);
  j["diagnostics"] = {
      {"gram_control_condition", dec.diagnostics.gram_control_condition},
      {"gram_basis_condition", dec.diagnostics.gram_basis_condition},
      {"identity_residual_mean", dec.diagnostics.identity_residual_mean}};

  std::ofstream out(path);
  if (!out) {
    throw io_error("cannot write decomposition file " + path.string());
  }
  out << j.dump(2) << "\n";
}

Decomposition load_decomposition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw io_error("cannot open decomposition file " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw schema_error("decomposition file " + path.string() + ": " +
                       e.what());
  }

  try {
    if (j.at("format").get<std::string>() != "cldmd-decomposition") {
      throw schema_error("decomposition file: unknown format tag");
    }
    Decomposition dec;
    dec.state_dim = j.at("state_dim").get<int>();

    const auto& eigs = j.at("eigenvalues");
    dec.eigenvalues.resize(static_cast<Eigen::Index>(eigs.size()));
    for (std::size_t i = 0; i < eigs.size(); ++i) {
      dec.eigenvalues[static_cast<Eigen::Index>(i)] = {
          eigs[i].at(0).get<double>(), eigs[i].at(1).get<double>()};
    }
    dec.coefficients = cmatrix_from_json(j.at("coefficients"));
    dec.modes = cmatrix_from_json(j.at("modes"));

    const auto& kernel = j.at("kernel");
    dec.kernel.width = kernel.at("width").get<double>();
    if (kernel.at("operator").at("type").get<std::string>() == "matrix") {
      dec.kernel.coupling = matrix_from_json(kernel.at("operator").at("A"));
    }
    dec.eps_control = j.at("regularization").at("eps").get<double>();
    dec.eps_basis = j.at("regularization").at("eps_tilde").get<double>();

    const auto& basis = j.at("basis");
    if (basis.at("type").get<std::string>() == "kernel") {
      dec.basis_kind = BasisSpec::Kind::kernel_centers;
      dec.centers = matrix_from_json(basis.at("centers"));
    } else {
      dec.basis_kind = BasisSpec::Kind::data_centric;
      for (const auto& p : basis.at("trajectories")) {
        SampledTrajectory tr;
        tr.t0 = p.at("t0").get<double>();
        tr.dt = p.at("dt").get<double>();
        tr.states = matrix_from_json(p.at("states"));
        tr.controls = matrix_from_json(p.at("controls"));
        dec.basis_paths.push_back(std::move(tr));
      }
    }
    if (j.contains("diagnostics")) {
      const auto& d = j["diagnostics"];
      dec.diagnostics.gram_control_condition =
          d.value("gram_control_condition", 0.0);
      dec.diagnostics.gram_basis_condition =
          d.value("gram_basis_condition", 0.0);
      dec.diagnostics.identity_residual_mean =
          d.value("identity_residual_mean", 0.0);
    }
    return dec;
  } catch (const nlohmann::json::exception& e) {
    throw schema_error("decomposition file " + path.string() + ": " +
                       e.what());
  }
}

}  // namespace cldmd
