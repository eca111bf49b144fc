#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <vector>

#include "cldmd/decomposition.hpp"
#include "cldmd/errors.hpp"
#include "cldmd/experiment.hpp"
#include "cldmd/systems.hpp"

using namespace cldmd;

namespace {

const ControlRhs duffing = [](const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u) {
  return duffing_rhs(x, u);
};

SampledTrajectory constant_trajectory(const Eigen::VectorXd& x0, int n_samples,
                                      double duration) {
  SampledTrajectory tr;
  tr.t0 = 0.0;
  tr.dt = duration / (n_samples - 1);
  tr.states = x0.transpose().replicate(n_samples, 1);
  tr.controls = Eigen::MatrixXd::Zero(n_samples, 1);
  return tr;
}

Dataset small_duffing_set(int per_side, double half_width) {
  Dataset ds;
  ds.state_dim = 2;
  ds.control_dim = 1;
  const Eigen::MatrixXd ics = grid_initial_conditions(per_side, half_width, 2);
  for (Eigen::Index i = 0; i < ics.rows(); ++i) {
    const auto sig = sinusoid_excitation(1, 3, -1.0, 1.0, 0.5, 2.5, 0,
                                         static_cast<std::uint64_t>(i));
    ds.trajectories.push_back(
        simulate_openloop(duffing, ics.row(i).transpose(), sig, 1.0, 20.0,
                          1e-3));
  }
  return ds;
}

KernelConfig gaussian_config(double width) {
  KernelConfig cfg;
  cfg.width = width;
  return cfg;
}

// single-eigenpair decomposition built by hand for evaluation-op tests
Decomposition synthetic_single_mode(std::complex<double> lambda,
                                    const Eigen::Vector2d& mode,
                                    const Eigen::Vector2d& center,
                                    double width) {
  Decomposition dec;
  dec.state_dim = 2;
  dec.kernel = gaussian_config(width);
  dec.basis_kind = BasisSpec::Kind::kernel_centers;
  dec.centers = center.transpose();
  dec.eigenvalues = Eigen::VectorXcd::Constant(1, lambda);
  dec.coefficients = Eigen::MatrixXcd::Identity(1, 1);
  dec.modes = mode.cast<std::complex<double>>();
  return dec;
}

}  // namespace

TEST_CASE("decompose: single constant trajectory gives a zero eigenvalue") {
  Dataset ds;
  ds.state_dim = 2;
  ds.control_dim = 1;
  ds.trajectories.push_back(
      constant_trajectory(Eigen::Vector2d(0.5, -0.5), 11, 1.0));

  Eigen::MatrixXd centers(1, 2);
  centers << 0.5, -0.5;
  const auto dec =
      decompose(ds, BasisSpec::kernel_basis(centers), gaussian_config(15.0),
                FeedbackLaw::zero(1, 2), 1e-6, 1e-6);
  REQUIRE(dec.size() == 1);
  CHECK(std::abs(dec.eigenvalues[0]) <= 1e-10);
}

TEST_CASE("decompose: normalization and conjugate closure") {
  const Dataset ds = small_duffing_set(3, 1.0);
  Eigen::MatrixXd gain(1, 2);
  gain << -2.0, -2.0;
  const auto dec = decompose(ds, BasisSpec::data_centric_all(ds.size()),
                             gaussian_config(15.0), FeedbackLaw::linear(gain),
                             1e-6, 1e-6);
  REQUIRE(dec.size() == 9);

  const GaussianKernel k(15.0);
  Eigen::MatrixXd gt = gram_alpha_occupation(ds, {0, 1, 2, 3, 4, 5, 6, 7, 8}, k);
  gt.diagonal().array() += 1e-6;
  const Eigen::MatrixXcd gtc = gt.cast<std::complex<double>>();
  for (Eigen::Index j = 0; j < dec.size(); ++j) {
    const std::complex<double> q =
        dec.coefficients.col(j).dot(gtc * dec.coefficients.col(j));
    CHECK(q.real() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(q.imag()) <= 1e-10);
  }

  // eigenvalues closed under conjugation
  for (Eigen::Index j = 0; j < dec.size(); ++j) {
    if (dec.eigenvalues[j].imag() != 0.0) {
      bool found = false;
      for (Eigen::Index l = 0; l < dec.size(); ++l) {
        if (std::abs(dec.eigenvalues[l] - std::conj(dec.eigenvalues[j])) <=
            1e-9 * (1.0 + std::abs(dec.eigenvalues[j]))) {
          found = true;
          break;
        }
      }
      CHECK(found);
    }
  }
}

TEST_CASE("modes_from: identity case") {
  // Gt = I, V = I, centers = e1, e2 => xi = I
  const Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(2, 2);
  const Eigen::MatrixXd gt = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXcd xi = modes_from(v, gt, c);
  CHECK((xi - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("identity inner products for a constant data-centric basis") {
  Decomposition dec;
  dec.state_dim = 2;
  dec.kernel = gaussian_config(15.0);
  dec.basis_kind = BasisSpec::Kind::data_centric;
  dec.basis_paths.push_back(
      constant_trajectory(Eigen::Vector2d(0.3, -0.7), 11, 2.0));
  const Eigen::MatrixXd c = identity_inner_products(dec);
  // integral of the constant state over [0, T] is T * x0
  CHECK(c(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(c(1, 0) == doctest::Approx(-1.4).epsilon(1e-12));
}

TEST_CASE("eigenfunctions at a kernel center") {
  const auto dec =
      synthetic_single_mode({0.0, 0.0}, {1.0, 0.0}, {0.2, 0.4}, 15.0);
  const Eigen::VectorXcd phi = eigenfunctions_at(dec, Eigen::Vector2d(0.2, 0.4));
  REQUIRE(phi.size() == 1);
  CHECK(std::abs(phi[0] - 1.0) <= 1e-14);

  CHECK_THROWS_AS(eigenfunctions_at(dec, Eigen::Vector3d::Zero()),
                  std::invalid_argument);
}

TEST_CASE("eigenfunction evaluation matches a reversed-order summation") {
  const Dataset ds = small_duffing_set(3, 1.0);
  Eigen::MatrixXd gain(1, 2);
  gain << -2.0, -2.0;
  const auto dec = decompose(ds, BasisSpec::data_centric_all(ds.size()),
                             gaussian_config(15.0), FeedbackLaw::linear(gain),
                             1e-6, 1e-6);

  const Eigen::Vector2d x = ds.trajectories[4].states.row(7).transpose();
  const Eigen::VectorXcd phi = eigenfunctions_at(dec, x);
  const Eigen::VectorXd vals = basis_values_at(dec, x);
  for (Eigen::Index j = 0; j < dec.size(); ++j) {
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index i = dec.size() - 1; i >= 0; --i) {
      acc += dec.coefficients(i, j) * vals[i];
    }
    CHECK(std::abs(phi[j] - acc) <= 1e-12 * (1.0 + std::abs(acc)));
  }
}

TEST_CASE("eigenvector scaling drops out of the mode/eigenfunction products") {
  const Dataset ds = small_duffing_set(3, 1.0);
  Eigen::MatrixXd gain(1, 2);
  gain << -2.0, -2.0;

  OperatorMatrices om;
  const auto dec = decompose(ds, BasisSpec::data_centric_all(ds.size()),
                             gaussian_config(15.0), FeedbackLaw::linear(gain),
                             1e-6, 1e-6, &om);
  Eigen::MatrixXd gt_reg = om.gram_basis;
  gt_reg.diagonal().array() += 1e-6;
  const Eigen::MatrixXd idcols = identity_inner_products(dec);

  // rescale the eigenvector columns by arbitrary nonzero complex factors and
  // renormalize; the normalization absorbs the modulus, a unit phase remains
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  Eigen::MatrixXcd scaled = dec.coefficients;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const std::complex<double> s(unif(rng), unif(rng) - 1.6);
    scaled.col(j) *= s;
  }
  const Eigen::MatrixXcd renorm = normalize_gram_columns(scaled, gt_reg);
  const Eigen::MatrixXcd modes2 = modes_from(renorm, gt_reg, idcols);

  Decomposition dec2 = dec;
  dec2.coefficients = renorm;
  dec2.modes = modes2;

  const Eigen::Vector2d x(0.4, -0.3);
  const Eigen::VectorXcd phi1 = eigenfunctions_at(dec, x);
  const Eigen::VectorXcd phi2 = eigenfunctions_at(dec2, x);
  for (Eigen::Index j = 0; j < dec.size(); ++j) {
    CHECK(std::abs(std::abs(phi1[j]) - std::abs(phi2[j])) <=
          1e-10 * (1.0 + std::abs(phi1[j])));
    const Eigen::VectorXcd p1 = dec.modes.col(j) * phi1[j];
    const Eigen::VectorXcd p2 = dec2.modes.col(j) * phi2[j];
    CHECK((p1 - p2).norm() <= 1e-10 * (1.0 + p1.norm()));
  }
}

TEST_CASE("predict_direct: zero time and single-mode exponential") {
  const auto dec =
      synthetic_single_mode({-1.5, 0.0}, {2.0, -1.0}, {0.0, 0.0}, 15.0);
  Eigen::VectorXd times(3);
  times << 0.0, 0.5, 1.0;
  const Eigen::Vector2d x0(0.1, 0.2);
  const auto pred = predict_direct(dec, x0, times);

  const double phi0 = std::exp(-x0.squaredNorm() / 15.0);
  for (int k = 0; k < 3; ++k) {
    const double factor = phi0 * std::exp(-1.5 * times[k]);
    CHECK(pred.states(k, 0) == doctest::Approx(2.0 * factor).epsilon(1e-12));
    CHECK(pred.states(k, 1) == doctest::Approx(-factor).epsilon(1e-12));
  }
  CHECK(pred.imag_residual <= 1e-15);

  Eigen::VectorXd unsorted(2);
  unsorted << 1.0, 0.0;
  CHECK_THROWS_AS(predict_direct(dec, x0, unsorted), std::invalid_argument);
}

TEST_CASE("reconstruct_field: zero eigenvalues give the zero field") {
  const auto dec =
      synthetic_single_mode({0.0, 0.0}, {2.0, -1.0}, {0.3, 0.0}, 15.0);
  double imag = -1.0;
  const Eigen::VectorXd f =
      reconstruct_field(dec, Eigen::Vector2d(0.5, 0.5), &imag);
  CHECK(f.norm() == 0.0);
  CHECK(imag == 0.0);
}

TEST_CASE("predict_indirect: zero field stays put, step refinement is 4th order") {
  const auto zero_dec =
      synthetic_single_mode({0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}, 15.0);
  const auto still =
      predict_indirect(zero_dec, Eigen::Vector2d(0.7, -0.2), 1.0, 0.1);
  CHECK(still.times.size() == 11);
  CHECK((still.states.rowwise() - Eigen::RowVector2d(0.7, -0.2))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // smooth nonlinear field from a single gaussian mode
  const auto dec =
      synthetic_single_mode({-2.0, 0.0}, {1.0, 0.5}, {0.4, -0.2}, 4.0);
  const Eigen::Vector2d x0(0.9, 0.1);
  const auto fine = predict_indirect(dec, x0, 1.0, 1.0 / 512.0);
  const auto h1 = predict_indirect(dec, x0, 1.0, 1.0 / 8.0);
  const auto h2 = predict_indirect(dec, x0, 1.0, 1.0 / 16.0);
  const double e1 = (h1.states.row(8) - fine.states.row(512)).norm();
  const double e2 = (h2.states.row(16) - fine.states.row(512)).norm();
  CHECK(e1 / e2 >= 10.0);
  CHECK(e1 / e2 <= 30.0);

  CHECK_THROWS_AS(predict_indirect(dec, x0, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("predict_indirect diverges cleanly on an unstable field") {
  // an effectively constant field of magnitude ~4e6 crosses the escape norm
  const auto dec =
      synthetic_single_mode({3e6, 0.0}, {1.0, 1.0}, {0.0, 0.0}, 1e30);
  Prediction partial;
  CHECK_THROWS_AS(
      predict_indirect(dec, Eigen::Vector2d(1.0, 1.0), 1.0, 1e-3, &partial),
      divergence_error);
  // the samples before the escape are preserved
  REQUIRE(partial.times.size() > 0);
  CHECK(partial.times.size() == partial.states.rows());
  CHECK(partial.states.row(0) == Eigen::RowVector2d(1.0, 1.0));
  CHECK(partial.states.rowwise().norm().maxCoeff() <= 1e6);
}

TEST_CASE("direct prediction with a truncated mode set") {
  const Dataset ds = small_duffing_set(3, 1.0);
  Eigen::MatrixXd gain(1, 2);
  gain << -2.0, -2.0;
  const auto dec = decompose(ds, BasisSpec::data_centric_all(ds.size()),
                             gaussian_config(15.0), FeedbackLaw::linear(gain),
                             1e-6, 1e-6);
  const Eigen::Vector2d x0(0.8, 0.6);
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(11, 0.0, 1.0);

  const auto full = predict_direct(dec, x0, times);
  const auto all9 = predict_direct(dec, x0, times, 9);
  CHECK((full.states - all9.states).cwiseAbs().maxCoeff() == 0.0);

  // keeping one eigenpair reproduces the single largest contribution
  const Eigen::VectorXcd phi0 = eigenfunctions_at(dec, x0);
  Eigen::Index top = 0;
  double best = -1.0;
  for (Eigen::Index j = 0; j < dec.size(); ++j) {
    const double mag = (dec.modes.col(j) * phi0[j]).norm();
    if (mag > best) {
      best = mag;
      top = j;
    }
  }
  const auto one = predict_direct(dec, x0, times, 1);
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    const Eigen::VectorXcd term = dec.modes.col(top) * phi0[top] *
                                  std::exp(dec.eigenvalues[top] * times[k]);
    CHECK((one.states.row(k).transpose() - term.real()).norm() <= 1e-12);
  }

}

TEST_CASE("relative_rms") {
  Prediction truth;
  truth.times = Eigen::VectorXd::LinSpaced(100, 0.0, 99.0);
  truth.states.resize(100, 2);
  for (int k = 0; k < 100; ++k) {
    const double t = 2.0 * M_PI * k / 100.0;  // full period, endpoint excluded
    truth.states(k, 0) = 3.0 * std::sin(t);
    truth.states(k, 1) = 1.0;
  }

  CHECK(relative_rms(truth, truth).values.cwiseAbs().maxCoeff() == 0.0);

  Prediction twice = truth;
  twice.states *= 2.0;
  const auto ones = relative_rms(twice, truth);
  CHECK(ones.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ones.values[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(ones.absolute[0]);

  // constant offset against a sinusoid of amplitude a: delta / (a / sqrt(2))
  Prediction offset = truth;
  offset.states.col(0).array() += 0.25;
  const auto rep = relative_rms(offset, truth);
  CHECK(rep.values[0] ==
        doctest::Approx(0.25 / (3.0 / std::sqrt(2.0))).epsilon(1e-12));

  // zero truth dimension reports the absolute rms with a flag
  Prediction zt = truth;
  zt.states.col(1).setZero();
  Prediction zp = zt;
  zp.states.col(1).array() += 0.125;
  const auto abs_rep = relative_rms(zp, zt);
  CHECK(abs_rep.absolute[1]);
  CHECK(abs_rep.values[1] == doctest::Approx(0.125).epsilon(1e-12));

  Prediction shifted = truth;
  shifted.times.array() += 1.0;
  CHECK_THROWS_AS(relative_rms(shifted, truth), std::invalid_argument);
}

TEST_CASE("direct prediction is conjugate-symmetric on real problems") {
  const Dataset ds = small_duffing_set(3, 1.2);
  Eigen::MatrixXd gain(1, 2);
  gain << -2.0, -2.0;
  const auto dec = decompose(ds, BasisSpec::data_centric_all(ds.size()),
                             gaussian_config(15.0), FeedbackLaw::linear(gain),
                             1e-6, 1e-6);
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(21, 0.0, 1.0);
  const auto pred = predict_direct(dec, Eigen::Vector2d(1.0, 1.0), times);
  CHECK(pred.imag_residual <= 1e-8 * (1.0 + pred.states.cwiseAbs().maxCoeff()));
}

TEST_CASE("decomposition serialization round trip") {
  const Dataset ds = small_duffing_set(2, 0.8);
  Eigen::MatrixXd gain(1, 2);
  gain << -2.0, -2.0;

  for (bool data_centric : {true, false}) {
    BasisSpec basis =
        data_centric
            ? BasisSpec::data_centric_all(ds.size())
            : BasisSpec::kernel_basis(grid_initial_conditions(2, 0.8, 2));
    const auto dec = decompose(ds, basis, gaussian_config(15.0),
                               FeedbackLaw::linear(gain), 1e-6, 1e-6);

    const auto path = std::filesystem::temp_directory_path() /
                      "cldmd_test_decomposition.json";
    save_decomposition(dec, path);
    const auto back = load_decomposition(path);

    CHECK(back.state_dim == dec.state_dim);
    CHECK((back.eigenvalues - dec.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.coefficients - dec.coefficients).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.modes - dec.modes).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.kernel.width == dec.kernel.width);
    CHECK(back.basis_kind == dec.basis_kind);

    // a round-tripped decomposition predicts identically
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
    const auto p1 = predict_direct(dec, Eigen::Vector2d(0.5, 0.5), times);
    const auto p2 = predict_direct(back, Eigen::Vector2d(0.5, 0.5), times);
    CHECK((p1.states - p2.states).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
  }
}

TEST_CASE("decompose and round-trip with a matrix operator coupling") {
  const Dataset ds = small_duffing_set(2, 0.8);
  Eigen::MatrixXd gain(1, 2);
  gain << -2.0, -2.0;
  KernelConfig kernel = gaussian_config(15.0);
  kernel.coupling.resize(2, 2);
  kernel.coupling << 2.0, 0.5, 0.5, 1.0;

  const auto dec = decompose(ds, BasisSpec::data_centric_all(ds.size()),
                             kernel, FeedbackLaw::linear(gain), 1e-6, 1e-6);
  CHECK(dec.size() == 4);

  const auto path = std::filesystem::temp_directory_path() /
                    "cldmd_test_coupling.json";
  save_decomposition(dec, path);
  const auto back = load_decomposition(path);
  CHECK(back.kernel.coupling.rows() == 2);
  CHECK((back.kernel.coupling - kernel.coupling).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
  const auto p1 = predict_direct(dec, Eigen::Vector2d(0.4, 0.4), times);
  const auto p2 = predict_direct(back, Eigen::Vector2d(0.4, 0.4), times);
  CHECK((p1.states - p2.states).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("duffing experiment decomposition: spectrum and field accuracy") {
  const RunConfig cfg = preset_config("duffing_paper");
  const Dataset ds = generate_dataset(cfg);
  const auto dec = decompose(ds, cfg.basis.resolve(ds), cfg.kernel,
                             cfg.feedback(), cfg.eps, cfg.eps_tilde);
  REQUIRE(dec.size() == 225);

  // the eigenvalues that dominate the reconstruction from x0 = (1,1) belong
  // to the stabilizing closed loop and have negative real parts
  const Eigen::VectorXcd phi0 =
      eigenfunctions_at(dec, Eigen::Vector2d(1.0, 1.0));
  std::vector<int> order(static_cast<std::size_t>(dec.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return (dec.modes.col(a) * phi0[a]).norm() >
           (dec.modes.col(b) * phi0[b]).norm();
  });
  for (int r = 0; r < 5; ++r) {
    CHECK(dec.eigenvalues[order[static_cast<std::size_t>(r)]].real() < 0.0);
  }

  // reconstructed closed-loop field on a grid; reference run gave 0.0042 and
  // 0.0046 relative RMS per dimension
  const FeedbackLaw law = cfg.feedback();
  const Eigen::MatrixXd grid = grid_initial_conditions(10, 1.5, 2);
  Eigen::Vector2d num = Eigen::Vector2d::Zero(), den = Eigen::Vector2d::Zero();
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    const Eigen::Vector2d x = grid.row(r).transpose();
    const Eigen::VectorXd fh = reconstruct_field(dec, x);
    const Eigen::VectorXd ft = duffing_rhs(x, law.evaluate(x));
    num += (fh - ft).cwiseAbs2();
    den += ft.cwiseAbs2();
  }
  CHECK(std::sqrt(num[0] / den[0]) <= 0.01);
  CHECK(std::sqrt(num[1] / den[1]) <= 0.01);
}

TEST_CASE("linear closed loop: spectral prediction against the matrix exponential") {
  // xdot = A x + B u with feedback u = K x
  Eigen::MatrixXd a(2, 2), b(2, 1), kgain(1, 2);
  a << 0.0, 1.0, -2.0, -3.0;
  b << 0.0, 1.0;
  kgain << -1.0, -1.0;
  const LinearSystem sys{a, b};
  const ControlRhs rhs = [&sys](const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u) {
    return sys.rhs(x, u);
  };

  Dataset ds;
  ds.state_dim = 2;
  ds.control_dim = 1;
  const Eigen::MatrixXd ics = grid_initial_conditions(6, 1.0, 2);
  for (Eigen::Index i = 0; i < ics.rows(); ++i) {
    const auto sig = sinusoid_excitation(1, 3, -1.0, 1.0, 0.25, 1.25, 0,
                                         static_cast<std::uint64_t>(i));
    ds.trajectories.push_back(
        simulate_openloop(rhs, ics.row(i).transpose(), sig, 1.0, 20.0, 1e-3));
  }

  const auto dec =
      decompose(ds, BasisSpec::kernel_basis(ics), gaussian_config(15.0),
                FeedbackLaw::linear(kgain), 1e-6, 1e-6);

  const Eigen::MatrixXd acl = a + b * kgain;
  const Eigen::Vector2d x0(1.0, 0.0);
  const int nt = 21;
  Prediction truth;
  truth.times = Eigen::VectorXd::LinSpaced(nt, 0.0, 1.0);
  truth.states.resize(nt, 2);
  for (int k = 0; k < nt; ++k) {
    truth.states.row(k) = ((acl * truth.times[k]).exp() * x0).transpose();
  }

  const auto direct = predict_direct(dec, x0, truth.times);
  const auto rep = relative_rms(direct, truth);
  CHECK(rep.values.maxCoeff() < 0.10);

  // reconstructed field at a sample point vs the closed-loop linear field
  const Eigen::VectorXd fh = reconstruct_field(dec, x0);
  const Eigen::VectorXd ft = acl * x0;
  CHECK((fh - ft).norm() <= 0.05 * ft.norm());
}
