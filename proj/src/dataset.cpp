#include "cldmd/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "cldmd/errors.hpp"

namespace cldmd {

void SampledTrajectory::validate(const std::string& label) const {
  if (states.rows() < 2) {
    throw schema_error(label + ": trajectory needs at least 2 samples");
  }
  if (controls.rows() != states.rows()) {
    throw schema_error(label + ": state and control row counts differ");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw schema_error(label + ": sample step must be positive");
  }
  if (!std::isfinite(t0)) {
    throw schema_error(label + ": start time must be finite");
  }
  for (Eigen::Index r = 0; r < states.rows(); ++r) {
    if (!states.row(r).allFinite() || !controls.row(r).allFinite()) {
      std::ostringstream os;
      os << label << ": non-finite entry at row " << r;
      throw schema_error(os.str());
    }
  }
}

void Dataset::validate() const {
  if (trajectories.empty()) {
    throw schema_error("dataset: needs at least one trajectory");
  }
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    std::ostringstream label;
    label << "trajectory " << i;
    const auto& tr = trajectories[i];
    tr.validate(label.str());
    if (tr.state_dim() != state_dim || tr.control_dim() != control_dim) {
      std::ostringstream os;
      os << label.str() << ": dimensions " << tr.state_dim() << "/"
         << tr.control_dim() << " do not match dataset " << state_dim << "/"
         << control_dim;
      throw schema_error(os.str());
    }
  }
}

FeedbackLaw FeedbackLaw::linear(Eigen::MatrixXd gain) {
  if (!gain.allFinite()) {
    throw std::invalid_argument("FeedbackLaw::linear: gain must be finite");
  }
  FeedbackLaw law;
  law.is_linear_ = true;
  law.control_dim_ = static_cast<int>(gain.rows());
  law.gain_ = std::move(gain);
  return law;
}

FeedbackLaw FeedbackLaw::tabulated(
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn,
    int control_dim) {
  if (!fn) {
    throw std::invalid_argument("FeedbackLaw::tabulated: empty callback");
  }
  FeedbackLaw law;
  law.is_linear_ = false;
  law.control_dim_ = control_dim;
  law.fn_ = std::move(fn);
  return law;
}

FeedbackLaw FeedbackLaw::zero(int control_dim, int state_dim) {
  return linear(Eigen::MatrixXd::Zero(control_dim, state_dim));
}

Eigen::VectorXd FeedbackLaw::evaluate(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (is_linear_) {
    if (x.size() != gain_.cols()) {
      std::ostringstream os;
      os << "FeedbackLaw: state dimension " << x.size()
         << " does not match gain columns " << gain_.cols();
      throw std::invalid_argument(os.str());
    }
    return gain_ * x;
  }
  Eigen::VectorXd u = fn_(x);
  if (u.size() != control_dim_) {
    throw std::invalid_argument(
        "FeedbackLaw: callback returned wrong control dimension");
  }
  return u;
}

const Eigen::MatrixXd& FeedbackLaw::gain() const {
  if (!is_linear_) {
    throw std::logic_error("FeedbackLaw: no gain on a tabulated law");
  }
  return gain_;
}

Eigen::VectorXd evaluate_feedback(const FeedbackLaw& law,
                                  const Eigen::Ref<const Eigen::VectorXd>& x) {
  return law.evaluate(x);
}

BasisSpec BasisSpec::kernel_basis(Eigen::MatrixXd centers) {
  BasisSpec b;
  b.kind = Kind::kernel_centers;
  b.centers = std::move(centers);
  return b;
}

BasisSpec BasisSpec::data_centric(std::vector<int> indices) {
  BasisSpec b;
  b.kind = Kind::data_centric;
  b.indices = std::move(indices);
  return b;
}

BasisSpec BasisSpec::data_centric_all(std::size_t m) {
  std::vector<int> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = static_cast<int>(i);
  return data_centric(std::move(idx));
}

void BasisSpec::validate(const Dataset& ds) const {
  if (kind == Kind::kernel_centers) {
    if (centers.rows() < 1) {
      throw schema_error("basis: needs at least one center");
    }
    if (centers.cols() != ds.state_dim) {
      throw schema_error("basis: center dimension does not match state_dim");
    }
    if (!centers.allFinite()) {
      throw schema_error("basis: centers must be finite");
    }
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < centers.rows(); ++j) {
        if ((centers.row(i) - centers.row(j)).norm() <= 0.0) {
          std::ostringstream os;
          os << "basis: centers " << i << " and " << j << " coincide";
          throw schema_error(os.str());
        }
      }
    }
  } else {
    if (indices.empty()) {
      throw schema_error("basis: needs at least one trajectory index");
    }
    std::vector<bool> seen(ds.size(), false);
    for (int idx : indices) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= ds.size()) {
        std::ostringstream os;
        os << "basis: trajectory index " << idx << " out of range [0, "
           << ds.size() << ")";
        throw schema_error(os.str());
      }
      if (seen[static_cast<std::size_t>(idx)]) {
        std::ostringstream os;
        os << "basis: duplicate trajectory index " << idx;
        throw schema_error(os.str());
      }
      seen[static_cast<std::size_t>(idx)] = true;
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    }
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw schema_error(where + ": cannot parse numeric field '" + s + "'");
  }
}

SampledTrajectory load_trajectory_csv(const std::filesystem::path& path,
                                      int state_dim, int control_dim) {
  std::ifstream in(path);
  if (!in) {
    throw io_error("cannot open trajectory file " + path.string());
  }
  const std::string name = path.filename().string();

  std::string line;
  if (!std::getline(in, line)) {
    throw schema_error(name + ": empty file");
  }
  const auto header = split_csv_line(line);
  const std::size_t expected_cols =
      1 + static_cast<std::size_t>(state_dim) +
      static_cast<std::size_t>(control_dim);
  if (header.size() != expected_cols || header[0] != "t") {
    std::ostringstream os;
    os << name << ": expected header t,x1,...,x" << state_dim << ",u1,...,u"
       << control_dim;
    throw schema_error(os.str());
  }

  std::vector<double> times;
  std::vector<Eigen::VectorXd> xs, us;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    std::ostringstream where;
    where << name << " row " << row;
    if (fields.size() != expected_cols) {
      throw schema_error(where.str() + ": wrong column count");
    }
    times.push_back(parse_double(fields[0], where.str()));
    Eigen::VectorXd x(state_dim), u(control_dim);
    for (int d = 0; d < state_dim; ++d) {
      x[d] = parse_double(fields[1 + static_cast<std::size_t>(d)], where.str());
    }
    for (int d = 0; d < control_dim; ++d) {
      u[d] = parse_double(
          fields[1 + static_cast<std::size_t>(state_dim + d)], where.str());
    }
    if (!std::isfinite(times.back()) || !x.allFinite() || !u.allFinite()) {
      throw schema_error(where.str() + ": non-finite entry");
    }
    xs.push_back(std::move(x));
    us.push_back(std::move(u));
    ++row;
  }
  if (times.size() < 2) {
    throw schema_error(name + ": needs at least 2 sample rows");
  }

  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) {
    throw schema_error(name + ": time column is not increasing");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double step = times[k] - times[k - 1];
    if (std::abs(step - dt) > 1e-6 * dt) {
      std::ostringstream os;
      os << name << " row " << k << ": non-uniform time grid (step " << step
         << " vs " << dt << ")";
      throw schema_error(os.str());
    }
  }

  SampledTrajectory tr;
  tr.t0 = times[0];
  tr.dt = dt;
  tr.states.resize(static_cast<Eigen::Index>(xs.size()), state_dim);
  tr.controls.resize(static_cast<Eigen::Index>(us.size()), control_dim);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    tr.states.row(static_cast<Eigen::Index>(k)) = xs[k].transpose();
    tr.controls.row(static_cast<Eigen::Index>(k)) = us[k].transpose();
  }
  return tr;
}

void write_double(std::FILE* f, double v) {
  std::fprintf(f, "%.17g", v);
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw io_error("cannot open manifest " + manifest_path.string());
  }
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw schema_error("manifest " + manifest_path.string() + ": " + e.what());
  }

  Dataset ds;
  try {
    ds.state_dim = manifest.at("state_dim").get<int>();
    ds.control_dim = manifest.at("control_dim").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw schema_error(std::string("manifest: missing dimensions: ") + e.what());
  }
  if (ds.state_dim < 1 || ds.control_dim < 1) {
    throw schema_error("manifest: dimensions must be positive");
  }
  if (!manifest.contains("files") || !manifest["files"].is_array() ||
      manifest["files"].empty()) {
    throw schema_error("manifest: needs a non-empty 'files' array");
  }

  const auto base = manifest_path.parent_path();
  for (const auto& f : manifest["files"]) {
    const auto path = base / f.get<std::string>();
    if (!std::filesystem::exists(path)) {
      throw io_error("missing trajectory file " + path.string());
    }
    ds.trajectories.push_back(
        load_trajectory_csv(path, ds.state_dim, ds.control_dim));
  }
  ds.validate();
  return ds;
}

std::filesystem::path save_dataset(const Dataset& ds,
                                   const std::filesystem::path& dir) {
  ds.validate();
  std::filesystem::create_directories(dir);

  nlohmann::ordered_json manifest;
  manifest["state_dim"] = ds.state_dim;
  manifest["control_dim"] = ds.control_dim;
  auto files = nlohmann::ordered_json::array();

  for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%03zu.csv", i);
    const auto path = dir / name;
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) {
      throw io_error("cannot write trajectory file " + path.string());
    }
    std::fprintf(f, "t");
    for (int d = 1; d <= ds.state_dim; ++d) std::fprintf(f, ",x%d", d);
    for (int d = 1; d <= ds.control_dim; ++d) std::fprintf(f, ",u%d", d);
    std::fprintf(f, "\n");

    const auto& tr = ds.trajectories[i];
    for (Eigen::Index k = 0; k < tr.n_samples(); ++k) {
      write_double(f, tr.t0 + static_cast<double>(k) * tr.dt);
      for (Eigen::Index d = 0; d < tr.states.cols(); ++d) {
        std::fputc(',', f);
        write_double(f, tr.states(k, d));
      }
      for (Eigen::Index d = 0; d < tr.controls.cols(); ++d) {
        std::fputc(',', f);
        write_double(f, tr.controls(k, d));
      }
      std::fputc('\n', f);
    }
    std::fclose(f);
    files.push_back(name);
  }

  manifest["files"] = files;
  const auto manifest_path = dir / "manifest.json";
  std::ofstream out(manifest_path);
  if (!out) {
    throw io_error("cannot write manifest " + manifest_path.string());
  }
  out << manifest.dump(2) << "\n";
  return manifest_path;
}

}  // namespace cldmd
