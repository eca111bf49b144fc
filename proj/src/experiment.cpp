#include "cldmd/experiment.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cldmd/errors.hpp"
#include "cldmd/gramian.hpp"

namespace cldmd {

int SystemSpec::state_dim() const {
  switch (name) {
    case Name::duffing: return 2;
    case Name::twolink: return 4;
    case Name::linear: return static_cast<int>(linear_a.rows());
  }
  return 0;
}

int SystemSpec::control_dim() const {
  switch (name) {
    case Name::duffing: return 1;
    case Name::twolink: return 2;
    case Name::linear: return static_cast<int>(linear_b.cols());
  }
  return 0;
}

ControlRhs SystemSpec::rhs() const {
  switch (name) {
    case Name::duffing:
      return [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return duffing_rhs(x, u);
      };
    case Name::twolink:
      return [p = TwoLinkParams{}](const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) {
        return twolink_rhs(p, x, u);
      };
    case Name::linear:
      return [sys = LinearSystem{linear_a, linear_b}](
                 const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return sys.rhs(x, u);
      };
  }
  throw std::logic_error("SystemSpec: unknown system");
}

Eigen::MatrixXd InitialConditionSpec::generate(int dim) const {
  switch (kind) {
    case Kind::grid: return grid_initial_conditions(per_side, half_width, dim);
    case Kind::halton: return halton_points(count, dim, half_width);
    case Kind::list:
      if (points.cols() != dim) {
        throw schema_error("config: initial condition list has wrong dimension");
      }
      return points;
  }
  throw std::logic_error("InitialConditionSpec: unknown kind");
}

ExcitationSignal SignalSpec::instantiate(int channels, std::uint64_t seed,
                                         std::uint64_t trajectory_index) const {
  switch (kind) {
    case Kind::zero: return ExcitationSignal::zero_signal(channels);
    case Kind::sinusoid:
      return sinusoid_excitation(channels, components, amp_lo, amp_hi,
                                 freq_lo_hz, freq_hi_hz, seed,
                                 trajectory_index);
    case Kind::piecewise: return ExcitationSignal::piecewise(levels, dwell);
  }
  throw std::logic_error("SignalSpec: unknown kind");
}

BasisSpec BasisConfig::resolve(const Dataset& ds) const {
  switch (kind) {
    case Kind::data_centric:
      return indices.empty() ? BasisSpec::data_centric_all(ds.size())
                             : BasisSpec::data_centric(indices);
    case Kind::kernel_grid:
      return BasisSpec::kernel_basis(
          grid_initial_conditions(per_side, half_width, ds.state_dim));
    case Kind::kernel_centers: return BasisSpec::kernel_basis(centers);
  }
  throw std::logic_error("BasisConfig: unknown kind");
}

namespace {

using nlohmann::json;

Eigen::MatrixXd json_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j.at(0).is_array()) {
    throw schema_error("config: " + what + " must be an array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw schema_error("config: " + what + " has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

Eigen::VectorXd json_vector(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw schema_error("config: " + what + " must be a non-empty array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
  }
  return v;
}

SystemSpec parse_system(const json& j) {
  SystemSpec sys;
  const auto name = j.at("name").get<std::string>();
  if (name == "duffing") {
    sys.name = SystemSpec::Name::duffing;
  } else if (name == "twolink") {
    sys.name = SystemSpec::Name::twolink;
  } else if (name == "linear") {
    sys.name = SystemSpec::Name::linear;
    sys.linear_a = json_matrix(j.at("A"), "system.A");
    sys.linear_b = json_matrix(j.at("B"), "system.B");
    if (sys.linear_a.rows() != sys.linear_a.cols() ||
        sys.linear_b.rows() != sys.linear_a.rows()) {
      throw schema_error("config: linear system shapes inconsistent");
    }
  } else {
    throw schema_error("config: unknown system '" + name + "'");
  }
  return sys;
}

InitialConditionSpec parse_ics(const json& j) {
  InitialConditionSpec ic;
  const auto type = j.at("type").get<std::string>();
  if (type == "grid") {
    ic.kind = InitialConditionSpec::Kind::grid;
    ic.per_side = j.at("per_side").get<int>();
    ic.half_width = j.at("half_width").get<double>();
  } else if (type == "halton") {
    ic.kind = InitialConditionSpec::Kind::halton;
    ic.count = j.at("count").get<int>();
    ic.half_width = j.at("half_width").get<double>();
  } else if (type == "list") {
    ic.kind = InitialConditionSpec::Kind::list;
    ic.points = json_matrix(j.at("points"), "initial_conditions.points");
  } else {
    throw schema_error("config: unknown initial condition type '" + type + "'");
  }
  return ic;
}

SignalSpec parse_signal(const json& j) {
  SignalSpec sig;
  const auto type = j.at("type").get<std::string>();
  if (type == "zero") {
    sig.kind = SignalSpec::Kind::zero;
  } else if (type == "sinusoid") {
    sig.kind = SignalSpec::Kind::sinusoid;
    sig.components = j.value("components", 3);
    if (j.contains("amplitude_range")) {
      const auto r = json_vector(j["amplitude_range"], "amplitude_range");
      if (r.size() != 2) throw schema_error("config: amplitude_range needs 2 values");
      sig.amp_lo = r[0];
      sig.amp_hi = r[1];
    }
    if (j.contains("frequency_range_hz")) {
      const auto r = json_vector(j["frequency_range_hz"], "frequency_range_hz");
      if (r.size() != 2) throw schema_error("config: frequency_range_hz needs 2 values");
      sig.freq_lo_hz = r[0];
      sig.freq_hi_hz = r[1];
    }
  } else if (type == "piecewise_constant") {
    sig.kind = SignalSpec::Kind::piecewise;
    sig.dwell = j.at("dwell").get<double>();
    for (const auto& level : j.at("levels")) {
      sig.levels.push_back(json_vector(level, "signal.levels"));
    }
  } else {
    throw schema_error("config: unknown signal type '" + type + "'");
  }
  return sig;
}

BasisConfig parse_basis(const json& j) {
  BasisConfig b;
  const auto type = j.at("type").get<std::string>();
  if (type == "data_centric") {
    b.kind = BasisConfig::Kind::data_centric;
    if (j.contains("indices")) {
      for (const auto& v : j["indices"]) b.indices.push_back(v.get<int>());
    }
  } else if (type == "kernel") {
    if (j.contains("grid")) {
      b.kind = BasisConfig::Kind::kernel_grid;
      b.per_side = j["grid"].at("per_side").get<int>();
      b.half_width = j["grid"].at("half_width").get<double>();
    } else {
      b.kind = BasisConfig::Kind::kernel_centers;
      b.centers = json_matrix(j.at("centers"), "basis.centers");
    }
  } else {
    throw schema_error("config: unknown basis type '" + type + "'");
  }
  return b;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw schema_error(std::string("config: JSON parse failed: ") + e.what());
  }

  try {
    RunConfig cfg;
    cfg.system = parse_system(j.at("system"));

    if (j.contains("simulate")) {
      const auto& s = j["simulate"];
      cfg.simulate.initial_conditions = parse_ics(s.at("initial_conditions"));
      cfg.simulate.signal = parse_signal(s.at("signal"));
      cfg.simulate.duration = s.at("duration").get<double>();
      cfg.simulate.sample_hz = s.at("sample_hz").get<double>();
      cfg.simulate.internal_step = s.at("internal_step").get<double>();
      cfg.simulate.seed = s.value("seed", std::uint64_t{0});
      if (!(cfg.simulate.duration > 0.0) || !(cfg.simulate.sample_hz > 0.0) ||
          !(cfg.simulate.internal_step > 0.0)) {
        throw schema_error("config: simulate fields must be positive");
      }
    }

    const auto& k = j.at("kernel");
    if (k.at("type").get<std::string>() != "gaussian") {
      throw schema_error("config: only the gaussian kernel is supported");
    }
    cfg.kernel.width = k.at("width").get<double>();
    if (!(cfg.kernel.width > 0.0)) {
      throw schema_error("config: kernel width must be positive");
    }
    if (j.contains("operator")) {
      const auto type = j["operator"].at("type").get<std::string>();
      if (type == "matrix") {
        cfg.kernel.coupling = json_matrix(j["operator"].at("A"), "operator.A");
      } else if (type != "diagonal") {
        throw schema_error("config: unknown operator type '" + type + "'");
      }
    }

    if (j.contains("basis")) cfg.basis = parse_basis(j["basis"]);
    if (j.contains("regularization")) {
      cfg.eps = j["regularization"].value("eps", 1e-6);
      cfg.eps_tilde = j["regularization"].value("eps_tilde", 1e-6);
      if (cfg.eps < 0.0 || cfg.eps_tilde < 0.0) {
        throw schema_error("config: regularization must be nonnegative");
      }
    }

    cfg.feedback_gain = json_matrix(j.at("feedback").at("gain"), "feedback.gain");
    if (cfg.feedback_gain.cols() != cfg.system.state_dim() ||
        cfg.feedback_gain.rows() != cfg.system.control_dim()) {
      std::ostringstream os;
      os << "config: feedback gain must be " << cfg.system.control_dim() << "x"
         << cfg.system.state_dim() << ", got " << cfg.feedback_gain.rows()
         << "x" << cfg.feedback_gain.cols();
      throw schema_error(os.str());
    }

    if (j.contains("prediction")) {
      const auto& p = j["prediction"];
      cfg.predict.x0 = json_vector(p.at("x0"), "prediction.x0");
      cfg.predict.horizon = p.value("horizon", 1.0);
      cfg.predict.step = p.value("step", 1e-3);
      cfg.predict.mode = p.value("mode", std::string("both"));
      if (cfg.predict.mode != "direct" && cfg.predict.mode != "indirect" &&
          cfg.predict.mode != "both") {
        throw schema_error("config: prediction.mode must be direct|indirect|both");
      }
      if (!(cfg.predict.horizon > 0.0) || !(cfg.predict.step > 0.0)) {
        throw schema_error("config: prediction horizon and step must be positive");
      }
    } else {
      cfg.predict.x0 = Eigen::VectorXd::Zero(cfg.system.state_dim());
    }

    if (j.contains("dataset") && j["dataset"].contains("manifest")) {
      cfg.dataset_manifest = j["dataset"]["manifest"].get<std::string>();
    }
    return cfg;
  } catch (const json::exception& e) {
    throw schema_error(std::string("config: ") + e.what());
  }
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw io_error("cannot open config file " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

namespace {

const std::map<std::string, std::string>& preset_map() {
  static const std::map<std::string, std::string> presets = {
      {"duffing_paper", R"cfg({
  "system": {"name": "duffing"},
  "simulate": {
    "initial_conditions": {"type": "grid", "per_side": 15, "half_width": 1.5},
    "signal": {"type": "sinusoid", "components": 3, "amplitude_range": [-1.0, 1.0], "frequency_range_hz": [0.25, 1.25]},
    "duration": 1.0,
    "sample_hz": 20.0,
    "internal_step": 0.001,
    "seed": 0
  },
  "kernel": {"type": "gaussian", "width": 15.0},
  "operator": {"type": "diagonal"},
  "basis": {"type": "data_centric"},
  "regularization": {"eps": 1e-06, "eps_tilde": 1e-06},
  "feedback": {"gain": [[-2.0, -2.0]]},
  "prediction": {"x0": [1.0, 1.0], "horizon": 1.0, "step": 0.001, "mode": "both"}
}
)cfg"},
      {"duffing_wide", R"cfg({
  "system": {"name": "duffing"},
  "simulate": {
    "initial_conditions": {"type": "grid", "per_side": 13, "half_width": 1.5},
    "signal": {"type": "sinusoid", "components": 3, "amplitude_range": [-1.0, 1.0], "frequency_range_hz": [0.25, 1.25]},
    "duration": 1.0,
    "sample_hz": 20.0,
    "internal_step": 0.001,
    "seed": 0
  },
  "kernel": {"type": "gaussian", "width": 1000.0},
  "operator": {"type": "diagonal"},
  "basis": {"type": "data_centric"},
  "regularization": {"eps": 1e-06, "eps_tilde": 1e-06},
  "feedback": {"gain": [[-2.0, -2.0]]},
  "prediction": {"x0": [1.0, 1.0], "horizon": 1.0, "step": 0.001, "mode": "both"}
}
)cfg"},
      {"twolink_paper", R"cfg({
  "system": {"name": "twolink"},
  "simulate": {
    "initial_conditions": {"type": "halton", "count": 100, "half_width": 0.5},
    "signal": {"type": "sinusoid", "components": 3, "amplitude_range": [-1.0, 1.0], "frequency_range_hz": [0.25, 1.25]},
    "duration": 1.0,
    "sample_hz": 10.0,
    "internal_step": 0.0001,
    "seed": 0
  },
  "kernel": {"type": "gaussian", "width": 10000.0},
  "operator": {"type": "diagonal"},
  "basis": {"type": "data_centric"},
  "regularization": {"eps": 1e-06, "eps_tilde": 1e-06},
  "feedback": {"gain": [[-5.0, -5.0, -5.0, -5.0], [-15.0, -15.0, -15.0, -15.0]]},
  "prediction": {"x0": [1.0, -1.0, 1.0, -1.0], "horizon": 1.0, "step": 0.001, "mode": "both"}
}
)cfg"},
      {"twolink_dense", R"cfg({
  "system": {"name": "twolink"},
  "simulate": {
    "initial_conditions": {"type": "halton", "count": 400, "half_width": 0.5},
    "signal": {"type": "sinusoid", "components": 3, "amplitude_range": [-1.0, 1.0], "frequency_range_hz": [0.25, 1.25]},
    "duration": 1.0,
    "sample_hz": 10.0,
    "internal_step": 0.0001,
    "seed": 0
  },
  "kernel": {"type": "gaussian", "width": 10000.0},
  "operator": {"type": "diagonal"},
  "basis": {"type": "data_centric"},
  "regularization": {"eps": 1e-06, "eps_tilde": 1e-05},
  "feedback": {"gain": [[-5.0, -5.0, -5.0, -5.0], [-15.0, -15.0, -15.0, -15.0]]},
  "prediction": {"x0": [1.0, -1.0, 1.0, -1.0], "horizon": 1.0, "step": 0.001, "mode": "both"}
}
)cfg"},
      {"linear_oracle", R"cfg({
  "system": {"name": "linear", "A": [[0.0, 1.0], [-2.0, -3.0]], "B": [[0.0], [1.0]]},
  "simulate": {
    "initial_conditions": {"type": "grid", "per_side": 7, "half_width": 1.0},
    "signal": {"type": "sinusoid", "components": 3, "amplitude_range": [-1.0, 1.0], "frequency_range_hz": [0.25, 1.25]},
    "duration": 1.0,
    "sample_hz": 20.0,
    "internal_step": 0.001,
    "seed": 0
  },
  "kernel": {"type": "gaussian", "width": 15.0},
  "operator": {"type": "diagonal"},
  "basis": {"type": "kernel", "grid": {"per_side": 7, "half_width": 1.0}},
  "regularization": {"eps": 1e-06, "eps_tilde": 1e-06},
  "feedback": {"gain": [[-1.0, -1.0]]},
  "prediction": {"x0": [1.0, 0.0], "horizon": 1.0, "step": 0.001, "mode": "both"}
}
)cfg"},
  };
  return presets;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, text] : preset_map()) out.push_back(name);
    return out;
  }();
  return names;
}

std::string preset_text(const std::string& name) {
  const auto& presets = preset_map();
  auto it = presets.find(name);
  if (it == presets.end()) {
    std::ostringstream os;
    os << "unknown preset '" << name << "'; available:";
    for (const auto& n : preset_names()) os << " " << n;
    throw schema_error(os.str());
  }
  return it->second;
}

RunConfig preset_config(const std::string& name) {
  return RunConfig::from_json_text(preset_text(name));
}

Dataset generate_dataset(const RunConfig& config) {
  const int n = config.system.state_dim();
  const int m = config.system.control_dim();
  const ControlRhs rhs = config.system.rhs();
  const Eigen::MatrixXd ics = config.simulate.initial_conditions.generate(n);

  Dataset ds;
  ds.state_dim = n;
  ds.control_dim = m;
  ds.trajectories.resize(static_cast<std::size_t>(ics.rows()));

  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::atomic<Eigen::Index> next{0};
  const int workers =
      std::max(1, std::min<int>(num_threads(), static_cast<int>(ics.rows())));
  auto worker = [&]() {
    for (Eigen::Index i = next.fetch_add(1); i < ics.rows();
         i = next.fetch_add(1)) {
      try {
        const ExcitationSignal sig = config.simulate.signal.instantiate(
            m, config.simulate.seed, static_cast<std::uint64_t>(i));
        ds.trajectories[static_cast<std::size_t>(i)] = simulate_openloop(
            rhs, ics.row(i).transpose(), sig, config.simulate.duration,
            config.simulate.sample_hz, config.simulate.internal_step);
      } catch (const divergence_error& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) {
          std::ostringstream os;
          os << "trajectory " << i << ": " << e.what();
          first_error =
              std::make_exception_ptr(divergence_error(os.str(), e.time));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ds.validate();
  return ds;
}

}  // namespace cldmd
