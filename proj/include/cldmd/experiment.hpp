#ifndef CLDMD_EXPERIMENT_HPP
#define CLDMD_EXPERIMENT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cldmd/dataset.hpp"
#include "cldmd/decomposition.hpp"
#include "cldmd/systems.hpp"

namespace cldmd {

/// Which benchmark system a config refers to.
struct SystemSpec {
  enum class Name { duffing, twolink, linear };
  Name name = Name::duffing;
  Eigen::MatrixXd linear_a;  // linear only
  Eigen::MatrixXd linear_b;

  int state_dim() const;
  int control_dim() const;
  ControlRhs rhs() const;
};

struct InitialConditionSpec {
  enum class Kind { grid, halton, list };
  Kind kind = Kind::grid;
  int per_side = 2;        // grid
  int count = 1;           // halton
  double half_width = 1.0;
  Eigen::MatrixXd points;  // list

  Eigen::MatrixXd generate(int dim) const;
};

struct SignalSpec {
  enum class Kind { zero, sinusoid, piecewise };
  Kind kind = Kind::sinusoid;
  // sinusoid family
  int components = 3;
  double amp_lo = -1.0, amp_hi = 1.0;
  double freq_lo_hz = 0.25, freq_hi_hz = 1.25;
  // piecewise family
  std::vector<Eigen::VectorXd> levels;
  double dwell = 0.5;

  ExcitationSignal instantiate(int channels, std::uint64_t seed,
                               std::uint64_t trajectory_index) const;
};

struct SimulateSpec {
  InitialConditionSpec initial_conditions;
  SignalSpec signal;
  double duration = 1.0;
  double sample_hz = 20.0;
  double internal_step = 1e-3;
  std::uint64_t seed = 0;
};

struct BasisConfig {
  enum class Kind { data_centric, kernel_grid, kernel_centers };
  Kind kind = Kind::data_centric;
  std::vector<int> indices;  // data_centric; empty = all trajectories
  int per_side = 2;          // kernel_grid
  double half_width = 1.0;
  Eigen::MatrixXd centers;   // kernel_centers

  BasisSpec resolve(const Dataset& ds) const;
};

struct PredictSpec {
  Eigen::VectorXd x0;
  double horizon = 1.0;
  double step = 1e-3;
  std::string mode = "both";  // direct | indirect | both
};

/// One experiment end to end: data source, kernel, basis, regularization,
/// feedback law and prediction settings. Parsed from a JSON config file.
struct RunConfig {
  SystemSpec system;
  SimulateSpec simulate;
  KernelConfig kernel;
  BasisConfig basis;
  double eps = 1e-6;
  double eps_tilde = 1e-6;
  Eigen::MatrixXd feedback_gain;
  PredictSpec predict;
  std::optional<std::string> dataset_manifest;

  FeedbackLaw feedback() const { return FeedbackLaw::linear(feedback_gain); }

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

/// Built-in experiment presets (duffing_paper, twolink_paper, linear_oracle,
/// duffing_wide, twolink_dense). Matching .cfg files ship under configs/.
const std::vector<std::string>& preset_names();
std::string preset_text(const std::string& name);
RunConfig preset_config(const std::string& name);

/// Generates the open-loop training set described by config.simulate.
/// Per-trajectory signals are keyed by (seed, trajectory index), so the
/// result is independent of generation order.
Dataset generate_dataset(const RunConfig& config);

}  // namespace cldmd

#endif
