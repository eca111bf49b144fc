#ifndef CLDMD_CLI_HPP
#define CLDMD_CLI_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "cldmd/experiment.hpp"

namespace cldmd::cli {

/// Exit codes shared with the command-line tool.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_numeric_failure = 3;
inline constexpr int exit_divergence = 4;

/// Generates the configured open-loop dataset; writes trajectory CSVs, the
/// manifest and a generation log under out_dir. Returns the manifest path.
std::filesystem::path cmd_simulate(const RunConfig& config,
                                   const std::filesystem::path& out_dir);

struct DecomposeOptions {
  std::optional<std::filesystem::path> dataset_manifest;
  std::optional<std::filesystem::path> dump_matrices_dir;
};

/// Runs the decomposition pipeline and writes decomposition.json plus a
/// plain-text summary (eigenvalue table, Gram conditions, identity
/// reconstruction residual). Returns the decomposition path.
std::filesystem::path cmd_decompose(const RunConfig& config,
                                    const std::filesystem::path& out_dir,
                                    const DecomposeOptions& options = {});

struct PredictOptions {
  std::optional<std::string> mode;           // direct | indirect | both
  std::optional<Eigen::VectorXd> x0;
  std::optional<double> horizon;
  std::optional<double> step;
  int top_modes = 0;  // 0 = use every eigenpair in the direct sum
  bool compare_truth = false;
};

struct PredictOutputs {
  std::filesystem::path metrics;
  std::optional<std::filesystem::path> direct_csv;
  std::optional<std::filesystem::path> indirect_csv;
  std::optional<std::filesystem::path> truth_csv;
};

PredictOutputs cmd_predict(const RunConfig& config,
                           const std::filesystem::path& decomposition_file,
                           const std::filesystem::path& out_dir,
                           const PredictOptions& options = {});

struct FieldOptions {
  int grid_res = 50;
  std::optional<double> half_width;
};

/// Samples the reconstructed closed-loop field on a regular grid and writes
/// field.csv (coordinates, reconstructed components, true components,
/// componentwise absolute error).
std::filesystem::path cmd_field(const RunConfig& config,
                                const std::filesystem::path& decomposition_file,
                                const std::filesystem::path& out_dir,
                                const FieldOptions& options = {});

/// Full argv entry point; maps errors onto the exit codes above.
int run_main(int argc, char** argv);

}  // namespace cldmd::cli

#endif
