#include "cldmd/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cldmd/errors.hpp"
#include "cldmd/gramian.hpp"

namespace cldmd::cli {

namespace {

void write_matrix_csv(const Eigen::MatrixXd& m,
                      const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw io_error("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) std::fputc(',', f);
      std::fprintf(f, "%.17g", m(i, j));
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

void write_prediction_csv(const Prediction& pred,
                          const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw io_error("cannot write " + path.string());
  std::fprintf(f, "t");
  for (Eigen::Index d = 1; d <= pred.states.cols(); ++d) {
    std::fprintf(f, ",x%lld", static_cast<long long>(d));
  }
  std::fputc('\n', f);
  for (Eigen::Index k = 0; k < pred.times.size(); ++k) {
    std::fprintf(f, "%.17g", pred.times[k]);
    for (Eigen::Index d = 0; d < pred.states.cols(); ++d) {
      std::fprintf(f, ",%.17g", pred.states(k, d));
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

Dataset dataset_for(const RunConfig& config,
                    const std::optional<std::filesystem::path>& override_path) {
  if (override_path) return load_dataset(*override_path);
  if (config.dataset_manifest) return load_dataset(*config.dataset_manifest);
  return generate_dataset(config);
}

Eigen::VectorXd prediction_times(double horizon, double step) {
  const auto steps = static_cast<Eigen::Index>(std::llround(horizon / step));
  Eigen::VectorXd times(steps + 1);
  for (Eigen::Index k = 0; k <= steps; ++k) {
    times[k] = static_cast<double>(k) * step;
  }
  return times;
}

nlohmann::ordered_json rms_to_json(const RmsReport& report) {
  nlohmann::ordered_json values = nlohmann::ordered_json::array();
  nlohmann::ordered_json flags = nlohmann::ordered_json::array();
  for (Eigen::Index d = 0; d < report.values.size(); ++d) {
    values.push_back(report.values[d]);
    flags.push_back(
        static_cast<bool>(report.absolute[static_cast<std::size_t>(d)]));
  }
  nlohmann::ordered_json out;
  out["per_dimension"] = std::move(values);
  out["absolute_flag"] = std::move(flags);
  return out;
}

}  // namespace

std::filesystem::path cmd_simulate(const RunConfig& config,
                                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto log_path = out_dir / "generation_log.json";

  nlohmann::ordered_json log;
  log["seed"] = config.simulate.seed;
  log["duration"] = config.simulate.duration;
  log["sample_hz"] = config.simulate.sample_hz;
  log["internal_step"] = config.simulate.internal_step;

  Dataset ds;
  try {
    ds = generate_dataset(config);
  } catch (const divergence_error& e) {
    log["status"] = "failed";
    log["error"] = e.what();
    std::ofstream out(log_path);
    out << log.dump(2) << "\n";
    throw;
  }

  const auto manifest = save_dataset(ds, out_dir / "dataset");

  log["status"] = "ok";
  log["trajectory_count"] = ds.size();
  auto entries = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    nlohmann::ordered_json e;
    e["index"] = i;
    e["samples"] = ds.trajectories[i].n_samples();
    e["initial_state"] = std::vector<double>(
        ds.trajectories[i].states.row(0).begin(),
        ds.trajectories[i].states.row(0).end());
    entries.push_back(std::move(e));
  }
  log["trajectories"] = std::move(entries);
  std::ofstream out(log_path);
  if (!out) throw io_error("cannot write " + log_path.string());
  out << log.dump(2) << "\n";
  return manifest;
}

std::filesystem::path cmd_decompose(const RunConfig& config,
                                    const std::filesystem::path& out_dir,
                                    const DecomposeOptions& options) {
  std::filesystem::create_directories(out_dir);
  const Dataset ds = dataset_for(config, options.dataset_manifest);
  const BasisSpec basis = config.basis.resolve(ds);

  OperatorMatrices matrices;
  const Decomposition dec =
      decompose(ds, basis, config.kernel, config.feedback(), config.eps,
                config.eps_tilde, &matrices);

  if (options.dump_matrices_dir) {
    std::filesystem::create_directories(*options.dump_matrices_dir);
    write_matrix_csv(matrices.gram_control,
                     *options.dump_matrices_dir / "gram_control.csv");
    write_matrix_csv(matrices.gram_basis,
                     *options.dump_matrices_dir / "gram_basis.csv");
    write_matrix_csv(matrices.interaction_feedback,
                     *options.dump_matrices_dir / "interaction_feedback.csv");
    write_matrix_csv(matrices.interaction_liouville,
                     *options.dump_matrices_dir / "interaction_liouville.csv");
  }

  const auto dec_path = out_dir / "decomposition.json";
  save_decomposition(dec, dec_path);

  std::FILE* f = std::fopen((out_dir / "decompose_summary.txt").c_str(), "w");
  if (!f) throw io_error("cannot write decompose summary");
  std::fprintf(f, "trajectories: %zu\n", ds.size());
  std::fprintf(f, "basis size: %lld\n", static_cast<long long>(dec.size()));
  std::fprintf(f, "gram condition (control, regularized): %.6g\n",
               dec.diagnostics.gram_control_condition);
  std::fprintf(f, "gram condition (basis, regularized): %.6g\n",
               dec.diagnostics.gram_basis_condition);
  std::fprintf(f, "identity reconstruction residual (mean): %.6g\n",
               dec.diagnostics.identity_residual_mean);
  std::fprintf(f, "eigenvalues (re, im):\n");
  for (Eigen::Index j = 0; j < dec.size(); ++j) {
    std::fprintf(f, "  % .12e % .12e\n", dec.eigenvalues[j].real(),
                 dec.eigenvalues[j].imag());
  }
  std::fclose(f);
  return dec_path;
}

PredictOutputs cmd_predict(const RunConfig& config,
                           const std::filesystem::path& decomposition_file,
                           const std::filesystem::path& out_dir,
                           const PredictOptions& options) {
  std::filesystem::create_directories(out_dir);
  const Decomposition dec = load_decomposition(decomposition_file);

  const std::string mode = options.mode.value_or(config.predict.mode);
  if (mode != "direct" && mode != "indirect" && mode != "both") {
    throw schema_error("predict: mode must be direct|indirect|both");
  }
  const Eigen::VectorXd x0 = options.x0.value_or(config.predict.x0);
  const double horizon = options.horizon.value_or(config.predict.horizon);
  const double step = options.step.value_or(config.predict.step);
  if (x0.size() != dec.state_dim) {
    std::ostringstream os;
    os << "predict: x0 has dimension " << x0.size()
       << " but the decomposition state dimension is " << dec.state_dim;
    throw schema_error(os.str());
  }
  if (!(horizon > 0.0) || !(step > 0.0) || step > horizon) {
    throw schema_error("predict: need 0 < step <= horizon");
  }

  const Eigen::VectorXd times = prediction_times(horizon, step);

  PredictOutputs outputs;
  nlohmann::ordered_json metrics;
  std::optional<Prediction> direct, indirect, truth;

  if (mode == "direct" || mode == "both") {
    direct = predict_direct(dec, x0, times, options.top_modes);
    outputs.direct_csv = out_dir / "predict_direct.csv";
    write_prediction_csv(*direct, *outputs.direct_csv);
  }
  if (mode == "indirect" || mode == "both") {
    Prediction partial;
    try {
      indirect = predict_indirect(dec, x0, horizon, step, &partial);
    } catch (const divergence_error&) {
      // keep whatever was integrated before the escape
      outputs.indirect_csv = out_dir / "predict_indirect.csv";
      write_prediction_csv(partial, *outputs.indirect_csv);
      throw;
    }
    outputs.indirect_csv = out_dir / "predict_indirect.csv";
    write_prediction_csv(*indirect, *outputs.indirect_csv);
  }

  if (options.compare_truth) {
    const SampledTrajectory tr =
        simulate_closedloop(config.system.rhs(), x0, config.feedback(),
                            horizon, 1.0 / step, config.simulate.internal_step);
    truth = Prediction{};
    truth->times.resize(tr.n_samples());
    for (Eigen::Index k = 0; k < tr.n_samples(); ++k) {
      truth->times[k] = static_cast<double>(k) * tr.dt;
    }
    truth->states = tr.states;
    outputs.truth_csv = out_dir / "truth.csv";
    write_prediction_csv(*truth, *outputs.truth_csv);
  }

  nlohmann::ordered_json imag;
  nlohmann::ordered_json rel;
  if (direct) {
    imag["direct"] = direct->imag_residual;
    if (truth) rel["direct"] = rms_to_json(relative_rms(*direct, *truth));
  }
  if (indirect) {
    imag["indirect"] = indirect->imag_residual;
    if (truth) rel["indirect"] = rms_to_json(relative_rms(*indirect, *truth));
  }
  metrics["imag_residual"] = std::move(imag);
  if (!rel.empty()) metrics["relative_rms"] = std::move(rel);
  metrics["gram_condition"] = {
      {"control", dec.diagnostics.gram_control_condition},
      {"basis", dec.diagnostics.gram_basis_condition}};
  metrics["identity_residual_mean"] = dec.diagnostics.identity_residual_mean;

  outputs.metrics = out_dir / "metrics.json";
  std::ofstream mout(outputs.metrics);
  if (!mout) throw io_error("cannot write " + outputs.metrics.string());
  mout << metrics.dump(2) << "\n";
  return outputs;
}

std::filesystem::path cmd_field(const RunConfig& config,
                                const std::filesystem::path& decomposition_file,
                                const std::filesystem::path& out_dir,
                                const FieldOptions& options) {
  std::filesystem::create_directories(out_dir);
  const Decomposition dec = load_decomposition(decomposition_file);
  const int n = dec.state_dim;
  if (options.grid_res < 1) {
    throw schema_error("field: grid resolution must be >= 1");
  }
  const double half_width = options.half_width.value_or(1.5);

  Eigen::MatrixXd grid;
  if (options.grid_res == 1) {
    grid = Eigen::MatrixXd::Zero(1, n);
  } else {
    grid = grid_initial_conditions(options.grid_res, half_width, n);
  }

  const ControlRhs rhs = config.system.rhs();
  const FeedbackLaw law = config.feedback();

  const auto path = out_dir / "field.csv";
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw io_error("cannot write " + path.string());
  for (int d = 1; d <= n; ++d) std::fprintf(f, "%sx%d", d == 1 ? "" : ",", d);
  for (int d = 1; d <= n; ++d) std::fprintf(f, ",f%d_hat", d);
  for (int d = 1; d <= n; ++d) std::fprintf(f, ",f%d_true", d);
  for (int d = 1; d <= n; ++d) std::fprintf(f, ",err%d", d);
  std::fputc('\n', f);

  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    const Eigen::VectorXd x = grid.row(r).transpose();
    const Eigen::VectorXd fhat = reconstruct_field(dec, x);
    const Eigen::VectorXd ftrue = rhs(x, law.evaluate(x));
    for (Eigen::Index d = 0; d < n; ++d) {
      std::fprintf(f, "%s%.17g", d == 0 ? "" : ",", x[d]);
    }
    for (Eigen::Index d = 0; d < n; ++d) std::fprintf(f, ",%.17g", fhat[d]);
    for (Eigen::Index d = 0; d < n; ++d) std::fprintf(f, ",%.17g", ftrue[d]);
    for (Eigen::Index d = 0; d < n; ++d) {
      std::fprintf(f, ",%.17g", std::abs(fhat[d] - ftrue[d]));
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
  return path;
}

namespace {

Eigen::VectorXd parse_vector_arg(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw schema_error("cannot parse vector argument '" + text + "'");
    }
  }
  if (vals.empty()) throw schema_error("empty vector argument");
  return Eigen::Map<Eigen::VectorXd>(vals.data(),
                                     static_cast<Eigen::Index>(vals.size()));
}

RunConfig synthesized_config(const std::string& system, int grid,
                             double half_width, double duration,
                             double sample_hz, std::uint64_t seed) {
  RunConfig cfg;
  if (system == "duffing") {
    cfg.system.name = SystemSpec::Name::duffing;
    cfg.simulate.internal_step = 1e-3;
  } else if (system == "twolink") {
    cfg.system.name = SystemSpec::Name::twolink;
    cfg.simulate.internal_step = 1e-4;
  } else {
    throw schema_error("simulate: --system must be duffing or twolink "
                       "(use --config for a linear system)");
  }
  cfg.simulate.initial_conditions.kind = InitialConditionSpec::Kind::grid;
  cfg.simulate.initial_conditions.per_side = grid;
  cfg.simulate.initial_conditions.half_width = half_width;
  cfg.simulate.duration = duration;
  cfg.simulate.sample_hz = sample_hz;
  cfg.simulate.seed = seed;
  cfg.feedback_gain = Eigen::MatrixXd::Zero(cfg.system.control_dim(),
                                            cfg.system.state_dim());
  cfg.predict.x0 = Eigen::VectorXd::Zero(cfg.system.state_dim());
  return cfg;
}

}  // namespace

int run_main(int argc, char** argv) {
  CLI::App app{"control-Liouville DMD pipeline"};
  app.require_subcommand(1);

  std::string config_path, preset_name, out_dir = "out";
  int threads = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--config", config_path, "run configuration file (JSON)");
  app.add_option("--preset", preset_name, "built-in experiment preset");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads for matrix assembly");
  app.add_option("--seed", seed, "override the simulation seed")
      ->each([&](const std::string&) { seed_given = true; });

  auto* sim = app.add_subcommand("simulate", "generate an open-loop dataset");
  std::string sim_system;
  int sim_grid = 3;
  double sim_half_width = 1.0, sim_duration = 1.0, sim_hz = 20.0;
  sim->add_option("--system", sim_system, "duffing | twolink");
  sim->add_option("--grid", sim_grid, "grid points per side");
  sim->add_option("--half-width", sim_half_width, "grid half width");
  sim->add_option("--T", sim_duration, "trajectory duration (s)");
  sim->add_option("--hz", sim_hz, "sample rate (Hz)");

  auto* dec = app.add_subcommand("decompose", "assemble and decompose");
  std::string dec_dataset, dec_dump;
  dec->add_option("--dataset", dec_dataset, "dataset manifest to load");
  dec->add_option("--dump-matrices", dec_dump,
                  "write the assembled matrices as CSV into this directory");

  auto* pre = app.add_subcommand("predict", "closed-loop prediction");
  std::string pre_decomposition, pre_mode, pre_x0;
  double pre_horizon = 0.0, pre_step = 0.0;
  int pre_top_modes = 0;
  bool pre_truth = false;
  pre->add_option("--decomposition", pre_decomposition,
                  "decomposition file from a previous run");
  pre->add_option("--mode", pre_mode, "direct | indirect | both");
  pre->add_option("--x0", pre_x0, "initial state, comma separated");
  pre->add_option("--T", pre_horizon, "prediction horizon (s)");
  pre->add_option("--step", pre_step, "output step (s)");
  pre->add_option("--top-modes", pre_top_modes,
                  "truncate the direct sum to this many eigenpairs");
  pre->add_flag("--compare-truth", pre_truth,
                "also simulate the true closed loop and report errors");

  auto* fld = app.add_subcommand("field", "reconstructed vector field on a grid");
  std::string fld_decomposition;
  int fld_res = 50;
  double fld_half_width = 1.5;
  fld->add_option("--decomposition", fld_decomposition,
                  "decomposition file from a previous run");
  fld->add_option("--grid-res", fld_res, "grid points per side");
  fld->add_option("--half-width", fld_half_width, "grid half width");

  auto* lst = app.add_subcommand("presets", "list built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config_error;
  }

  try {
    set_num_threads(threads);

    if (lst->parsed()) {
      for (const auto& name : preset_names()) std::cout << name << "\n";
      return exit_ok;
    }

    std::optional<RunConfig> config;
    if (!config_path.empty() && !preset_name.empty()) {
      throw schema_error("--config and --preset are mutually exclusive");
    }
    if (!config_path.empty()) config = RunConfig::from_file(config_path);
    if (!preset_name.empty()) config = preset_config(preset_name);
    if (config && seed_given) config->simulate.seed = seed;

    if (sim->parsed()) {
      if (!config) {
        if (sim_system.empty()) {
          throw schema_error(
              "simulate: needs --config, --preset or --system");
        }
        config = synthesized_config(sim_system, sim_grid, sim_half_width,
                                    sim_duration, sim_hz, seed);
      }
      const auto manifest = cmd_simulate(*config, out_dir);
      std::cout << manifest.string() << "\n";
      return exit_ok;
    }

    if (!config) {
      throw schema_error("needs --config or --preset");
    }

    if (dec->parsed()) {
      DecomposeOptions options;
      if (!dec_dataset.empty()) options.dataset_manifest = dec_dataset;
      if (!dec_dump.empty()) options.dump_matrices_dir = dec_dump;
      const auto path = cmd_decompose(*config, out_dir, options);
      std::cout << path.string() << "\n";
      return exit_ok;
    }

    if (pre->parsed()) {
      if (pre_decomposition.empty()) {
        throw schema_error("predict: needs --decomposition");
      }
      PredictOptions options;
      if (!pre_mode.empty()) options.mode = pre_mode;
      if (!pre_x0.empty()) options.x0 = parse_vector_arg(pre_x0);
      if (pre_horizon > 0.0) options.horizon = pre_horizon;
      if (pre_step > 0.0) options.step = pre_step;
      options.top_modes = pre_top_modes;
      options.compare_truth = pre_truth;
      const auto outputs =
          cmd_predict(*config, pre_decomposition, out_dir, options);
      std::cout << outputs.metrics.string() << "\n";
      return exit_ok;
    }

    if (fld->parsed()) {
      if (fld_decomposition.empty()) {
        throw schema_error("field: needs --decomposition");
      }
      FieldOptions options;
      options.grid_res = fld_res;
      options.half_width = fld_half_width;
      const auto path = cmd_field(*config, fld_decomposition, out_dir, options);
      std::cout << path.string() << "\n";
      return exit_ok;
    }

    throw schema_error("no subcommand given");
  } catch (const divergence_error& e) {
    std::cerr << "error (divergence): " << e.what() << "\n";
    return exit_divergence;
  } catch (const singular_matrix_error& e) {
    std::cerr << "error (numeric): " << e.what() << "\n";
    return exit_numeric_failure;
  } catch (const numeric_error& e) {
    std::cerr << "error (numeric): " << e.what() << "\n";
    return exit_numeric_failure;
  } catch (const schema_error& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return exit_config_error;
  } catch (const io_error& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return exit_config_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numeric_failure;
  }
}

}  // namespace cldmd::cli
