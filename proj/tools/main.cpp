#include "ringcal/harness.hpp"
#include "ringcal/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

namespace {

using namespace ringcal;

struct CommonFlags {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::string> mode;
  std::optional<int> trials;
  std::optional<int> threads;
  bool print_config = false;
};

void add_override_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--out", flags.out_path, "CSV output path (records; aggregates go to *.agg.csv)");
  cmd->add_option("--seed", flags.seed, "master seed override");
  cmd->add_option("--method", flags.method,
                  "method override: optspace-mds | optspace-mds-delay | mds-map | svd-reconstruct");
  cmd->add_option("--mode", flags.mode, "structured-missing mode: practical | theorem")
      ->check(CLI::IsMember({"practical", "theorem"}));
  cmd->add_option("--trials", flags.trials, "trials per config point");
  cmd->add_option("--threads", flags.threads, "worker threads (0 = all cores)");
  cmd->add_flag("--print-config", flags.print_config,
                "print the effective config as JSON and exit");
}

void apply_overrides(ExperimentConfig& cfg, const CommonFlags& flags) {
  if (!flags.out_path.empty()) cfg.out_path = flags.out_path;
  if (flags.seed) cfg.master_seed = *flags.seed;
  if (flags.method) cfg.methods = {method_from_string(*flags.method)};
  if (flags.mode)
    cfg.mode = *flags.mode == "theorem" ? StructuredMode::kTheorem
                                        : StructuredMode::kPractical;
  if (flags.trials) cfg.trials = *flags.trials;
  if (flags.threads) cfg.threads = *flags.threads;
}

// Parameter sets of the simulation figures.
ExperimentConfig preset_fig5() {
  ExperimentConfig cfg;
  cfg.experiment_id = "fig5";
  cfg.sweep = "n";
  cfg.n_values = {200, 700, 1200, 1700};
  cfg.a_values = {0.002, 0.005, 0.010, 0.020};
  cfg.sigma_values = {0.0};
  cfg.methods = {Method::kOptspaceMds};
  cfg.mode = StructuredMode::kTheorem;
  cfg.out_path = "fig5.csv";
  return cfg;
}

ExperimentConfig preset_fig6() {
  ExperimentConfig cfg;
  cfg.experiment_id = "fig6";
  cfg.sweep = "n";
  cfg.n_values = {200, 700, 1200, 1700};
  cfg.a_values = {0.010};
  cfg.sigma_values = {0.6e-3, 3e-3, 6e-3, 10e-3};
  cfg.methods = {Method::kOptspaceMds};
  cfg.mode = StructuredMode::kTheorem;
  cfg.out_path = "fig6.csv";
  return cfg;
}

ExperimentConfig preset_fig7() {
  ExperimentConfig cfg;
  cfg.experiment_id = "fig7";
  cfg.sweep = "n";
  cfg.n_values = {25, 50, 100, 200, 400, 800, 1600};
  cfg.a_values = {0.010};
  cfg.sigma_values = {0.6e-3};
  cfg.methods = {Method::kOptspaceMds, Method::kMdsMap,
                 Method::kSvdReconstruct};
  cfg.mode = StructuredMode::kPractical;
  cfg.out_path = "fig7.csv";
  return cfg;
}

ExperimentConfig preset_fig8() {
  ExperimentConfig cfg;
  cfg.experiment_id = "fig8";
  cfg.sweep = "n";
  cfg.n_values = {200};
  cfg.a_values = {0.010};  // deviations up to 5 mm from the circle
  cfg.sigma_values = {0.0};
  cfg.methods = {Method::kOptspaceMdsDelay};
  cfg.delta_abs = 0.03;
  cfg.d0 = 10e-6 * 1500.0;  // t0 = 10 us at c0 = 1500 m/s
  cfg.delay_grid_min = 0.0;
  cfg.delay_grid_max = 0.05;
  cfg.delay_grid_size = 101;
  cfg.delay_refine = true;
  cfg.mode = StructuredMode::kPractical;
  cfg.out_path = "fig8.csv";
  return cfg;
}

int run_config(ExperimentConfig cfg, const CommonFlags& flags,
               bool single_point) {
  apply_overrides(cfg, flags);
  if (flags.print_config) {
    std::fputs(config_to_json_text(cfg).c_str(), stdout);
    return 0;
  }
  if (single_point && sweep_points(cfg).size() != 1) {
    std::fprintf(stderr,
                 "run expects a single config point (scalar n/a/sigma/method); "
                 "use `sweep` for value lists\n");
    return 2;
  }
  const SweepResult result = run_sweep(cfg);
  for (const auto& row : result.aggregates) {
    std::printf("%s  %-18s  mean d = %.6e m^2  (std %.3e, trials %d)\n",
                row.sweep_value.c_str(), to_string(row.method).c_str(),
                row.mean_d_metric, row.std_d_metric, row.n_trials);
  }
  int failed = 0;
  for (const auto& rec : result.records) {
    if (!rec.ok()) {
      ++failed;
      std::fprintf(stderr, "trial failed: method=%s n=%d trial=%d: %s\n",
                   to_string(rec.method).c_str(), rec.n, rec.trial,
                   rec.status.c_str());
    }
  }
  if (!cfg.out_path.empty())
    std::printf("records written to %s\n", cfg.out_path.c_str());
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ringcal: sensor-ring calibration from pairwise time-of-flight data\n"
      "(low-rank completion of the squared distance matrix, classical MDS,\n"
      "joint delay estimation, plus a simulation harness)"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, fig_flags[4];

  CLI::App* run = app.add_subcommand("run", "run a single-point config");
  run->add_option("--config", run_flags.config_path, "JSON config path")
      ->required();
  add_override_flags(run, run_flags);

  CLI::App* sweep = app.add_subcommand("sweep", "run a full sweep config");
  sweep->add_option("--config", sweep_flags.config_path, "JSON config path")
      ->required();
  add_override_flags(sweep, sweep_flags);

  const char* fig_names[4] = {"demo-fig5", "demo-fig6", "demo-fig7",
                              "demo-fig8"};
  const char* fig_help[4] = {
      "noiseless error sweep over n and ring width a",
      "noisy error sweep over n and noise level sigma",
      "method comparison against MDS-MAP and SVD-Reconstruct",
      "joint delay estimation at t0 = 10 us"};
  CLI::App* figs[4];
  for (int k = 0; k < 4; ++k) {
    figs[k] = app.add_subcommand(fig_names[k], fig_help[k]);
    add_override_flags(figs[k], fig_flags[k]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed())
      return run_config(load_config(run_flags.config_path), run_flags, true);
    if (sweep->parsed())
      return run_config(load_config(sweep_flags.config_path), sweep_flags,
                        false);
    if (figs[0]->parsed()) return run_config(preset_fig5(), fig_flags[0], false);
    if (figs[1]->parsed()) return run_config(preset_fig6(), fig_flags[1], false);
    if (figs[2]->parsed()) return run_config(preset_fig7(), fig_flags[2], false);
    if (figs[3]->parsed()) return run_config(preset_fig8(), fig_flags[3], false);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
