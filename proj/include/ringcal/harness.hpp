#pragma once

#include "ringcal/completion.hpp"
#include "ringcal/observation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ringcal {

enum class Method {
  kOptspaceMds,       // square -> complete -> embed, delay assumed known
  kOptspaceMdsDelay,  // grid search over the unknown delay
  kMdsMap,
  kSvdReconstruct,
};

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  std::string sweep = "n";  // primary axis: n | a | sigma | method
  std::vector<int> n_values{200};
  std::vector<double> a_values{0.01};      // meters
  std::vector<double> sigma_values{0.0};   // meters
  std::vector<Method> methods{Method::kOptspaceMds};
  double r0 = 0.1;                         // meters
  double delta = 1.0;
  std::optional<double> delta_abs;         // meters, overrides the scaled rule
  double p_miss = 0.05;                    // random missing fraction
  double d0 = 0.0;                         // meters
  double c0 = 1500.0;                      // m/s
  int eta = 2;
  int trials = 10;
  std::uint64_t master_seed = 1;
  StructuredMode mode = StructuredMode::kPractical;
  bool symmetric_noise = true;
  std::string out_path;
  bool curve_files = false;  // also emit gnuplot-ready two-column files
  CompletionOptions completion;
  // delay-search settings (kOptspaceMdsDelay only)
  double delay_grid_min = 0.0;
  std::optional<double> delay_grid_max;  // defaults to 0.5 * r0
  int delay_grid_size = 101;
  bool delay_refine = true;
  int threads = 0;  // trial-level parallelism; 0 = all hardware threads
};

/// One point of the sweep grid (cartesian product of the value lists).
struct ConfigPoint {
  int n = 0;
  double a = 0.0;
  double sigma = 0.0;
  Method method = Method::kOptspaceMds;
};

struct ExperimentRecord {
  std::string experiment_id;
  Method method = Method::kOptspaceMds;
  int n = 0;
  double r0_m = 0.0;
  double a_m = 0.0;
  double delta = 0.0;
  double p_miss = 0.0;
  double sigma_m = 0.0;
  double d0_true_m = 0.0;
  double d0_est_m = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double d_metric_m2 = 0.0;
  double matrix_rel_err = 0.0;
  double runtime_ms = 0.0;
  std::string status = "ok";  // "ok" or "failed: <reason>"

  bool ok() const { return status == "ok"; }
};

struct AggregateRow {
  std::string sweep_value;
  Method method = Method::kOptspaceMds;
  double mean_d_metric = 0.0;
  double std_d_metric = 0.0;
  int n_trials = 0;
};

struct SweepResult {
  std::vector<ExperimentRecord> records;
  std::vector<AggregateRow> aggregates;
  bool all_ok = true;
};

/// Deterministic per-trial seed: a stable hash of the master seed, the config
/// point and the trial index, so extending a sweep never reshuffles existing
/// trials.
std::uint64_t trial_seed(const ExperimentConfig& config,
                         const ConfigPoint& point, int trial);

/// Runs one trial: layout -> observation -> method -> invariant error metric.
/// Module failures land in the record's status instead of propagating.
ExperimentRecord run_trial(const ExperimentConfig& config,
                           const ConfigPoint& point, int trial);

std::vector<ConfigPoint> sweep_points(const ExperimentConfig& config);

/// Runs every config point for the configured number of trials (trials run in
/// parallel, assembled in deterministic order), aggregates per point, and
/// writes the record CSV plus the .agg.csv next to it when out_path is set.
SweepResult run_sweep(const ExperimentConfig& config);

/// JSON config: numbers are SI units; strings may carry unit suffixes
/// (mm/cm/m, us/ms/s). Throws std::runtime_error naming the offending field.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json_text(const ExperimentConfig& config);

void write_records_csv(const std::vector<ExperimentRecord>& records,
                       const std::string& path);
void write_aggregates_csv(const std::vector<AggregateRow>& aggregates,
                          const std::string& path);
void write_curve_files(const ExperimentConfig& config,
                       const std::vector<ConfigPoint>& points,
                       const SweepResult& result, const std::string& stem);

}  // namespace ringcal
