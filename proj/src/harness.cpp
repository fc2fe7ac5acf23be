#include "ringcal/harness.hpp"

#include "ringcal/baselines.hpp"
#include "ringcal/delay.hpp"
#include "ringcal/embedding.hpp"
#include "ringcal/geometry.hpp"
#include "ringcal/io.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ringcal {
namespace {

using nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

// Dimensionless threshold scale actually in effect at this n.
double effective_delta(const ExperimentConfig& config, int n) {
  if (!config.delta_abs) return config.delta;
  return *config.delta_abs /
         (config.r0 * std::sqrt(std::log(static_cast<double>(n)) / n));
}

struct PipelineOutput {
  PositionEstimate positions;
  CompletionResult completion;
  double d0_est = 0.0;
};

// square -> complete -> embed with the delay taken as known.
PipelineOutput run_known_delay_pipeline(const ObservationSet& obs,
                                        const ExperimentConfig& config,
                                        std::uint64_t seed) {
  const int n = static_cast<int>(obs.values.rows());
  const PairMask mask = obs.completion_mask();
  Matrix shifted = Matrix::Zero(n, n);
  mask.for_each([&](int i, int j) {
    if (i != j) shifted(i, j) = obs.values(i, j) - obs.d0_true;
  });
  CompletionOptions opts = config.completion;
  opts.seed = hash_combine(seed, "completion");
  PipelineOutput out;
  out.completion =
      optspace_complete(shifted.array().square().matrix(), mask, opts);
  out.positions = classical_mds(out.completion.estimate, config.eta);
  out.positions.source = to_string(Method::kOptspaceMds);
  out.d0_est = obs.d0_true;
  return out;
}

PipelineOutput run_delay_pipeline(const ObservationSet& obs,
                                  const ExperimentConfig& config,
                                  std::uint64_t seed) {
  DelaySearchConfig cfg;
  cfg.d_min = config.delay_grid_min;
  cfg.d_max = config.delay_grid_max.value_or(0.5 * config.r0);
  cfg.grid_size = config.delay_grid_size;
  cfg.refine = config.delay_refine;
  cfg.completion = config.completion;
  cfg.eta = config.eta;
  cfg.threads = 1;  // the sweep already fans trials out across workers
  cfg.seed = hash_combine(seed, "delay-search");
  const DelaySearchResult res = estimate_delay(obs, cfg);
  PipelineOutput out;
  out.positions = res.best_positions;
  out.positions.source = to_string(Method::kOptspaceMdsDelay);
  out.completion = res.best_completion;
  out.d0_est = res.d0_hat;
  return out;
}

std::string format_sweep_value(const ExperimentConfig& config,
                               const ConfigPoint& point) {
  if (config.sweep == "n") return std::to_string(point.n);
  if (config.sweep == "a") return format_double(point.a);
  if (config.sweep == "sigma") return format_double(point.sigma);
  if (config.sweep == "method") return to_string(point.method);
  return std::to_string(point.n);
}

std::string composite_label(const ConfigPoint& point) {
  std::ostringstream label;
  label << "n=" << point.n << ";a=" << format_double(point.a)
        << ";sigma=" << format_double(point.sigma);
  return label.str();
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kOptspaceMds:
      return "optspace-mds";
    case Method::kOptspaceMdsDelay:
      return "optspace-mds-delay";
    case Method::kMdsMap:
      return "mds-map";
    case Method::kSvdReconstruct:
      return "svd-reconstruct";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "optspace-mds") return Method::kOptspaceMds;
  if (name == "optspace-mds-delay") return Method::kOptspaceMdsDelay;
  if (name == "mds-map") return Method::kMdsMap;
  if (name == "svd-reconstruct") return Method::kSvdReconstruct;
  throw std::runtime_error(
      "unknown method '" + name +
      "' (expected optspace-mds, optspace-mds-delay, mds-map or "
      "svd-reconstruct)");
}

std::uint64_t trial_seed(const ExperimentConfig& config,
                         const ConfigPoint& point, int trial) {
  std::uint64_t h = config.master_seed;
  h = hash_combine(h, config.experiment_id);
  h = hash_combine(h, to_string(point.method));
  h = hash_combine(h, static_cast<std::uint64_t>(point.n));
  h = hash_combine(h, config.r0);
  h = hash_combine(h, point.a);
  h = hash_combine(h, effective_delta(config, point.n));
  h = hash_combine(h, config.p_miss);
  h = hash_combine(h, point.sigma);
  h = hash_combine(h, config.d0);
  h = hash_combine(h, static_cast<std::uint64_t>(trial));
  return h;
}

ExperimentRecord run_trial(const ExperimentConfig& config,
                           const ConfigPoint& point, int trial) {
  ExperimentRecord rec;
  rec.experiment_id = config.experiment_id;
  rec.method = point.method;
  rec.n = point.n;
  rec.r0_m = config.r0;
  rec.a_m = point.a;
  rec.delta = effective_delta(config, point.n);
  rec.p_miss = config.p_miss;
  rec.sigma_m = point.sigma;
  rec.d0_true_m = config.d0;
  rec.d0_est_m = kNan;
  rec.trial = trial;
  rec.seed = trial_seed(config, point, trial);
  rec.d_metric_m2 = kNan;
  rec.matrix_rel_err = kNan;

  const auto start = std::chrono::steady_clock::now();
  try {
    const SensorLayout layout = generate_ring_layout(
        point.n, config.r0, point.a, hash_combine(rec.seed, "layout"));

    ObservationParams params;
    params.delta = config.delta;
    params.delta_abs_m = config.delta_abs;
    params.p = 1.0 - config.p_miss;
    params.sigma = point.sigma;
    params.d0 = config.d0;
    params.c0 = config.c0;
    params.seed = hash_combine(rec.seed, "observation");
    params.mode = config.mode;
    params.symmetric_noise = config.symmetric_noise;
    const ObservationSet obs = synthesize_observation(layout, params);

    const Matrix truth = layout.positions;
    PositionEstimate positions;
    switch (point.method) {
      case Method::kOptspaceMds:
      case Method::kOptspaceMdsDelay: {
        const PipelineOutput out =
            point.method == Method::kOptspaceMds
                ? run_known_delay_pipeline(obs, config, rec.seed)
                : run_delay_pipeline(obs, config, rec.seed);
        positions = out.positions;
        rec.d0_est_m = out.d0_est;
        const Matrix sq =
            squared_distance_matrix(pairwise_distance_matrix(layout));
        rec.matrix_rel_err = (out.completion.estimate - sq).norm() / sq.norm();
        break;
      }
      case Method::kMdsMap:
        positions = mds_map(obs);
        break;
      case Method::kSvdReconstruct:
        positions = svd_reconstruct(obs);
        break;
    }
    rec.d_metric_m2 = position_distance(truth, positions.coords);
    rec.status = "ok";
  } catch (const std::exception& e) {
    rec.status = std::string("failed: ") + e.what();
  }
  rec.runtime_ms = elapsed_ms(start);
  return rec;
}

std::vector<ConfigPoint> sweep_points(const ExperimentConfig& config) {
  std::vector<ConfigPoint> points;
  for (int n : config.n_values)
    for (double a : config.a_values)
      for (double sigma : config.sigma_values)
        for (Method method : config.methods)
          points.push_back({n, a, sigma, method});
  return points;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  if (config.trials < 1)
    throw std::invalid_argument("run_sweep: trials must be >= 1");
  if (config.n_values.empty() || config.a_values.empty() ||
      config.sigma_values.empty() || config.methods.empty())
    throw std::invalid_argument("run_sweep: empty sweep value list");

  const auto points = sweep_points(config);
  const int total = static_cast<int>(points.size()) * config.trials;
  SweepResult result;
  result.records.resize(static_cast<std::size_t>(total));
  parallel_for(
      0, total,
      [&](int k) {
        const int pi = k / config.trials;
        const int trial = k % config.trials;
        result.records[static_cast<std::size_t>(k)] =
            run_trial(config, points[static_cast<std::size_t>(pi)], trial);
      },
      config.threads);

  for (const auto& rec : result.records) {
    if (!rec.ok()) result.all_ok = false;
  }

  // points are ambiguous under the primary sweep label when secondary lists
  // also vary; fall back to a composite label in that case
  const bool needs_composite =
      (config.sweep != "n" && config.n_values.size() > 1) ||
      (config.sweep != "a" && config.a_values.size() > 1) ||
      (config.sweep != "sigma" && config.sigma_values.size() > 1);

  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    AggregateRow row;
    row.sweep_value = needs_composite ? composite_label(points[pi])
                                      : format_sweep_value(config, points[pi]);
    row.method = points[pi].method;
    double sum = 0.0;
    std::vector<double> ok_values;
    for (int t = 0; t < config.trials; ++t) {
      const auto& rec =
          result.records[pi * static_cast<std::size_t>(config.trials) +
                         static_cast<std::size_t>(t)];
      if (!rec.ok()) continue;
      ok_values.push_back(rec.d_metric_m2);
      sum += rec.d_metric_m2;
    }
    row.n_trials = static_cast<int>(ok_values.size());
    if (row.n_trials > 0) {
      row.mean_d_metric = sum / row.n_trials;
      double ss = 0.0;
      for (double v : ok_values) {
        ss += (v - row.mean_d_metric) * (v - row.mean_d_metric);
      }
      row.std_d_metric =
          row.n_trials > 1 ? std::sqrt(ss / (row.n_trials - 1)) : 0.0;
    } else {
      row.mean_d_metric = kNan;
      row.std_d_metric = kNan;
    }
    result.aggregates.push_back(row);
  }

  if (!config.out_path.empty()) {
    write_records_csv(result.records, config.out_path);
    std::string stem = config.out_path;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
      stem = stem.substr(0, stem.size() - 4);
    write_aggregates_csv(result.aggregates, stem + ".agg.csv");
    if (config.curve_files) write_curve_files(config, points, result, stem);
  }
  return result;
}

// One two-column file per curve: the primary sweep variable against the mean
// error, grouped by method and any secondary values that also vary.
void write_curve_files(const ExperimentConfig& config,
                       const std::vector<ConfigPoint>& points,
                       const SweepResult& result, const std::string& stem) {
  std::map<std::string, std::ofstream> files;
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const ConfigPoint& point = points[pi];
    std::ostringstream name;
    name << stem << ".curve." << to_string(point.method);
    if (config.sweep != "n" && config.n_values.size() > 1)
      name << ".n=" << point.n;
    if (config.sweep != "a" && config.a_values.size() > 1)
      name << ".a=" << format_double(point.a);
    if (config.sweep != "sigma" && config.sigma_values.size() > 1)
      name << ".sigma=" << format_double(point.sigma);
    auto [it, inserted] = files.try_emplace(name.str() + ".dat");
    if (inserted) {
      it->second.open(it->first);
      if (!it->second)
        throw std::runtime_error("cannot open for writing: " + it->first);
    }
    double x = static_cast<double>(point.n);
    if (config.sweep == "a") x = point.a;
    if (config.sweep == "sigma") x = point.sigma;
    it->second << format_double(x) << ' '
               << format_double(result.aggregates[pi].mean_d_metric) << '\n';
  }
}

void write_records_csv(const std::vector<ExperimentRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "experiment_id,method,n,r0_m,a_m,delta,p_miss,sigma_m,d0_true_m,"
         "d0_est_m,trial,seed,d_metric_m2,matrix_rel_err,runtime_ms,status\n";
  for (const auto& r : records) {
    out << r.experiment_id << ',' << to_string(r.method) << ',' << r.n << ','
        << format_double(r.r0_m) << ',' << format_double(r.a_m) << ','
        << format_double(r.delta) << ',' << format_double(r.p_miss) << ','
        << format_double(r.sigma_m) << ',' << format_double(r.d0_true_m) << ','
        << format_double(r.d0_est_m) << ',' << r.trial << ',' << r.seed << ','
        << format_double(r.d_metric_m2) << ','
        << format_double(r.matrix_rel_err) << ','
        << format_double(r.runtime_ms) << ',' << r.status << '\n';
  }
}

void write_aggregates_csv(const std::vector<AggregateRow>& aggregates,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "sweep_value,method,mean_d_metric,std_d_metric,n_trials\n";
  for (const auto& row : aggregates) {
    out << row.sweep_value << ',' << to_string(row.method) << ','
        << format_double(row.mean_d_metric) << ','
        << format_double(row.std_d_metric) << ',' << row.n_trials << '\n';
  }
}

}  // namespace ringcal
