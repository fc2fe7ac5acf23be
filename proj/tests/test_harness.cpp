#include "ringcal/harness.hpp"

#include "ringcal/io.hpp"

#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ringcal;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.experiment_id = "tiny";
  cfg.n_values = {40};
  cfg.a_values = {0.01};
  cfg.sigma_values = {0.0};
  cfg.methods = {Method::kOptspaceMds};
  cfg.trials = 3;
  cfg.master_seed = 99;
  return cfg;
}

bool records_equal_modulo_runtime(const ExperimentRecord& a,
                                  const ExperimentRecord& b) {
  const auto same_double = [](double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
  };
  return a.experiment_id == b.experiment_id && a.method == b.method &&
         a.n == b.n && a.r0_m == b.r0_m && a.a_m == b.a_m &&
         a.delta == b.delta && a.p_miss == b.p_miss && a.sigma_m == b.sigma_m &&
         a.d0_true_m == b.d0_true_m && same_double(a.d0_est_m, b.d0_est_m) &&
         a.trial == b.trial && a.seed == b.seed &&
         same_double(a.d_metric_m2, b.d_metric_m2) &&
         same_double(a.matrix_rel_err, b.matrix_rel_err) &&
         a.status == b.status;
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : {Method::kOptspaceMds, Method::kOptspaceMdsDelay,
                   Method::kMdsMap, Method::kSvdReconstruct}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS(method_from_string("nonsense"));
}

TEST_CASE("run_trial is deterministic per seed") {
  const auto cfg = tiny_config();
  const ConfigPoint point{40, 0.01, 0.0, Method::kOptspaceMds};
  const auto a = run_trial(cfg, point, 1);
  const auto b = run_trial(cfg, point, 1);
  CHECK(records_equal_modulo_runtime(a, b));
  const auto c = run_trial(cfg, point, 2);
  CHECK(a.seed != c.seed);
}

TEST_CASE("a noiseless pipeline trial lands in the expected error range") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_values = {200};
  const auto rec =
      run_trial(cfg, ConfigPoint{200, 0.01, 0.0, Method::kOptspaceMds}, 0);
  REQUIRE(rec.ok());
  CHECK(rec.d_metric_m2 >= 0.0);
  CHECK(rec.d_metric_m2 < 1e-6);
  CHECK(rec.matrix_rel_err < 1e-6);
  CHECK(rec.d0_est_m == 0.0);
}

TEST_CASE("a noisy trial lands in the expected error range") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_values = {200};
  cfg.sigma_values = {0.6e-3};
  cfg.mode = StructuredMode::kTheorem;
  const auto rec =
      run_trial(cfg, ConfigPoint{200, 0.01, 0.6e-3, Method::kOptspaceMds}, 0);
  REQUIRE(rec.ok());
  CHECK(rec.d_metric_m2 > 1e-6);
  CHECK(rec.d_metric_m2 < 1e-4);
}

TEST_CASE("failures are tagged instead of thrown") {
  ExperimentConfig cfg = tiny_config();
  cfg.a_values = {1.0};  // a >= 2 * r0 is rejected by the layout generator
  const auto rec =
      run_trial(cfg, ConfigPoint{40, 1.0, 0.0, Method::kOptspaceMds}, 0);
  CHECK_FALSE(rec.ok());
  CHECK(rec.status.rfind("failed:", 0) == 0);
  CHECK(std::isnan(rec.d_metric_m2));
}

TEST_CASE("run_sweep aggregates equal the mean of their trial rows") {
  ExperimentConfig cfg = tiny_config();
  cfg.trials = 4;
  const auto result = run_sweep(cfg);
  REQUIRE(result.records.size() == 4);
  REQUIRE(result.aggregates.size() == 1);
  double mean = 0.0;
  for (const auto& rec : result.records) mean += rec.d_metric_m2 / 4.0;
  CHECK(std::abs(result.aggregates[0].mean_d_metric - mean) <=
        1e-12 * std::abs(mean));
  CHECK(result.aggregates[0].n_trials == 4);
  CHECK(result.all_ok);
}

TEST_CASE("run_sweep is reproducible and writes matching CSV files") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("ringcal_sweep_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  ExperimentConfig cfg = tiny_config();
  cfg.n_values = {30, 40};
  cfg.trials = 2;
  cfg.out_path = (dir / "out.csv").string();
  const auto first = run_sweep(cfg);
  const auto second = run_sweep(cfg);
  REQUIRE(first.records.size() == second.records.size());
  for (std::size_t k = 0; k < first.records.size(); ++k) {
    CHECK(records_equal_modulo_runtime(first.records[k], second.records[k]));
  }
  CHECK(fs::exists(dir / "out.csv"));
  CHECK(fs::exists(dir / "out.agg.csv"));

  std::ifstream in(dir / "out.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "experiment_id,method,n,r0_m,a_m,delta,p_miss,sigma_m,d0_true_m,"
        "d0_est_m,trial,seed,d_metric_m2,matrix_rel_err,runtime_ms,status");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
  fs::remove_all(dir);
}

TEST_CASE("config JSON accepts unit suffixes and reports bad fields") {
  const std::string text = R"({
    "experiment_id": "units",
    "n": [50, 100],
    "a": ["10mm", "2cm"],
    "sigma": "0.6mm",
    "r0": "10cm",
    "t0": "10us",
    "c0": 1500.0,
    "method": ["optspace-mds", "mds-map"],
    "trials": 2,
    "seed": 7,
    "mode": "theorem"
  })";
  const auto cfg = config_from_json_text(text);
  CHECK(cfg.n_values == std::vector<int>{50, 100});
  CHECK(cfg.a_values[0] == doctest::Approx(0.01));
  CHECK(cfg.a_values[1] == doctest::Approx(0.02));
  CHECK(cfg.sigma_values[0] == doctest::Approx(0.0006));
  CHECK(cfg.r0 == doctest::Approx(0.1));
  CHECK(cfg.d0 == doctest::Approx(0.015));  // 10 us at 1500 m/s
  CHECK(cfg.mode == StructuredMode::kTheorem);
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[1] == Method::kMdsMap);

  CHECK_THROWS_WITH_AS(config_from_json_text(R"({"bogus": 1})"),
                       doctest::Contains("bogus"), std::runtime_error);
  CHECK_THROWS_WITH_AS(config_from_json_text(R"({"a": "10parsec"})"),
                       doctest::Contains("unit"), std::runtime_error);
  CHECK_THROWS_WITH_AS(config_from_json_text(R"({"d0": 0.1, "t0": 1e-5})"),
                       doctest::Contains("t0"), std::runtime_error);
  CHECK_THROWS_WITH_AS(config_from_json_text("{\n\"n\": 5,\n!!\n}"),
                       doctest::Contains("line 3"), std::runtime_error);
}

TEST_CASE("sweeps can emit gnuplot-ready curve files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("ringcal_curves_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  ExperimentConfig cfg = tiny_config();
  cfg.n_values = {30, 40};
  cfg.a_values = {0.005, 0.01};
  cfg.trials = 2;
  cfg.curve_files = true;
  cfg.out_path = (dir / "curves.csv").string();
  run_sweep(cfg);
  for (const char* name :
       {"curves.curve.optspace-mds.a=0.005.dat",
        "curves.curve.optspace-mds.a=0.01.dat"}) {
    REQUIRE(fs::exists(dir / name));
    std::ifstream in(dir / name);
    double x = 0.0, y = 0.0;
    int rows = 0;
    while (in >> x >> y) ++rows;
    CHECK(rows == 2);  // one point per n
  }
  fs::remove_all(dir);
}

TEST_CASE("t0 accepts the micro sign spelling") {
  const auto cfg = config_from_json_text(R"({"t0": "10µs", "c0": 1500.0})");
  CHECK(cfg.d0 == doctest::Approx(0.015));
}

TEST_CASE("config JSON serialization round trips") {
  ExperimentConfig cfg = tiny_config();
  cfg.delta_abs = 0.03;
  cfg.d0 = 0.015;
  cfg.mode = StructuredMode::kTheorem;
  const auto text = config_to_json_text(cfg);
  const auto loaded = config_from_json_text(text);
  CHECK(loaded.n_values == cfg.n_values);
  CHECK(loaded.a_values == cfg.a_values);
  CHECK(loaded.d0 == cfg.d0);
  CHECK(loaded.delta_abs.has_value());
  CHECK(*loaded.delta_abs == *cfg.delta_abs);
  CHECK(loaded.mode == cfg.mode);
  CHECK(loaded.master_seed == cfg.master_seed);
}

TEST_CASE("sweep_points builds the cartesian product in declaration order") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_values = {10, 20};
  cfg.a_values = {0.01, 0.02};
  cfg.methods = {Method::kOptspaceMds, Method::kSvdReconstruct};
  const auto points = sweep_points(cfg);
  REQUIRE(points.size() == 8);
  CHECK(points[0].n == 10);
  CHECK(points[0].a == 0.01);
  CHECK(points[0].method == Method::kOptspaceMds);
  CHECK(points[1].method == Method::kSvdReconstruct);
  CHECK(points[7].n == 20);
  CHECK(points[7].a == 0.02);
}
