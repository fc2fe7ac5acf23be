#include "ringcal/harness.hpp"
#include "ringcal/io.hpp"

#include <json.hpp>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ringcal {
namespace {

using nlohmann::json;

[[noreturn]] void fail_field(const std::string& field, const std::string& what) {
  throw std::runtime_error("config field '" + field + "': " + what);
}

double parse_with_suffix(const std::string& text, const std::string& field,
                         const std::vector<std::pair<std::string, double>>& units) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin) fail_field(field, "cannot parse number from '" + text + "'");
  std::string suffix(end);
  // trim surrounding spaces
  while (!suffix.empty() && std::isspace(static_cast<unsigned char>(suffix.front())))
    suffix.erase(suffix.begin());
  while (!suffix.empty() && std::isspace(static_cast<unsigned char>(suffix.back())))
    suffix.pop_back();
  if (suffix.empty()) return value;
  for (const auto& [name, scale] : units) {
    if (suffix == name) return value * scale;
  }
  fail_field(field, "unknown unit suffix '" + suffix + "' in '" + text + "'");
}

// Length in meters: plain numbers are SI, strings accept mm/cm/m.
double parse_length(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string())
    return parse_with_suffix(v.get<std::string>(), field,
                             {{"mm", 1e-3}, {"cm", 1e-2}, {"m", 1.0}});
  fail_field(field, "expected a number (meters) or a string with a unit");
}

// Time in seconds: plain numbers are SI, strings accept us/ms/s.
double parse_time(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string())
    return parse_with_suffix(
        v.get<std::string>(), field,
        {{"us", 1e-6}, {"µs", 1e-6}, {"ms", 1e-3}, {"s", 1.0}});
  fail_field(field, "expected a number (seconds) or a string with a unit");
}

std::vector<double> parse_length_list(const json& v, const std::string& field) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& item : v) out.push_back(parse_length(item, field));
  } else {
    out.push_back(parse_length(v, field));
  }
  if (out.empty()) fail_field(field, "list must not be empty");
  return out;
}

StructuredMode parse_mode(const std::string& name, const std::string& field) {
  if (name == "practical") return StructuredMode::kPractical;
  if (name == "theorem") return StructuredMode::kTheorem;
  fail_field(field, "expected 'practical' or 'theorem', got '" + name + "'");
}

int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') ++line;
  }
  return line;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config parse error at line " +
                             std::to_string(line_of_offset(text, e.byte)) +
                             ": " + e.what());
  }
  if (!root.is_object()) throw std::runtime_error("config must be a JSON object");

  static const std::vector<std::string> known = {
      "experiment_id", "sweep", "n", "a", "sigma", "method", "r0", "delta",
      "delta_abs", "p_miss", "d0", "t0", "c0", "eta", "trials", "seed",
      "mode", "symmetric_noise", "out", "curves", "completion", "delay",
      "threads"};
  for (const auto& [key, value] : root.items()) {
    (void)value;
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) fail_field(key, "unknown field");
  }

  ExperimentConfig cfg;
  if (root.contains("experiment_id"))
    cfg.experiment_id = root["experiment_id"].get<std::string>();
  if (root.contains("sweep")) {
    cfg.sweep = root["sweep"].get<std::string>();
    if (cfg.sweep != "n" && cfg.sweep != "a" && cfg.sweep != "sigma" &&
        cfg.sweep != "method")
      fail_field("sweep", "expected one of n, a, sigma, method");
  }
  if (root.contains("n")) {
    cfg.n_values.clear();
    if (root["n"].is_array())
      for (const auto& v : root["n"]) cfg.n_values.push_back(v.get<int>());
    else
      cfg.n_values.push_back(root["n"].get<int>());
    if (cfg.n_values.empty()) fail_field("n", "list must not be empty");
  }
  if (root.contains("a")) cfg.a_values = parse_length_list(root["a"], "a");
  if (root.contains("sigma"))
    cfg.sigma_values = parse_length_list(root["sigma"], "sigma");
  if (root.contains("method")) {
    cfg.methods.clear();
    if (root["method"].is_array())
      for (const auto& v : root["method"])
        cfg.methods.push_back(method_from_string(v.get<std::string>()));
    else
      cfg.methods.push_back(method_from_string(root["method"].get<std::string>()));
  }
  if (root.contains("r0")) cfg.r0 = parse_length(root["r0"], "r0");
  if (root.contains("delta")) cfg.delta = root["delta"].get<double>();
  if (root.contains("delta_abs"))
    cfg.delta_abs = parse_length(root["delta_abs"], "delta_abs");
  if (root.contains("p_miss")) cfg.p_miss = root["p_miss"].get<double>();
  if (root.contains("c0")) cfg.c0 = root["c0"].get<double>();
  if (root.contains("d0") && root.contains("t0"))
    fail_field("t0", "give either d0 or t0, not both");
  if (root.contains("d0")) cfg.d0 = parse_length(root["d0"], "d0");
  if (root.contains("t0")) cfg.d0 = parse_time(root["t0"], "t0") * cfg.c0;
  if (root.contains("eta")) cfg.eta = root["eta"].get<int>();
  if (root.contains("trials")) cfg.trials = root["trials"].get<int>();
  if (root.contains("seed")) cfg.master_seed = root["seed"].get<std::uint64_t>();
  if (root.contains("mode"))
    cfg.mode = parse_mode(root["mode"].get<std::string>(), "mode");
  if (root.contains("symmetric_noise"))
    cfg.symmetric_noise = root["symmetric_noise"].get<bool>();
  if (root.contains("out")) cfg.out_path = root["out"].get<std::string>();
  if (root.contains("curves")) cfg.curve_files = root["curves"].get<bool>();
  if (root.contains("threads")) cfg.threads = root["threads"].get<int>();

  if (root.contains("completion")) {
    const json& c = root["completion"];
    if (c.contains("rank")) cfg.completion.rank = c["rank"].get<int>();
    if (c.contains("max_iters"))
      cfg.completion.max_iters = c["max_iters"].get<int>();
    if (c.contains("rel_tol")) cfg.completion.rel_tol = c["rel_tol"].get<double>();
    if (c.contains("trimming")) cfg.completion.trimming = c["trimming"].get<bool>();
    if (c.contains("p_hat")) cfg.completion.p_hat = c["p_hat"].get<double>();
  }
  if (root.contains("delay")) {
    const json& d = root["delay"];
    if (d.contains("grid_min"))
      cfg.delay_grid_min = parse_length(d["grid_min"], "delay.grid_min");
    if (d.contains("grid_max"))
      cfg.delay_grid_max = parse_length(d["grid_max"], "delay.grid_max");
    if (d.contains("grid_size"))
      cfg.delay_grid_size = d["grid_size"].get<int>();
    if (d.contains("refine")) cfg.delay_refine = d["refine"].get<bool>();
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return config_from_json_text(text.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json root;
  root["experiment_id"] = cfg.experiment_id;
  root["sweep"] = cfg.sweep;
  root["n"] = cfg.n_values;
  root["a"] = cfg.a_values;
  root["sigma"] = cfg.sigma_values;
  std::vector<std::string> methods;
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  root["method"] = methods;
  root["r0"] = cfg.r0;
  root["delta"] = cfg.delta;
  if (cfg.delta_abs) root["delta_abs"] = *cfg.delta_abs;
  root["p_miss"] = cfg.p_miss;
  root["d0"] = cfg.d0;
  root["c0"] = cfg.c0;
  root["eta"] = cfg.eta;
  root["trials"] = cfg.trials;
  root["seed"] = cfg.master_seed;
  root["mode"] = cfg.mode == StructuredMode::kPractical ? "practical" : "theorem";
  root["symmetric_noise"] = cfg.symmetric_noise;
  if (!cfg.out_path.empty()) root["out"] = cfg.out_path;
  if (cfg.curve_files) root["curves"] = true;
  root["completion"] = {{"rank", cfg.completion.rank},
                        {"max_iters", cfg.completion.max_iters},
                        {"rel_tol", cfg.completion.rel_tol},
                        {"trimming", cfg.completion.trimming}};
  if (cfg.completion.p_hat) root["completion"]["p_hat"] = *cfg.completion.p_hat;
  root["delay"] = {{"grid_min", cfg.delay_grid_min},
                   {"grid_size", cfg.delay_grid_size},
                   {"refine", cfg.delay_refine}};
  if (cfg.delay_grid_max) root["delay"]["grid_max"] = *cfg.delay_grid_max;
  if (cfg.threads != 0) root["threads"] = cfg.threads;
  return root.dump(2) + "\n";
}

}  // namespace ringcal
