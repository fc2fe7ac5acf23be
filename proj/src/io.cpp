#include "ringcal/io.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ringcal {
namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

json mask_to_json(const PairMask& mask) {
  json pairs = json::array();
  mask.for_each([&](int i, int j) { pairs.push_back({i, j}); });
  return pairs;
}

PairMask mask_from_json(const json& pairs, int n) {
  PairMask mask(n);
  for (const auto& p : pairs) mask.insert(p.at(0).get<int>(), p.at(1).get<int>());
  return mask;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  // 17 significant digits always round trip; prefer the shorter form when it
  // already parses back exactly
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  if (std::strtod(buf, nullptr) != v)
    std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_positions_csv(const Matrix& coords, const std::string& path) {
  if (coords.cols() != 2)
    throw std::invalid_argument("write_positions_csv: expected 2 columns");
  auto out = open_out(path);
  out << "index,x_m,y_m\n";
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    out << i << ',' << format_double(coords(i, 0)) << ','
        << format_double(coords(i, 1)) << '\n';
  }
}

void write_layout_csv(const SensorLayout& layout, const std::string& path) {
  write_positions_csv(layout.positions, path);
}

Eigen::Matrix<double, Eigen::Dynamic, 2> read_positions_csv(
    const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,x_m,y_m", 0) != 0)
    throw std::runtime_error("read_positions_csv: bad header in " + path);
  std::vector<std::array<double, 2>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::array<double, 2> xy{};
    std::getline(ss, field, ',');  // index, ignored
    std::getline(ss, field, ',');
    xy[0] = std::strtod(field.c_str(), nullptr);
    std::getline(ss, field, ',');
    xy[1] = std::strtod(field.c_str(), nullptr);
    rows.push_back(xy);
  }
  Eigen::Matrix<double, Eigen::Dynamic, 2> coords(rows.size(), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    coords(static_cast<Eigen::Index>(i), 0) = rows[i][0];
    coords(static_cast<Eigen::Index>(i), 1) = rows[i][1];
  }
  return coords;
}

void write_observation(const ObservationSet& obs, const std::string& matrix_path,
                       const std::string& sidecar_path) {
  const int n = static_cast<int>(obs.values.rows());
  {
    auto out = open_out(matrix_path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << n << ' ' << n << ' ' << obs.masks.observed.count() << '\n';
    obs.masks.observed.for_each([&](int i, int j) {
      out << (i + 1) << ' ' << (j + 1) << ' '
          << format_double(obs.values(i, j)) << '\n';
    });
  }
  json sidecar;
  sidecar["n"] = n;
  sidecar["d0_true_m"] = obs.d0_true;
  sidecar["sigma_m"] = obs.sigma;
  sidecar["c0_mps"] = obs.c0;
  sidecar["mode"] =
      obs.mode == StructuredMode::kPractical ? "practical" : "theorem";
  sidecar["structured"] = mask_to_json(obs.masks.structured);
  sidecar["observed"] = mask_to_json(obs.masks.observed);
  auto out = open_out(sidecar_path);
  out << sidecar.dump(1, '\t') << '\n';
}

ObservationSet read_observation(const std::string& matrix_path,
                                const std::string& sidecar_path) {
  json sidecar;
  open_in(sidecar_path) >> sidecar;
  const int n = sidecar.at("n").get<int>();

  ObservationSet obs;
  obs.d0_true = sidecar.at("d0_true_m").get<double>();
  obs.sigma = sidecar.at("sigma_m").get<double>();
  obs.c0 = sidecar.at("c0_mps").get<double>();
  obs.mode = sidecar.at("mode").get<std::string>() == "theorem"
                 ? StructuredMode::kTheorem
                 : StructuredMode::kPractical;
  obs.masks.structured = mask_from_json(sidecar.at("structured"), n);
  obs.masks.observed = mask_from_json(sidecar.at("observed"), n);
  obs.values = Matrix::Zero(n, n);

  auto in = open_in(matrix_path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error("read_observation: bad header in " + matrix_path);
  std::size_t rows = 0, cols = 0, entries = 0;
  {
    std::getline(in, line);
    std::istringstream ss(line);
    ss >> rows >> cols >> entries;
    if (static_cast<int>(rows) != n || static_cast<int>(cols) != n)
      throw std::runtime_error("read_observation: dimension mismatch");
  }
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int i = 0, j = 0;
    std::string value;
    ss >> i >> j >> value;
    if (!obs.masks.observed.contains(i - 1, j - 1))
      throw std::runtime_error("read_observation: entry outside observed mask");
    obs.values(i - 1, j - 1) = std::strtod(value.c_str(), nullptr);
    ++seen;
  }
  if (seen != entries)
    throw std::runtime_error("read_observation: entry count mismatch");
  return obs;
}

void write_trace_csv(const CompletionResult& result, const std::string& path) {
  auto out = open_out(path);
  out << "iteration,cost,grad_norm\n";
  for (std::size_t k = 0; k < result.cost_trace.size(); ++k) {
    out << k << ',' << format_double(result.cost_trace[k]) << ',';
    // the gradient is evaluated at the start of each accepted step, so the
    // initial cost row has no gradient entry
    if (k == 0)
      out << "";
    else
      out << format_double(result.gradient_trace[k - 1]);
    out << '\n';
  }
}

void write_cost_curve_csv(const std::vector<CandidateScore>& costs,
                          const std::string& path) {
  auto out = open_out(path);
  out << "candidate_m,cost\n";
  for (const auto& c : costs)
    out << format_double(c.candidate) << ',' << format_double(c.cost) << '\n';
}

}  // namespace ringcal
