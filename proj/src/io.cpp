#include "rwre/io.hpp"

#include <fstream>
#include <sstream>

namespace rwre {

json read_json_file(const std::string& path, const char* field) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadConfig, "cannot open " + path, field);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadConfig, e.what(), field);
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::BadConfig, "cannot write " + path, "out");
  out << text;
}

json space_header(const WordSpace& space) {
  const auto& env = space.env();
  return json{{"d", env.dim()},
              {"periods", env.periods()},
              {"range", env.range().steps()},
              {"ell", space.ell()}};
}

void check_header(const json& doc, const WordSpace& space) {
  const json want = space_header(space);
  for (const auto& [key, value] : want.items()) {
    if (!doc.contains(key))
      throw Error(ErrorKind::HeaderMismatch, "header field missing", key);
    if (doc.at(key) != value)
      throw Error(ErrorKind::HeaderMismatch,
                  "header field differs: file has " + doc.at(key).dump() +
                      ", chain has " + value.dump(),
                  key);
  }
}

namespace {

std::vector<double> dense_vector(const json& arr, std::size_t n, const char* field) {
  try {
    auto v = arr.get<std::vector<double>>();
    if (v.size() != n)
      throw Error(ErrorKind::ShapeMismatch,
                  "expected " + std::to_string(n) + " entries, got " +
                      std::to_string(v.size()),
                  field);
    return v;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadConfig, e.what(), field);
  }
}

}  // namespace

WordMeasure load_measure(const json& doc, const WordSpacePtr& space) {
  if (!doc.is_object() || !doc.contains("weights"))
    throw Error(ErrorKind::BadConfig, "measure file needs header and weights", "weights");
  check_header(doc, *space);
  WordMeasure mu{space, dense_vector(doc.at("weights"), space->num_states(), "weights")};
  double total = 0.0;
  for (double w : mu.weights) {
    if (!(w >= 0.0))
      throw Error(ErrorKind::BadConfig, "measure weights must be nonnegative", "weights");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw Error(ErrorKind::NotStochastic, "measure weights must sum to 1", "weights");
  return mu;
}

json measure_json(const WordMeasure& mu) {
  json j = space_header(*mu.space);
  j["weights"] = mu.weights;
  return j;
}

StateFunction load_tilt(const json& doc, const WordSpace& space) {
  const std::size_t S = space.num_states();
  const json* values = &doc;
  if (doc.is_object()) {
    check_header(doc, space);
    if (!doc.contains("values"))
      throw Error(ErrorKind::BadConfig, "tilt object needs values", "values");
    values = &doc.at("values");
  }
  if (!values->is_array())
    throw Error(ErrorKind::BadConfig, "tilt must be an array", "f");
  if (!values->empty() && values->front().is_array()) {
    StateFunction f{std::vector<double>(S, 0.0)};
    for (const auto& pair : *values) {
      if (!pair.is_array() || pair.size() != 2)
        throw Error(ErrorKind::BadConfig, "tilt pairs must be [state, value]", "f");
      const auto s = pair[0].get<long long>();
      if (s < 0 || static_cast<std::size_t>(s) >= S)
        throw Error(ErrorKind::ShapeMismatch, "tilt state index out of range", "f");
      f.values[s] = pair[1].get<double>();
    }
    return f;
  }
  return StateFunction{dense_vector(*values, S, "f")};
}

ClassKFunction load_f_table(const json& doc, const WordSpacePtr& space) {
  const std::size_t S = space->num_states(), K = space->num_letters();
  const json* table = &doc;
  if (doc.is_object()) {
    check_header(doc, *space);
    if (!doc.contains("table"))
      throw Error(ErrorKind::BadConfig, "F object needs table", "table");
    table = &doc.at("table");
  }
  if (!table->is_array()) throw Error(ErrorKind::BadConfig, "F must be an array", "F");
  ClassKFunction F{space, {}};
  if (!table->empty() && table->front().is_array()) {
    if (table->size() != S)
      throw Error(ErrorKind::ShapeMismatch, "F needs one row per state", "F");
    for (const auto& row : *table) {
      const auto r = dense_vector(row, K, "F");
      F.table.insert(F.table.end(), r.begin(), r.end());
    }
  } else {
    F.table = dense_vector(*table, S * K, "F");
  }
  return F;
}

json kernel_json(const WordKernel& kernel) {
  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  json j = space_header(space);
  j["states"] = S;
  json probs = json::array(), succ = json::array();
  for (std::size_t s = 0; s < S; ++s) {
    probs.push_back(std::vector<double>(kernel.row(s).begin(), kernel.row(s).end()));
    json r = json::array();
    for (std::size_t k = 0; k < K; ++k) r.push_back(space.successor(s, k));
    succ.push_back(std::move(r));
  }
  j["probs"] = std::move(probs);
  j["successors"] = std::move(succ);
  return j;
}

json edge_json(const EdgeMeasure& alpha) {
  const std::size_t S = alpha.space->num_states(), K = alpha.space->num_letters();
  json j = space_header(*alpha.space);
  json rows = json::array();
  for (std::size_t s = 0; s < S; ++s)
    rows.push_back(std::vector<double>(alpha.weights.begin() + s * K,
                                       alpha.weights.begin() + (s + 1) * K));
  j["alpha"] = std::move(rows);
  return j;
}

PeriodicEnvironment random_environment(std::mt19937_64& rng, std::int64_t period,
                                       std::size_t letters, double floor) {
  std::vector<Point> steps{{1}, {-1}};
  if (letters >= 3) steps.push_back({0});
  std::uniform_real_distribution<double> unif(floor, 1.0);
  std::vector<std::vector<double>> cells(period);
  for (auto& row : cells) {
    double total = 0.0;
    for (std::size_t k = 0; k < steps.size(); ++k) total += row.emplace_back(unif(rng));
    for (double& p : row) p /= total;
  }
  return PeriodicEnvironment({period}, StepRange(1, std::move(steps)), std::move(cells));
}

}  // namespace rwre
