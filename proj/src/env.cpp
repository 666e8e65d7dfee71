#include "rwre/env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace rwre {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorKind::DuplicateStep: return "DuplicateStep";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::HeaderMismatch: return "HeaderMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::PathTooShort: return "PathTooShort";
    case ErrorKind::ZeroMassState: return "ZeroMassState";
    case ErrorKind::ZeroNotInRange: return "ZeroNotInRange";
    case ErrorKind::NonGradient: return "NonGradient";
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::TiltNotFound: return "TiltNotFound";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateWeights: return "DegenerateWeights";
    case ErrorKind::StateBudgetExceeded: return "StateBudgetExceeded";
    case ErrorKind::SearchBudgetExceeded: return "SearchBudgetExceeded";
    case ErrorKind::EnumerationBudgetExceeded: return "EnumerationBudgetExceeded";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoConvergence:
    case ErrorKind::DegenerateWeights:
      return 2;
    case ErrorKind::StateBudgetExceeded:
    case ErrorKind::SearchBudgetExceeded:
    case ErrorKind::EnumerationBudgetExceeded:
      return 3;
    default:
      return 1;
  }
}

// ---------------------------------------------------------------------------
// StepRange

StepRange::StepRange(int dim, std::vector<Point> steps, std::int64_t bound)
    : dim_(dim), steps_(std::move(steps)) {
  if (dim_ < 1) throw Error(ErrorKind::DimensionMismatch, "d must be >= 1", "d");
  if (steps_.empty())
    throw Error(ErrorKind::BadConfig, "range must be nonempty", "range");
  for (const auto& z : steps_) {
    if (static_cast<int>(z.size()) != dim_)
      throw Error(ErrorKind::DimensionMismatch,
                  "step has wrong dimension", "range");
    for (auto c : z)
      if (std::abs(c) > bound)
        throw Error(ErrorKind::BadConfig, "step exceeds the range bound",
                    "range");
  }
  auto sorted = steps_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorKind::DuplicateStep, "duplicate step in range", "range");
}

std::optional<std::size_t> StepRange::index_of(
    std::span<const std::int64_t> z) const {
  for (std::size_t i = 0; i < steps_.size(); ++i)
    if (std::equal(z.begin(), z.end(), steps_[i].begin(), steps_[i].end()))
      return i;
  return std::nullopt;
}

bool check_span(const StepRange& range) {
  // Column-style Hermite reduction of the d x |R| step matrix. The lattice is
  // Z^d iff every pivot of the triangular basis is +-1.
  const int d = range.dim();
  std::vector<Point> cols = range.steps();
  std::size_t first = 0;
  for (int row = 0; row < d; ++row) {
    // Euclid across columns [first, end) on this row.
    while (true) {
      std::size_t best = cols.size();
      for (std::size_t j = first; j < cols.size(); ++j) {
        if (cols[j][row] == 0) continue;
        if (best == cols.size() ||
            std::abs(cols[j][row]) < std::abs(cols[best][row]))
          best = j;
      }
      if (best == cols.size()) return false;  // rank deficient
      std::swap(cols[first], cols[best]);
      bool reduced = true;
      for (std::size_t j = first + 1; j < cols.size(); ++j) {
        const std::int64_t q = cols[j][row] / cols[first][row];
        if (q != 0)
          for (int r = 0; r < d; ++r) cols[j][r] -= q * cols[first][r];
        if (cols[j][row] != 0) reduced = false;
      }
      if (reduced) break;
    }
    if (std::abs(cols[first][row]) != 1) return false;
    ++first;
  }
  return true;
}

// ---------------------------------------------------------------------------
// PeriodicEnvironment

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// Divide by the parsed sum, then nudge the largest entry until the
// left-to-right sum is exactly 1. Rows already summing to 1 are untouched,
// which makes validation idempotent.
void renormalize(std::vector<double>& row) {
  double s = 0.0;
  for (double v : row) s += v;
  if (s == 1.0) return;
  for (double& v : row) v /= s;
  // 1 - a is exact or rounds back, so a + (1 - a) == 1 for a in (0, 1).
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < row.size(); ++i) head += row[i];
  row.back() = 1.0 - head;
}

}  // namespace

PeriodicEnvironment::PeriodicEnvironment(std::vector<std::int64_t> periods,
                                         StepRange range,
                                         std::vector<std::vector<double>> cells)
    : periods_(std::move(periods)), range_(std::move(range)),
      cells_(std::move(cells)) {
  if (static_cast<int>(periods_.size()) != range_.dim())
    throw Error(ErrorKind::DimensionMismatch,
                "periods length differs from d", "periods");
  std::size_t n = 1;
  for (auto L : periods_) {
    if (L < 1)
      throw Error(ErrorKind::BadConfig, "periods must be positive", "periods");
    n *= static_cast<std::size_t>(L);
  }
  if (cells_.size() != n)
    throw Error(ErrorKind::DimensionMismatch,
                "cell count differs from torus size", "cells");
  for (auto& row : cells_) {
    if (row.size() != range_.size())
      throw Error(ErrorKind::DimensionMismatch,
                  "cell probability vector length differs from |range|",
                  "cells");
    double s = 0.0;
    for (double v : row) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw Error(ErrorKind::NonPositiveEntry,
                    "cell probabilities must be strictly positive", "cells");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "cell probabilities sum to " << s;
      throw Error(ErrorKind::NotStochastic, msg.str(), "cells");
    }
    renormalize(row);
  }
  const std::size_t k = range_.size();
  shift_table_.resize(n * k);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t j = 0; j < k; ++j)
      shift_table_[u * k + j] = shift(u, range_[j]);
}

std::size_t PeriodicEnvironment::cell_index(
    std::span<const std::int64_t> x) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < periods_.size(); ++i)
    idx = idx * periods_[i] + floor_mod(x[i], periods_[i]);
  return idx;
}

Point PeriodicEnvironment::cell_point(std::size_t u) const {
  Point p(periods_.size());
  for (std::size_t i = periods_.size(); i-- > 0;) {
    p[i] = static_cast<std::int64_t>(u % periods_[i]);
    u /= periods_[i];
  }
  return p;
}

std::size_t PeriodicEnvironment::shift(std::size_t u,
                                       std::span<const std::int64_t> z) const {
  Point p = cell_point(u);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += z[i];
  return cell_index(p);
}

std::span<const double> cell_transition(const PeriodicEnvironment& env,
                                        std::span<const std::int64_t> x) {
  return env.cell(env.cell_index(x));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
T field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name))
    throw Error(ErrorKind::BadConfig, std::string("missing field ") + name,
                name);
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadConfig, e.what(), name);
  }
}

}  // namespace

PeriodicEnvironment validate_environment(const nlohmann::json& config) {
  if (!config.is_object())
    throw Error(ErrorKind::BadConfig, "environment must be a JSON object");
  const int d = field<int>(config, "d");
  auto periods = field<std::vector<std::int64_t>>(config, "periods");
  auto steps = field<std::vector<Point>>(config, "range");
  StepRange range(d, std::move(steps));
  if (static_cast<int>(periods.size()) != d)
    throw Error(ErrorKind::DimensionMismatch, "periods length differs from d",
                "periods");
  for (auto L : periods)
    if (L < 1)
      throw Error(ErrorKind::BadConfig, "periods must be positive", "periods");

  const auto& cells_json = config.contains("cells") ? config.at("cells")
                                                    : nlohmann::json();
  if (!cells_json.is_object())
    throw Error(ErrorKind::BadConfig, "cells must be an object", "cells");
  std::size_t n = 1;
  for (auto L : periods) n *= static_cast<std::size_t>(L);
  std::vector<std::vector<double>> cells(n);
  std::vector<bool> seen(n, false);
  for (const auto& [key, value] : cells_json.items()) {
    Point u;
    std::stringstream ss(key);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        u.push_back(std::stoll(tok));
      } catch (...) {
        throw Error(ErrorKind::BadConfig, "bad cell key '" + key + "'",
                    "cells");
      }
    }
    if (static_cast<int>(u.size()) != d)
      throw Error(ErrorKind::DimensionMismatch,
                  "cell key '" + key + "' has wrong dimension", "cells");
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) {
      if (u[i] < 0 || u[i] >= periods[i])
        throw Error(ErrorKind::DimensionMismatch,
                    "cell key '" + key + "' outside the torus", "cells");
      idx = idx * periods[i] + u[i];
    }
    if (seen[idx])
      throw Error(ErrorKind::BadConfig, "cell '" + key + "' listed twice",
                  "cells");
    seen[idx] = true;
    try {
      cells[idx] = value.get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::BadConfig, e.what(), "cells");
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw Error(ErrorKind::DimensionMismatch, "missing torus cells", "cells");
  return PeriodicEnvironment(std::move(periods), std::move(range),
                             std::move(cells));
}

PeriodicEnvironment load_environment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadConfig, "cannot open " + path, "config");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadConfig, e.what(), "config");
  }
  return validate_environment(j);
}

nlohmann::json emit_environment(const PeriodicEnvironment& env) {
  nlohmann::json j;
  j["d"] = env.dim();
  j["periods"] = env.periods();
  j["range"] = env.range().steps();
  nlohmann::json cells = nlohmann::json::object();
  for (std::size_t u = 0; u < env.num_cells(); ++u) {
    const Point p = env.cell_point(u);
    std::string key;
    for (std::size_t i = 0; i < p.size(); ++i)
      key += (i ? "," : "") + std::to_string(p[i]);
    cells[key] = env.cells()[u];
  }
  j["cells"] = cells;
  return j;
}

// ---------------------------------------------------------------------------
// Ellipticity

bool EllipticityReport::all_reachable() const {
  return std::all_of(directions.begin(), directions.end(), [](const auto& r) {
    return r.status == Reachability::Reachable;
  });
}

EllipticityReport check_ellipticity(const StepRange& range, int max_len) {
  if (max_len < 1)
    throw Error(ErrorKind::BadConfig, "max_len must be >= 1", "max_len");
  const int d = range.dim();
  EllipticityReport report;
  report.max_len = max_len;
  const bool spans = check_span(range);

  std::map<Point, std::pair<Point, std::size_t>> parent;  // pos -> (prev, letter)
  std::deque<std::pair<Point, int>> frontier;
  const Point origin(d, 0);
  parent.emplace(origin, std::make_pair(origin, std::size_t{0}));
  frontier.emplace_back(origin, 0);
  while (!frontier.empty()) {
    auto [pos, len] = frontier.front();
    frontier.pop_front();
    if (len == max_len) continue;
    for (std::size_t k = 0; k < range.size(); ++k) {
      Point next = pos;
      for (int i = 0; i < d; ++i) next[i] += range[k][i];
      if (parent.emplace(next, std::make_pair(pos, k)).second)
        frontier.emplace_back(std::move(next), len + 1);
    }
  }

  for (int i = 0; i < d; ++i) {
    for (int sign : {+1, -1}) {
      DirectionReport dr;
      dr.target.assign(d, 0);
      dr.target[i] = sign;
      auto it = parent.find(dr.target);
      if (it != parent.end()) {
        dr.status = Reachability::Reachable;
        Point cur = dr.target;
        while (cur != origin) {
          const auto& [prev, letter] = parent.at(cur);
          dr.witness.push_back(letter);
          cur = prev;
        }
        std::reverse(dr.witness.begin(), dr.witness.end());
      } else {
        dr.status = spans ? Reachability::UnreachableWithinBudget
                          : Reachability::ProvenUnreachable;
      }
      report.directions.push_back(std::move(dr));
    }
  }
  return report;
}

std::optional<std::vector<std::size_t>> steps_to(
    const EllipticityReport& report, std::span<const std::int64_t> target) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] == 0) continue;
    const auto& dir = report.directions[2 * i + (target[i] > 0 ? 0 : 1)];
    if (dir.status != Reachability::Reachable) return std::nullopt;
    for (std::int64_t k = 0; k < std::abs(target[i]); ++k)
      out.insert(out.end(), dir.witness.begin(), dir.witness.end());
  }
  return out;
}

}  // namespace rwre
