#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "rwre/error.hpp"

namespace rwre {

using Point = std::vector<std::int64_t>;

/// Admissible steps of the walk: distinct integer vectors of a common
/// dimension, stored in the order given by the configuration.
class StepRange {
 public:
  static constexpr std::int64_t kDefaultBound = 64;

  StepRange() = default;
  StepRange(int dim, std::vector<Point> steps,
            std::int64_t bound = kDefaultBound);

  int dim() const { return dim_; }
  std::size_t size() const { return steps_.size(); }
  const Point& operator[](std::size_t i) const { return steps_[i]; }
  const std::vector<Point>& steps() const { return steps_; }

  /// Index of `z` in the range, if present.
  std::optional<std::size_t> index_of(std::span<const std::int64_t> z) const;

  bool operator==(const StepRange&) const = default;

 private:
  int dim_ = 0;
  std::vector<Point> steps_;
};

/// True iff the additive group generated by the steps is all of Z^d.
bool check_span(const StepRange& range);

/// Periodic environment on the torus Z^d / (L_1 Z x ... x L_d Z). Every cell
/// carries a strictly positive probability vector over the shared range.
class PeriodicEnvironment {
 public:
  PeriodicEnvironment() = default;
  /// Validates and renormalises. `cells` is indexed by cell_index.
  PeriodicEnvironment(std::vector<std::int64_t> periods, StepRange range,
                      std::vector<std::vector<double>> cells);

  int dim() const { return range_.dim(); }
  const std::vector<std::int64_t>& periods() const { return periods_; }
  const StepRange& range() const { return range_; }
  std::size_t num_cells() const { return cells_.size(); }

  /// Probability vector of cell `u` (row-major cell index).
  std::span<const double> cell(std::size_t u) const { return cells_[u]; }
  const std::vector<std::vector<double>>& cells() const { return cells_; }

  /// Row-major index of the torus point obtained by reducing x modulo the
  /// periods (mathematical modulus, never negative).
  std::size_t cell_index(std::span<const std::int64_t> x) const;
  /// Torus coordinates of a row-major cell index.
  Point cell_point(std::size_t u) const;
  /// Cell index of (cell u) + step z.
  std::size_t shift(std::size_t u, std::span<const std::int64_t> z) const;
  /// Cell index of (cell u) + range[k]; precomputed.
  std::size_t shift_by_letter(std::size_t u, std::size_t k) const {
    return shift_table_[u * range_.size() + k];
  }

  bool operator==(const PeriodicEnvironment& o) const {
    return periods_ == o.periods_ && range_ == o.range_ && cells_ == o.cells_;
  }

 private:
  std::vector<std::int64_t> periods_;
  StepRange range_;
  std::vector<std::vector<double>> cells_;
  std::vector<std::size_t> shift_table_;
};

/// Parses and validates the JSON environment document
/// {"d", "periods", "range", "cells": {"u1,u2,...": [p...]}}.
PeriodicEnvironment validate_environment(const nlohmann::json& config);
PeriodicEnvironment load_environment(const std::string& path);
nlohmann::json emit_environment(const PeriodicEnvironment& env);

/// p_.(u) for u = x mod periods.
std::span<const double> cell_transition(const PeriodicEnvironment& env,
                                        std::span<const std::int64_t> x);

enum class Reachability { Reachable, UnreachableWithinBudget, ProvenUnreachable };

struct DirectionReport {
  Point target;  // +e_i or -e_i
  Reachability status = Reachability::UnreachableWithinBudget;
  std::vector<std::size_t> witness;  // letter indices summing to target
};

struct EllipticityReport {
  std::vector<DirectionReport> directions;  // +e_1, -e_1, +e_2, ...
  int max_len = 0;
  bool all_reachable() const;
};

/// Breadth-first search for each of +-e_i as a sum of at most max_len steps.
EllipticityReport check_ellipticity(const StepRange& range, int max_len);

/// Letter sequence summing to `target`, built from the ellipticity witnesses
/// (|target_i| copies of the +-e_i witness). Empty optional if some needed
/// direction is unreachable.
std::optional<std::vector<std::size_t>> steps_to(
    const EllipticityReport& report, std::span<const std::int64_t> target);

}  // namespace rwre
