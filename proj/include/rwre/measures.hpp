#pragma once

#include <cstdint>
#include <vector>

#include "rwre/chain.hpp"

namespace rwre {

/// Probability on word states.
struct WordMeasure {
  WordSpacePtr space;
  std::vector<double> weights;

  double expectation(const StateFunction& f) const;
};

/// Joint law alpha(s, k) on (state, appended letter) pairs.
struct EdgeMeasure {
  WordSpacePtr space;
  std::vector<double> weights;  // S x |R|

  double at(std::size_t s, std::size_t k) const {
    return weights[s * space->num_letters() + k];
  }
  WordMeasure source_marginal() const;
  WordMeasure target_marginal() const;
  /// ||source - target||_1
  double stationarity_defect() const;
  /// sum alpha(s, k) * range[k]
  std::vector<double> mean_step() const;
};

/// Quenched walk path: start point and letter indices Z_1..Z_N.
struct WalkPath {
  Point start;
  std::vector<std::size_t> letters;
};

/// Unique mu with mu K = mu (linear solve with normalisation; valid for
/// periodic chains as well). Throws NotIrreducible.
WordMeasure stationary_measure(const WordKernel& kernel);

struct TorusLaw {
  std::vector<double> weights;  // per torus cell
  std::size_t period = 1;       // period of the torus chain
};

/// Stationary law of the environment chain Pi g(u) = sum_z p_z(u) g(u+z).
TorusLaw environment_stationary(const PeriodicEnvironment& env);

/// Exact visit counts of (X_k mod L, Z_{k+1..k+ell}) for k < n.
struct EmpiricalCounts {
  WordSpacePtr space;
  std::vector<std::uint64_t> counts;
  std::uint64_t n = 0;

  WordMeasure measure() const;
};

/// n = 0 selects the default n = N - ell. Throws PathTooShort.
EmpiricalCounts empirical_word_counts(const WalkPath& path,
                                      const WordSpacePtr& space,
                                      std::size_t n = 0);
WordMeasure empirical_word_measure(const WalkPath& path,
                                   const WordSpacePtr& space,
                                   std::size_t n = 0);

/// Pushforward under truncation of words to their first `level` letters.
WordMeasure restrict_level(const WordMeasure& mu, int level);
EmpiricalCounts restrict_level(const EmpiricalCounts& c, int level);
/// Same environment, lower level.
WordSpacePtr level_space(const WordSpace& space, int level);

struct KernelDecomposition {
  WordMeasure mu;
  WordKernel q;
};

/// alpha -> (mu, q) with q(s, k) = alpha(s, k) / mu(s). Zero-mass rows take
/// the row of `fallback` if given, otherwise the uniform row.
KernelDecomposition edge_to_kernel(const EdgeMeasure& alpha,
                                   const WordKernel* fallback = nullptr);
/// alpha = mu x q
EdgeMeasure edge_measure(const WordMeasure& mu, const WordKernel& q);

}  // namespace rwre
