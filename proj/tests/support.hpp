#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "rwre/io.hpp"
#include "rwre/rates.hpp"

namespace rwre::test {

#define CHECK_KIND(expr, expected)                          \
  do {                                                      \
    bool thrown_ = false;                                   \
    try {                                                   \
      (void)(expr);                                         \
    } catch (const ::rwre::Error& e_) {                     \
      thrown_ = true;                                       \
      CHECK(e_.kind() == (expected));                       \
    }                                                       \
    CHECK_MESSAGE(thrown_, "expected an error: " #expr);    \
  } while (0)

using EnvPtr = std::shared_ptr<const PeriodicEnvironment>;

inline EnvPtr make_env(std::vector<std::int64_t> periods, std::vector<Point> steps,
                       std::vector<std::vector<double>> cells) {
  const int d = static_cast<int>(periods.size());
  return std::make_shared<const PeriodicEnvironment>(
      std::move(periods), StepRange(d, std::move(steps)), std::move(cells));
}

inline EnvPtr one_cell(double p = 0.7) { return make_env({1}, {{1}, {-1}}, {{p, 1.0 - p}}); }

inline EnvPtr two_cell() {
  return make_env({2}, {{1}, {-1}}, {{0.7, 0.3}, {0.4, 0.6}});
}

inline WordSpacePtr space_of(const EnvPtr& env, int ell) {
  return std::make_shared<const WordSpace>(env, ell);
}

/// H(Bernoulli(a) | Bernoulli(p))
inline double bernoulli_kl(double a, double p) {
  return a * std::log(a / p) + (1.0 - a) * std::log((1.0 - a) / (1.0 - p));
}

/// Strictly positive kernel on the shift support of `space`.
inline WordKernel random_kernel(const WordSpacePtr& space, std::mt19937_64& rng,
                                double floor = 0.05) {
  const std::size_t S = space->num_states(), K = space->num_letters();
  std::uniform_real_distribution<double> unif(floor, 1.0);
  std::vector<double> q(S * K);
  for (std::size_t s = 0; s < S; ++s) {
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) total += q[s * K + k] = unif(rng);
    for (std::size_t k = 0; k < K; ++k) q[s * K + k] /= total;
  }
  return WordKernel(space, std::move(q));
}

/// Random stationary (hence feasible) strictly positive measure.
inline WordMeasure random_feasible_measure(const WordSpacePtr& space,
                                           std::mt19937_64& rng) {
  return stationary_measure(random_kernel(space, rng));
}

inline StateFunction random_function(std::size_t n, std::mt19937_64& rng,
                                     double scale = 1.0) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  StateFunction f{std::vector<double>(n)};
  for (double& v : f.values) v = unif(rng);
  return f;
}

inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

}  // namespace rwre::test
