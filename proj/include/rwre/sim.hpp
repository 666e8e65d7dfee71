#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rwre/rates.hpp"

namespace rwre {

/// Counter-based generator: the uniform for (seed, sample, step) is a pure
/// function of the triple, so results do not depend on scheduling.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t sample,
                           std::uint64_t step);
double counter_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t step);

struct SimConfig {
  std::size_t n = 1000;
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  Point start;            // empty means the origin
  bool parallel = true;
};

/// Quenched walk of cfg.n steps; replicate `sample` of the seed.
WalkPath simulate_walk(const PeriodicEnvironment& env, const SimConfig& cfg,
                       std::uint64_t sample = 0);

/// CSV with header k,z_1..z_d,u_1..u_d; u is the torus cell where step k
/// was drawn (k counts from 1).
void write_path_csv(const PeriodicEnvironment& env, const WalkPath& path,
                    std::ostream& out);

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
  double ess = 0.0;
};

/// n^{-1} log of the sample mean of exp(sum_{k<n} f(zeta_k)), where zeta_0 is
/// the word state after the first ell steps. Jackknife standard error.
/// Throws DegenerateWeights when the effective sample size is below 10.
McEstimate mc_cgf(const PeriodicEnvironment& env, const StateFunction& f, int ell,
                  const SimConfig& cfg);

struct RareEventProbability {
  double probability = 0.0;
  double log_probability = 0.0;  // -inf when the event is empty
  bool used_dp = false;
};

/// P{ n^{-1} sum_{k<n} f(zeta_k) >= a } for the walk started at `start`.
/// Dynamic programming over (state, partial sum) when f is an integer table
/// after scaling by some m <= 1024, otherwise full path enumeration.
RareEventProbability exact_rare_event(const PeriodicEnvironment& env,
                                      const StateFunction& f, int ell,
                                      std::size_t n, double a,
                                      const Point& start = {},
                                      std::size_t max_entries = 50'000'000);

struct TiltSolution {
  double t = 0.0;
  double log_mgf = 0.0;   // Lambda(t)
  double rate = 0.0;      // t a - Lambda(t)
};

/// t with Lambda'(t) = a by bisection. Throws TiltNotFound outside the range.
TiltSolution solve_tilt(const WordKernel& kernel, const StateFunction& f, double a);

struct ImportanceEstimate {
  double rate = 0.0;        // -n^{-1} log P-hat
  double se = 0.0;          // delta-method standard error of `rate`
  double reference = 0.0;   // t* a - Lambda(t*)
  double t = 0.0;
  double ess = 0.0;
  double hit_fraction = 0.0;
};

ImportanceEstimate importance_rate(const PeriodicEnvironment& env,
                                   const StateFunction& f, int ell, double a,
                                   const SimConfig& cfg, double eps = 1e-3);

/// S log(n+1)/n + 2 se
double verdict_envelope(std::size_t states, std::size_t n, double se);
/// log(S (n+1)^S)/n
double decay_sandwich(std::size_t states, std::size_t n);

struct LdpVerdict {
  std::size_t n = 0;
  double estimate = 0.0;
  double se = 0.0;
  double reference = 0.0;
  double envelope = 0.0;
  bool has_exact = false;
  double exact = 0.0;
  double exact_envelope = 0.0;
  bool pass = false;
};

LdpVerdict ldp_verify(const PeriodicEnvironment& env, const StateFunction& f,
                      int ell, double a, const SimConfig& cfg, double eps = 1e-3);

}  // namespace rwre
