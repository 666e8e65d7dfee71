#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rwre/entropy.hpp"

namespace rwre {

/// Outcome of a rate / conjugate computation.
///
/// `value` is the reported number (meaningless when `infinite`). `gap` is the
/// distance between the two bounds the solver maintains (primal - dual for
/// entropy problems, upper certificate - primal value for conjugates), so a
/// converged report has gap below the solver tolerance. `cross_value` holds
/// the second route where one exists (dual for primal problems, closed form
/// for kbar).
struct RateReport {
  double value = 0.0;
  bool infinite = false;
  double gap = 0.0;
  double cross_value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> potential;    // h certificate, h(state 0) = 0
  std::optional<EdgeMeasure> edge;  // alpha certificate
};

struct SolverOptions {
  double tolerance = 1e-13;      // marginal error / gradient norm target
  std::size_t max_iterations = 100'000;
};

/// True iff some edge measure on the support of p^+ has both marginals mu
/// (max-flow decision, tolerance 1e-10 on the deficit).
bool stationary_feasible(const WordMeasure& mu, const WordKernel& kernel,
                         double tol = 1e-10);

/// H_l(mu) = inf { H(mu x q | mu x p^+) : mu q = mu }; +inf when infeasible.
RateReport rate_primal(const WordMeasure& mu, const WordKernel& kernel,
                       const SolverOptions& opts = {});

/// Donsker-Varadhan dual sup_h E^mu[h - log p^+ e^h]. Falls back to the
/// primal when mu has zero entries.
RateReport rate_dual(const WordMeasure& mu, const WordKernel& kernel,
                     const SolverOptions& opts = {.tolerance = 1e-10,
                                                  .max_iterations = 10'000});

/// E^mu[h - log p^+ e^h] at a given h.
double dual_objective(const WordMeasure& mu, const WordKernel& kernel,
                      const std::vector<double>& h);

/// sup over stationary edge measures of E^mu[f] - H(mu x q | mu x p^+).
RateReport legendre_rate(const StateFunction& f, const WordKernel& kernel,
                         const SolverOptions& opts = {.tolerance = 1e-13,
                                                      .max_iterations = 500});

/// K_{l,h}(f) = max_s log sum_z p^+(s, S_z s) e^{f(s) - h(s) + h(S_z s)}.
double k_ell_h(const StateFunction& f, const std::vector<double>& h,
               const WordKernel& kernel);

/// inf_h K_{l,h}(f). `value` comes from direct minimisation of the
/// max-of-logsumexp objective; `cross_value` from the closed form
/// h = log(Perron vector). `gap` = |value - cross_value|.
RateReport kbar(const StateFunction& f, const WordKernel& kernel);

/// rate_primal(mu) + kbar(f) - E^mu[f]  (>= 0 by weak duality).
double fenchel_young_check(const StateFunction& f, const WordMeasure& mu,
                           const WordKernel& kernel);

/// inf { H_l(mu) : mean step v }; +inf outside the convex hull of the range.
RateReport level1_rate(const std::vector<double>& v, const WordKernel& kernel);

/// Zero set of the level-1 rate: the mean step of the stationary law.
std::vector<std::vector<double>> zero_set(const WordKernel& kernel);

/// Rate of the point mass frozen at (cell 0, word 0...0).
double singular_example_rate(const PeriodicEnvironment& env, int ell);

/// f(s) = theta . (first letter of s)
StateFunction first_step_tilt(const WordSpace& space,
                              const std::vector<double>& theta);

}  // namespace rwre
