#include "support.hpp"
#include "rwre/sim.hpp"

using namespace rwre;
using namespace rwre::test;

TEST_SUITE("measures") {

TEST_CASE("stationary measure examples") {
  const auto k = build_word_chain(*one_cell(), 1);
  const auto mu = stationary_measure(k);
  CHECK(mu.weights[0] == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(mu.weights[1] == doctest::Approx(0.3).epsilon(1e-14));

  const auto sym = make_env({3}, {{1}, {-1}}, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
  const auto ks = build_word_chain(*sym, 2);
  for (double w : stationary_measure(ks).weights)
    CHECK(w == doctest::Approx(1.0 / 12).epsilon(1e-13));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto env = std::make_shared<const PeriodicEnvironment>(
        random_environment(rng, 1 + trial % 3, 2 + trial % 2));
    const auto kr = build_word_chain(*env, 1 + trial % 3);
    const auto m = stationary_measure(kr);
    EdgeMeasure a = edge_measure(m, kr);
    CHECK(l1_distance(a.target_marginal().weights, m.weights) <= 1e-12);
    for (double w : m.weights) CHECK(w >= 0.0);
  }
}

TEST_CASE("environment stationary law") {
  const auto one = environment_stationary(*one_cell());
  CHECK(one.weights == std::vector<double>{1.0});
  const auto two = environment_stationary(*two_cell());
  CHECK(two.period == 2);
  CHECK(two.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(two.weights[1] == doctest::Approx(0.5).epsilon(1e-14));
  const auto three = environment_stationary(
      *make_env({3}, {{1}, {-1}}, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}));
  for (double w : three.weights) CHECK(w == doctest::Approx(1.0 / 3).epsilon(1e-14));
  const auto stuck = make_env({2}, {{2}, {0}}, {{0.5, 0.5}, {0.5, 0.5}});
  CHECK_KIND(environment_stationary(*stuck), ErrorKind::NotIrreducible);
}

TEST_CASE("empirical measures") {
  const auto env = one_cell();
  const WalkPath constant{{0}, std::vector<std::size_t>(11, 0)};
  const auto mu = empirical_word_measure(constant, space_of(env, 1), 10);
  CHECK(mu.weights[0] == 1.0);
  CHECK(mu.weights[1] == 0.0);
  CHECK_KIND(empirical_word_measure(WalkPath{{0}, {0, 1}}, space_of(env, 2), 5),
             ErrorKind::PathTooShort);

  SimConfig cfg;
  cfg.n = 500;
  cfg.seed = 9;
  const auto tenv = two_cell();
  const auto path = simulate_walk(*tenv, cfg);
  const auto s2 = space_of(tenv, 2), s1 = space_of(tenv, 1);
  const std::size_t n = 400;
  const auto r2 = empirical_word_counts(path, s2, n);
  const auto r1 = empirical_word_counts(path, s1, n);
  CHECK(restrict_level(r2, 1).counts == r1.counts);
  const auto m21 = restrict_level(r2.measure(), 1).weights;
  for (std::size_t s = 0; s < m21.size(); ++s)
    CHECK(m21[s] == doctest::Approx(r1.measure().weights[s]).epsilon(1e-15));

  // Shift defect: the mean of f one step later differs by at most 2 max|f| / n.
  std::mt19937_64 rng(4);
  const auto m2 = r2.measure();
  const auto later = empirical_word_counts(path, s2, n + 1);
  const auto first = empirical_word_counts(path, s2, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_function(s2->num_states(), rng);
    double fmax = 0.0, shifted = 0.0;
    for (double v : f.values) fmax = std::max(fmax, std::abs(v));
    for (std::size_t s = 0; s < s2->num_states(); ++s)
      shifted += f.values[s] * (static_cast<double>(later.counts[s]) -
                                static_cast<double>(first.counts[s]));
    CHECK(std::abs(shifted / n - m2.expectation(f)) <= 2.0 * fmax / n + 1e-12);
  }
}

TEST_CASE("restrict_level") {
  const auto s3 = space_of(two_cell(), 3);
  WordMeasure point{s3, std::vector<double>(s3->num_states(), 0.0)};
  point.weights[s3->state_index(1, 5)] = 1.0;  // letters (1, 0, 1), oldest first
  const auto r1 = restrict_level(point, 1);
  CHECK(r1.weights[r1.space->state_index(1, 1)] == 1.0);
  WordMeasure uni{s3, std::vector<double>(s3->num_states(), 1.0 / s3->num_states())};
  const auto u2 = restrict_level(uni, 2);
  for (double w : u2.weights) CHECK(w == doctest::Approx(1.0 / 8).epsilon(1e-15));

  std::mt19937_64 rng(8);
  const auto a = random_feasible_measure(s3, rng), b = random_feasible_measure(s3, rng);
  WordMeasure mix{s3, std::vector<double>(s3->num_states())};
  for (std::size_t s = 0; s < s3->num_states(); ++s)
    mix.weights[s] = 0.3 * a.weights[s] + 0.7 * b.weights[s];
  const auto ra = restrict_level(a, 2), rb = restrict_level(b, 2), rm = restrict_level(mix, 2);
  double total = 0.0;
  for (std::size_t s = 0; s < rm.weights.size(); ++s) {
    CHECK(rm.weights[s] == doctest::Approx(0.3 * ra.weights[s] + 0.7 * rb.weights[s]).epsilon(1e-14));
    total += rm.weights[s];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("edge_to_kernel") {
  const auto k = build_word_chain(*two_cell(), 1);
  const auto mu = stationary_measure(k);
  const auto alpha = edge_measure(mu, k);
  const auto dec = edge_to_kernel(alpha);
  for (std::size_t e = 0; e < k.probs().size(); ++e)
    CHECK(dec.q.probs()[e] == doctest::Approx(k.probs()[e]).epsilon(1e-14));
  const auto back = edge_measure(dec.mu, dec.q);
  for (std::size_t e = 0; e < alpha.weights.size(); ++e)
    CHECK(back.weights[e] == doctest::Approx(alpha.weights[e]).epsilon(1e-15));

  // Point mass on a self-returning edge: one-cell, word +1, letter +1.
  const auto k1 = build_word_chain(*one_cell(), 1);
  EdgeMeasure self{k1.space_ptr(), {1.0, 0.0, 0.0, 0.0}};
  CHECK(self.stationarity_defect() == 0.0);
  const auto d1 = edge_to_kernel(self, &k1);
  CHECK(d1.q.prob(0, 0) == 1.0);
  CHECK(d1.q.prob(0, 1) == 0.0);
}

TEST_CASE("ergodic convergence and drift derivative") {
  const auto env = two_cell();
  const auto k = build_word_chain(*env, 2);
  const auto mu = stationary_measure(k);
  int close = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SimConfig cfg;
    cfg.n = 100000;
    cfg.seed = seed;
    const auto path = simulate_walk(*env, cfg);
    const auto emp = empirical_word_measure(path, k.space_ptr());
    close += l1_distance(emp.weights, mu.weights) <= 0.05;
  }
  CHECK(close == 20);

  // Mean step of the Doob chain equals Lambda'(theta).
  for (double theta : {-0.7, 0.0, 0.4}) {
    const double h = 1e-5;
    auto lambda = [&](double th) {
      return pf_log_eigenvalue(tilt_kernel(k, first_step_tilt(k.space(), {th}))).log_eigenvalue;
    };
    const double deriv = (lambda(theta + h) - lambda(theta - h)) / (2 * h);
    const auto q = doob_transform(k, first_step_tilt(k.space(), {theta}));
    const auto drift = edge_measure(stationary_measure(q), q).mean_step();
    CHECK(std::abs(drift[0] - deriv) <= 1e-4);
  }
}

}  // TEST_SUITE
