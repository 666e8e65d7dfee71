#include <map>

#include "support.hpp"

using namespace rwre;
using namespace rwre::test;

namespace {

// Conditional entropy sum_{i<=n} H(Z_i | X_0 cell, Z_{<i}) of the model
// against the quenched walk, by enumerating every word of length n.
double brute_prefix_entropy(const FiniteMemoryModel& m, int n) {
  const auto& sp = m.kernel.space();
  const auto& env = sp.env();
  const std::size_t K = sp.num_letters();
  const int L = sp.ell();
  const int len = std::max(n, L);  // words shorter than L are marginals
  std::size_t words = 1, drop = 1;
  for (int i = 0; i < len; ++i) words *= K;
  for (int i = n; i < len; ++i) drop *= K;
  double total = 0.0;
  std::vector<std::size_t> z(len);
  for (std::size_t u = 0; u < env.num_cells(); ++u) {
    std::map<std::size_t, double> model;  // prefix of length n -> probability
    for (std::size_t w = 0; w < words; ++w) {
      std::size_t rest = w;
      for (int i = len - 1; i >= 0; --i) {
        z[i] = rest % K;
        rest /= K;
      }
      // model probability: stationary law of the first L letters, then kernel
      std::vector<std::size_t> head(z.begin(), z.begin() + L);
      std::size_t s = sp.state_index(u, sp.word_index(head));
      double p = m.mu.weights[s];
      for (int i = L; i < len; ++i) {
        p *= m.kernel.prob(s, z[i]);
        s = sp.successor(s, z[i]);
      }
      model[w / drop] += p;
    }
    // reference probability given the cell of X_0 and the model's law of X_0
    double cell_mass = 0.0;
    for (std::size_t ww = 0; ww < sp.num_words(); ++ww)
      cell_mass += m.mu.weights[sp.state_index(u, ww)];
    for (const auto& [prefix, p] : model) {
      if (p <= 0.0) continue;
      std::size_t rest = prefix;
      for (int i = n - 1; i >= 0; --i) {
        z[i] = rest % K;
        rest /= K;
      }
      double q = cell_mass;
      std::size_t c = u;
      for (int i = 0; i < n; ++i) {
        q *= env.cell(c)[z[i]];
        c = env.shift_by_letter(c, z[i]);
      }
      total += p * std::log(p / q);
    }
  }
  return total;
}

}  // namespace

TEST_SUITE("entropy") {

TEST_CASE("kernel entropy examples") {
  const auto k = build_word_chain(*one_cell(), 1);
  const WordMeasure mu{k.space_ptr(), {0.4, 0.6}};
  const auto same = kernel_entropy(mu, k, k);
  CHECK(same.value == 0.0);
  CHECK_FALSE(same.infinite);

  const WordKernel half(k.space_ptr(), {0.5, 0.5, 0.5, 0.5});
  const double expected = 0.5 * std::log(5.0 / 7.0) + 0.5 * std::log(5.0 / 3.0);
  CHECK(kernel_entropy(mu, half, k).value == doctest::Approx(expected).epsilon(1e-15));
  CHECK(expected == doctest::Approx(0.0871767).epsilon(1e-6));

  const std::vector<double> m{0.5, 0.5}, q{1.0, 0.0, 0.5, 0.5}, p{0.0, 1.0, 0.5, 0.5};
  const auto inf = kernel_entropy(m, q, p, 2);
  CHECK(inf.infinite);
  REQUIRE(inf.support_violations.size() == 1);
  CHECK(inf.support_violations[0] == std::pair<std::size_t, std::size_t>{0, 0});
  // No violation where mu vanishes.
  CHECK_FALSE(kernel_entropy(std::vector<double>{0.0, 1.0}, q, p, 2).infinite);
  CHECK_KIND(kernel_entropy(m, q, std::vector<double>{0.5, 0.5}, 2), ErrorKind::ShapeMismatch);
}

TEST_CASE("kernel entropy is nonnegative, zero iff q = p, convex in alpha") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto env = std::make_shared<const PeriodicEnvironment>(
        random_environment(rng, 1 + trial % 3, 2 + trial % 2));
    const auto k = build_word_chain(*env, 1 + trial % 2);
    const auto q1 = random_kernel(k.space_ptr(), rng), q2 = random_kernel(k.space_ptr(), rng);
    const auto mu1 = stationary_measure(q1), mu2 = stationary_measure(q2);
    const double h1 = kernel_entropy(mu1, q1, k).value;
    CHECK(h1 > 0.0);
    CHECK(kernel_entropy(mu1, k, k).value == 0.0);

    const auto a1 = edge_measure(mu1, q1), a2 = edge_measure(mu2, q2);
    const double t = 0.35;
    EdgeMeasure mix{k.space_ptr(), std::vector<double>(a1.weights.size())};
    for (std::size_t e = 0; e < mix.weights.size(); ++e)
      mix.weights[e] = t * a1.weights[e] + (1 - t) * a2.weights[e];
    const double lhs = edge_entropy(mix, k).value;
    const double rhs = t * edge_entropy(a1, k).value + (1 - t) * edge_entropy(a2, k).value;
    CHECK(lhs <= rhs + 1e-10);
    CHECK(edge_entropy(a1, k).value == doctest::Approx(h1).epsilon(1e-12));
  }
}

TEST_CASE("prefix entropy examples") {
  // Stationary chain with q = p+: all terms zero.
  const auto k = build_word_chain(*two_cell(), 2);
  const auto stat = make_finite_memory_model(k);
  const auto pe = prefix_entropy(stat, 6);
  for (double t : pe.terms) CHECK(std::abs(t) <= 1e-15);
  CHECK(pe.limit == 0.0);

  // One cell, i.i.d. (0.5, 0.5): every term equals H(1/2 | 0.7).
  const auto s1 = space_of(one_cell(), 1);
  const auto iid = make_finite_memory_model(WordKernel(s1, {0.5, 0.5, 0.5, 0.5}));
  const auto pi = prefix_entropy(iid, 8);
  for (std::size_t i = 0; i < pi.terms.size(); ++i) {
    CHECK(pi.terms[i] == doctest::Approx(bernoulli_kl(0.5, 0.7)).epsilon(1e-13));
    CHECK(pi.partial_means[i] == doctest::Approx(bernoulli_kl(0.5, 0.7)).epsilon(1e-13));
  }

  // Two cells, cell-only model: every term equals the kernel entropy.
  const auto s2 = space_of(two_cell(), 1);
  const std::vector<double> per_cell{0.55, 0.45, 0.2, 0.8};
  const auto cm = make_finite_memory_model(cell_kernel(s2, per_cell));
  const auto pc = prefix_entropy(cm, 6);
  for (double t : pc.terms) CHECK(t == doctest::Approx(pc.limit).epsilon(1e-12));
  CHECK(pc.partial_means.back() * 6 == doctest::Approx(brute_prefix_entropy(cm, 6)).epsilon(1e-12));
}

TEST_CASE("prefix entropy of level-2 models against enumeration") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const auto env = std::make_shared<const PeriodicEnvironment>(
        random_environment(rng, 1 + trial % 2, 2));
    const auto model = make_finite_memory_model(random_kernel(space_of(env, 2), rng));
    const auto pe = prefix_entropy(model, 7);
    for (int n = 1; n <= 7; ++n)
      CHECK(pe.partial_means[n - 1] * n ==
            doctest::Approx(brute_prefix_entropy(model, n)).epsilon(1e-11));
    for (int n = 3; n <= 7; ++n) CHECK(pe.terms[n - 1] == doctest::Approx(pe.limit).epsilon(1e-12));
    for (int n = 1; n < 7; ++n) CHECK(pe.partial_means[n] >= pe.partial_means[n - 1] - 1e-15);
  }
  CHECK_KIND(prefix_entropy(make_finite_memory_model(build_word_chain(*two_cell(), 1)), 30, 1000),
             ErrorKind::StateBudgetExceeded);
}

TEST_CASE("Jensen gap") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-3.0, 3.0), w(0.01, 1.0);
  auto normalized = [&](std::size_t n) {
    std::vector<double> v(n);
    double t = 0.0;
    for (double& x : v) t += x = w(rng);
    for (double& x : v) x /= t;
    return v;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t nx = 2 + trial % 4, ny = 2 + trial % 3;
    std::vector<double> g(nx * ny);
    for (double& x : g) x = unif(rng);
    CHECK(jensen_gap(g, normalized(nx), normalized(ny)) >= -1e-12);
  }
  // Equality cases.
  std::vector<double> gx(12), gy(12);
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t y = 0; y < 3; ++y) {
      gx[x * 3 + y] = 0.3 * x - 1.0;
      gy[x * 3 + y] = 0.7 * y + 0.2;
    }
  const std::vector<double> mu(4, 0.25), rho(3, 1.0 / 3);
  CHECK(std::abs(jensen_gap(gx, mu, rho)) <= 1e-12);
  CHECK(std::abs(jensen_gap(gy, mu, rho)) <= 1e-12);
}

}  // TEST_SUITE
