#include "rwre/correctors.hpp"
#include "support.hpp"

using namespace rwre;
using namespace rwre::test;

TEST_SUITE("correctors") {

TEST_CASE("gradient_of examples") {
  const auto k = build_word_chain(*one_cell(), 1);
  const auto zero = gradient_of({2.5, 2.5}, k.space_ptr());
  for (double v : zero.table) CHECK(v == 0.0);
  const auto F = gradient_of({1.0, 0.0}, k.space_ptr());
  CHECK(F.at(0, 0) == 0.0);
  CHECK(F.at(0, 1) == -1.0);
  CHECK(F.at(1, 0) == 1.0);
  CHECK(F.at(1, 1) == 0.0);
  CHECK(verify_class_k(F, k).pass);
}

TEST_CASE("verify_class_k rejects constants and random tables") {
  // one-cell ell=2 chain contains cycles of length 1, 2, 3, ...
  const auto k = build_word_chain(*one_cell(), 2);
  ClassKFunction ones{k.space_ptr(), std::vector<double>(k.space().num_edges(), 1.0)};
  const auto rep = verify_class_k(ones, k);
  CHECK_FALSE(rep.pass);
  bool saw_three = false;
  for (const auto& c : rep.cycles) saw_three |= std::abs(c.sum - 3.0) < 1e-15;
  CHECK(saw_three);
  CHECK_KIND(fit_potential(ones, k), ErrorKind::NonGradient);

  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  int rejected = 0;
  for (int seed = 0; seed < 100; ++seed) {
    ClassKFunction F{k.space_ptr(), std::vector<double>(k.space().num_edges())};
    for (double& v : F.table) v = unif(rng);
    rejected += !verify_class_k(F, k).pass;
  }
  CHECK(rejected == 100);

  const auto sp = space_of(one_cell(), 1);
  const WordKernel absorbing(sp, {1.0, 0.0, 1.0, 0.0});
  CHECK_KIND(verify_class_k(ClassKFunction{sp, std::vector<double>(4, 0.0)}, absorbing),
             ErrorKind::NotIrreducible);
}

TEST_CASE("fit_potential round trip and tolerance") {
  const auto k = build_word_chain(*two_cell(), 2);
  std::mt19937_64 rng(59);
  const auto h = random_function(k.space().num_states(), rng, 3.0).values;
  const auto F = gradient_of(h, k.space_ptr());
  const auto fit = fit_potential(F, k);
  for (std::size_t s = 0; s < h.size(); ++s)
    CHECK(std::abs(fit[s] - (h[s] - h[0])) <= 1e-14);
  const auto again = gradient_of(fit, k.space_ptr());
  for (std::size_t e = 0; e < F.table.size(); ++e)
    CHECK(std::abs(again.table[e] - F.table[e]) <= 1e-10);

  auto nudged = F;
  nudged.table[5] += 1e-12;
  CHECK(verify_class_k(nudged, k).pass);
  CHECK_NOTHROW(fit_potential(nudged, k));
  nudged.table[5] += 1e-6;
  try {
    fit_potential(nudged, k);
    FAIL("expected NonGradient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonGradient);
    CHECK(e.field().rfind("F[", 0) == 0);
  }
}

TEST_CASE("path sums") {
  const auto env = two_cell();
  const auto k = build_word_chain(*env, 2);
  std::mt19937_64 rng(61);
  const auto h = random_function(k.space().num_states(), rng).values;
  const auto F = gradient_of(h, k.space_ptr());
  const std::size_t S = k.space().num_states();
  for (std::size_t a = 0; a < S; ++a) {
    CHECK(path_sum_f(F, k, a, a) == 0.0);
    for (std::size_t b = 0; b < S; ++b) {
      const double root = path_sum_f(F, k, a, b, Ancestor::Root);
      const double src = path_sum_f(F, k, a, b, Ancestor::Source);
      CHECK(std::abs(root - (h[b] - h[a])) <= 1e-12);
      CHECK(std::abs(root - src) <= 1e-12);
      // cocycle
      const std::size_t c = (a * 7 + b) % S;
      CHECK(std::abs(path_sum_f(F, k, a, c) -
                     (path_sum_f(F, k, a, b) + path_sum_f(F, k, b, c))) <= 1e-12);
    }
  }
  const Point e1{1};
  for (std::size_t w = 0; w < k.space().num_words(); ++w)
    CHECK(std::abs(torus_translate_average(F, k, w, e1)) <= 1e-10);

  const auto cyc = build_word_chain(*make_env({1}, {{1}, {-1}}, {{0.5, 0.5}}), 1);
  const WordKernel stuck(cyc.space_ptr(), {1.0, 0.0, 0.0, 1.0});
  CHECK_KIND(path_sum_f(ClassKFunction{cyc.space_ptr(), std::vector<double>(4, 0.0)}, stuck, 0, 1),
             ErrorKind::Unreachable);
}

TEST_CASE("max path growth") {
  const auto k = build_word_chain(*two_cell(), 2);
  std::mt19937_64 rng(67);
  const auto h = random_function(k.space().num_states(), rng).values;
  double hmax = 0.0;
  for (double v : h) hmax = std::max(hmax, std::abs(v));
  const auto grad = max_path_growth(gradient_of(h, k.space_ptr()), k, 64);
  for (std::size_t n = 1; n <= 64; ++n) CHECK(grad.g[n - 1] <= 2 * hmax / n + 1e-14);
  CHECK(grad.max_abs_mean_cycle() <= 1e-12);

  ClassKFunction ones{k.space_ptr(), std::vector<double>(k.space().num_edges(), 1.0)};
  const auto one = max_path_growth(ones, k, 16);
  for (double g : one.g) CHECK(g == 1.0);
  CHECK(one.max_mean_cycle == doctest::Approx(1.0).epsilon(1e-14));

  ClassKFunction rnd{k.space_ptr(), std::vector<double>(k.space().num_edges())};
  for (double& v : rnd.table) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  const auto gr = max_path_growth(rnd, k, 40);
  for (std::size_t n = 1; n <= 20; ++n)
    for (std::size_t m = 1; m <= 20; ++m)
      CHECK((n + m) * gr.g[n + m - 1] <= n * gr.g[n - 1] + m * gr.g[m - 1] + 1e-9);
  // Limit certificate: g(n) tends to the larger |mean cycle|.
  CHECK(std::abs(gr.g.back() - gr.max_abs_mean_cycle()) <= 4.0 / 40);

  const auto serial = max_path_growth(rnd, k, 40, false);
  CHECK(serial.g == gr.g);
}

TEST_CASE("Karp against brute-force simple cycles") {
  // One-cell ell=2: enumerate all closed walks up to length 4 (which
  // include every simple cycle of the 4-state digraph).
  const auto k = build_word_chain(*one_cell(), 2);
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    ClassKFunction F{k.space_ptr(), std::vector<double>(k.space().num_edges())};
    for (double& v : F.table) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    double best = -1e300;
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t len = 1; len <= 4; ++len)
        for (std::size_t code = 0; code < (1u << len); ++code) {
          std::size_t cur = s;
          double sum = 0.0;
          for (std::size_t i = 0; i < len; ++i) {
            const std::size_t z = (code >> i) & 1;
            sum += F.at(cur, z);
            cur = k.space().successor(cur, z);
          }
          if (cur == s) best = std::max(best, sum / len);
        }
    CHECK(max_mean_cycle(F, k) == doctest::Approx(best).epsilon(1e-12));
  }
}

}  // TEST_SUITE
