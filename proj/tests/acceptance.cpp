// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. argv[1], when given, is the path of the rwre_lab executable used
// for the determinism check; otherwise the CLI runs in-process.

#define DOCTEST_CONFIG_DISABLE
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rwre/cli.hpp"
#include "rwre/correctors.hpp"
#include "rwre/kernels.hpp"
#include "rwre/sim.hpp"
#include "support.hpp"

using namespace rwre;
using namespace rwre::test;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  std::cout << id << (pass ? " PASS " : " FAIL ") << detail << std::endl;
  failures += !pass;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

EnvPtr random_env(std::mt19937_64& rng, std::int64_t period, std::size_t letters) {
  return std::make_shared<const PeriodicEnvironment>(random_environment(rng, period, letters));
}

void ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  double legendre_err = 0.0, oracle_err = 0.0;
  std::size_t max_states = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto env = random_env(rng, 1 + trial % 3, 2 + (trial / 3) % 2);
    const auto k = build_word_chain(*env, 1 + (trial / 6) % 2);
    max_states = std::max(max_states, k.space().num_states());
    for (int j = 0; j < 5; ++j) {
      const auto f = random_function(k.space().num_states(), rng);
      const double kb = kbar(f, k).value;
      legendre_err = std::max(legendre_err, std::abs(kb - legendre_rate(f, k).value));
      oracle_err = std::max(oracle_err,
                            std::abs(kb - pf_log_eigenvalue(tilt_kernel(k, f)).log_eigenvalue));
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report("AC1", legendre_err <= 1e-6 && oracle_err <= 1e-6 && secs <= 60.0 && max_states <= 54,
         "max|kbar-legendre|=" + fmt(legendre_err) + " max|kbar-oracle|=" + fmt(oracle_err) +
             " states<=" + std::to_string(max_states) + " time=" + fmt(secs) + "s");
}

void ac2() {
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto env = random_env(rng, 1 + trial % 3, 2 + trial % 2);
    const auto k = build_word_chain(*env, 1 + (trial / 3) % 2);
    const auto mu = random_feasible_measure(k.space_ptr(), rng);
    worst = std::max(worst, std::abs(rate_primal(mu, k).value - rate_dual(mu, k).value));
  }
  report("AC2", worst <= 1e-7, "max|primal-dual|=" + fmt(worst));
}

void ac3() {
  std::mt19937_64 rng(1003);
  double at_stat = 0.0, min_far = 1e300;
  int far = 0;
  for (int trial = 0; far < 20; ++trial) {
    const auto env = random_env(rng, 1 + trial % 3, 2 + trial % 2);
    const auto k = build_word_chain(*env, 1 + trial % 2);
    const auto stat = stationary_measure(k);
    at_stat = std::max(at_stat, rate_primal(stat, k).value);
    const auto mu = random_feasible_measure(k.space_ptr(), rng);
    if (l1_distance(mu.weights, stat.weights) < 0.1) continue;
    min_far = std::min(min_far, rate_primal(mu, k).value);
    ++far;
  }
  report("AC3", at_stat <= 1e-10 && min_far >= 1e-4,
         "max rate(stationary)=" + fmt(at_stat) + " min rate(far)=" + fmt(min_far));
}

void ac4() {
  const auto env = make_env({1}, {{0}, {1}, {-1}}, {{0.25, 0.375, 0.375}});
  const double err = std::abs(singular_example_rate(*env, 1) - std::log(4.0));
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const double p0 = unif(rng), split = unif(rng);
    const auto e = make_env({1}, {{0}, {1}, {-1}}, {{p0, (1 - p0) * split, (1 - p0) * (1 - split)}});
    worst = std::max(worst, std::abs(singular_example_rate(*e, 1 + trial % 2) + std::log(p0)));
  }
  report("AC4", err <= 1e-8 && worst <= 1e-8,
         "|rate-log4|=" + fmt(err) + " max|rate+log p0|=" + fmt(worst));
}

void ac5() {
  std::mt19937_64 rng(1005);
  double term_err = 0.0, mean_err = 0.0, drop = 0.0;
  const int n = 8;
  for (int trial = 0; trial < 10; ++trial) {
    const auto env = random_env(rng, 1 + trial % 2, 2);
    FiniteMemoryModel model = [&] {
      if (trial < 5) {
        const auto sp = space_of(env, 1);
        std::vector<double> per_cell(2 * env->num_cells());
        for (std::size_t u = 0; u < env->num_cells(); ++u) {
          const double a = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
          per_cell[2 * u] = a;
          per_cell[2 * u + 1] = 1 - a;
        }
        return make_finite_memory_model(cell_kernel(sp, per_cell));
      }
      return make_finite_memory_model(random_kernel(space_of(env, 1 + trial % 2), rng));
    }();
    const auto pe = prefix_entropy(model, n);
    // Cell-only models stabilize from the first step; a level-L kernel from L+1.
    const int memory = trial < 5 ? 1 : model.level() + 1;
    for (int i = memory; i <= n; ++i) {
      term_err = std::max(term_err, std::abs(pe.terms[i - 1] - pe.limit));
      if (trial < 5) mean_err = std::max(mean_err, std::abs(pe.partial_means[i - 1] - pe.limit));
    }
    for (int i = 1; i < n; ++i)
      drop = std::max(drop, pe.partial_means[i - 1] - pe.partial_means[i]);
  }
  report("AC5", term_err <= 1e-9 && mean_err <= 1e-9 && drop <= 1e-12,
         "max|increment-limit|=" + fmt(term_err) + " max|mean-limit| (memory 1)=" + fmt(mean_err) +
             " max decrease=" + fmt(drop));
}

void ac6() {
  const auto env = one_cell();
  const StateFunction f{{1.0, 0.0}};
  const double reference = 0.1163152;
  const auto p = exact_rare_event(*env, f, 1, 12, 0.9);
  const double exact_rate = -p.log_probability / 12;
  const double exact_env = 2 * std::log(13.0) / 12;
  SimConfig cfg;
  cfg.n = 128;
  cfg.samples = 100000;
  cfg.seed = 2024;
  const auto is = importance_rate(*env, f, 1, 0.9, cfg);
  const double is_env = 2 * is.se + 2 * std::log(129.0) / 128;
  report("AC6",
         std::abs(exact_rate - reference) <= exact_env && std::abs(is.rate - reference) <= is_env,
         "exact n=12 rate=" + fmt(exact_rate) + " (envelope " + fmt(exact_env) +
             ") importance n=128 rate=" + fmt(is.rate) + " se=" + fmt(is.se) + " (envelope " +
             fmt(is_env) + ") reference=" + fmt(reference));
}

void ac7() {
  std::mt19937_64 rng(1007);
  int gradients_ok = 0, rejected = 0;
  double round_trip = 0.0, cycle = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto env = random_env(rng, 1 + trial % 3, 2 + trial % 2);
    const auto k = build_word_chain(*env, 1 + (trial / 3) % 2);
    const auto h = random_function(k.space().num_states(), rng, 2.0).values;
    double hmax = 0.0;
    for (double v : h) hmax = std::max(hmax, std::abs(v));
    const auto F = gradient_of(h, k.space_ptr());
    bool ok = verify_class_k(F, k).pass;
    const auto back = gradient_of(fit_potential(F, k), k.space_ptr());
    for (std::size_t e = 0; e < F.table.size(); ++e)
      round_trip = std::max(round_trip, std::abs(back.table[e] - F.table[e]));
    const auto growth = max_path_growth(F, k, 32);
    cycle = std::max(cycle, growth.max_abs_mean_cycle());
    for (std::size_t n = 1; n <= growth.g.size(); ++n)
      ok &= growth.g[n - 1] <= 2 * hmax / n + 1e-12;
    gradients_ok += ok;

    // Non-gradients: half perturb one edge of a gradient, half are random tables.
    ClassKFunction bad = F;
    if (trial % 2 == 0) {
      bad.table[rng() % bad.table.size()] += 0.01 + std::uniform_real_distribution<double>(0, 1)(rng);
    } else {
      for (double& v : bad.table) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    }
    bool threw = false;
    try {
      fit_potential(bad, k);
    } catch (const Error& e) {
      threw = e.kind() == ErrorKind::NonGradient;
    }
    rejected += !verify_class_k(bad, k).pass && threw;
  }
  report("AC7", gradients_ok == 100 && round_trip <= 1e-10 && cycle <= 1e-12 && rejected == 100,
         "gradients accepted=" + std::to_string(gradients_ok) + "/100 round trip=" +
             fmt(round_trip) + " max|mean cycle|=" + fmt(cycle) +
             " non-gradients rejected=" + std::to_string(rejected) + "/100");
}

void ac8() {
  std::mt19937_64 rng(1008);
  double worst_step = 0.0, worst_eq = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto env = random_env(rng, 2, 2 + trial % 2);
    const std::size_t K = env->range().size();
    std::vector<double> per_cell(2 * K);
    for (std::size_t u = 0; u < 2; ++u) {
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        total += per_cell[u * K + k] = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
      for (std::size_t k = 0; k < K; ++k) per_cell[u * K + k] /= total;
    }
    const auto model = make_finite_memory_model(cell_kernel(space_of(env, 3), per_cell));
    std::array<double, 3> h{};
    for (int ell = 1; ell <= 3; ++ell)
      h[ell - 1] = rate_primal(restrict_level(model.mu, ell), build_word_chain(*env, ell)).value;
    worst_step = std::max({worst_step, h[0] - h[1], h[1] - h[2]});
    worst_eq = std::max({worst_eq, std::abs(h[1] - h[0]), std::abs(h[2] - h[1])});
  }
  report("AC8", worst_step <= 1e-8 && worst_eq <= 1e-8,
         "max(H_l - H_{l+1})=" + fmt(worst_step) + " max|H_{l+1} - H_l|=" + fmt(worst_eq));
}

void ac9() {
  std::mt19937_64 rng(1009);
  std::uniform_real_distribution<double> unif(-3.0, 3.0), w(0.01, 1.0);
  auto normalized = [&](std::size_t n) {
    std::vector<double> v(n);
    double t = 0.0;
    for (double& x : v) t += x = w(rng);
    for (double& x : v) x /= t;
    return v;
  };
  double min_gap = 1e300, eq = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t nx = 2 + trial % 5, ny = 2 + trial % 4;
    std::vector<double> g(nx * ny);
    for (double& x : g) x = unif(rng);
    min_gap = std::min(min_gap, jensen_gap(g, normalized(nx), normalized(ny)));
  }
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t nx = 2 + trial % 4, ny = 2 + trial % 3;
    std::vector<double> gx(nx * ny), gy(nx * ny), c(nx * ny, unif(rng));
    std::vector<double> ax(nx), ay(ny);
    for (double& a : ax) a = unif(rng);
    for (double& a : ay) a = unif(rng);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        gx[x * ny + y] = ax[x];
        gy[x * ny + y] = ay[y];
      }
    const auto mu = normalized(nx), rho = normalized(ny);
    eq = std::max({eq, std::abs(jensen_gap(gx, mu, rho)), std::abs(jensen_gap(gy, mu, rho)),
                   std::abs(jensen_gap(c, mu, rho))});
  }
  report("AC9", min_gap >= -1e-12 && eq <= 1e-12,
         "min gap=" + fmt(min_gap) + " max|gap| on equality cases=" + fmt(eq));
}

std::string capture(const std::string& lab, const std::vector<std::string>& args) {
  if (lab.empty()) {
    std::ostringstream out, err;
    run(args, out, err);
    return out.str();
  }
  std::string cmd = "\"" + lab + "\"";
  for (const auto& a : args) cmd += " \"" + a + "\"";
  std::string out;
  if (FILE* pipe = popen(cmd.c_str(), "r")) {
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    pclose(pipe);
  }
  return out;
}

void ac10(const std::string& lab) {
  const auto dir = std::filesystem::temp_directory_path() / "rwre_acceptance";
  std::filesystem::create_directories(dir);
  const auto cfg = (dir / "env.json").string();
  const auto fpath = (dir / "f.json").string();
  std::ofstream(cfg) << R"({"d":1,"periods":[3],"range":[[1],[-1],[0]],)"
                        R"("cells":{"0":[0.5,0.3,0.2],"1":[0.2,0.5,0.3],"2":[0.4,0.4,0.2]}})";
  std::ofstream(fpath) << "[1, 0, 0, 1, 0, 0, 1, 0, 0]";
  bool same = true;
  std::size_t bytes = 0;
  for (const std::string seed : {"3", "77"}) {
    std::vector<std::string> outputs;
    for (const std::string threads : {"1", "2", "8"}) {
      outputs.push_back(capture(lab, {"simulate", "--config", cfg, "--n", "5000", "--seed", seed,
                                      "--threads", threads}));
      outputs.push_back(capture(lab, {"ldp-verify", "--config", cfg, "--f", fpath, "--a", "0.5",
                                      "--n", "64", "--samples", "20000", "--seed", seed,
                                      "--threads", threads}));
    }
    for (std::size_t i = 2; i < outputs.size(); ++i) same &= outputs[i] == outputs[i % 2];
    same &= !outputs[0].empty() && !outputs[1].empty();
    bytes += outputs[0].size() + outputs[1].size();
  }
  report("AC10", same,
         std::string(lab.empty() ? "in-process" : "executable") +
             " outputs identical across 1, 2, 8 workers (" + std::to_string(bytes) + " bytes/run set)");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string lab = argc > 1 ? argv[1] : "";
  const std::array<void (*)(), 9> checks{ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report("AC" + std::to_string(i + 1), false, std::string("threw: ") + e.what());
    }
  }
  try {
    ac10(lab);
  } catch (const std::exception& e) {
    report("AC10", false, std::string("threw: ") + e.what());
  }
  return failures == 0 ? 0 : 1;
}
