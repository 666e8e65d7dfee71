#include "rwre/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "rwre/kernels.hpp"

namespace rwre {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Inverse CDF over one row; the last positive entry absorbs rounding.
std::size_t draw(std::span<const double> row, double u) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] <= 0.0) continue;
    acc += row[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

template <typename Fn>
void for_each_sample(bool parallel, std::size_t n, Fn&& fn) {
  if (parallel)
    kernels::for_each_index_parallel(n, fn);
  else
    kernels::for_each_index_serial(n, fn);
}

std::size_t start_cell(const PeriodicEnvironment& env, const Point& start) {
  if (start.empty()) return 0;
  if (static_cast<int>(start.size()) != env.dim())
    throw Error(ErrorKind::DimensionMismatch, "start point has wrong dimension", "start");
  return env.cell_index(start);
}

// Word state after the first ell steps of replicate `sample`.
std::size_t warm_up(const WordSpace& space, std::size_t cell, std::uint64_t seed,
                    std::uint64_t sample) {
  const auto& env = space.env();
  std::vector<std::size_t> word;
  std::size_t c = cell;
  for (int i = 0; i < space.ell(); ++i) {
    const auto k = draw(env.cell(c), counter_uniform(seed, sample, i + 1));
    word.push_back(k);
    c = env.shift_by_letter(c, k);
  }
  return space.state_index(cell, space.word_index(word));
}

void check_f(const StateFunction& f, const WordSpace& space) {
  if (f.values.size() != space.num_states())
    throw Error(ErrorKind::ShapeMismatch, "tilt function does not match the chain", "f");
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t sample,
                           std::uint64_t step) {
  return splitmix64(splitmix64(splitmix64(seed) ^ sample) ^ step);
}

double counter_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t step) {
  return static_cast<double>(counter_hash(seed, sample, step) >> 11) * 0x1.0p-53;
}

WalkPath simulate_walk(const PeriodicEnvironment& env, const SimConfig& cfg,
                       std::uint64_t sample) {
  WalkPath path;
  path.start = cfg.start.empty() ? Point(env.dim(), 0) : cfg.start;
  std::size_t c = start_cell(env, path.start);
  path.letters.reserve(cfg.n);
  for (std::size_t k = 1; k <= cfg.n; ++k) {
    const auto z = draw(env.cell(c), counter_uniform(cfg.seed, sample, k));
    path.letters.push_back(z);
    c = env.shift_by_letter(c, z);
  }
  return path;
}

void write_path_csv(const PeriodicEnvironment& env, const WalkPath& path,
                    std::ostream& out) {
  const int d = env.dim();
  out << "k";
  for (int i = 1; i <= d; ++i) out << ",z_" << i;
  for (int i = 1; i <= d; ++i) out << ",u_" << i;
  out << '\n';
  std::size_t c = start_cell(env, path.start);
  for (std::size_t k = 0; k < path.letters.size(); ++k) {
    const auto& z = env.range()[path.letters[k]];
    const auto u = env.cell_point(c);
    out << k + 1;
    for (auto v : z) out << ',' << v;
    for (auto v : u) out << ',' << v;
    out << '\n';
    c = env.shift_by_letter(c, path.letters[k]);
  }
}

McEstimate mc_cgf(const PeriodicEnvironment& env, const StateFunction& f, int ell,
                  const SimConfig& cfg) {
  const auto envp = std::make_shared<const PeriodicEnvironment>(env);
  const WordSpace space(envp, ell);
  check_f(f, space);
  const std::size_t N = cfg.samples, n = cfg.n;
  const std::size_t cell = start_cell(env, cfg.start);

  std::vector<double> w(N);
  for_each_sample(cfg.parallel, N, [&](std::size_t i) {
    std::size_t s = warm_up(space, cell, cfg.seed, i);
    double acc = f.values[s];
    for (std::size_t j = 1; j < n; ++j) {
      const auto k = draw(env.cell(space.walker_cell(s)),
                          counter_uniform(cfg.seed, i, ell + j));
      s = space.successor(s, k);
      acc += f.values[s];
    }
    w[i] = acc;
  });

  const double top = *std::max_element(w.begin(), w.end());
  std::vector<double> x(N);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    x[i] = std::exp(w[i] - top);
    sum += x[i];
    sum2 += x[i] * x[i];
  }
  McEstimate est;
  est.ess = sum * sum / sum2;
  if (est.ess < std::min<double>(10.0, N) * (1.0 - 1e-12))
    throw Error(ErrorKind::DegenerateWeights, "effective sample size below 10", "samples");
  const double nd = static_cast<double>(n);
  est.value = (top + std::log(sum / N)) / nd;
  if (N > 1) {
    std::vector<double> loo(N);
    double mean = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      loo[i] = (top + std::log((sum - x[i]) / (N - 1))) / nd;
      mean += loo[i];
    }
    mean /= N;
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    est.se = std::sqrt(ss * (N - 1) / N);
  }
  return est;
}

RareEventProbability exact_rare_event(const PeriodicEnvironment& env,
                                      const StateFunction& f, int ell,
                                      std::size_t n, double a, const Point& start,
                                      std::size_t max_entries) {
  if (n < 1) throw Error(ErrorKind::BadConfig, "n must be >= 1", "n");
  const auto envp = std::make_shared<const PeriodicEnvironment>(env);
  const WordSpace space(envp, ell);
  check_f(f, space);
  const std::size_t S = space.num_states(), K = space.num_letters();
  const std::size_t cell = start_cell(env, start);

  // Law of zeta_0: enumerate the first ell letters.
  std::vector<double> init(S, 0.0);
  {
    std::vector<std::size_t> word(ell, 0);
    for (std::size_t w = 0; w < space.num_words(); ++w) {
      std::size_t rest = w;
      for (int i = ell - 1; i >= 0; --i) {
        word[i] = rest % K;
        rest /= K;
      }
      double p = 1.0;
      std::size_t c = cell;
      for (int i = 0; i < ell; ++i) {
        p *= env.cell(c)[word[i]];
        c = env.shift_by_letter(c, word[i]);
      }
      init[space.state_index(cell, w)] = p;
    }
  }

  // Integer scaling of f.
  long long scale = 0;
  for (long long m = 1; m <= 1024 && scale == 0; ++m) {
    bool ok = true;
    for (double v : f.values)
      if (std::abs(v * m - std::round(v * m)) > 1e-9) {
        ok = false;
        break;
      }
    if (ok) scale = m;
  }

  RareEventProbability out;
  const double nd = static_cast<double>(n);
  if (scale > 0) {
    std::vector<long long> fi(S);
    for (std::size_t s = 0; s < S; ++s) fi[s] = std::llround(f.values[s] * scale);
    const long long lo = *std::min_element(fi.begin(), fi.end());
    const long long hi = *std::max_element(fi.begin(), fi.end());
    const std::size_t width = n * static_cast<std::size_t>(hi - lo) + 1;
    if (width > max_entries / S)
      throw Error(ErrorKind::EnumerationBudgetExceeded,
                  "partial-sum table exceeds the entry budget", "n");
    // table[s * width + j]: mass at state s with partial sum j + count * lo.
    std::vector<double> cur(S * width, 0.0), nxt(S * width);
    for (std::size_t s = 0; s < S; ++s) cur[s * width + (fi[s] - lo)] = init[s];
    for (std::size_t step = 1; step < n; ++step) {
      std::fill(nxt.begin(), nxt.end(), 0.0);
      const std::size_t used = step * static_cast<std::size_t>(hi - lo) + 1;
      for (std::size_t s = 0; s < S; ++s) {
        const auto row = env.cell(space.walker_cell(s));
        for (std::size_t j = 0; j < used; ++j) {
          const double m = cur[s * width + j];
          if (m == 0.0) continue;
          for (std::size_t k = 0; k < K; ++k) {
            const auto t = space.successor(s, k);
            nxt[t * width + j + (fi[t] - lo)] += m * row[k];
          }
        }
      }
      cur.swap(nxt);
    }
    const double need = std::ceil(scale * nd * a - 1e-7);
    const double first = need - nd * lo;
    const std::size_t j0 = first <= 0 ? 0 : static_cast<std::size_t>(first);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t j = j0; j < width; ++j) out.probability += cur[s * width + j];
    out.used_dp = true;
  } else {
    double total = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
      total *= K;
      if (total * space.num_words() > static_cast<double>(max_entries))
        throw Error(ErrorKind::EnumerationBudgetExceeded,
                    "path enumeration exceeds the budget", "n");
    }
    const double threshold = nd * a - 1e-9;
    auto recurse = [&](auto&& self, std::size_t s, std::size_t depth, double sum,
                       double prob) -> void {
      if (depth == n) {
        if (sum >= threshold) out.probability += prob;
        return;
      }
      const auto row = env.cell(space.walker_cell(s));
      for (std::size_t k = 0; k < K; ++k) {
        const auto t = space.successor(s, k);
        self(self, t, depth + 1, sum + f.values[t], prob * row[k]);
      }
    };
    for (std::size_t s = 0; s < S; ++s)
      if (init[s] > 0.0) recurse(recurse, s, 1, f.values[s], init[s]);
  }
  out.probability = std::min(out.probability, 1.0);
  out.log_probability = out.probability > 0.0 ? std::log(out.probability) : kNegInf;
  return out;
}

namespace {

double tilted_mean(const WordKernel& kernel, const StateFunction& f, double t) {
  StateFunction tf{f.values};
  for (double& v : tf.values) v *= t;
  const auto q = doob_transform(kernel, tf);
  return stationary_measure(q).expectation(f);
}

double log_mgf(const WordKernel& kernel, const StateFunction& f, double t) {
  StateFunction tf{f.values};
  for (double& v : tf.values) v *= t;
  return pf_log_eigenvalue(tilt_kernel(kernel, tf)).log_eigenvalue;
}

}  // namespace

TiltSolution solve_tilt(const WordKernel& kernel, const StateFunction& f, double a) {
  check_f(f, kernel.space());
  auto not_found = [] {
    return Error(ErrorKind::TiltNotFound, "a is outside the range of the tilted means", "a");
  };
  TiltSolution sol;
  try {
    const double m0 = tilted_mean(kernel, f, 0.0);
    if (std::abs(a - m0) > 1e-13) {
      const double dir = a > m0 ? 1.0 : -1.0;
      double lo = 0.0, hi = dir;
      while ((tilted_mean(kernel, f, hi) - a) * dir < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (std::abs(hi) > 1024.0) throw not_found();
      }
      for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-14 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((tilted_mean(kernel, f, mid) - a) * dir < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      sol.t = 0.5 * (lo + hi);
    }
    sol.log_mgf = log_mgf(kernel, f, sol.t);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::TiltNotFound) throw;
    throw not_found();
  }
  sol.rate = sol.t * a - sol.log_mgf;
  return sol;
}

ImportanceEstimate importance_rate(const PeriodicEnvironment& env,
                                   const StateFunction& f, int ell, double a,
                                   const SimConfig& cfg, double eps) {
  const auto kernel = build_word_chain(env, ell);
  const auto& space = kernel.space();
  check_f(f, space);
  const auto tilt = solve_tilt(kernel, f, a);
  StateFunction tf{f.values};
  for (double& v : tf.values) v *= tilt.t;
  const auto qstar = doob_transform(kernel, tf);

  const std::size_t S = space.num_states(), K = space.num_letters();
  std::vector<double> q(S * K), log_ratio(S * K);
  for (std::size_t e = 0; e < S * K; ++e) {
    const double p = kernel.probs()[e];
    q[e] = (1.0 - eps) * qstar.probs()[e] + eps * p;
    log_ratio[e] = p > 0.0 ? std::log(p) - std::log(q[e]) : kNegInf;
  }

  const std::size_t N = cfg.samples, n = cfg.n;
  const double threshold = static_cast<double>(n) * a - 1e-9;
  const std::size_t cell = start_cell(env, cfg.start);
  std::vector<double> lw(N);
  for_each_sample(cfg.parallel, N, [&](std::size_t i) {
    std::size_t s = warm_up(space, cell, cfg.seed, i);
    double sum = f.values[s], acc = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      const auto k = draw(std::span<const double>(q).subspan(s * K, K),
                          counter_uniform(cfg.seed, i, ell + j));
      acc += log_ratio[s * K + k];
      s = space.successor(s, k);
      sum += f.values[s];
    }
    lw[i] = sum >= threshold ? acc : kNegInf;
  });

  ImportanceEstimate est;
  est.reference = tilt.rate;
  est.t = tilt.t;
  const double top = *std::max_element(lw.begin(), lw.end());
  if (top == kNegInf)
    throw Error(ErrorKind::DegenerateWeights, "no sample reached the event", "samples");
  double sum = 0.0, sum2 = 0.0;
  std::size_t hits = 0;
  for (double v : lw) {
    if (v == kNegInf) continue;
    const double x = std::exp(v - top);
    sum += x;
    sum2 += x * x;
    ++hits;
  }
  est.hit_fraction = static_cast<double>(hits) / N;
  est.ess = sum * sum / sum2;
  if (est.ess < std::min<double>(10.0, N) * (1.0 - 1e-12))
    throw Error(ErrorKind::DegenerateWeights, "effective sample size below 10", "samples");
  const double mean = sum / N;
  const double var = N > 1 ? (sum2 - N * mean * mean) / (N - 1) : 0.0;
  const double nd = static_cast<double>(n);
  est.rate = -(top + std::log(mean)) / nd;
  est.se = std::sqrt(std::max(var, 0.0) / N) / mean / nd;
  return est;
}

double verdict_envelope(std::size_t states, std::size_t n, double se) {
  return static_cast<double>(states) * std::log(n + 1.0) / n + 2.0 * se;
}

double decay_sandwich(std::size_t states, std::size_t n) {
  return (std::log(static_cast<double>(states)) +
          static_cast<double>(states) * std::log(n + 1.0)) / n;
}

LdpVerdict ldp_verify(const PeriodicEnvironment& env, const StateFunction& f,
                      int ell, double a, const SimConfig& cfg, double eps) {
  const auto est = importance_rate(env, f, ell, a, cfg, eps);
  const std::size_t S = f.values.size();
  LdpVerdict v;
  v.n = cfg.n;
  v.estimate = est.rate;
  v.se = est.se;
  v.reference = est.reference;
  v.envelope = verdict_envelope(S, cfg.n, est.se);
  v.pass = std::abs(v.estimate - v.reference) <= v.envelope;
  try {
    const auto exact = exact_rare_event(env, f, ell, cfg.n, a, cfg.start);
    if (exact.probability > 0.0) {
      v.has_exact = true;
      v.exact = -exact.log_probability / cfg.n;
      v.exact_envelope = decay_sandwich(S, cfg.n);
      v.pass = v.pass && std::abs(v.exact - v.reference) <= v.exact_envelope;
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EnumerationBudgetExceeded) throw;
  }
  return v;
}

}  // namespace rwre
