#include "rwre/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rwre {

namespace {

// q log(q/p) for q, p > 0, using log1p near q = p to reduce cancellation.
inline double xlogratio(double q, double p) {
  const double r = q / p;
  if (r > 0.5 && r < 2.0) return q * std::log1p((q - p) / p);
  return q * std::log(r);
}

double log_sum_exp(std::span<const double> a, std::span<const double> w) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (w[i] > 0.0) top = std::max(top, a[i]);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (w[i] > 0.0) acc += w[i] * std::exp(a[i] - top);
  return top + std::log(acc);
}

}  // namespace

double relative_entropy(std::span<const double> q, std::span<const double> p) {
  double acc = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] <= 0.0) continue;
    if (p[k] <= 0.0) return std::numeric_limits<double>::infinity();
    acc += xlogratio(q[k], p[k]);
  }
  return acc;
}

EntropyValue kernel_entropy(std::span<const double> mu,
                            std::span<const double> q,
                            std::span<const double> p, std::size_t letters) {
  if (q.size() != p.size() || q.size() != mu.size() * letters)
    throw Error(ErrorKind::ShapeMismatch, "entropy tables have mismatched shapes");
  EntropyValue out;
  for (std::size_t s = 0; s < mu.size(); ++s) {
    if (mu[s] <= 0.0) continue;
    double row = 0.0;
    for (std::size_t k = 0; k < letters; ++k) {
      const double qv = q[s * letters + k], pv = p[s * letters + k];
      if (qv <= 0.0) continue;
      if (pv <= 0.0) {
        out.support_violations.emplace_back(s, k);
        continue;
      }
      row += xlogratio(qv, pv);
    }
    out.value += mu[s] * row;
  }
  if (!out.support_violations.empty()) {
    out.infinite = true;
    out.value = 0.0;
  }
  return out;
}

EntropyValue kernel_entropy(const WordMeasure& mu, const WordKernel& q,
                            const WordKernel& p) {
  if (!q.space().compatible(p.space()) ||
      mu.weights.size() != q.space().num_states())
    throw Error(ErrorKind::ShapeMismatch, "measure and kernels live on different spaces");
  return kernel_entropy(mu.weights, q.probs(), p.probs(), q.space().num_letters());
}

EntropyValue edge_entropy(const EdgeMeasure& alpha, const WordKernel& p) {
  const auto& space = *alpha.space;
  const std::size_t S = space.num_states(), K = space.num_letters();
  EntropyValue out;
  for (std::size_t s = 0; s < S; ++s) {
    double mass = 0.0;
    for (std::size_t k = 0; k < K; ++k) mass += alpha.weights[s * K + k];
    if (mass <= 0.0) continue;
    for (std::size_t k = 0; k < K; ++k) {
      const double a = alpha.weights[s * K + k];
      if (a <= 0.0) continue;
      const double ref = mass * p.prob(s, k);
      if (ref <= 0.0) {
        out.support_violations.emplace_back(s, k);
        continue;
      }
      out.value += xlogratio(a, ref);
    }
  }
  if (!out.support_violations.empty()) {
    out.infinite = true;
    out.value = 0.0;
  }
  return out;
}

FiniteMemoryModel make_finite_memory_model(WordKernel kernel) {
  auto mu = stationary_measure(kernel);
  return FiniteMemoryModel{std::move(kernel), std::move(mu)};
}

WordKernel cell_kernel(const WordSpacePtr& space,
                       std::span<const double> per_cell) {
  const std::size_t S = space->num_states(), K = space->num_letters();
  if (per_cell.size() != space->env().num_cells() * K)
    throw Error(ErrorKind::ShapeMismatch, "per-cell table has wrong size");
  std::vector<double> q(S * K);
  for (std::size_t s = 0; s < S; ++s) {
    const auto c = space->walker_cell(s);
    std::copy_n(per_cell.begin() + c * K, K, q.begin() + s * K);
  }
  return WordKernel(space, std::move(q));
}

PrefixEntropy prefix_entropy(const FiniteMemoryModel& model, int n,
                             std::size_t max_entries) {
  if (n < 1) throw Error(ErrorKind::BadConfig, "n must be >= 1", "n");
  const auto& space = model.kernel.space();
  const auto& env = space.env();
  const std::size_t K = space.num_letters(), cells = env.num_cells();
  const int L = space.ell();

  std::size_t budget = cells;
  for (int i = 0; i < n; ++i) {
    if (budget > max_entries / K)
      throw Error(ErrorKind::StateBudgetExceeded,
                  "prefix marginal exceeds the entry budget", "n");
    budget *= K;
  }

  // marg holds the law of (X_0 cell, Z_1..Z_i) indexed cell * K^i + word.
  auto level_marginal = [&](int i) {
    std::size_t div = 1;
    for (int j = i; j < L; ++j) div *= K;
    std::size_t words = 1;
    for (int j = 0; j < i; ++j) words *= K;
    std::vector<double> out(cells * words, 0.0);
    for (std::size_t s = 0; s < space.num_states(); ++s)
      out[space.offset_of(s) * words + space.word_of(s) / div] += model.mu.weights[s];
    return out;
  };

  PrefixEntropy out;
  std::vector<double> marg;   // level i
  std::size_t words = 1;      // K^i
  std::vector<std::size_t> ctx_cell;  // walker cell for each level-(i-1) context
  double cumulative = 0.0;
  for (int i = 1; i <= n; ++i) {
    const std::size_t prev_words = words;
    words *= K;
    if (i <= L) {
      marg = level_marginal(i);
    } else {
      // Lift level i-1 to level i with the model kernel.
      const std::size_t tail = prev_words / space.num_words();  // K^(i-1-L)
      std::vector<double> next(cells * words);
      for (std::size_t u = 0; u < cells; ++u)
        for (std::size_t w = 0; w < prev_words; ++w) {
          const double mass = marg[u * prev_words + w];
          std::size_t c = u;
          std::size_t head = w / space.num_words();
          // advance the offset by the oldest i-1-L letters
          std::size_t div = tail;
          for (std::size_t j = 0; j < static_cast<std::size_t>(i - 1 - L); ++j) {
            div /= K;
            c = env.shift_by_letter(c, (head / div) % K);
          }
          const std::size_t st = space.state_index(c, w % space.num_words());
          for (std::size_t k = 0; k < K; ++k)
            next[(u * prev_words + w) * K + k] = mass * model.kernel.prob(st, k);
        }
      marg.swap(next);
    }

    // Walker cells of level-(i-1) contexts.
    std::vector<std::size_t> cell_now(cells * prev_words);
    if (i == 1) {
      for (std::size_t u = 0; u < cells; ++u) cell_now[u] = u;
    } else {
      for (std::size_t ctx = 0; ctx < cells * prev_words; ++ctx) {
        const std::size_t parent = ctx / K, k = ctx % K;
        cell_now[ctx] = env.shift_by_letter(ctx_cell[parent], k);
      }
    }
    ctx_cell.swap(cell_now);

    double term = 0.0;
    std::vector<double> cond(K);
    for (std::size_t ctx = 0; ctx < cells * prev_words; ++ctx) {
      double mass = 0.0;
      for (std::size_t k = 0; k < K; ++k) mass += marg[ctx * K + k];
      if (mass <= 0.0) continue;
      for (std::size_t k = 0; k < K; ++k) cond[k] = marg[ctx * K + k] / mass;
      term += mass * relative_entropy(cond, env.cell(ctx_cell[ctx]));
    }
    cumulative += term;
    out.terms.push_back(term);
    out.partial_means.push_back(cumulative / i);
  }

  const auto pplus = build_word_chain(model.kernel.space_ptr());
  const auto lim = kernel_entropy(model.mu, model.kernel, pplus);
  out.limit = lim.infinite ? std::numeric_limits<double>::infinity() : lim.value;
  return out;
}

double jensen_gap(std::span<const double> g, std::span<const double> mu,
                  std::span<const double> rho) {
  const std::size_t nx = mu.size(), ny = rho.size();
  if (g.size() != nx * ny)
    throw Error(ErrorKind::ShapeMismatch, "table shape differs from marginals");
  std::vector<double> col(nx);
  double lhs = 0.0;
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) col[x] = g[x * ny + y];
    lhs += rho[y] * log_sum_exp(col, mu);
  }
  std::vector<double> inner(nx, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) inner[x] += rho[y] * g[x * ny + y];
  return lhs - log_sum_exp(inner, mu);
}

}  // namespace rwre
