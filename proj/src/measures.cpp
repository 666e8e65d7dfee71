#include "rwre/measures.hpp"

#include <cmath>
#include <numeric>

#include "linalg.hpp"

namespace rwre {

double WordMeasure::expectation(const StateFunction& f) const {
  if (f.values.size() != weights.size())
    throw Error(ErrorKind::ShapeMismatch, "function length differs from measure", "f");
  double acc = 0.0;
  for (std::size_t s = 0; s < weights.size(); ++s) acc += weights[s] * f.values[s];
  return acc;
}

WordMeasure EdgeMeasure::source_marginal() const {
  const std::size_t S = space->num_states(), K = space->num_letters();
  WordMeasure mu{space, std::vector<double>(S, 0.0)};
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k) mu.weights[s] += weights[s * K + k];
  return mu;
}

WordMeasure EdgeMeasure::target_marginal() const {
  const std::size_t S = space->num_states(), K = space->num_letters();
  WordMeasure nu{space, std::vector<double>(S, 0.0)};
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k)
      nu.weights[space->successor(s, k)] += weights[s * K + k];
  return nu;
}

double EdgeMeasure::stationarity_defect() const {
  const auto mu = source_marginal(), nu = target_marginal();
  double d = 0.0;
  for (std::size_t s = 0; s < mu.weights.size(); ++s)
    d += std::abs(mu.weights[s] - nu.weights[s]);
  return d;
}

std::vector<double> EdgeMeasure::mean_step() const {
  const auto& range = space->env().range();
  const std::size_t S = space->num_states(), K = space->num_letters();
  std::vector<double> v(range.dim(), 0.0);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k)
      for (int i = 0; i < range.dim(); ++i)
        v[i] += weights[s * K + k] * static_cast<double>(range[k][i]);
  return v;
}

namespace {

constexpr std::size_t kDenseLimit = 4000;

std::vector<double> stationary_iterative(const WordKernel& kernel) {
  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  std::vector<double> mu(S, 1.0 / S), next(S);
  for (int it = 0; it < 1'000'000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      next[s] += 0.5 * mu[s];
      for (std::size_t k = 0; k < K; ++k)
        next[space.successor(s, k)] += 0.5 * mu[s] * kernel.prob(s, k);
    }
    double diff = 0.0;
    for (std::size_t s = 0; s < S; ++s) diff += std::abs(next[s] - mu[s]);
    mu.swap(next);
    if (diff < 1e-14) return mu;
  }
  throw Error(ErrorKind::NoConvergence, "stationary iteration did not converge");
}

}  // namespace

WordMeasure stationary_measure(const WordKernel& kernel) {
  if (!strongly_connected(kernel))
    throw Error(ErrorKind::NotIrreducible, "kernel is not irreducible");
  const auto& space = kernel.space();
  const std::size_t S = space.num_states();
  WordMeasure mu{kernel.space_ptr(), {}};
  if (S <= kDenseLimit) {
    const Eigen::VectorXd v =
        detail::stationary_dense(detail::dense_kernel(space, kernel.probs()));
    mu.weights.assign(v.data(), v.data() + S);
  } else {
    mu.weights = stationary_iterative(kernel);
  }
  return mu;
}

TorusLaw environment_stationary(const PeriodicEnvironment& env) {
  const std::size_t n = env.num_cells(), K = env.range().size();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::vector<std::size_t>> fwd(n), bwd(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t k = 0; k < K; ++k) {
      const auto v = env.shift_by_letter(u, k);
      P(u, v) += env.cell(u)[k];
      fwd[u].push_back(v);
      bwd[v].push_back(u);
    }
  // BFS levels from cell 0; the period is the gcd of level defects.
  auto bfs = [&](const auto& adj) {
    std::vector<long> level(n, -1);
    std::vector<std::size_t> queue{0};
    level[0] = 0;
    for (std::size_t i = 0; i < queue.size(); ++i)
      for (auto v : adj[queue[i]])
        if (level[v] < 0) {
          level[v] = level[queue[i]] + 1;
          queue.push_back(v);
        }
    return level;
  };
  const auto level = bfs(fwd);
  const auto back = bfs(bwd);
  for (std::size_t u = 0; u < n; ++u)
    if (level[u] < 0 || back[u] < 0)
      throw Error(ErrorKind::NotIrreducible, "environment chain is not irreducible");
  long period = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (auto v : fwd[u]) period = std::gcd(period, std::labs(level[u] + 1 - level[v]));

  TorusLaw out;
  const Eigen::VectorXd mu = detail::stationary_dense(P);
  out.weights.assign(mu.data(), mu.data() + n);
  out.period = static_cast<std::size_t>(period == 0 ? 1 : period);
  return out;
}

WordMeasure EmpiricalCounts::measure() const {
  WordMeasure mu{space, std::vector<double>(counts.size())};
  for (std::size_t s = 0; s < counts.size(); ++s)
    mu.weights[s] = static_cast<double>(counts[s]) / static_cast<double>(n);
  return mu;
}

EmpiricalCounts empirical_word_counts(const WalkPath& path,
                                      const WordSpacePtr& space,
                                      std::size_t n) {
  const auto& env = space->env();
  const std::size_t ell = static_cast<std::size_t>(space->ell());
  const std::size_t N = path.letters.size();
  if (n == 0) {
    if (N <= ell)
      throw Error(ErrorKind::PathTooShort, "path shorter than ell + 1", "path");
    n = N - ell;
  }
  if (N < n + ell)
    throw Error(ErrorKind::PathTooShort, "path too short for requested n", "path");
  if (path.start.size() != static_cast<std::size_t>(env.dim()))
    throw Error(ErrorKind::DimensionMismatch, "path start has wrong dimension", "path");

  EmpiricalCounts c{space, std::vector<std::uint64_t>(space->num_states(), 0), n};
  const std::size_t K = space->num_letters();
  const std::size_t top = space->num_words() / K;
  std::size_t cell = env.cell_index(path.start);
  std::size_t word = 0;
  for (std::size_t i = 0; i < ell; ++i) word = word * K + path.letters[i];
  for (std::size_t k = 0; k < n; ++k) {
    ++c.counts[space->state_index(cell, word)];
    cell = env.shift_by_letter(cell, path.letters[k]);
    if (k + ell < N) word = (word % top) * K + path.letters[k + ell];
  }
  return c;
}

WordMeasure empirical_word_measure(const WalkPath& path,
                                   const WordSpacePtr& space, std::size_t n) {
  return empirical_word_counts(path, space, n).measure();
}

WordSpacePtr level_space(const WordSpace& space, int level) {
  if (level < 1 || level > space.ell())
    throw Error(ErrorKind::BadConfig, "restriction level out of range", "ell");
  if (level == space.ell()) return std::make_shared<const WordSpace>(space);
  return std::make_shared<const WordSpace>(space.env_ptr(), level);
}

namespace {

std::size_t truncation_divisor(const WordSpace& space, int level) {
  std::size_t div = 1;
  for (int i = level; i < space.ell(); ++i) div *= space.num_letters();
  return div;
}

}  // namespace

WordMeasure restrict_level(const WordMeasure& mu, int level) {
  auto target = level_space(*mu.space, level);
  const std::size_t div = truncation_divisor(*mu.space, level);
  WordMeasure out{target, std::vector<double>(target->num_states(), 0.0)};
  for (std::size_t s = 0; s < mu.weights.size(); ++s) {
    const auto t = target->state_index(mu.space->offset_of(s),
                                       mu.space->word_of(s) / div);
    out.weights[t] += mu.weights[s];
  }
  return out;
}

EmpiricalCounts restrict_level(const EmpiricalCounts& c, int level) {
  auto target = level_space(*c.space, level);
  const std::size_t div = truncation_divisor(*c.space, level);
  EmpiricalCounts out{target, std::vector<std::uint64_t>(target->num_states(), 0), c.n};
  for (std::size_t s = 0; s < c.counts.size(); ++s)
    out.counts[target->state_index(c.space->offset_of(s),
                                   c.space->word_of(s) / div)] += c.counts[s];
  return out;
}

KernelDecomposition edge_to_kernel(const EdgeMeasure& alpha,
                                   const WordKernel* fallback) {
  const auto& space = *alpha.space;
  const std::size_t S = space.num_states(), K = space.num_letters();
  auto mu = alpha.source_marginal();
  std::vector<double> q(S * K);
  for (std::size_t s = 0; s < S; ++s) {
    if (mu.weights[s] > 0.0) {
      for (std::size_t k = 0; k < K; ++k)
        q[s * K + k] = alpha.weights[s * K + k] / mu.weights[s];
      continue;
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (alpha.weights[s * K + k] != 0.0)
        throw Error(ErrorKind::ZeroMassState,
                    "state " + std::to_string(s) + " has zero mass but a nonzero row");
      q[s * K + k] = fallback ? fallback->prob(s, k) : 1.0 / static_cast<double>(K);
    }
  }
  return {std::move(mu), WordKernel(alpha.space, std::move(q))};
}

EdgeMeasure edge_measure(const WordMeasure& mu, const WordKernel& q) {
  const auto& space = q.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  if (mu.weights.size() != S)
    throw Error(ErrorKind::ShapeMismatch, "measure and kernel sizes differ");
  EdgeMeasure alpha{q.space_ptr(), std::vector<double>(S * K)};
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k)
      alpha.weights[s * K + k] = mu.weights[s] * q.prob(s, k);
  return alpha;
}

}  // namespace rwre
