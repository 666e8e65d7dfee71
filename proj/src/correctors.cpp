#include "rwre/correctors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "rwre/kernels.hpp"

namespace rwre {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct BfsTree {
  std::vector<std::size_t> parent_edge;  // s*K + k of the edge into the node
  std::vector<std::size_t> order;
};

// Edges are scanned in (state, letter) order, so the tree is deterministic.
BfsTree bfs_tree(const WordKernel& kernel, std::size_t root) {
  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  BfsTree t{std::vector<std::size_t>(S, kNone), {}};
  std::vector<char> seen(S, 0);
  std::deque<std::size_t> queue{root};
  seen[root] = 1;
  while (!queue.empty()) {
    const auto s = queue.front();
    queue.pop_front();
    t.order.push_back(s);
    for (std::size_t k = 0; k < K; ++k) {
      if (kernel.prob(s, k) <= 0.0) continue;
      const auto n = space.successor(s, k);
      if (seen[n]) continue;
      seen[n] = 1;
      t.parent_edge[n] = s * K + k;
      queue.push_back(n);
    }
  }
  return t;
}

// Sums of F along tree paths from the root; NaN where unreachable.
std::vector<double> tree_sums(const ClassKFunction& F, const WordKernel& kernel,
                              const BfsTree& tree) {
  const std::size_t K = kernel.space().num_letters();
  std::vector<double> acc(kernel.space().num_states(),
                          std::numeric_limits<double>::quiet_NaN());
  acc[tree.order.front()] = 0.0;
  for (std::size_t i = 1; i < tree.order.size(); ++i) {
    const auto s = tree.order[i];
    const auto e = tree.parent_edge[s];
    acc[s] = acc[e / K] + F.table[e];
  }
  return acc;
}

void check_table(const ClassKFunction& F, const WordKernel& kernel) {
  if (F.table.size() != kernel.space().num_edges())
    throw Error(ErrorKind::ShapeMismatch, "F table does not match the chain", "F");
  for (double v : F.table)
    if (!std::isfinite(v)) throw Error(ErrorKind::BadConfig, "F has a non-finite entry", "F");
}

}  // namespace

ClassKFunction gradient_of(const std::vector<double>& h, const WordSpacePtr& space) {
  const std::size_t S = space->num_states(), K = space->num_letters();
  if (h.size() != S)
    throw Error(ErrorKind::ShapeMismatch, "potential does not match the chain", "h");
  ClassKFunction F{space, std::vector<double>(S * K)};
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k)
      F.table[s * K + k] = h[space->successor(s, k)] - h[s];
  return F;
}

LoopReport verify_class_k(const ClassKFunction& F, const WordKernel& kernel,
                          double tol) {
  check_table(F, kernel);
  if (!strongly_connected(kernel))
    throw Error(ErrorKind::NotIrreducible, "shift digraph is not strongly connected");
  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  const auto tree = bfs_tree(kernel, 0);
  const auto pot = tree_sums(F, kernel, tree);

  LoopReport report;
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k) {
      if (kernel.prob(s, k) <= 0.0) continue;
      const auto n = space.successor(s, k);
      if (tree.parent_edge[n] == s * K + k) continue;
      const double sum = pot[s] + F.table[s * K + k] - pot[n];
      report.cycles.push_back({s, k, sum});
      report.max_abs = std::max(report.max_abs, std::abs(sum));
    }
  report.pass = report.max_abs <= tol;
  return report;
}

std::vector<double> fit_potential(const ClassKFunction& F, const WordKernel& kernel,
                                  double tol) {
  const auto loops = verify_class_k(F, kernel, tol);
  if (!loops.pass) {
    const auto worst = std::max_element(
        loops.cycles.begin(), loops.cycles.end(),
        [](const CycleSum& a, const CycleSum& b) { return std::abs(a.sum) < std::abs(b.sum); });
    throw Error(ErrorKind::NonGradient,
                "F is not a gradient: residual " + std::to_string(worst->sum),
                "F[" + std::to_string(worst->state) + "][" +
                    std::to_string(worst->letter) + "]");
  }
  return tree_sums(F, kernel, bfs_tree(kernel, 0));
}

double path_sum_f(const ClassKFunction& F, const WordKernel& kernel,
                  std::size_t from, std::size_t to, Ancestor ancestor) {
  check_table(F, kernel);
  const std::size_t S = kernel.space().num_states();
  if (from >= S || to >= S)
    throw Error(ErrorKind::ShapeMismatch, "state index out of range", "state");
  const auto tree = bfs_tree(kernel, ancestor == Ancestor::Root ? 0 : from);
  const auto sums = tree_sums(F, kernel, tree);
  if (std::isnan(sums[to]) || std::isnan(sums[from]))
    throw Error(ErrorKind::Unreachable, "target state is not reachable", "to");
  return sums[to] - sums[from];
}

double torus_translate_average(const ClassKFunction& F, const WordKernel& kernel,
                               std::size_t word, std::span<const std::int64_t> x) {
  const auto& space = kernel.space();
  const auto& env = space.env();
  const auto tree = bfs_tree(kernel, 0);
  const auto sums = tree_sums(F, kernel, tree);
  double acc = 0.0;
  for (std::size_t u = 0; u < env.num_cells(); ++u) {
    const auto a = space.state_index(u, word);
    const auto b = space.state_index(env.shift(u, x), word);
    if (std::isnan(sums[a]) || std::isnan(sums[b]))
      throw Error(ErrorKind::Unreachable, "translate is not reachable", "x");
    acc += sums[b] - sums[a];
  }
  return acc / static_cast<double>(env.num_cells());
}

double GrowthReport::max_abs_mean_cycle() const {
  return std::max(std::abs(max_mean_cycle), std::abs(min_mean_cycle));
}

double max_mean_cycle(const ClassKFunction& F, const WordKernel& kernel) {
  check_table(F, kernel);
  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  constexpr double kNeg = -std::numeric_limits<double>::infinity();
  // D[k][v]: heaviest walk of exactly k edges from state 0 to v.
  std::vector<double> D((S + 1) * S, kNeg);
  D[0] = 0.0;
  for (std::size_t k = 0; k < S; ++k) {
    const double* cur = &D[k * S];
    double* nxt = &D[(k + 1) * S];
    for (std::size_t s = 0; s < S; ++s) {
      if (cur[s] == kNeg) continue;
      for (std::size_t z = 0; z < K; ++z) {
        if (kernel.prob(s, z) <= 0.0) continue;
        const auto t = space.successor(s, z);
        nxt[t] = std::max(nxt[t], cur[s] + F.table[s * K + z]);
      }
    }
  }
  double best = kNeg;
  const double* last = &D[S * S];
  for (std::size_t v = 0; v < S; ++v) {
    if (last[v] == kNeg) continue;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < S; ++k) {
      if (D[k * S + v] == kNeg) continue;
      worst = std::min(worst, (last[v] - D[k * S + v]) / static_cast<double>(S - k));
    }
    best = std::max(best, worst);
  }
  return best;
}

GrowthReport max_path_growth(const ClassKFunction& F, const WordKernel& kernel,
                             std::size_t n_max, bool parallel) {
  check_table(F, kernel);
  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  // Missing edges get -inf (max) or +inf (min) so they are never chosen.
  std::vector<double> Fmax(F.table), Fmin(F.table);
  for (std::size_t e = 0; e < S * K; ++e)
    if (kernel.prob(e / K, e % K) <= 0.0) {
      Fmax[e] = -std::numeric_limits<double>::infinity();
      Fmin[e] = std::numeric_limits<double>::infinity();
    }
  auto step = parallel ? kernels::maxplus_step_parallel : kernels::maxplus_step_serial;

  GrowthReport report;
  std::vector<double> up(S, 0.0), down(S, 0.0), tmp(S);
  for (std::size_t n = 1; n <= n_max; ++n) {
    step(space.successors(), Fmax, K, up, tmp, true);
    up.swap(tmp);
    step(space.successors(), Fmin, K, down, tmp, false);
    down.swap(tmp);
    const double hi = *std::max_element(up.begin(), up.end());
    const double lo = *std::min_element(down.begin(), down.end());
    report.g.push_back(std::max(std::abs(hi), std::abs(lo)) / static_cast<double>(n));
  }
  report.max_mean_cycle = max_mean_cycle(F, kernel);
  ClassKFunction neg{F.space, F.table};
  for (double& v : neg.table) v = -v;
  report.min_mean_cycle = -max_mean_cycle(neg, kernel);
  return report;
}

}  // namespace rwre
