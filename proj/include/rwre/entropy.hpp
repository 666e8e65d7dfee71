#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rwre/measures.hpp"

namespace rwre {

/// Nonnegative extended real. Optimisers never see IEEE infinities: an
/// infinite value carries the (state, letter) pairs that caused it.
struct EntropyValue {
  double value = 0.0;
  bool infinite = false;
  std::vector<std::pair<std::size_t, std::size_t>> support_violations;
};

/// sum_s mu(s) sum_k q(s,k) log(q(s,k)/p(s,k)) with 0 log 0 = 0; +inf when
/// q > 0 = p on a state with mu > 0. Tables are S x letters.
EntropyValue kernel_entropy(std::span<const double> mu,
                            std::span<const double> q,
                            std::span<const double> p, std::size_t letters);
EntropyValue kernel_entropy(const WordMeasure& mu, const WordKernel& q,
                            const WordKernel& p);
/// H(alpha | alpha_1 x p), alpha an edge measure.
EntropyValue edge_entropy(const EdgeMeasure& alpha, const WordKernel& p);

/// Relative entropy of two probability vectors (single row).
double relative_entropy(std::span<const double> q, std::span<const double> p);

/// Stationary finite-memory model: the next step depends on the walker's
/// cell and the previous level-1 steps, i.e. it is a kernel on level-`level`
/// word states. `level` is the index from which the conditional entropies
/// stop changing.
struct FiniteMemoryModel {
  WordKernel kernel;
  WordMeasure mu;  // stationary law of kernel

  int level() const { return kernel.space().ell(); }
};

/// Builds the model from a kernel and its stationary law.
FiniteMemoryModel make_finite_memory_model(WordKernel kernel);

/// Lifts a cell-only model (next-step law per torus cell, |cells| x |R|)
/// to a level-`level` kernel.
WordKernel cell_kernel(const WordSpacePtr& space,
                       std::span<const double> per_cell);

struct PrefixEntropy {
  std::vector<double> terms;          // term i: conditional entropy of Z_i
  std::vector<double> partial_means;  // n^{-1} H_{G_{1,n}}
  double limit = 0.0;                 // kernel_entropy(mu, q, p^+)
};

/// Per-step conditional entropies of the stationary model process against
/// the quenched walk, for i = 1..n. Throws StateBudgetExceeded when the
/// level-n marginal would exceed `max_entries`.
PrefixEntropy prefix_entropy(const FiniteMemoryModel& model, int n,
                             std::size_t max_entries = 10'000'000);

/// int rho(dy) log int mu(dx) e^{g(x,y)} - log int mu(dx) e^{int rho(dy) g(x,y)}
/// for g stored row-major as |X| x |Y|. Nonnegative up to rounding.
double jensen_gap(std::span<const double> g, std::span<const double> mu,
                  std::span<const double> rho);

}  // namespace rwre
