#pragma once

#include <vector>

#include "rwre/chain.hpp"

namespace rwre {

/// Table F(state, letter) on the edges of a word chain.
struct ClassKFunction {
  WordSpacePtr space;
  std::vector<double> table;  // S x |R|

  double at(std::size_t s, std::size_t k) const {
    return table[s * space->num_letters() + k];
  }
};

struct CycleSum {
  std::size_t state;   // tail of the non-tree edge closing the cycle
  std::size_t letter;
  double sum;
};

/// Fundamental cycles of the BFS tree rooted at state 0.
struct LoopReport {
  std::vector<CycleSum> cycles;
  double max_abs = 0.0;
  bool pass = false;
};

/// F(s, k) = h(succ(s, k)) - h(s)
ClassKFunction gradient_of(const std::vector<double>& h, const WordSpacePtr& space);

LoopReport verify_class_k(const ClassKFunction& F, const WordKernel& kernel,
                          double tol = 1e-10);

/// Potential with h(0) = 0 accumulated along the BFS tree. Throws NonGradient
/// (field names the worst edge) if a non-tree residual exceeds `tol`.
std::vector<double> fit_potential(const ClassKFunction& F, const WordKernel& kernel,
                                  double tol = 1e-10);

enum class Ancestor { Root, Source };

/// Sum of F along a path from `from` to `to`, written as the difference of
/// two sums out of a common ancestor: state 0 (Root) or `from` itself
/// (Source). Throws Unreachable if no path exists.
double path_sum_f(const ClassKFunction& F, const WordKernel& kernel,
                  std::size_t from, std::size_t to,
                  Ancestor ancestor = Ancestor::Root);

/// Average over all torus offsets u of path_sum_f((u, w) -> (u + x, w)).
double torus_translate_average(const ClassKFunction& F, const WordKernel& kernel,
                               std::size_t word, std::span<const std::int64_t> x);

struct GrowthReport {
  std::vector<double> g;        // g[n-1] = max |sum F| over length-n paths / n
  double max_mean_cycle = 0.0;
  double min_mean_cycle = 0.0;

  double max_abs_mean_cycle() const;
};

GrowthReport max_path_growth(const ClassKFunction& F, const WordKernel& kernel,
                             std::size_t n_max, bool parallel = true);

/// Karp's maximum mean cycle on the shift digraph (strongly connected).
double max_mean_cycle(const ClassKFunction& F, const WordKernel& kernel);

}  // namespace rwre
