#include "rwre/kernels.hpp"

#include <algorithm>
#include <limits>

#include <omp.h>

namespace rwre::kernels {

namespace {

inline double row_dot(std::span<const std::size_t> succ,
                      std::span<const double> w, std::size_t letters,
                      std::span<const double> x, std::size_t s) {
  double acc = 0.0;
  const std::size_t base = s * letters;
  for (std::size_t k = 0; k < letters; ++k)
    acc += w[base + k] * x[succ[base + k]];
  return acc;
}

inline double row_extreme(std::span<const std::size_t> succ,
                          std::span<const double> F, std::size_t letters,
                          std::span<const double> v, std::size_t s,
                          bool maximize) {
  const std::size_t base = s * letters;
  double best = maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < letters; ++k) {
    const double c = F[base + k] + v[succ[base + k]];
    best = maximize ? std::max(best, c) : std::min(best, c);
  }
  return best;
}

// Below this many rows the fork/join overhead dominates.
constexpr long long kParallelThreshold = 4096;

}  // namespace

void shift_matvec_serial(std::span<const std::size_t> succ,
                         std::span<const double> w, std::size_t letters,
                         std::span<const double> x, std::span<double> y) {
  for (std::size_t s = 0; s < y.size(); ++s)
    y[s] = row_dot(succ, w, letters, x, s);
}

void shift_matvec_parallel(std::span<const std::size_t> succ,
                           std::span<const double> w, std::size_t letters,
                           std::span<const double> x, std::span<double> y) {
  const long long n = static_cast<long long>(y.size());
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (long long s = 0; s < n; ++s)
    y[s] = row_dot(succ, w, letters, x, static_cast<std::size_t>(s));
}

void maxplus_step_serial(std::span<const std::size_t> succ,
                         std::span<const double> F, std::size_t letters,
                         std::span<const double> v, std::span<double> out,
                         bool maximize) {
  for (std::size_t s = 0; s < out.size(); ++s)
    out[s] = row_extreme(succ, F, letters, v, s, maximize);
}

void maxplus_step_parallel(std::span<const std::size_t> succ,
                           std::span<const double> F, std::size_t letters,
                           std::span<const double> v, std::span<double> out,
                           bool maximize) {
  const long long n = static_cast<long long>(out.size());
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (long long s = 0; s < n; ++s)
    out[s] = row_extreme(succ, F, letters, v, static_cast<std::size_t>(s),
                         maximize);
}

void set_num_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace rwre::kernels
