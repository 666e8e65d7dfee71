#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP version; both produce bit-identical output because every output
// entry is computed independently in a fixed order.

#include <cstddef>
#include <span>

namespace rwre::kernels {

/// y[s] = sum_k w[s*K + k] * x[succ[s*K + k]]
void shift_matvec_serial(std::span<const std::size_t> succ,
                         std::span<const double> w, std::size_t letters,
                         std::span<const double> x, std::span<double> y);
void shift_matvec_parallel(std::span<const std::size_t> succ,
                           std::span<const double> w, std::size_t letters,
                           std::span<const double> x, std::span<double> y);

/// out[s] = max_k (F[s*K + k] + v[succ[s*K + k]])  (min when !maximize)
void maxplus_step_serial(std::span<const std::size_t> succ,
                         std::span<const double> F, std::size_t letters,
                         std::span<const double> v, std::span<double> out,
                         bool maximize);
void maxplus_step_parallel(std::span<const std::size_t> succ,
                           std::span<const double> F, std::size_t letters,
                           std::span<const double> v, std::span<double> out,
                           bool maximize);

/// Calls fn(i) for i in [0, n). The parallel version uses a static schedule;
/// fn must only write to slot i of its outputs.
template <typename Fn>
void for_each_index_serial(std::size_t n, Fn&& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

template <typename Fn>
void for_each_index_parallel(std::size_t n, Fn&& fn) {
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

/// Sets the OpenMP worker count (no-op for n <= 0).
void set_num_threads(int n);
int max_threads();

}  // namespace rwre::kernels
