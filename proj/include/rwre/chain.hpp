#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "rwre/env.hpp"

namespace rwre {

/// State space Omega_l of the word chain: (torus offset u, word z_1..z_l).
///
/// Canonical order: offset in row-major torus order, then the word read as a
/// base-|R| integer with the most recent letter z_l least significant. The
/// successor of (u, z_1..z_l) under letter z is (u + z_1, z_2..z_l, z); the
/// walker sits at u + z_1 + ... + z_l.
class WordSpace {
 public:
  static constexpr std::size_t kDefaultStateCap = 1'000'000;

  WordSpace(std::shared_ptr<const PeriodicEnvironment> env, int ell,
            std::size_t max_states = kDefaultStateCap);

  const PeriodicEnvironment& env() const { return *env_; }
  std::shared_ptr<const PeriodicEnvironment> env_ptr() const { return env_; }
  int ell() const { return ell_; }
  std::size_t num_letters() const { return letters_; }
  std::size_t num_words() const { return words_; }
  std::size_t num_states() const { return states_; }
  std::size_t num_edges() const { return states_ * letters_; }

  std::size_t state_index(std::size_t offset, std::size_t word) const {
    return offset * words_ + word;
  }
  std::size_t offset_of(std::size_t s) const { return s / words_; }
  std::size_t word_of(std::size_t s) const { return s % words_; }
  /// Letter i (0 = oldest, ell-1 = most recent) of the word of state s.
  std::size_t letter(std::size_t s, int i) const;
  std::vector<std::size_t> word_letters(std::size_t s) const;
  std::size_t word_index(std::span<const std::size_t> letters) const;

  std::size_t successor(std::size_t s, std::size_t k) const {
    return succ_[s * letters_ + k];
  }
  std::span<const std::size_t> successors() const { return succ_; }
  /// Torus cell where the next step of state s is drawn.
  std::size_t walker_cell(std::size_t s) const { return walker_[s]; }

  /// Same environment, range and level.
  bool compatible(const WordSpace& other) const {
    return ell_ == other.ell_ && *env_ == *other.env_;
  }

 private:
  std::shared_ptr<const PeriodicEnvironment> env_;
  int ell_;
  std::size_t letters_;
  std::size_t words_;
  std::size_t states_;
  std::vector<std::size_t> succ_;
  std::vector<std::size_t> walker_;
};

using WordSpacePtr = std::shared_ptr<const WordSpace>;

/// Nonnegative matrix supported on shift edges (s -> successor(s, k)),
/// stored as an S x |R| table. The actual matrix is exp(log_scale) * weights.
struct ShiftMatrix {
  WordSpacePtr space;
  std::vector<double> weights;
  double log_scale = 0.0;

  double at(std::size_t s, std::size_t k) const {
    return weights[s * space->num_letters() + k];
  }
  std::span<const double> row(std::size_t s) const {
    return std::span<const double>(weights).subspan(
        s * space->num_letters(), space->num_letters());
  }
};

/// Row-stochastic kernel on shift edges; q(s, k) is the probability of
/// appending letter k at state s.
class WordKernel {
 public:
  WordKernel(WordSpacePtr space, std::vector<double> probs);

  const WordSpace& space() const { return *space_; }
  const WordSpacePtr& space_ptr() const { return space_; }
  double prob(std::size_t s, std::size_t k) const {
    return probs_[s * space_->num_letters() + k];
  }
  std::span<const double> row(std::size_t s) const {
    return std::span<const double>(probs_).subspan(
        s * space_->num_letters(), space_->num_letters());
  }
  const std::vector<double>& probs() const { return probs_; }
  ShiftMatrix as_matrix() const { return {space_, probs_, 0.0}; }

 private:
  WordSpacePtr space_;
  std::vector<double> probs_;
};

/// A real function on word states (tilt f or potential h).
struct StateFunction {
  std::vector<double> values;
};

/// p^+ on Omega_ell for the given environment.
WordKernel build_word_chain(const PeriodicEnvironment& env, int ell,
                            std::size_t max_states = WordSpace::kDefaultStateCap);
WordKernel build_word_chain(WordSpacePtr space);

/// M(s, s') = p^+(s, s') exp(f(s)), tilted at the departing state.
ShiftMatrix tilt_kernel(const WordKernel& kernel, const StateFunction& f);

/// Strong connectivity of the support digraph.
bool strongly_connected(const ShiftMatrix& m);
bool strongly_connected(const WordKernel& k);

struct PerronRoot {
  double log_eigenvalue = 0.0;
  std::vector<double> right_vector;  // positive, max entry 1
  std::size_t iterations = 0;
  double residual = 0.0;             // ||M h - e^Lambda h||_inf / ||h||_inf
  bool dense_refined = false;
};

struct PowerIterationOptions {
  double tolerance = 1e-13;
  std::size_t max_iterations = 100'000;
  std::size_t dense_limit = 2000;
  bool parallel = true;
};

/// Log spectral radius and positive right eigenvector of an irreducible
/// nonnegative shift matrix. Throws NotIrreducible or NoConvergence.
PerronRoot pf_log_eigenvalue(const ShiftMatrix& m,
                             const PowerIterationOptions& opts = {});

/// q*(s, s') = M(s, s') h(s') / (e^Lambda h(s)).
WordKernel doob_transform(const WordKernel& kernel, const StateFunction& f);
WordKernel doob_transform(const ShiftMatrix& m, const PerronRoot& root);

}  // namespace rwre
