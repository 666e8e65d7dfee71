#include "rwre/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "rwre/kernels.hpp"

namespace rwre {

WordSpace::WordSpace(std::shared_ptr<const PeriodicEnvironment> env, int ell,
                     std::size_t max_states)
    : env_(std::move(env)), ell_(ell), letters_(env_->range().size()) {
  if (ell_ < 1) throw Error(ErrorKind::BadConfig, "ell must be >= 1", "ell");
  words_ = 1;
  for (int i = 0; i < ell_; ++i) {
    if (words_ > max_states / letters_)
      throw Error(ErrorKind::StateBudgetExceeded,
                  "word chain exceeds the state budget", "ell");
    words_ *= letters_;
  }
  if (words_ > max_states / env_->num_cells())
    throw Error(ErrorKind::StateBudgetExceeded,
                "word chain exceeds the state budget", "ell");
  states_ = words_ * env_->num_cells();

  const std::size_t tail = words_ / letters_;  // |R|^(ell-1)
  succ_.resize(states_ * letters_);
  walker_.resize(states_);
  for (std::size_t s = 0; s < states_; ++s) {
    const std::size_t u = offset_of(s);
    const std::size_t w = word_of(s);
    const std::size_t first = w / tail;
    const std::size_t u_next = env_->shift_by_letter(u, first);
    for (std::size_t k = 0; k < letters_; ++k)
      succ_[s * letters_ + k] = state_index(u_next, (w % tail) * letters_ + k);
    std::size_t cell = u;
    for (int i = 0; i < ell_; ++i) cell = env_->shift_by_letter(cell, letter(s, i));
    walker_[s] = cell;
  }
}

std::size_t WordSpace::letter(std::size_t s, int i) const {
  std::size_t w = word_of(s);
  for (int j = ell_ - 1; j > i; --j) w /= letters_;
  return w % letters_;
}

std::vector<std::size_t> WordSpace::word_letters(std::size_t s) const {
  std::vector<std::size_t> out(ell_);
  std::size_t w = word_of(s);
  for (int i = ell_ - 1; i >= 0; --i) {
    out[i] = w % letters_;
    w /= letters_;
  }
  return out;
}

std::size_t WordSpace::word_index(std::span<const std::size_t> letters) const {
  std::size_t w = 0;
  for (auto k : letters) w = w * letters_ + k;
  return w;
}

WordKernel::WordKernel(WordSpacePtr space, std::vector<double> probs)
    : space_(std::move(space)), probs_(std::move(probs)) {
  if (probs_.size() != space_->num_edges())
    throw Error(ErrorKind::ShapeMismatch, "kernel table has wrong size");
  const std::size_t K = space_->num_letters();
  for (std::size_t s = 0; s < space_->num_states(); ++s) {
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double v = probs_[s * K + k];
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorKind::NotStochastic, "negative kernel entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-10)
      throw Error(ErrorKind::NotStochastic, "kernel row does not sum to 1");
  }
}

WordKernel build_word_chain(WordSpacePtr space) {
  const auto& env = space->env();
  const std::size_t K = space->num_letters();
  std::vector<double> probs(space->num_edges());
  for (std::size_t s = 0; s < space->num_states(); ++s) {
    auto p = env.cell(space->walker_cell(s));
    std::copy(p.begin(), p.end(), probs.begin() + s * K);
  }
  return WordKernel(std::move(space), std::move(probs));
}

WordKernel build_word_chain(const PeriodicEnvironment& env, int ell,
                            std::size_t max_states) {
  auto space = std::make_shared<const WordSpace>(
      std::make_shared<const PeriodicEnvironment>(env), ell, max_states);
  return build_word_chain(std::move(space));
}

ShiftMatrix tilt_kernel(const WordKernel& kernel, const StateFunction& f) {
  const auto& space = kernel.space();
  if (f.values.size() != space.num_states())
    throw Error(ErrorKind::ShapeMismatch, "tilt function has wrong length", "f");
  double top = -std::numeric_limits<double>::infinity();
  for (double v : f.values) {
    if (!std::isfinite(v))
      throw Error(ErrorKind::BadConfig, "tilt function must be finite", "f");
    top = std::max(top, v);
  }
  ShiftMatrix m{kernel.space_ptr(), kernel.probs(), top};
  const std::size_t K = space.num_letters();
  for (std::size_t s = 0; s < space.num_states(); ++s) {
    const double scale = std::exp(f.values[s] - top);
    for (std::size_t k = 0; k < K; ++k) m.weights[s * K + k] *= scale;
  }
  return m;
}

namespace {

std::size_t reach_count(const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto s = stack.back();
    stack.pop_back();
    for (auto t : adj[s])
      if (!seen[t]) {
        seen[t] = 1;
        ++count;
        stack.push_back(t);
      }
  }
  return count;
}

}  // namespace

bool strongly_connected(const ShiftMatrix& m) {
  const auto& space = *m.space;
  const std::size_t S = space.num_states(), K = space.num_letters();
  std::vector<std::vector<std::size_t>> fwd(S), bwd(S);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k)
      if (m.weights[s * K + k] > 0.0) {
        const auto t = space.successor(s, k);
        fwd[s].push_back(t);
        bwd[t].push_back(s);
      }
  return reach_count(fwd) == S && reach_count(bwd) == S;
}

bool strongly_connected(const WordKernel& k) {
  return strongly_connected(k.as_matrix());
}

namespace {

// rho estimate at the max entry of x and relative residual ||Wx - rho x||/rho.
std::pair<double, double> estimate(std::span<const double> x,
                                   std::span<const double> y) {
  const auto i = std::max_element(x.begin(), x.end()) - x.begin();
  const double rho = y[i] / x[i];
  double res = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    res = std::max(res, std::abs(y[j] - rho * x[j]));
  return {rho, res / rho};
}

Eigen::MatrixXd dense_of(const ShiftMatrix& m) {
  const auto& space = *m.space;
  const std::size_t S = space.num_states(), K = space.num_letters();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(S, S);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k)
      A(s, space.successor(s, k)) += m.weights[s * K + k];
  return A;
}

void normalize_max(std::vector<double>& x) {
  const double top = *std::max_element(x.begin(), x.end());
  for (double& v : x) v /= top;
}

}  // namespace

PerronRoot pf_log_eigenvalue(const ShiftMatrix& m,
                             const PowerIterationOptions& opts) {
  if (!strongly_connected(m))
    throw Error(ErrorKind::NotIrreducible, "matrix support is not strongly connected");
  const auto& space = *m.space;
  const std::size_t S = space.num_states(), K = space.num_letters();
  auto matvec = opts.parallel ? kernels::shift_matvec_parallel
                              : kernels::shift_matvec_serial;

  // Shifting by the max row sum makes the iteration matrix primitive, so
  // periodic chains converge too.
  double shift = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    double r = 0.0;
    for (std::size_t k = 0; k < K; ++k) r += m.weights[s * K + k];
    shift = std::max(shift, r);
  }

  PerronRoot out;
  std::vector<double> x(S, 1.0), y(S);
  double rho = 0.0, res = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    matvec(space.successors(), m.weights, K, x, y);
    std::tie(rho, res) = estimate(x, y);
    out.iterations = it + 1;
    if (res <= opts.tolerance) break;
    for (std::size_t j = 0; j < S; ++j) x[j] = y[j] + shift * x[j];
    normalize_max(x);
  }

  if (res > opts.tolerance && S <= opts.dense_limit) {
    // Inverse iteration with a slightly detuned shift.
    const Eigen::MatrixXd A = dense_of(m);
    const double sigma = rho * (1.0 + 1e-10);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(
        A - sigma * Eigen::MatrixXd::Identity(S, S));
    for (int it = 0; it < 8 && res > opts.tolerance; ++it) {
      Eigen::VectorXd v = lu.solve(Eigen::Map<const Eigen::VectorXd>(x.data(), S));
      Eigen::Index imax;
      v.cwiseAbs().maxCoeff(&imax);
      v /= v(imax);
      for (std::size_t j = 0; j < S; ++j) x[j] = v(j);
      matvec(space.successors(), m.weights, K, x, y);
      std::tie(rho, res) = estimate(x, y);
      out.dense_refined = true;
    }
    if (res > opts.tolerance) {
      Eigen::EigenSolver<Eigen::MatrixXd> es(A);
      Eigen::Index best = 0;
      es.eigenvalues().real().maxCoeff(&best);
      Eigen::VectorXd v = es.eigenvectors().col(best).real();
      Eigen::Index imax;
      v.cwiseAbs().maxCoeff(&imax);
      v /= v(imax);
      std::vector<double> cand(S);
      for (std::size_t j = 0; j < S; ++j) cand[j] = v(j);
      matvec(space.successors(), m.weights, K, cand, y);
      auto [rho2, res2] = estimate(cand, y);
      if (res2 < res) {
        x = cand;
        rho = rho2;
        res = res2;
      }
    }
  }

  // Contract: relative residual 1e-12 (the iteration target is tighter).
  if (!(res <= 1e-12) || !(rho > 0.0))
    throw Error(ErrorKind::NoConvergence, "power iteration did not converge");
  for (double v : x)
    if (!(v > 0.0))
      throw Error(ErrorKind::NoConvergence, "Perron vector is not positive");
  out.log_eigenvalue = m.log_scale + std::log(rho);
  out.right_vector = std::move(x);
  out.residual = res;
  return out;
}

WordKernel doob_transform(const ShiftMatrix& m, const PerronRoot& root) {
  const auto& space = *m.space;
  const std::size_t S = space.num_states(), K = space.num_letters();
  const auto& h = root.right_vector;
  std::vector<double> q(S * K);
  for (std::size_t s = 0; s < S; ++s) {
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double v = m.weights[s * K + k] * h[space.successor(s, k)];
      q[s * K + k] = v;
      sum += v;
    }
    for (std::size_t k = 0; k < K; ++k) q[s * K + k] /= sum;
  }
  return WordKernel(m.space, std::move(q));
}

WordKernel doob_transform(const WordKernel& kernel, const StateFunction& f) {
  const auto m = tilt_kernel(kernel, f);
  return doob_transform(m, pf_log_eigenvalue(m));
}

}  // namespace rwre
