#include "rwre/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "linalg.hpp"
#include "maxflow.hpp"

namespace rwre {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_shapes(const WordMeasure& mu, const WordKernel& kernel) {
  if (mu.weights.size() != kernel.space().num_states())
    throw Error(ErrorKind::ShapeMismatch, "measure does not match the chain", "measure");
}

void check_shapes(const StateFunction& f, const WordKernel& kernel) {
  if (f.values.size() != kernel.space().num_states())
    throw Error(ErrorKind::ShapeMismatch, "tilt function does not match the chain", "f");
}

// log sum_k p(s,k) e^{h(succ(s,k))} and the softmax weights.
double row_log_partition(const WordKernel& kernel, const std::vector<double>& h,
                         std::size_t s, double* weights = nullptr) {
  const auto& space = kernel.space();
  const std::size_t K = space.num_letters();
  double top = -kInf;
  for (std::size_t k = 0; k < K; ++k)
    if (kernel.prob(s, k) > 0.0) top = std::max(top, h[space.successor(s, k)]);
  double z = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double p = kernel.prob(s, k);
    const double w = p > 0.0 ? p * std::exp(h[space.successor(s, k)] - top) : 0.0;
    if (weights) weights[k] = w;
    z += w;
  }
  if (weights)
    for (std::size_t k = 0; k < K; ++k) weights[k] /= z;
  return top + std::log(z);
}

RateReport infinite_report() {
  RateReport r;
  r.infinite = true;
  r.converged = true;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Feasibility

bool stationary_feasible(const WordMeasure& mu, const WordKernel& kernel,
                         double tol) {
  check_shapes(mu, kernel);
  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  const std::size_t source = 2 * S, sink = 2 * S + 1;
  detail::MaxFlow flow(2 * S + 2);
  double total = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const double m = mu.weights[s];
    if (m <= 0.0) continue;
    total += m;
    flow.add_edge(source, s, m);
    flow.add_edge(S + s, sink, m);
    for (std::size_t k = 0; k < K; ++k) {
      const auto t = space.successor(s, k);
      if (kernel.prob(s, k) > 0.0 && mu.weights[t] > 0.0)
        flow.add_edge(s, S + t, kInf);
    }
  }
  return flow.run(source, sink) >= total - tol;
}

// ---------------------------------------------------------------------------
// Primal: KL projection onto fixed source and target marginals.

RateReport rate_primal(const WordMeasure& mu, const WordKernel& kernel,
                       const SolverOptions& opts) {
  check_shapes(mu, kernel);
  if (!stationary_feasible(mu, kernel)) return infinite_report();

  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  const auto& m = mu.weights;

  struct Arc {
    std::size_t s, k, t;
    double base;  // mu(s) p(s,k)
  };
  std::vector<Arc> arcs;
  for (std::size_t s = 0; s < S; ++s) {
    if (m[s] <= 0.0) continue;
    for (std::size_t k = 0; k < K; ++k) {
      const auto t = space.successor(s, k);
      if (kernel.prob(s, k) > 0.0 && m[t] > 0.0)
        arcs.push_back({s, k, t, m[s] * kernel.prob(s, k)});
    }
  }

  std::vector<double> a(S, 1.0), b(S, 1.0), acc(S);
  RateReport report;
  double err = kInf;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& e : arcs) acc[e.t] += e.base * a[e.s];
    for (std::size_t t = 0; t < S; ++t)
      if (m[t] > 0.0) b[t] = m[t] / acc[t];
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& e : arcs) acc[e.s] += e.base * b[e.t];
    for (std::size_t s = 0; s < S; ++s)
      if (m[s] > 0.0) a[s] = m[s] / acc[s];
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& e : arcs) acc[e.t] += a[e.s] * e.base * b[e.t];
    err = 0.0;
    for (std::size_t t = 0; t < S; ++t) err += std::abs(acc[t] - m[t]);
    report.iterations = it + 1;
    if (err <= opts.tolerance) break;
  }
  report.converged = err <= opts.tolerance;

  EdgeMeasure alpha{kernel.space_ptr(), std::vector<double>(S * K, 0.0)};
  for (const auto& e : arcs) alpha.weights[e.s * K + e.k] = a[e.s] * e.base * b[e.t];
  const auto h = edge_entropy(alpha, kernel);
  report.value = h.value;

  // Sinkhorn dual value sum mu log a + sum mu log b.
  double dual = 0.0;
  for (std::size_t s = 0; s < S; ++s)
    if (m[s] > 0.0) dual += m[s] * (std::log(a[s]) + std::log(b[s]));
  report.cross_value = dual;
  report.gap = report.value - dual;

  const std::size_t ref = static_cast<std::size_t>(
      std::find_if(m.begin(), m.end(), [](double v) { return v > 0.0; }) - m.begin());
  report.potential.assign(S, 0.0);
  for (std::size_t s = 0; s < S; ++s)
    if (m[s] > 0.0) report.potential[s] = std::log(b[s]) - std::log(b[ref]);
  report.edge = std::move(alpha);
  return report;
}

// ---------------------------------------------------------------------------
// Dual

double dual_objective(const WordMeasure& mu, const WordKernel& kernel,
                      const std::vector<double>& h) {
  double acc = 0.0;
  for (std::size_t s = 0; s < mu.weights.size(); ++s) {
    if (mu.weights[s] <= 0.0) continue;
    acc += mu.weights[s] * (h[s] - row_log_partition(kernel, h, s));
  }
  return acc;
}

RateReport rate_dual(const WordMeasure& mu, const WordKernel& kernel,
                     const SolverOptions& opts) {
  check_shapes(mu, kernel);
  const auto& m = mu.weights;
  if (std::any_of(m.begin(), m.end(), [](double v) { return v <= 0.0; }))
    return rate_primal(mu, kernel);
  if (!stationary_feasible(mu, kernel)) return infinite_report();

  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  std::vector<double> h(S, 0.0), w(K), trial(S);
  RateReport report;
  double value = dual_objective(mu, kernel, h);
  Eigen::VectorXd grad(S);
  Eigen::MatrixXd hess(S, S);

  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    grad = Eigen::Map<const Eigen::VectorXd>(m.data(), S);
    hess.setZero();
    for (std::size_t s = 0; s < S; ++s) {
      row_log_partition(kernel, h, s, w.data());
      for (std::size_t k = 0; k < K; ++k) {
        const auto t = space.successor(s, k);
        grad(t) -= m[s] * w[k];
        hess(t, t) += m[s] * w[k];
        for (std::size_t j = 0; j < K; ++j)
          hess(t, space.successor(s, j)) -= m[s] * w[k] * w[j];
      }
    }
    report.iterations = it;
    const double gnorm = grad.cwiseAbs().maxCoeff();
    if (gnorm <= opts.tolerance) {
      report.converged = true;
      break;
    }
    // hess is the negated Hessian of the concave objective (PSD). Shifting h
    // by any function of the walker cell leaves the objective unchanged, so
    // the null space has one direction per cell: take the minimum-norm step.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(hess);
    cod.setThreshold(1e-12);
    Eigen::VectorXd step = cod.solve(grad);
    if (!step.allFinite()) step = grad;
    const double slope = grad.dot(step);
    double t = 1.0, next = -kInf;
    for (; t > 1e-20; t *= 0.5) {
      trial = h;
      for (std::size_t i = 0; i < S; ++i) trial[i] += t * step(static_cast<Eigen::Index>(i));
      next = dual_objective(mu, kernel, trial);
      if (next >= value + 1e-4 * t * slope) break;
      // Near the optimum the objective is flat to rounding; keep Newton steps.
      if (t == 1.0 && next >= value - 1e-15 * (1.0 + std::abs(value))) break;
    }
    if (!(next >= value - 1e-15 * (1.0 + std::abs(value)))) break;
    h.swap(trial);
    value = next;
  }
  report.value = value;
  const double h0 = h[0];
  for (double& v : h) v -= h0;
  report.potential = h;
  const auto primal = rate_primal(mu, kernel);
  report.cross_value = primal.value;
  report.gap = primal.value - value;
  return report;
}

// ---------------------------------------------------------------------------
// Legendre transform: soft policy iteration over stationary edge measures.

RateReport legendre_rate(const StateFunction& f, const WordKernel& kernel,
                         const SolverOptions& opts) {
  check_shapes(f, kernel);
  if (!strongly_connected(kernel))
    throw Error(ErrorKind::NotIrreducible, "kernel is not irreducible");
  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();

  std::vector<double> q = kernel.probs(), v(S, 0.0), w(K);
  RateReport report;
  double value = -kInf;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    // Policy evaluation: g + v(s) - sum_k q v(succ) = f(s) - KL(q_s | p_s).
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(S, S);
    Eigen::VectorXd rhs(S);
    for (std::size_t s = 0; s < S; ++s) {
      A(s, 0) = 1.0;
      if (s > 0) A(s, s) += 1.0;
      for (std::size_t k = 0; k < K; ++k) {
        const auto t = space.successor(s, k);
        if (t > 0) A(s, t) -= q[s * K + k];
      }
      rhs(s) = f.values[s] -
               relative_entropy(std::span(q).subspan(s * K, K), kernel.row(s));
    }
    const Eigen::VectorXd x = A.partialPivLu().solve(rhs);
    v[0] = 0.0;
    for (std::size_t s = 1; s < S; ++s) v[s] = x(s);
    value = x(0);
    report.iterations = it + 1;

    const double upper = k_ell_h(f, v, kernel);
    report.gap = upper - value;
    if (report.gap <= opts.tolerance * std::max(1.0, std::abs(value))) {
      report.converged = true;
      break;
    }
    // Improvement: q(s, .) proportional to p(s, .) e^{v(succ)}.
    for (std::size_t s = 0; s < S; ++s) {
      row_log_partition(kernel, v, s, w.data());
      std::copy(w.begin(), w.end(), q.begin() + s * K);
    }
  }

  WordKernel policy(kernel.space_ptr(), q);
  const auto mu = stationary_measure(policy);
  const auto ent = kernel_entropy(mu, policy, kernel);
  report.value = mu.expectation(f) - ent.value;
  report.cross_value = value;
  report.potential = v;
  report.edge = edge_measure(mu, policy);
  return report;
}

// ---------------------------------------------------------------------------
// K_{l,h} and its infimum

double k_ell_h(const StateFunction& f, const std::vector<double>& h,
               const WordKernel& kernel) {
  check_shapes(f, kernel);
  double best = -kInf;
  for (std::size_t s = 0; s < h.size(); ++s)
    best = std::max(best, f.values[s] - h[s] + row_log_partition(kernel, h, s));
  return best;
}

namespace {

// Row values G_s(h) = f(s) - h(s) + log sum p e^{h(succ)}.
void row_values(const StateFunction& f, const std::vector<double>& h,
                const WordKernel& kernel, std::vector<double>& G,
                std::vector<double>* weights = nullptr) {
  const std::size_t K = kernel.space().num_letters();
  for (std::size_t s = 0; s < h.size(); ++s)
    G[s] = f.values[s] - h[s] +
           row_log_partition(kernel, h, s, weights ? weights->data() + s * K : nullptr);
}

double spread(const std::vector<double>& G) {
  const auto [lo, hi] = std::minmax_element(G.begin(), G.end());
  return *hi - *lo;
}

// Smoothed descent on the soft maximum of the rows, then damped Newton on
// the row-equalisation system G(h) = c 1 with h(0) = 0.
std::vector<double> minimize_kbar(const StateFunction& f, const WordKernel& kernel,
                                  std::size_t& iterations) {
  const auto& space = kernel.space();
  const std::size_t S = space.num_states(), K = space.num_letters();
  std::vector<double> h(S, 0.0), G(S), W(S * K), pi(S), grad(S), trial(S), Gt(S);
  iterations = 0;

  auto soft_max = [&](const std::vector<double>& g, double beta) {
    const double top = *std::max_element(g.begin(), g.end());
    double z = 0.0;
    for (double x : g) z += std::exp(beta * (x - top));
    return top + std::log(z) / beta;
  };

  for (double beta : {1.0, 10.0, 100.0}) {
    for (int it = 0; it < 60; ++it, ++iterations) {
      row_values(f, h, kernel, G, &W);
      const double top = *std::max_element(G.begin(), G.end());
      double z = 0.0;
      for (std::size_t s = 0; s < S; ++s) z += pi[s] = std::exp(beta * (G[s] - top));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t s = 0; s < S; ++s) {
        pi[s] /= z;
        grad[s] -= pi[s];
        for (std::size_t k = 0; k < K; ++k)
          grad[space.successor(s, k)] += pi[s] * W[s * K + k];
      }
      grad[0] = 0.0;
      double gg = 0.0;
      for (double g : grad) gg += g * g;
      if (gg < 1e-24) break;
      const double phi = soft_max(G, beta);
      double t = 1.0;
      for (; t > 1e-12; t *= 0.5) {
        for (std::size_t s = 0; s < S; ++s) trial[s] = h[s] - t * grad[s];
        row_values(f, trial, kernel, Gt);
        if (soft_max(Gt, beta) <= phi - 1e-4 * t * gg) break;
      }
      if (t <= 1e-12) break;
      h.swap(trial);
    }
  }

  row_values(f, h, kernel, G, &W);
  const Eigen::Index n = static_cast<Eigen::Index>(S);
  for (int it = 0; it < 200; ++it, ++iterations) {
    const double top = *std::max_element(G.begin(), G.end());
    if (spread(G) <= 1e-15 * std::max(1.0, std::abs(top))) break;
    const double c = std::accumulate(G.begin(), G.end(), 0.0) / S;
    // Unknowns: dh(1..S-1), dc. Row s: sum_t dG_s/dh_t dh_t - dc = c - G_s.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs(n);
    for (std::size_t s = 0; s < S; ++s) {
      if (s > 0) J(s, s) -= 1.0;
      for (std::size_t k = 0; k < K; ++k) {
        const auto t = space.successor(s, k);
        if (t > 0) J(s, t) += W[s * K + k];
      }
      J(s, 0) = -1.0;
      rhs(s) = c - G[s];
    }
    const Eigen::VectorXd dx = J.partialPivLu().solve(rhs);
    if (!dx.allFinite()) break;
    const double before = spread(G);
    double t = 1.0;
    bool moved = false;
    for (; t > 1e-10; t *= 0.5) {
      trial = h;
      for (std::size_t s = 1; s < S; ++s) trial[s] += t * dx(s);
      row_values(f, trial, kernel, Gt);
      if (spread(Gt) < before) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    h.swap(trial);
    row_values(f, h, kernel, G, &W);
  }
  return h;
}

}  // namespace

RateReport kbar(const StateFunction& f, const WordKernel& kernel) {
  check_shapes(f, kernel);
  if (!strongly_connected(kernel))
    throw Error(ErrorKind::NotIrreducible, "kernel is not irreducible");

  const auto tilted = tilt_kernel(kernel, f);
  const auto root = pf_log_eigenvalue(tilted);
  std::vector<double> h_closed(root.right_vector.size());
  for (std::size_t s = 0; s < h_closed.size(); ++s)
    h_closed[s] = std::log(root.right_vector[s]) - std::log(root.right_vector[0]);
  const double closed = k_ell_h(f, h_closed, kernel);

  RateReport report;
  report.potential = minimize_kbar(f, kernel, report.iterations);
  report.value = k_ell_h(f, report.potential, kernel);
  report.cross_value = closed;
  report.gap = std::abs(report.value - closed);
  report.converged = report.gap <= 1e-8;
  return report;
}

double fenchel_young_check(const StateFunction& f, const WordMeasure& mu,
                           const WordKernel& kernel) {
  const auto primal = rate_primal(mu, kernel);
  if (primal.infinite)
    throw Error(ErrorKind::BadConfig, "rate is infinite at mu", "measure");
  return primal.value + kbar(f, kernel).value - mu.expectation(f);
}

// ---------------------------------------------------------------------------
// Level 1

StateFunction first_step_tilt(const WordSpace& space,
                              const std::vector<double>& theta) {
  const auto& range = space.env().range();
  StateFunction f{std::vector<double>(space.num_states(), 0.0)};
  for (std::size_t s = 0; s < space.num_states(); ++s) {
    const auto& z = range[space.letter(s, 0)];
    for (int i = 0; i < range.dim(); ++i) f.values[s] += theta[i] * static_cast<double>(z[i]);
  }
  return f;
}

namespace {

// Squared distance from v to the convex hull of the range (projected
// gradient on the simplex of weights).
double hull_distance2(const StepRange& range, const std::vector<double>& v) {
  const std::size_t K = range.size();
  const int d = range.dim();
  std::vector<double> lam(K, 1.0 / K), grad(K), point(d);
  double scale = 1.0;
  for (const auto& z : range.steps())
    for (auto c : z) scale = std::max(scale, static_cast<double>(c * c) * d);
  const double step = 0.5 / (scale * K);
  auto project = [&](std::vector<double>& x) {
    std::vector<double> u = x;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      cum += u[i];
      const double t = (cum - 1.0) / (i + 1);
      if (u[i] - t > 0) tau = t;
    }
    for (double& xi : x) xi = std::max(xi - tau, 0.0);
  };
  double dist2 = 0.0;
  for (int it = 0; it < 20000; ++it) {
    std::fill(point.begin(), point.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k)
      for (int i = 0; i < d; ++i) point[i] += lam[k] * range[k][i];
    dist2 = 0.0;
    for (int i = 0; i < d; ++i) dist2 += (point[i] - v[i]) * (point[i] - v[i]);
    if (dist2 < 1e-24) break;
    for (std::size_t k = 0; k < K; ++k) {
      grad[k] = 0.0;
      for (int i = 0; i < d; ++i) grad[k] += 2.0 * (point[i] - v[i]) * range[k][i];
      lam[k] -= step * grad[k];
    }
    project(lam);
  }
  return dist2;
}

struct TiltState {
  double log_mgf;
  std::vector<double> mean;
  WordKernel doob;
  WordMeasure mu;
};

TiltState tilt_state(const WordKernel& kernel, const std::vector<double>& theta) {
  const auto& space = kernel.space();
  const auto f = first_step_tilt(space, theta);
  const auto m = tilt_kernel(kernel, f);
  const auto root = pf_log_eigenvalue(m);
  auto q = doob_transform(m, root);
  auto mu = stationary_measure(q);
  auto mean = edge_measure(mu, q).mean_step();
  return {root.log_eigenvalue, std::move(mean), std::move(q), std::move(mu)};
}

}  // namespace

RateReport level1_rate(const std::vector<double>& v, const WordKernel& kernel) {
  const auto& space = kernel.space();
  const int d = space.env().dim();
  if (static_cast<int>(v.size()) != d)
    throw Error(ErrorKind::DimensionMismatch, "velocity has wrong dimension", "v");
  if (hull_distance2(space.env().range(), v) > 1e-18) return infinite_report();

  // Concave maximisation of theta.v - Lambda(theta): Newton with a
  // central-difference Hessian of the mean map.
  std::vector<double> theta(d, 0.0);
  auto state = tilt_state(kernel, theta);
  auto objective = [&](const TiltState& st, const std::vector<double>& th) {
    double acc = -st.log_mgf;
    for (int i = 0; i < d; ++i) acc += th[i] * v[i];
    return acc;
  };
  double value = objective(state, theta);
  RateReport report;
  for (std::size_t it = 0; it < 200; ++it) {
    Eigen::VectorXd g(d);
    for (int i = 0; i < d; ++i) g(i) = v[i] - state.mean[i];
    report.iterations = it;
    if (g.cwiseAbs().maxCoeff() <= 1e-11) {
      report.converged = true;
      break;
    }
    Eigen::MatrixXd H(d, d);
    const double eps = 1e-5;
    for (int j = 0; j < d; ++j) {
      auto tp = theta, tm = theta;
      tp[j] += eps;
      tm[j] -= eps;
      const auto mp = tilt_state(kernel, tp).mean, mm = tilt_state(kernel, tm).mean;
      for (int i = 0; i < d; ++i) H(i, j) = (mp[i] - mm[i]) / (2 * eps);
    }
    H = 0.5 * (H + H.transpose());
    H.diagonal().array() += 1e-14;
    Eigen::VectorXd step = H.ldlt().solve(g);
    if (!step.allFinite()) step = g;
    double t = 1.0;
    bool moved = false;
    for (; t > 1e-12; t *= 0.5) {
      auto trial = theta;
      for (int i = 0; i < d; ++i) trial[i] += t * step(i);
      auto st = tilt_state(kernel, trial);
      const double val = objective(st, trial);
      if (val >= value) {
        theta = std::move(trial);
        state = std::move(st);
        value = val;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  const auto primal = kernel_entropy(state.mu, state.doob, kernel);
  report.value = value;
  report.cross_value = primal.value;
  report.gap = primal.value - value;
  report.potential = theta;
  report.edge = edge_measure(state.mu, state.doob);
  return report;
}

std::vector<std::vector<double>> zero_set(const WordKernel& kernel) {
  const auto mu = stationary_measure(kernel);
  return {edge_measure(mu, kernel).mean_step()};
}

double singular_example_rate(const PeriodicEnvironment& env, int ell) {
  const Point zero(env.dim(), 0);
  const auto k0 = env.range().index_of(zero);
  if (!k0) throw Error(ErrorKind::ZeroNotInRange, "0 is not an admissible step", "range");
  const auto kernel = build_word_chain(env, ell);
  const auto& space = kernel.space();
  const std::vector<std::size_t> word(ell, *k0);
  WordMeasure mu{kernel.space_ptr(), std::vector<double>(space.num_states(), 0.0)};
  mu.weights[space.state_index(0, space.word_index(word))] = 1.0;
  const auto report = rate_primal(mu, kernel);
  if (report.infinite)
    throw Error(ErrorKind::NoConvergence, "frozen point mass is not stationary");
  return report.value;
}

}  // namespace rwre
