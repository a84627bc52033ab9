#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace refill3d::detail {

// Smoothed absolute value: sqrt(d^2 + eps^2) - eps. Behaves like |d| away
// from zero and like d^2 / (2 eps) near it, so gradients stay finite.
inline double charbonnier(double d, double eps) {
  return std::sqrt(d * d + eps * eps) - eps;
}

// d/dd of charbonnier.
inline double charbonnier_deriv(double d, double eps) {
  return d / std::sqrt(d * d + eps * eps);
}

// Reweighting factor rho'(d)/d used by the normal equations.
inline double charbonnier_weight(double d, double eps) {
  return 1.0 / std::sqrt(d * d + eps * eps);
}

// Solves A x = b for a symmetric positive definite N x N matrix via LDL^T.
// Returns false when a pivot collapses.
template <int N>
bool solve_spd(const std::array<double, N * N>& a,
               const std::array<double, N>& b, std::array<double, N>& x) {
  std::array<double, N * N> l{};
  std::array<double, N> d{};
  for (int j = 0; j < N; ++j) {
    double dj = a[j * N + j];
    for (int k = 0; k < j; ++k) dj -= l[j * N + k] * l[j * N + k] * d[k];
    if (!(dj > 1e-300)) return false;
    d[j] = dj;
    l[j * N + j] = 1.0;
    for (int i = j + 1; i < N; ++i) {
      double v = a[i * N + j];
      for (int k = 0; k < j; ++k) v -= l[i * N + k] * l[j * N + k] * d[k];
      l[i * N + j] = v / dj;
    }
  }
  // Forward solve L y = b, scale by D, back solve L^T x = y.
  std::array<double, N> y{};
  for (int i = 0; i < N; ++i) {
    double v = b[i];
    for (int k = 0; k < i; ++k) v -= l[i * N + k] * y[k];
    y[i] = v;
  }
  for (int i = 0; i < N; ++i) y[i] /= d[i];
  for (int i = N - 1; i >= 0; --i) {
    double v = y[i];
    for (int k = i + 1; k < N; ++k) v -= l[k * N + i] * x[k];
    x[i] = v;
  }
  return true;
}

// One evaluation of a least-squares objective: value, gradient, and the
// Gauss-Newton approximation of the Hessian (row-major, symmetric).
template <int N>
struct Objective {
  double loss = std::numeric_limits<double>::infinity();
  std::array<double, N> grad{};
  std::array<double, N * N> hessian{};
};

struct MinimizeOptions {
  int max_iters = 100;
  double step_tolerance = 1e-7;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step_scale = 1e-12;
};

template <int N>
struct MinimizeResult {
  std::array<double, N> params{};
  double loss = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

// Damped Gauss-Newton with a backtracking Armijo line search. Steps are
// only ever accepted when they strictly decrease the objective, so the loss
// sequence is non-increasing by construction. When the normal equations
// stall the damping is raised a few times before giving up. `history`, when
// given, receives the loss after the initial evaluation and after every
// accepted step.
template <int N, class LossFn, class FullFn>
MinimizeResult<N> minimize(std::array<double, N> x, const LossFn& loss_at,
                           const FullFn& evaluate,
                           const MinimizeOptions& opt,
                           std::vector<double>* history = nullptr) {
  MinimizeResult<N> out;
  Objective<N> cur = evaluate(x);
  if (history) history->push_back(cur.loss);
  if (!std::isfinite(cur.loss)) {
    out.params = x;
    out.loss = cur.loss;
    return out;
  }

  for (int iter = 0; iter < opt.max_iters; ++iter) {
    double max_diag = 0.0;
    for (int i = 0; i < N; ++i)
      max_diag = std::max(max_diag, cur.hessian[i * N + i]);
    if (!(max_diag > 0.0)) break;

    bool accepted = false;
    double damping = 1e-8 * max_diag;
    for (int round = 0; round < 4 && !accepted; ++round, damping *= 1e3) {
      std::array<double, N * N> h = cur.hessian;
      for (int i = 0; i < N; ++i) h[i * N + i] += damping;
      std::array<double, N> neg_grad, step;
      for (int i = 0; i < N; ++i) neg_grad[i] = -cur.grad[i];
      if (!solve_spd<N>(h, neg_grad, step)) continue;

      double slope = 0.0;
      for (int i = 0; i < N; ++i) slope += cur.grad[i] * step[i];
      if (!(slope < 0.0)) continue;  // not a descent direction

      for (double scale = 1.0; scale >= opt.min_step_scale;
           scale *= opt.backtrack) {
        std::array<double, N> trial = x;
        for (int i = 0; i < N; ++i) trial[i] += scale * step[i];
        const double f = loss_at(trial);
        if (f <= cur.loss + opt.armijo_c * scale * slope) {
          double step_norm = 0.0;
          for (int i = 0; i < N; ++i)
            step_norm += scale * step[i] * scale * step[i];
          step_norm = std::sqrt(step_norm);

          x = trial;
          cur = evaluate(x);
          if (history) history->push_back(cur.loss);
          ++out.iterations;
          accepted = true;
          if (step_norm < opt.step_tolerance) {
            out.params = x;
            out.loss = cur.loss;
            return out;
          }
          break;
        }
      }
    }
    if (!accepted) break;  // converged: no acceptable decrease found
  }

  out.params = x;
  out.loss = cur.loss;
  return out;
}

}  // namespace refill3d::detail
