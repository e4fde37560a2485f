#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <vector>

#include "tactile_rom/core/error.hpp"
#include "tactile_rom/core/types.hpp"

namespace trom::latent {

struct LbfgsSettings {
  int max_iters = 10;
  double grad_tolerance = 1e-5;
  int history = 8;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;

  void validate() const {
    if (max_iters < 1) throw ConfigError("lbfgs: max_iters must be >= 1");
    if (!(grad_tolerance > 0.0)) throw ConfigError("lbfgs: grad_tolerance must be > 0");
    if (history < 1) throw ConfigError("lbfgs: history must be >= 1");
  }
};

struct LbfgsResult {
  VecX z;
  double objective = 0.0;
  double initial_objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool stalled = false;  // line search exhausted its backtracks
};

// Objective: fills `grad` and returns J. May return +inf to reject a point
// (the line search backtracks past it); the gradient is only read at
// accepted, finite points.
using Objective = std::function<double(const VecX& z, VecX& grad)>;

// Two-loop L-BFGS with Armijo backtracking. Accepted iterates have strictly
// non-increasing objective; returns after max_iters, at grad_norm below
// tolerance, or with `stalled` set when no acceptable step exists.
inline LbfgsResult lbfgs_minimize(const VecX& z0, const Objective& f,
                                  const LbfgsSettings& s) {
  s.validate();
  const Eigen::Index n = z0.size();

  VecX z = z0;
  VecX g(n);
  double J = f(z, g);
  if (!std::isfinite(J))
    throw NumericalError("lbfgs: objective is not finite at the start point");

  LbfgsResult res;
  res.initial_objective = J;
  std::deque<std::pair<VecX, VecX>> mem;  // (s, y) pairs, oldest first

  while (res.iterations < s.max_iters) {
    if (g.norm() < s.grad_tolerance) break;

    // Two-loop recursion for d = -H*g.
    VecX q = g;
    std::vector<double> alpha(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
      const auto& [si, yi] = mem[i];
      double rho = 1.0 / yi.dot(si);
      alpha[i] = rho * si.dot(q);
      q -= alpha[i] * yi;
    }
    if (!mem.empty()) {
      const auto& [sl, yl] = mem.back();
      q *= sl.dot(yl) / yl.dot(yl);
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
      const auto& [si, yi] = mem[i];
      double rho = 1.0 / yi.dot(si);
      double beta = rho * yi.dot(q);
      q += (alpha[i] - beta) * si;
    }
    VecX d = -q;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {  // curvature gone bad; fall back to steepest descent
      d = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    VecX g_new(n);
    VecX z_new;
    double J_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < s.max_backtracks; ++bt) {
      z_new = z + step * d;
      J_new = f(z_new, g_new);
      if (std::isfinite(J_new) && J_new <= J + s.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= s.backtrack;
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }

    VecX sv = z_new - z;
    VecX yv = g_new - g;
    if (sv.dot(yv) > 1e-12 * sv.norm() * yv.norm()) {
      mem.emplace_back(std::move(sv), std::move(yv));
      if (static_cast<int>(mem.size()) > s.history) mem.pop_front();
    }
    z = std::move(z_new);
    g = g_new;
    J = J_new;
    ++res.iterations;
  }

  res.z = std::move(z);
  res.objective = J;
  res.grad_norm = g.norm();
  return res;
}

}  // namespace trom::latent
