#pragma once
// Design tool: largest inter-sampling bound T and delay bound Delta for which
// the two timer-weight conditions hold,
//
//   (a)  gamma_0 phi_0(tau) >= (1 + varrho_1) lambda_bar^2 gamma_1 phi_1(0)   on [0, T]
//   (b)  gamma_1 phi_1(tau) >= (1 + varrho_0) gamma_0 phi_0(tau)              on [0, Delta]
//
// with phi_0 positive up to T and phi_1 positive up to Delta, and Delta <= T.
// Conditions are checked on a sampled grid (at most T/1e4 spacing) and the
// bounds maximized by bisection. lambda_bar is the effective per-transmission
// contraction of the network certificate and is an input here: it depends on
// the triggering aggressiveness and protocol through the runtime parameters,
// not only on the printed plant constants.

#include <algorithm>
#include <cmath>
#include <limits>

#include "nqcs/phi_ode.hpp"

namespace nqcs {

struct design_inputs {
  phi_params phi;
  double lambda_bar = 0.5;

  void validate() const {
    phi.validate();
    if (!(lambda_bar > 0.0)) throw std::invalid_argument("design: lambda_bar must be > 0");
  }
};

struct design_result {
  bool feasible = false;
  double T = 0.0;
  double Delta = 0.0;
  // diagnostics for the emitted design table
  double threshold_a = 0.0;  // constant right-hand side of condition (a)
  double phi0_at_T = 0.0;
  double phi1_at_Delta = 0.0;
};

namespace detail {

constexpr int kConditionGrid = 10000;  // sub-intervals for sampled checks

inline bool condition_a(const phi_solution& phi0, const design_inputs& in, double t_cap) {
  const double rhs = (1.0 + in.phi.varrho1) * in.lambda_bar * in.lambda_bar * in.phi.gamma1 *
                     in.phi.phi1_init;
  for (int k = 0; k <= kConditionGrid; ++k) {
    const double tau = t_cap * static_cast<double>(k) / kConditionGrid;
    if (!(in.phi.gamma0 * phi0.eval(tau) >= rhs)) return false;
  }
  return phi0.eval(t_cap) > 0.0;
}

inline bool condition_b(const phi_solution& phi0, const phi_solution& phi1,
                        const design_inputs& in, double d_cap) {
  for (int k = 0; k <= kConditionGrid; ++k) {
    const double tau = d_cap * static_cast<double>(k) / kConditionGrid;
    if (!(in.phi.gamma1 * phi1.eval(tau) >= (1.0 + in.phi.varrho0) * in.phi.gamma0 * phi0.eval(tau)))
      return false;
  }
  return phi1.eval(d_cap) > 0.0;
}

/// Largest t in [0, hi] with pred(t) true, given pred(0); bisection to tol.
template <class Pred>
double bisect_max(Pred pred, double hi, double tol) {
  if (pred(hi)) return hi;
  double lo = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace detail

/// True when the pair (T, Delta) satisfies both sampled conditions.
[[nodiscard]] inline bool check_conditions(const phi_solution& phi0, const phi_solution& phi1,
                                           const design_inputs& in, double t_bound,
                                           double delta_bound) {
  if (!(t_bound >= 0.0) || !(delta_bound >= 0.0) || delta_bound > t_bound) return false;
  return detail::condition_a(phi0, in, t_bound) &&
         detail::condition_b(phi0, phi1, in, delta_bound);
}

/// Maximize T, then Delta <= T, by bisection at resolution tol.
[[nodiscard]] inline design_result max_T_Delta(const design_inputs& in, double t_max = 0.2,
                                               double tol = 1e-7) {
  in.validate();
  const double dt = std::max(t_max / 200000.0, 1e-9);
  const phi_solution phi0 = solve_phi(in.phi, 0, t_max, dt);
  const phi_solution phi1 = solve_phi(in.phi, 1, t_max, dt);

  design_result out;
  out.threshold_a = (1.0 + in.phi.varrho1) * in.lambda_bar * in.lambda_bar * in.phi.gamma1 *
                    in.phi.phi1_init;
  if (!detail::condition_a(phi0, in, 0.0)) return out;  // infeasible at tau = 0

  out.feasible = true;
  out.T = detail::bisect_max([&](double t) { return detail::condition_a(phi0, in, t); }, t_max,
                             tol);
  if (detail::condition_b(phi0, phi1, in, 0.0)) {
    out.Delta = detail::bisect_max(
        [&](double d) { return detail::condition_b(phi0, phi1, in, d); }, out.T, tol);
  }
  out.phi0_at_T = phi0.eval(out.T);
  out.phi1_at_Delta = phi1.eval(out.Delta);
  return out;
}

}  // namespace nqcs
