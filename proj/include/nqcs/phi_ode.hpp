#pragma once
// Timer weights for the inter-event analysis. Each mode b carries a scalar
// weight obeying the Riccati-type decay
//
//   dphi/dt = -2 L phi - gamma * ((1 + varrho) phi^2 + 1)
//
// integrated here with fixed-step RK4 over a uniform grid. The weight is
// strictly decreasing wherever it is nonnegative (the derivative is at most
// -gamma), so condition checks against sampled trajectories are reliable at
// the grid resolutions used by the design tool.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nqcs {

struct phi_params {
  double l0 = 0.0, l1 = 0.0;          // mode growth rates
  double gamma0 = 1.0, gamma1 = 1.0;  // certificate gains
  double varrho0 = 0.0, varrho1 = 0.0;
  double phi0_init = 1.0, phi1_init = 1.0;

  void validate() const {
    if (!(gamma0 > 0.0 && gamma1 > 0.0)) throw std::invalid_argument("phi: gammas must be > 0");
    if (!(varrho0 >= 0.0 && varrho1 >= 0.0))
      throw std::invalid_argument("phi: varrho must be >= 0");
    if (!(phi0_init > 0.0 && phi1_init > 0.0))
      throw std::invalid_argument("phi: initial weights must be > 0");
  }
};

/// Uniformly sampled scalar trajectory on [0, t_end].
struct phi_solution {
  double dt = 0.0;
  std::vector<double> samples;  // samples[k] = phi(k * dt)

  [[nodiscard]] double t_end() const { return dt * static_cast<double>(samples.size() - 1); }

  /// Linear interpolation; clamps outside [0, t_end].
  [[nodiscard]] double eval(double t) const {
    if (t <= 0.0) return samples.front();
    const double u = t / dt;
    const auto k = static_cast<std::size_t>(u);
    if (k + 1 >= samples.size()) return samples.back();
    const double w = u - static_cast<double>(k);
    return (1.0 - w) * samples[k] + w * samples[k + 1];
  }

  /// First grid time at which the trajectory is <= 0, or +inf if none.
  [[nodiscard]] double first_nonpositive() const {
    for (std::size_t k = 0; k < samples.size(); ++k)
      if (samples[k] <= 0.0) return dt * static_cast<double>(k);
    return std::numeric_limits<double>::infinity();
  }
};

/// RK4 integration of the weight dynamics for one mode.
[[nodiscard]] inline phi_solution solve_riccati(double l, double gamma, double varrho,
                                                double phi_init, double t_end,
                                                double step_hint) {
  if (!(t_end > 0.0) || !(step_hint > 0.0))
    throw std::invalid_argument("phi: t_end and step must be > 0");
  const auto n = static_cast<std::size_t>(std::ceil(t_end / step_hint));
  const double dt = t_end / static_cast<double>(n);
  const double a = gamma * (1.0 + varrho);
  auto f = [&](double phi) { return -2.0 * l * phi - (a * phi * phi + gamma); };

  phi_solution sol;
  sol.dt = dt;
  sol.samples.resize(n + 1);
  double phi = phi_init;
  sol.samples[0] = phi;
  for (std::size_t k = 0; k < n; ++k) {
    const double k1 = f(phi);
    const double k2 = f(phi + 0.5 * dt * k1);
    const double k3 = f(phi + 0.5 * dt * k2);
    const double k4 = f(phi + dt * k3);
    phi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    // Past its zero crossing the solution dives to a finite-time pole; cap it
    // so downstream comparisons see a plain large-negative value, never NaN.
    if (!std::isfinite(phi) || phi < -1e9) phi = -1e9;
    sol.samples[k + 1] = phi;
  }
  return sol;
}

/// Mode-b weight trajectory for the given parameter set.
[[nodiscard]] inline phi_solution solve_phi(const phi_params& p, int b, double t_end,
                                            double step_hint) {
  p.validate();
  if (b == 0) return solve_riccati(p.l0, p.gamma0, p.varrho0, p.phi0_init, t_end, step_hint);
  if (b == 1) return solve_riccati(p.l1, p.gamma1, p.varrho1, p.phi1_init, t_end, step_hint);
  throw std::invalid_argument("phi: mode must be 0 or 1");
}

}  // namespace nqcs
