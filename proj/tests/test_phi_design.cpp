#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nqcs/design.hpp"
#include "nqcs/phi_ode.hpp"

using namespace nqcs;

namespace {

// Closed form of dphi/dt = -2 L phi - gamma ((1 + varrho) phi^2 + 1) in the
// oscillatory regime a*c > L^2 (a = gamma (1+varrho), c = gamma):
//   phi(t) = -L/a + (q/a) tan(atan((a phi0 + L)/q) - q t),  q = sqrt(ac - L^2)
// Derivation: complete the square and substitute phi = -L/a + (q/a) tan(theta).
double riccati_exact(double l, double gamma, double varrho, double phi0, double t) {
  const double a = gamma * (1.0 + varrho);
  const double q = std::sqrt(a * gamma - l * l);
  const double theta0 = std::atan((a * phi0 + l) / q);
  return -l / a + (q / a) * std::tan(theta0 - q * t);
}

design_inputs rr_net1() {
  design_inputs in;
  in.phi.l0 = 8.8860;
  in.phi.l1 = 18.8501;
  in.phi.gamma0 = 22.9436;
  in.phi.gamma1 = 48.6706;
  in.phi.varrho0 = 0.05;
  in.phi.varrho1 = 0.10607;
  in.phi.phi0_init = 1.1023;
  in.phi.phi1_init = 1.1023;
  in.lambda_bar = 0.17802;
  return in;
}

design_inputs tod_net2() {
  design_inputs in;
  in.phi.l0 = 6.9282;
  in.phi.l1 = 14.6969;
  in.phi.gamma0 = 30.9839;
  in.phi.gamma1 = 37.9473;
  in.phi.varrho0 = 0.05;
  in.phi.varrho1 = 0.10607;
  in.phi.phi0_init = 1.0468;
  in.phi.phi1_init = 1.0468;
  in.lambda_bar = 0.18538;
  return in;
}

}  // namespace

TEST_CASE("unit riccati matches the tangent solution") {
  // L = 0, gamma = 1, varrho = 0, phi(0) = 1: phi(t) = tan(pi/4 - t)
  const phi_solution sol = solve_riccati(0.0, 1.0, 0.0, 1.0, 0.7, 1e-4);
  double worst = 0.0;
  for (std::size_t k = 0; k < sol.samples.size(); ++k) {
    const double t = sol.dt * static_cast<double>(k);
    worst = std::max(worst, std::abs(sol.samples[k] - std::tan(0.25 * M_PI - t)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("general riccati matches the closed form") {
  const double l = 8.8860, gamma = 22.9436, varrho = 0.05, phi0 = 1.1023;
  const phi_solution sol = solve_riccati(l, gamma, varrho, phi0, 0.03, 1e-5);
  double worst = 0.0;
  for (std::size_t k = 0; k < sol.samples.size(); ++k) {
    const double t = sol.dt * static_cast<double>(k);
    worst = std::max(worst, std::abs(sol.samples[k] - riccati_exact(l, gamma, varrho, phi0, t)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("vanishing gain leaves exponential decay") {
  const phi_solution sol = solve_riccati(1.0, 1e-9, 0.0, 1.0, 2.0, 1e-4);
  for (std::size_t k = 0; k < sol.samples.size(); k += 100) {
    const double t = sol.dt * static_cast<double>(k);
    REQUIRE(sol.samples[k] == Catch::Approx(std::exp(-2.0 * t)).margin(1e-6));
  }
}

TEST_CASE("weights decrease strictly while nonnegative") {
  const phi_solution sol = solve_riccati(2.0, 5.0, 0.3, 1.4, 0.5, 1e-4);
  for (std::size_t k = 1; k < sol.samples.size(); ++k) {
    if (sol.samples[k - 1] < 0.0) break;
    REQUIRE(sol.samples[k] < sol.samples[k - 1]);
  }
}

TEST_CASE("mode dispatch and crossing report") {
  phi_params p;  // unit constants in both modes
  p.l1 = 1.0;
  const phi_solution s0 = solve_phi(p, 0, 1.0, 1e-4);
  const phi_solution s1 = solve_phi(p, 1, 1.0, 1e-4);
  CHECK(s0.first_nonpositive() == Catch::Approx(0.25 * M_PI).margin(1e-3));
  CHECK(s1.first_nonpositive() < s0.first_nonpositive());  // extra drag decays faster
  CHECK_THROWS_AS(solve_phi(p, 2, 1.0, 1e-4), std::invalid_argument);

  // interpolation hits grid values exactly and clamps beyond the horizon
  CHECK(s0.eval(0.0) == s0.samples.front());
  CHECK(s0.eval(2.0) == s0.samples.back());
  const double mid = 1.5 * s0.dt;
  CHECK(s0.eval(mid) == Catch::Approx(0.5 * (s0.samples[1] + s0.samples[2])));
}

TEST_CASE("single point condition arithmetic") {
  design_inputs in;
  in.phi.gamma0 = 2.0;
  in.phi.gamma1 = 4.0;
  in.phi.varrho1 = 0.5;
  in.phi.phi0_init = 1.2;
  in.phi.phi1_init = 1.2;
  // threshold (a) = 1.5 * lb^2 * 4 * 1.2 = 7.2 lb^2; lhs at tau=0 is 2.4
  const phi_solution phi0 = solve_phi(in.phi, 0, 0.1, 1e-5);
  const phi_solution phi1 = solve_phi(in.phi, 1, 0.1, 1e-5);
  in.lambda_bar = std::sqrt(2.4 / 7.2) - 1e-6;
  CHECK(check_conditions(phi0, phi1, in, 0.0, 0.0));
  in.lambda_bar = std::sqrt(2.4 / 7.2) + 1e-6;
  CHECK_FALSE(check_conditions(phi0, phi1, in, 0.0, 0.0));
}

TEST_CASE("published constants reproduce the sampling bound") {
  const design_result rr = max_T_Delta(rr_net1());
  REQUIRE(rr.feasible);
  CHECK(rr.T == Catch::Approx(0.0256).epsilon(0.05));
  CHECK(rr.Delta > 0.0);
  CHECK(rr.Delta <= rr.T);

  const design_result tod = max_T_Delta(tod_net2());
  REQUIRE(tod.feasible);
  CHECK(tod.T == Catch::Approx(0.02115).epsilon(0.05));
  CHECK(tod.Delta > 0.0);
}

TEST_CASE("returned bounds are maximal") {
  const design_inputs in = rr_net1();
  const design_result res = max_T_Delta(in);
  const double dt = 0.2 / 200000.0;
  const phi_solution phi0 = solve_phi(in.phi, 0, 0.2, dt);
  const phi_solution phi1 = solve_phi(in.phi, 1, 0.2, dt);
  CHECK(check_conditions(phi0, phi1, in, res.T, res.Delta));
  CHECK_FALSE(check_conditions(phi0, phi1, in, res.T + 1e-4, res.Delta));
  CHECK_FALSE(check_conditions(phi0, phi1, in, res.T, res.Delta + 1e-4));
}

TEST_CASE("harder dynamics shrink the bound") {
  const design_result base = max_T_Delta(rr_net1());
  design_inputs harder = rr_net1();
  harder.phi.l0 *= 1.5;
  const design_result res = max_T_Delta(harder);
  CHECK(res.T < base.T);

  design_inputs hotter = rr_net1();
  hotter.phi.gamma0 *= 1.5;  // both gains up: same start ratio, faster decay
  hotter.phi.gamma1 *= 1.5;
  CHECK(max_T_Delta(hotter).T < base.T);
}

TEST_CASE("tight contraction with flat weights is infeasible") {
  design_inputs in;
  in.phi.gamma0 = 10.0;
  in.phi.gamma1 = 10.0;
  in.phi.varrho1 = 0.1;
  in.phi.phi0_init = 1.001;
  in.phi.phi1_init = 1.001;
  in.lambda_bar = 0.99;
  const design_result res = max_T_Delta(in);
  CHECK_FALSE(res.feasible);
  CHECK(res.T == 0.0);
}
