#pragma once
// Two single-link robot arms tracking forced reference oscillators, each arm
// closed over its own contention-scheduled network. Continuous state
//
//   x = (eta_11, eta_12, eta_21, eta_22, qr_11, qr_12, qr_21, qr_22)
//
// where eta_i = q_plant_i - q_ref_i is arm i's tracking error and qr_i the
// reference state. Per network the error vector is
//
//   e_i = (e_eta1, e_eta2, e_c | e_r1, e_r2, e_f)
//
// with the first three components scheduled (plant coordinates and applied
// torque) and the trailing three the held reference/feedforward copies, which
// are sampled with the same instant and delivered exactly at every arrival.
// All controller inputs are held between arrivals, so e_c flows at rate zero.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "nqcs/model.hpp"
#include "nqcs/protocol.hpp"

namespace nqcs {

struct robot_arm_params {
  double a1 = 1.962, a2 = 2.943;  // gravity coefficients (9.81 * link length)
  double c1 = 2.0, c2 = 4.0;      // input gains
  // cross-arm coupling weights; row i feeds arm i with b_i1 (q^11 - q^21) + b_i2 (q^12 - q^22)
  double b11 = 0.0, b12 = 0.0, b21 = 0.0, b22 = 0.0;
  double forcing_amp = 5.0, forcing_freq = 5.0;  // feedforward amp*sin(freq*delta)
};

namespace robot_detail {

struct arm_view {
  double a, c, bj1, bj2;
  int eta_off, qr_off;  // offsets into x
};

inline arm_view arm(const robot_arm_params& p, int i) {
  if (i == 0) return {p.a1, p.c1, p.b11, p.b12, 0, 4};
  return {p.a2, p.c2, p.b21, p.b22, 2, 6};
}

/// Controller output from the held (received) values: plant coordinates with
/// their network errors and the held reference copy.
inline double u_c(const robot_arm_params& p, int i, std::span<const double> x,
                  std::span<const double> e_net) {
  const arm_view v = arm(p, i);
  const double eta1_hat = x[v.eta_off] + e_net[0];
  const double eta2_hat = x[v.eta_off + 1] + e_net[1];
  const double qr1_hat = x[v.qr_off] + e_net[3];
  return (v.a * (std::sin(eta1_hat + qr1_hat) - std::sin(qr1_hat)) - eta1_hat - eta2_hat) / v.c;
}

inline double coupling(double bj1, double bj2, std::span<const double> x, int off1, int off2) {
  return bj1 * (x[off1] - x[off2]) + bj2 * (x[off1 + 1] - x[off2 + 1]);
}

}  // namespace robot_detail

[[nodiscard]] inline system_model robot_arm_model(const robot_arm_params& p) {
  system_model m;
  m.name = "robot_arm";
  m.n_x = 8;
  m.nodes = {node_partition{{1, 1, 1}}, node_partition{{1, 1, 1}}};
  m.e_tail_dims = {3, 3};
  m.eta_dims = {2, 2};

  auto eta_rate2 = [p](int i, std::span<const double> x, std::span<const double> e_net) {
    using namespace robot_detail;
    const arm_view v = arm(p, i);
    const double eta1 = x[v.eta_off], qr1 = x[v.qr_off];
    return -v.a * (std::sin(eta1 + qr1) - std::sin(qr1)) + coupling(v.bj1, v.bj2, x, 0, 2) +
           v.c * (u_c(p, i, x, e_net) + e_net[2] + e_net[5]);
  };

  auto qr_rate2 = [p](int i, std::span<const double> delta, std::span<const double> x) {
    using namespace robot_detail;
    const arm_view v = arm(p, i);
    const double uf = p.forcing_amp * std::sin(p.forcing_freq * delta[i]);
    return -v.a * std::sin(x[v.qr_off]) + coupling(v.bj1, v.bj2, x, 4, 6) + v.c * uf;
  };

  m.flow_x = [p, eta_rate2, qr_rate2](std::span<const double> delta, std::span<const double> x,
                                      std::span<const double> e, std::span<double> dx) {
    for (int i = 0; i < 2; ++i) {
      const auto v = robot_detail::arm(p, i);
      const auto e_net = e.subspan(static_cast<std::size_t>(6 * i), 6);
      dx[v.eta_off] = x[v.eta_off + 1];
      dx[v.eta_off + 1] = eta_rate2(i, x, e_net);
      dx[v.qr_off] = x[v.qr_off + 1];
      dx[v.qr_off + 1] = qr_rate2(i, delta, x);
    }
  };

  m.flow_e = [p, eta_rate2, qr_rate2](std::span<const double> delta, std::span<const double> x,
                                      std::span<const double> e, std::span<double> de) {
    for (int i = 0; i < 2; ++i) {
      const auto v = robot_detail::arm(p, i);
      const auto e_net = e.subspan(static_cast<std::size_t>(6 * i), 6);
      const auto de_net = de.subspan(static_cast<std::size_t>(6 * i), 6);
      de_net[0] = -x[v.eta_off + 1];
      de_net[1] = -eta_rate2(i, x, e_net);
      de_net[2] = 0.0;  // controller inputs are held, so its output is too
      de_net[3] = -x[v.qr_off + 1];
      de_net[4] = -qr_rate2(i, delta, x);
      de_net[5] = -p.forcing_amp * p.forcing_freq * std::cos(p.forcing_freq * delta[i]);
    }
  };

  m.z_of = [p](std::span<const double> delta, std::span<const double> x,
               std::span<const double> e, std::span<double> z) {
    for (int i = 0; i < 2; ++i) {
      const auto v = robot_detail::arm(p, i);
      const auto e_net = e.subspan(static_cast<std::size_t>(6 * i), 6);
      auto z_net = z.subspan(static_cast<std::size_t>(6 * i), 6);
      z_net[0] = x[v.eta_off];
      z_net[1] = x[v.eta_off + 1];
      z_net[2] = robot_detail::u_c(p, i, x, e_net);
      z_net[3] = x[v.qr_off];
      z_net[4] = x[v.qr_off + 1];
      z_net[5] = p.forcing_amp * std::sin(p.forcing_freq * delta[i]);
    }
  };

  m.eta_of = [](std::span<const double> x, std::span<double> eta) {
    for (int k = 0; k < 4; ++k) eta[k] = x[k];
  };
  return m;
}

// ---- analysis constants and certificate functions ----

/// Error-flow Lipschitz constant of one arm's scheduled channels.
[[nodiscard]] inline double arm_flow_gain(double a, double c) {
  return std::sqrt(3.0) * std::max(1.0 + a, c);
}

/// Worst-case grant-to-grant contraction of the scheduling error.
[[nodiscard]] inline double protocol_contraction(int ell) {
  return std::sqrt(static_cast<double>(ell - 1) / static_cast<double>(ell));
}

[[nodiscard]] inline double certificate_slope(protocol_kind kind, int ell) {
  return kind == protocol_kind::round_robin ? std::sqrt(static_cast<double>(ell)) : 1.0;
}

/// Contraction the network certificate is monitored against: the protocol
/// term, degraded by quantization and zoom when transmissions are inexact.
[[nodiscard]] inline double certificate_lambda(int ell, double omega, double range,
                                               double err_bound, double omega_zoom_max,
                                               bool quantized) {
  const double q_term = quantized ? omega * range * err_bound + omega_zoom_max : omega_zoom_max;
  return std::max(protocol_contraction(ell), q_term);
}

/// Quadratic tracking certificate; coefficients fixed by the stability
/// analysis of the two arms.
[[nodiscard]] inline std::function<double(std::span<const double>)> robot_arm_v() {
  return [](std::span<const double> x) {
    const double v1 = 8.0 * x[0] * x[0] + 12.0 * x[0] * x[1] + 6.0 * x[1] * x[1];
    const double v2 = 5.0 * x[2] * x[2] + 7.0 * x[2] * x[3] + 9.0 * x[3] * x[3];
    return v1 + v2;
  };
}

/// Network certificate omega * |D(kappa) e_scheduled| + |mu| with per-node
/// grant-distance weights for round robin (D = I under try-once-discard).
/// The in-flight branch (b = 1) anticipates the pending arrival: it evaluates
/// the holding-mode certificate at (e + m, Omega mu), which the update jump
/// then realizes exactly.
[[nodiscard]] inline std::function<double(std::span<const double>, std::span<const double>,
                                          std::span<const double>, std::uint64_t, int)>
make_network_w(protocol_kind kind, int ell, double omega, std::vector<double> zoom,
               double weight_base) {
  return [kind, ell, omega, zoom = std::move(zoom), weight_base](
             std::span<const double> e, std::span<const double> mu, std::span<const double> m,
             std::uint64_t kappa, int b) {
    double acc = 0.0;
    const int r = static_cast<int>(kappa % static_cast<std::uint64_t>(ell));
    for (int l = 1; l <= ell; ++l) {
      double el = e[l - 1] + (b == 1 ? m[l - 1] : 0.0);
      if (kind == protocol_kind::round_robin) {
        const int s = ((l - r) % ell + ell) % ell;  // grants until node l's next turn
        for (int k = 0; k < s; ++k) el /= weight_base;
      }
      acc += el * el;
    }
    double mu_sq = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const double mj = mu[j] * (b == 1 ? zoom[j] : 1.0);
      mu_sq += mj * mj;
    }
    return omega * std::sqrt(acc) + std::sqrt(mu_sq);
  };
}

/// Trigger-side certificate for the robot networks: magnitude of the plant
/// coordinate errors, the held reference errors, and the zoom vector. The
/// applied-torque and feedforward channels are excluded by construction.
[[nodiscard]] inline std::function<double(std::span<const double>, std::span<const double>,
                                          std::span<const double>, std::uint64_t, int)>
robot_trigger_w() {
  return [](std::span<const double> e, std::span<const double> mu, std::span<const double>,
            std::uint64_t, int) {
    double s = e[0] * e[0] + e[1] * e[1] + e[3] * e[3] + e[4] * e[4];
    for (double mj : mu) s += mj * mj;
    return std::sqrt(s);
  };
}

/// Trigger-side state cost: squared tracking error of the arm, read off the
/// scheduled signal vector.
[[nodiscard]] inline std::function<double(std::span<const double>, int)> robot_trigger_phi() {
  return [](std::span<const double> z, int) { return z[0] * z[0] + z[1] * z[1]; };
}

}  // namespace nqcs
