#pragma once
// Event-triggering mechanism. At every sampling instant the network evaluates
//
//   Gamma = (1 - 2b) * gamma_b * W^2 - (1 - b) * rho * lambda_bar * phi_b(z)
//
// and transmits iff Gamma >= 0. Samplings happen in the holding mode b = 0,
// where the rule compares the error certificate against a fraction of the
// running state cost; rho = 0 recovers plain time-triggered transmission
// (Gamma = gamma_0 W^2 >= 0 always).

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>

namespace nqcs {

/// Error certificate W(e, mu, m, kappa, b) of one network.
using w_fn = std::function<double(std::span<const double> e, std::span<const double> mu,
                                  std::span<const double> m, std::uint64_t kappa, int b)>;

/// State cost phi_b(z) entering the triggering threshold.
using phi_fn = std::function<double(std::span<const double> z, int b)>;

struct etm_params {
  double rho = 0.0;     // triggering aggressiveness; 0 disables event logic
  double lambda = 0.0;  // protocol contraction entering lambda_bar
  double gamma0 = 1.0;  // certificate gain, holding mode
  double gamma1 = 1.0;  // certificate gain, in-flight mode
  double lbar0 = 0.0;   // growth constant in the admissible-rho bound
};

/// Largest admissible rho for the given holding-mode constants.
[[nodiscard]] inline double rho_bar(double lbar0, double gamma0) {
  if (lbar0 <= -gamma0) return 1.0;
  return std::min(1.0, 1.0 / (lbar0 + gamma0));
}

/// Effective contraction after triggering: skipping is only allowed while the
/// certificate is small, which inflates the worst-case per-transmission decay
/// from lambda to max(lambda, rho*gamma0 / (1 - rho*lbar0)).
[[nodiscard]] inline double lambda_bar(double lambda, double rho, double gamma0, double lbar0) {
  if (rho == 0.0) return lambda;
  const double denom = 1.0 - rho * lbar0;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(lambda, rho * gamma0 / denom);
}

[[nodiscard]] inline double lambda_bar(const etm_params& p) {
  return lambda_bar(p.lambda, p.rho, p.gamma0, p.lbar0);
}

/// Triggering value for certificate W and state cost phi_b(z) in mode b.
[[nodiscard]] inline double gamma_value(const etm_params& p, double w, double phi_bz, int b) {
  const double gb = b == 0 ? p.gamma0 : p.gamma1;
  return (1.0 - 2.0 * b) * gb * w * w - (1.0 - b) * p.rho * lambda_bar(p) * phi_bz;
}

[[nodiscard]] inline bool triggered(double gamma) { return gamma >= 0.0; }

inline void validate(const etm_params& p) {
  if (!(p.gamma0 > 0.0 && p.gamma1 > 0.0)) throw std::invalid_argument("etm: gammas must be > 0");
  if (!(p.lambda >= 0.0 && p.lambda < 1.0))
    throw std::invalid_argument("etm: lambda must lie in [0, 1)");
  if (p.rho < 0.0) throw std::invalid_argument("etm: rho must be >= 0");
  if (p.rho > 0.0 && p.rho >= rho_bar(p.lbar0, p.gamma0))
    throw std::invalid_argument("etm: rho must stay below rho_bar(lbar0, gamma0)");
}

}  // namespace nqcs
