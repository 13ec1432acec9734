#pragma once
// Zoomable uniform quantizer. A node holding value z transmits the lattice
// point mu * base_quantize(z / mu); the receiver reconstructs the identical
// value, so the only effect on the loop is the additive error q - z.
//
// base_quantize is a componentwise mid-tread lattice of step 2*err_bound with
// a dead zone around the origin and a clamp at the edge of the representable
// range. Inside the range the error never exceeds err_bound * mu; outside it
// the output magnitude stays above (range - err_bound) * mu so saturation is
// detectable from the received value.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include "nqcs/vec.hpp"

namespace nqcs {

struct quantizer_params {
  double range = 10.0;     // half-width of the representable box, in mu units
  double err_bound = 0.8;  // worst-case in-range error, in mu units
  double dead_zone = 0.8;  // inputs with |y| <= dead_zone map to zero
  bool enabled = true;     // disabled: transmissions are exact, zero error

  void validate() const {
    if (!(err_bound > 0.0)) throw std::invalid_argument("quantizer: err_bound must be > 0");
    if (!(range > err_bound)) throw std::invalid_argument("quantizer: range must exceed err_bound");
    if (!(dead_zone > 0.0 && dead_zone <= err_bound))
      throw std::invalid_argument("quantizer: dead_zone must lie in (0, err_bound]");
  }
};

/// Nearest mid-tread lattice point, clamped to the widest level inside the
/// unit-zoom range. The clamp level rounds range/step to the nearest integer;
/// truncating instead would break the in-range error bound whenever
/// range/step has fractional part above one half.
[[nodiscard]] inline double base_quantize(const quantizer_params& p, double y) {
  if (!p.enabled) return y;
  if (std::abs(y) <= p.dead_zone) return 0.0;
  const double step = 2.0 * p.err_bound;
  const double top = step * std::nearbyint(p.range / step);
  return std::clamp(step * std::nearbyint(y / step), -top, top);
}

/// q(mu, z) = mu * base_quantize(z / mu), componentwise. mu must be > 0.
inline void quantize(const quantizer_params& p, double mu, std::span<const double> z,
                     std::span<double> q_out) {
  for (std::size_t c = 0; c < z.size(); ++c) q_out[c] = mu * base_quantize(p, z[c] / mu);
}

/// Error vector q(mu, z) - z injected by one transmission.
inline void quantization_error(const quantizer_params& p, double mu, std::span<const double> z,
                               std::span<double> err_out) {
  quantize(p, mu, z, err_out);
  for (std::size_t c = 0; c < z.size(); ++c) err_out[c] -= z[c];
}

/// True when the node's signal block lies outside the representable box, the
/// condition under which the in-range error bound no longer holds.
[[nodiscard]] inline bool saturated(const quantizer_params& p, double mu,
                                    std::span<const double> z) {
  if (!p.enabled) return false;
  return norm2(z) > p.range * mu;
}

/// Zoom factor applied to mu at each arrival.
[[nodiscard]] inline double zoom(double mu, double omega) { return omega * mu; }

/// Startup zoom chosen so the initial signal sits inside the representable
/// box with 10% margin; the floor keeps zero signals off mu = 0.
[[nodiscard]] inline double initial_mu(const quantizer_params& p, std::span<const double> z0,
                                       double mu_floor = 1e-6) {
  return 1.1 * std::max(norm2(z0) / p.range, mu_floor);
}

}  // namespace nqcs
