#pragma once
// Small dense-vector helpers. State vectors are plain std::vector<double>;
// per-network and per-node slices are passed around as std::span.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace nqcs {

using vec = std::vector<double>;

[[nodiscard]] inline double norm2_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

[[nodiscard]] inline double norm2(std::span<const double> v) {
  return std::sqrt(norm2_sq(v));
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

[[nodiscard]] inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

[[nodiscard]] inline std::span<double> slice(vec& v, std::size_t off, std::size_t len) {
  return std::span<double>(v.data() + off, len);
}

[[nodiscard]] inline std::span<const double> slice(const vec& v, std::size_t off, std::size_t len) {
  return std::span<const double>(v.data() + off, len);
}

}  // namespace nqcs
