#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nqcs/quantizer.hpp"
#include "nqcs/rng.hpp"
#include "nqcs/vec.hpp"

using namespace nqcs;

namespace {

quantizer_params random_params(std::mt19937_64& eng) {
  quantizer_params p;
  p.range = 1.0 + 99.0 * unit_uniform(eng);
  p.err_bound = p.range * (0.01 + 0.49 * unit_uniform(eng));
  p.dead_zone = p.err_bound * unit_uniform(eng);
  return p;
}

}  // namespace

TEST_CASE("base quantizer hand values") {
  quantizer_params p;  // range 10, err 0.8, dead zone 0.8
  CHECK(base_quantize(p, 0.0) == 0.0);
  CHECK(base_quantize(p, 1.0) == Catch::Approx(1.6).margin(1e-15));
  CHECK(std::abs(base_quantize(p, 1.0) - 1.0) <= p.err_bound);
  // beyond range: clamped to the top lattice level, still detectable
  CHECK(base_quantize(p, 50.0) == Catch::Approx(9.6).margin(1e-15));
  CHECK(std::abs(base_quantize(p, 50.0)) > p.range - p.err_bound);
  CHECK(base_quantize(p, -50.0) == Catch::Approx(-9.6).margin(1e-15));
}

TEST_CASE("scaled quantizer hand values") {
  quantizer_params p;
  p.err_bound = 0.8;
  p.dead_zone = 0.8;
  vec z{1.0};
  vec q(1);
  quantize(p, 0.5, z, q);
  CHECK(q[0] == Catch::Approx(0.8).margin(1e-15));
  CHECK(std::abs(q[0] - z[0]) <= 0.5 * p.err_bound);
  // mu = 1 reduces to the base quantizer
  quantize(p, 1.0, z, q);
  CHECK(q[0] == base_quantize(p, z[0]));
  // scaled dead zone
  z[0] = 0.5 * p.dead_zone * 0.99;
  quantize(p, 0.5, z, q);
  CHECK(q[0] == 0.0);
}

TEST_CASE("error bound inside the representable range") {
  auto eng = seeded_engine(101, 0);
  for (int k = 0; k < 100000; ++k) {
    const quantizer_params p = random_params(eng);
    const double mu = 0.01 + 9.99 * unit_uniform(eng);
    vec z{(2.0 * unit_uniform(eng) - 1.0) * p.range * mu};
    vec q(1);
    quantize(p, mu, z, q);
    REQUIRE(std::abs(q[0] - z[0]) <= p.err_bound * mu * (1.0 + 1e-12));
  }
}

TEST_CASE("saturation stays detectable") {
  auto eng = seeded_engine(102, 0);
  for (int k = 0; k < 100000; ++k) {
    const quantizer_params p = random_params(eng);
    const double mu = 0.01 + 9.99 * unit_uniform(eng);
    const double sign = unit_uniform(eng) < 0.5 ? -1.0 : 1.0;
    vec z{sign * p.range * mu * (1.0 + 1e-9 + 10.0 * unit_uniform(eng))};
    vec q(1);
    quantize(p, mu, z, q);
    REQUIRE(std::abs(q[0]) > (p.range - p.err_bound) * mu * (1.0 - 1e-12));
  }
}

TEST_CASE("dead zone maps to zero") {
  auto eng = seeded_engine(103, 0);
  for (int k = 0; k < 100000; ++k) {
    const quantizer_params p = random_params(eng);
    const double mu = 0.01 + 9.99 * unit_uniform(eng);
    vec z{(2.0 * unit_uniform(eng) - 1.0) * p.dead_zone * mu};
    vec q(1);
    quantize(p, mu, z, q);
    REQUIRE(q[0] == 0.0);
  }
}

TEST_CASE("zoom scaling identity") {
  auto eng = seeded_engine(104, 0);
  for (int k = 0; k < 1000; ++k) {
    const quantizer_params p = random_params(eng);
    const double mu = 0.01 + 9.99 * unit_uniform(eng);
    vec z{(2.0 * unit_uniform(eng) - 1.0) * 2.0 * p.range * mu};
    vec q1(1), q2(1);
    quantize(p, mu, z, q1);
    vec zs{z[0] / mu};
    quantize(p, 1.0, zs, q2);
    REQUIRE(q1[0] == Catch::Approx(mu * q2[0]).epsilon(1e-12));
  }
}

TEST_CASE("zoom contraction") {
  CHECK(zoom(1.0, 1.0) == 1.0);
  CHECK(zoom(1.0, 0.6) == 0.6);
  double mu = 1.0;
  for (int k = 0; k < 10; ++k) mu = zoom(mu, 0.6);
  CHECK(mu == Catch::Approx(0.0060466176).epsilon(1e-12));
}

TEST_CASE("saturation check boundary is inclusive") {
  quantizer_params p;  // range 10
  vec z{10.0};
  CHECK_FALSE(saturated(p, 1.0, z));
  z[0] = 10.01;
  CHECK(saturated(p, 1.0, z));
  z[0] = 0.0;
  CHECK_FALSE(saturated(p, 1.0, z));
}

TEST_CASE("initial zoom covers the initial signal") {
  quantizer_params p;
  vec z{7.3, -2.1};
  const double mu = initial_mu(p, z);
  CHECK_FALSE(saturated(p, mu, z));
  CHECK(norm2(z) < p.range * mu);  // strict headroom from the safety factor
  vec zero{0.0};
  CHECK(initial_mu(p, zero) > 0.0);
}

TEST_CASE("disabled quantizer is the identity") {
  quantizer_params p;
  p.enabled = false;
  vec z{3.14159, -0.2};
  vec q(2);
  quantize(p, 0.5, z, q);
  CHECK(q[0] == z[0]);
  CHECK(q[1] == z[1]);
}
