#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "pwbf/geometry.hpp"

namespace pwbf::test {

inline std::vector<cplx> random_aperture(std::mt19937_64& rng, std::size_t m) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<cplx> y(m);
  for (auto& v : y) v = {n(rng), n(rng)};
  return y;
}

inline ProbeGeometry small_probe(std::size_t elements = 32) {
  const double fc = 5.2e6;
  return ProbeGeometry::linear(elements, 1540.0 / fc, fc, 4.0 * fc, 1540.0);
}

inline double rel_err(cplx a, cplx b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace pwbf::test
