#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pwbf {

/// Complex beamformed value per pixel, row-major [axial][lateral].
struct BeamformedGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::complex<double>> values;
  std::vector<std::uint8_t> valid;  // 1 = pixel received data; invalid pixels hold 0
  std::string method;
  std::string angle_tag;  // angle in degrees, or "compounded"
  std::size_t fallback_pixels = 0;  // pixels focused through the nearest-element fallback

  BeamformedGrid() = default;
  BeamformedGrid(std::size_t r, std::size_t c)
      : rows(r), cols(c), values(r * c, 0.0), valid(r * c, 0) {}

  std::size_t size() const { return values.size(); }

  bool operator==(const BeamformedGrid&) const = default;
};

}  // namespace pwbf
