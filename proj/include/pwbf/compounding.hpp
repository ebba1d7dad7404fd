#pragma once

#include <cstddef>
#include <vector>

#include "pwbf/grid.hpp"

namespace pwbf {

/// Running coherent mean over transmit angles. Invalid contributions are excluded from
/// the mean of their pixel; a pixel is valid if any contribution was.
class CompoundAccumulator {
 public:
  void add(const BeamformedGrid& grid);
  BeamformedGrid result() const;
  std::size_t count() const { return count_; }

 private:
  BeamformedGrid sum_;
  std::vector<std::size_t> hits_;
  std::size_t count_ = 0;
};

/// Per-pixel arithmetic mean of complex values. Throws ConfigError for an empty list,
/// mismatched dimensions or mismatched method tags.
BeamformedGrid coherent_compound(const std::vector<BeamformedGrid>& grids);

/// Default plane-wave fan: +/- 16 degrees.
inline constexpr double kDefaultFanHalfSpanDeg = 16.0;

/// n uniformly spaced angles [rad] spanning [-half_span, +half_span] with both ends
/// included (n = 1 gives 0).
std::vector<double> select_angles(std::size_t n, double half_span_deg = kDefaultFanHalfSpanDeg);

/// Index of the nearest available angle for every wanted angle. Throws ConfigError if two
/// wanted angles map onto the same recorded transmit.
std::vector<std::size_t> match_angles(const std::vector<double>& available,
                                      const std::vector<double>& wanted);

}  // namespace pwbf
