#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pwbf/geometry.hpp"

namespace pwbf {

struct CystAnnotation {
  double x = 0.0;  // [m]
  double z = 0.0;  // [m]
  double radius = 0.0;
  bool operator==(const CystAnnotation&) const = default;
};

struct PointAnnotation {
  double x = 0.0;
  double z = 0.0;
  bool operator==(const PointAnnotation&) const = default;
};

/// Known phantom structure carried alongside data so metrics can locate regions.
struct Annotations {
  std::vector<CystAnnotation> cysts;
  std::vector<PointAnnotation> points;
  bool empty() const { return cysts.empty() && points.empty(); }
  bool operator==(const Annotations&) const = default;
};

/// Per-element RF recordings for every plane-wave transmit, laid out
/// [angle][element][sample].
struct ChannelDataSet {
  ProbeGeometry probe;
  std::vector<double> angles;  // [rad]
  std::size_t sample_count = 0;
  double start_time = 0.0;  // [s], time of sample 0 relative to the transmit origin
  std::vector<float> traces;
  std::string provenance;
  Annotations annotations;

  std::size_t angle_count() const { return angles.size(); }

  std::span<const float> trace(std::size_t angle, std::size_t element) const {
    return {traces.data() + (angle * probe.element_count + element) * sample_count,
            sample_count};
  }
  std::span<float> trace(std::size_t angle, std::size_t element) {
    return {traces.data() + (angle * probe.element_count + element) * sample_count,
            sample_count};
  }

  /// Throws DataError when dimensions disagree or samples are not finite.
  void validate() const;

  bool operator==(const ChannelDataSet&) const = default;
};

}  // namespace pwbf
