// Serial reference implementations kept for cross-checking the OpenMP kernels.

#include "pwbf/engine.hpp"

namespace pwbf::reference {

BeamformedGrid beamform_frame(const AnalyticFrame& frame, const ProbeGeometry& probe,
                              double angle, const ImagingGrid& grid, const FocusSettings& focus,
                              const MethodConfig& config) {
  config.validate();
  BeamformedGrid out(grid.rows(), grid.cols());
  out.method = config.tag();
  out.angle_tag = angle_tag(angle);
  for (std::size_t row = 0; row < grid.rows(); ++row) {
    for (std::size_t col = 0; col < grid.cols(); ++col) {
      const auto plan =
          plan_focus(grid.pixel(row, col), probe, angle, focus.f_number, frame.start_time);
      if (plan.fallback_aperture) ++out.fallback_pixels;
      const auto y = gather_aperture(frame, plan);
      if (!y) continue;
      const std::size_t i = row * grid.cols() + col;
      out.values[i] = apply_method(y->view(), config);
      out.valid[i] = 1;
    }
  }
  return out;
}

}  // namespace pwbf::reference
