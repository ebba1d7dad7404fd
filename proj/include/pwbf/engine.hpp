#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pwbf/beamformers.hpp"
#include "pwbf/dataset.hpp"
#include "pwbf/geometry.hpp"
#include "pwbf/grid.hpp"

namespace pwbf {

enum class Method { kDas, kImap, kCf, kWiener, kScw, kMv };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);  // throws ConfigError

/// Per-method parameters. Zero / negative sentinels select the per-pixel defaults, which
/// depend on the active aperture size M.
struct MethodConfig {
  Method method = Method::kDas;
  int iterations = 2;        // iMAP
  double alpha = 0.0;        // ScW; 0 selects sqrt(M)
  std::size_t subarray = 0;  // Wiener and MV; 0 selects M/2
  double loading = -1.0;     // MV; negative selects 1/(100 L)

  void validate() const;
  /// Tag used in grid files, e.g. "imap2" or "scw".
  std::string tag() const;
};

/// Applies the configured estimator to one aperture. Subarray lengths larger than the
/// aperture permits are clamped per pixel (Wiener to M-1, MV to M); Wiener on a
/// single-element aperture returns DAS.
bf::cplx apply_method(bf::Aperture y, const MethodConfig& config);

/// Converts one transmit's RF traces to analytic form. Parallel over elements. With
/// `demodulate` the analytic traces are shifted to baseband by the probe centre frequency so
/// that delay interpolation acts on a slowly varying signal; gathering re-applies the
/// carrier at each delay.
AnalyticFrame make_analytic_frame(const ChannelDataSet& data, std::size_t angle_index,
                                  bool demodulate = true);

struct FocusSettings {
  double f_number = 1.75;
};

/// Beamforms one transmit over the grid. OpenMP-parallel over rows; results are
/// bit-identical to reference::beamform_frame for any thread count.
BeamformedGrid beamform_frame(const AnalyticFrame& frame, const ProbeGeometry& probe,
                              double angle, const ImagingGrid& grid, const FocusSettings& focus,
                              const MethodConfig& config);

/// Stacks the aperture vectors of every transmit into one long aperture per pixel and
/// applies the estimator once (the alternative to per-angle processing and compounding).
BeamformedGrid beamform_stacked(const std::vector<AnalyticFrame>& frames,
                                const std::vector<double>& angles, const ProbeGeometry& probe,
                                const ImagingGrid& grid, const FocusSettings& focus,
                                const MethodConfig& config);

/// Coherently averages each element's delayed sample over all transmits first, then applies
/// the estimator to the resulting M-element aperture (transmit-compounded aperture data).
BeamformedGrid beamform_element_compounded(const std::vector<AnalyticFrame>& frames,
                                           const std::vector<double>& angles,
                                           const ProbeGeometry& probe, const ImagingGrid& grid,
                                           const FocusSettings& focus,
                                           const MethodConfig& config);

namespace reference {
/// Straightforward serial implementation built on plan_focus / gather_aperture.
BeamformedGrid beamform_frame(const AnalyticFrame& frame, const ProbeGeometry& probe,
                              double angle, const ImagingGrid& grid, const FocusSettings& focus,
                              const MethodConfig& config);
}  // namespace reference

std::string angle_tag(double angle);

}  // namespace pwbf
