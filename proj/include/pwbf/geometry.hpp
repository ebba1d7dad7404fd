#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pwbf {

using cplx = std::complex<double>;

struct Pixel {
  double x = 0.0;  // lateral [m]
  double z = 0.0;  // axial [m], > 0
};

/// Linear array. Element positions are centred on x = 0.
struct ProbeGeometry {
  std::size_t element_count = 0;
  double pitch = 0.0;               // [m]
  std::vector<double> element_x;    // [m], strictly increasing
  double center_frequency = 0.0;    // [Hz]
  double sampling_frequency = 0.0;  // [Hz]
  double sound_speed = 1540.0;      // [m/s]

  /// Uniform linear array with `count` elements spaced `pitch` apart.
  static ProbeGeometry linear(std::size_t count, double pitch, double center_frequency,
                              double sampling_frequency, double sound_speed);

  double wavelength() const { return sound_speed / center_frequency; }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  bool operator==(const ProbeGeometry&) const = default;
};

/// Cartesian pixel grid. Row index runs over depth, column index over lateral position.
struct ImagingGrid {
  std::vector<double> lateral;  // [m], monotone
  std::vector<double> axial;    // [m], monotone, > 0

  static ImagingGrid uniform(double x0, double x1, std::size_t nx, double z0, double z1,
                             std::size_t nz);

  std::size_t rows() const { return axial.size(); }
  std::size_t cols() const { return lateral.size(); }
  std::size_t size() const { return rows() * cols(); }
  Pixel pixel(std::size_t row, std::size_t col) const { return {lateral[col], axial[row]}; }

  void validate() const;

  bool operator==(const ImagingGrid&) const = default;
};

/// Contiguous element index range [first, last].
struct ElementRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t count() const { return last - first + 1; }
};

double plane_wave_tx_delay(Pixel p, double angle, double sound_speed);
double rx_delay(Pixel p, double element_x, double sound_speed);

/// Elements with |element_x - x| <= z / (2 f#). Falls back to the single nearest element
/// when the gate is empty, and reports that through `fallback`.
ElementRange active_aperture(Pixel p, const ProbeGeometry& probe, double f_number,
                             bool* fallback = nullptr);

/// Per-pixel receive focusing for one plane-wave transmit: the active elements and the
/// total (tx + rx) delay of each, expressed in fractional samples from the trace start.
struct FocusingPlan {
  double angle = 0.0;
  ElementRange elements;
  std::vector<double> delay_samples;  // one per active element
  bool fallback_aperture = false;
};

FocusingPlan plan_focus(Pixel p, const ProbeGeometry& probe, double angle, double f_number,
                        double start_time);

/// Delayed complex samples for one pixel and one transmit (length M_active).
struct ApertureVector {
  std::vector<cplx> samples;
  std::size_t out_of_data = 0;  // samples whose delay fell outside the trace (stored as 0)

  std::size_t size() const { return samples.size(); }
  std::span<const cplx> view() const { return samples; }
};

/// Analytic traces for every element of one transmit, laid out [element][sample].
struct AnalyticFrame {
  std::size_t element_count = 0;
  std::size_t sample_count = 0;
  std::vector<cplx> samples;
  // Non-zero for baseband (IQ) data: interpolated samples are re-rotated by
  // exp(i 2 pi f t) at their delay time t = delay / sampling_frequency.
  double demodulation_frequency = 0.0;
  double sampling_frequency = 0.0;
  double start_time = 0.0;

  std::span<const cplx> trace(std::size_t element) const {
    return {samples.data() + element * sample_count, sample_count};
  }
};

/// Linear interpolation of `trace` at fractional index `s`. Returns nullopt outside
/// [0, n-1].
inline std::optional<cplx> interpolate(std::span<const cplx> trace, double s) {
  if (!(s >= 0.0) || s > static_cast<double>(trace.size() - 1)) return std::nullopt;
  const auto i = static_cast<std::size_t>(s);
  if (i + 1 >= trace.size()) return trace[i];
  const double frac = s - static_cast<double>(i);
  return trace[i] + frac * (trace[i + 1] - trace[i]);
}

/// Gathers the aperture vector of one pixel. Returns nullopt when no active element has
/// a delay inside the recorded traces (out of data), which is distinct from a valid
/// all-zero aperture.
std::optional<ApertureVector> gather_aperture(const AnalyticFrame& frame,
                                              const FocusingPlan& plan);

}  // namespace pwbf
