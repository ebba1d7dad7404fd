#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pwbf {

struct RfTrace {
  std::vector<double> samples;
  double sampling_frequency = 0.0;
  double start_time = 0.0;
};

struct AnalyticTrace {
  std::vector<std::complex<double>> samples;
  double sampling_frequency = 0.0;
  double start_time = 0.0;
};

/// Row-major real image with per-pixel values. Used for envelopes and B-mode images.
struct RealGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  RealGrid() = default;
  RealGrid(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Log-compressed image in dB, normalised so that its maximum sits at 0 dB.
struct BModeImage {
  RealGrid db;
  double dynamic_range = 60.0;
};

/// Discrete analytic signal by the one-sided spectrum method: negative frequencies are
/// zeroed, positive ones doubled, DC and Nyquist kept. The real part reproduces the input.
AnalyticTrace analytic_signal(const RfTrace& trace);

/// Same transform on a raw span, writing into `out` (resized to input length).
void analytic_signal(std::span<const double> in, std::vector<std::complex<double>>& out);

RealGrid envelope(std::span<const std::complex<double>> values, std::size_t rows,
                  std::size_t cols);

/// 20 log10(env / max env), clipped to [-dynamic_range, 0]. Throws NumericalError for an
/// image without any positive value.
BModeImage log_compress(const RealGrid& env, double dynamic_range);

/// Standard deviation of the Gaussian envelope whose -6 dB spectral width equals
/// fractional_bandwidth * fc.
double pulse_sigma(double fc, double fractional_bandwidth);

double gaussian_pulse(double t, double fc, double fractional_bandwidth);

}  // namespace pwbf
