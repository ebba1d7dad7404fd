#include "pwbf/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "pwbf/errors.hpp"

namespace pwbf {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void analytic_signal(std::span<const double> in, std::vector<std::complex<double>>& out) {
  const std::size_t n = in.size();
  if (n < 2) throw ConfigError("analytic_signal: trace needs at least 2 samples");
  out.assign(in.begin(), in.end());

  auto* data = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan fwd;
  fftw_plan inv;
  {
    std::lock_guard lock(planner_mutex());
    fwd = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(fwd);

  // Bins 1 .. ceil(n/2)-1 are strictly positive frequencies; for even n bin n/2 is
  // Nyquist and stays untouched along with DC.
  const std::size_t positive_end = (n + 1) / 2;
  for (std::size_t k = 1; k < positive_end; ++k) out[k] *= 2.0;
  for (std::size_t k = n / 2 + 1; k < n; ++k) out[k] = 0.0;

  fftw_execute(inv);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  // The real part is the input by construction; restore it exactly.
  for (std::size_t i = 0; i < n; ++i) out[i].real(in[i]);

  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(inv);
}

AnalyticTrace analytic_signal(const RfTrace& trace) {
  AnalyticTrace result;
  result.sampling_frequency = trace.sampling_frequency;
  result.start_time = trace.start_time;
  analytic_signal(trace.samples, result.samples);
  return result;
}

RealGrid envelope(std::span<const std::complex<double>> values, std::size_t rows,
                  std::size_t cols) {
  RealGrid env(rows, cols);
  for (std::size_t i = 0; i < values.size(); ++i) env.values[i] = std::abs(values[i]);
  return env;
}

BModeImage log_compress(const RealGrid& env, double dynamic_range) {
  if (!(dynamic_range > 0.0)) throw ConfigError("log_compress: dynamic range must be positive");
  const double peak = env.values.empty()
                          ? 0.0
                          : *std::max_element(env.values.begin(), env.values.end());
  if (!(peak > 0.0)) throw NumericalError("log_compress: image has no positive value");
  BModeImage image;
  image.dynamic_range = dynamic_range;
  image.db = RealGrid(env.rows, env.cols);
  for (std::size_t i = 0; i < env.values.size(); ++i) {
    const double v = env.values[i];
    image.db.values[i] =
        v > 0.0 ? std::max(-dynamic_range, 20.0 * std::log10(v / peak)) : -dynamic_range;
  }
  return image;
}

double pulse_sigma(double fc, double fractional_bandwidth) {
  // Spectrum of the envelope is exp(-2 pi^2 sigma^2 f^2); half amplitude at f = B/2.
  const double bandwidth = fractional_bandwidth * fc;
  return std::sqrt(2.0 * std::numbers::ln2) / (std::numbers::pi * bandwidth);
}

double gaussian_pulse(double t, double fc, double fractional_bandwidth) {
  const double sigma = pulse_sigma(fc, fractional_bandwidth);
  return std::cos(2.0 * std::numbers::pi * fc * t) * std::exp(-t * t / (2.0 * sigma * sigma));
}

}  // namespace pwbf
