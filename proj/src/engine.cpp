#include "pwbf/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>

#include "pwbf/dsp.hpp"
#include "pwbf/errors.hpp"

namespace pwbf {
namespace {

// Collects the first exception thrown inside an OpenMP region so it can be rethrown on
// the calling thread.
class ExceptionSlot {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

[[noreturn]] void rethrow_with_context(const std::exception& e, std::size_t row, std::size_t col,
                                       const std::string& where) {
  std::ostringstream msg;
  msg << e.what() << " (pixel row " << row << ", col " << col << ", " << where << ")";
  if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg.str());
  throw NumericalError(msg.str());
}

// Fills `out` with the aperture of one pixel; returns the number of out-of-data samples.
std::size_t gather_into(const AnalyticFrame& frame, const ProbeGeometry& probe, double angle,
                        Pixel p, const ElementRange& range, double start_time,
                        std::vector<cplx>& out) {
  const double tx = plane_wave_tx_delay(p, angle, probe.sound_speed);
  std::size_t missing = 0;
  for (std::size_t m = range.first; m <= range.last; ++m) {
    const double rx = rx_delay(p, probe.element_x[m], probe.sound_speed);
    const double s = (tx + rx - start_time) * probe.sampling_frequency;
    auto v = interpolate(frame.trace(m), s);
    if (!v) {
      out.push_back(0.0);
      ++missing;
      continue;
    }
    if (frame.demodulation_frequency != 0.0) {
      const double t = frame.start_time + s / frame.sampling_frequency;
      *v *= std::polar(1.0, 2.0 * std::numbers::pi * frame.demodulation_frequency * t);
    }
    out.push_back(*v);
  }
  return missing;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kDas: return "das";
    case Method::kImap: return "imap";
    case Method::kCf: return "cf";
    case Method::kWiener: return "wiener";
    case Method::kScw: return "scw";
    case Method::kMv: return "mv";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::kDas, Method::kImap, Method::kCf, Method::kWiener, Method::kScw,
                 Method::kMv}) {
    if (name == method_name(m)) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected das, imap, cf, wiener, scw or mv)");
}

void MethodConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
}

std::string MethodConfig::tag() const {
  std::string t(method_name(method));
  if (method == Method::kImap) t += std::to_string(iterations);
  return t;
}

bf::cplx apply_method(bf::Aperture y, const MethodConfig& config) {
  const std::size_t m = y.size();
  switch (config.method) {
    case Method::kDas: return bf::das(y);
    case Method::kImap: return bf::imap_value(y, config.iterations);
    case Method::kCf: return bf::cf_output(y);
    case Method::kWiener: {
      if (m < 2) return bf::das(y);
      const std::size_t l = config.subarray == 0 ? bf::default_wiener_subarray(m)
                                                 : std::min(config.subarray, m - 1);
      return bf::wiener_postfilter(y, l);
    }
    case Method::kScw:
      return bf::scaled_wiener(y, config.alpha == 0.0 ? bf::default_scw_alpha(m) : config.alpha);
    case Method::kMv: {
      const std::size_t l =
          config.subarray == 0 ? bf::default_mv_subarray(m) : std::min(config.subarray, m);
      const double load = config.loading < 0.0 ? bf::default_mv_loading(l) : config.loading;
      return bf::minimum_variance(y, l, load);
    }
  }
  throw ConfigError("unknown method");
}

AnalyticFrame make_analytic_frame(const ChannelDataSet& data, std::size_t angle_index,
                                  bool demodulate) {
  if (angle_index >= data.angle_count()) throw ConfigError("angle index out of range");
  AnalyticFrame frame;
  frame.element_count = data.probe.element_count;
  frame.sample_count = data.sample_count;
  frame.sampling_frequency = data.probe.sampling_frequency;
  frame.start_time = data.start_time;
  frame.demodulation_frequency = demodulate ? data.probe.center_frequency : 0.0;
  frame.samples.resize(frame.element_count * frame.sample_count);
  const auto n_elem = static_cast<long long>(frame.element_count);
  ExceptionSlot slot;
#pragma omp parallel
  {
    std::vector<double> rf;
    std::vector<cplx> analytic;
#pragma omp for schedule(static)
    for (long long m = 0; m < n_elem; ++m) {
      slot.run([&] {
        const auto src = data.trace(angle_index, static_cast<std::size_t>(m));
        rf.assign(src.begin(), src.end());
        analytic_signal(rf, analytic);
        if (frame.demodulation_frequency != 0.0) {
          const double w = -2.0 * std::numbers::pi * frame.demodulation_frequency;
          for (std::size_t n = 0; n < analytic.size(); ++n) {
            const double t = frame.start_time + static_cast<double>(n) / frame.sampling_frequency;
            analytic[n] *= std::polar(1.0, w * t);
          }
        }
        std::copy(analytic.begin(), analytic.end(),
                  frame.samples.begin() + m * static_cast<long long>(frame.sample_count));
      });
    }
  }
  slot.rethrow();
  return frame;
}

std::string angle_tag(double angle) {
  std::ostringstream s;
  s.precision(6);
  s << angle * 180.0 / std::numbers::pi;
  return s.str();
}

BeamformedGrid beamform_frame(const AnalyticFrame& frame, const ProbeGeometry& probe,
                              double angle, const ImagingGrid& grid, const FocusSettings& focus,
                              const MethodConfig& config) {
  config.validate();
  BeamformedGrid out(grid.rows(), grid.cols());
  out.method = config.tag();
  out.angle_tag = angle_tag(angle);
  const auto rows = static_cast<long long>(grid.rows());
  std::size_t fallbacks = 0;
  ExceptionSlot slot;
#pragma omp parallel reduction(+ : fallbacks)
  {
    std::vector<cplx> y;
    y.reserve(probe.element_count);
#pragma omp for schedule(dynamic, 4)
    for (long long r = 0; r < rows; ++r) {
      const auto row = static_cast<std::size_t>(r);
      for (std::size_t col = 0; col < grid.cols(); ++col) {
        const Pixel p = grid.pixel(row, col);
        bool fallback = false;
        const auto range = active_aperture(p, probe, focus.f_number, &fallback);
        fallbacks += fallback ? 1 : 0;
        y.clear();
        const std::size_t missing =
            gather_into(frame, probe, angle, p, range, frame.start_time, y);
        if (missing == y.size()) continue;
        const std::size_t i = row * grid.cols() + col;
        slot.run([&] {
          try {
            out.values[i] = apply_method(y, config);
          } catch (const std::exception& e) {
            rethrow_with_context(e, row, col, "angle " + out.angle_tag);
          }
        });
        out.valid[i] = 1;
      }
    }
  }
  slot.rethrow();
  out.fallback_pixels = fallbacks;
  return out;
}

BeamformedGrid beamform_stacked(const std::vector<AnalyticFrame>& frames,
                                const std::vector<double>& angles, const ProbeGeometry& probe,
                                const ImagingGrid& grid, const FocusSettings& focus,
                                const MethodConfig& config) {
  config.validate();
  if (frames.size() != angles.size() || frames.empty()) {
    throw ConfigError("beamform_stacked: frames and angles must match and be non-empty");
  }
  BeamformedGrid out(grid.rows(), grid.cols());
  out.method = config.tag();
  out.angle_tag = "compounded";
  const auto rows = static_cast<long long>(grid.rows());
  std::size_t fallbacks = 0;
  ExceptionSlot slot;
#pragma omp parallel reduction(+ : fallbacks)
  {
    std::vector<cplx> y;
    y.reserve(probe.element_count * frames.size());
#pragma omp for schedule(dynamic, 4)
    for (long long r = 0; r < rows; ++r) {
      const auto row = static_cast<std::size_t>(r);
      for (std::size_t col = 0; col < grid.cols(); ++col) {
        const Pixel p = grid.pixel(row, col);
        bool fallback = false;
        const auto range = active_aperture(p, probe, focus.f_number, &fallback);
        fallbacks += fallback ? 1 : 0;
        y.clear();
        std::size_t missing = 0;
        for (std::size_t a = 0; a < frames.size(); ++a) {
          missing += gather_into(frames[a], probe, angles[a], p, range, frames[a].start_time, y);
        }
        if (missing == y.size()) continue;
        const std::size_t i = row * grid.cols() + col;
        slot.run([&] {
          try {
            out.values[i] = apply_method(y, config);
          } catch (const std::exception& e) {
            rethrow_with_context(e, row, col, "stacked angles");
          }
        });
        out.valid[i] = 1;
      }
    }
  }
  slot.rethrow();
  out.fallback_pixels = fallbacks;
  return out;
}

BeamformedGrid beamform_element_compounded(const std::vector<AnalyticFrame>& frames,
                                           const std::vector<double>& angles,
                                           const ProbeGeometry& probe, const ImagingGrid& grid,
                                           const FocusSettings& focus,
                                           const MethodConfig& config) {
  config.validate();
  if (frames.size() != angles.size() || frames.empty()) {
    throw ConfigError("beamform_element_compounded: frames and angles must match");
  }
  BeamformedGrid out(grid.rows(), grid.cols());
  out.method = config.tag();
  out.angle_tag = "compounded";
  const auto rows = static_cast<long long>(grid.rows());
  std::size_t fallbacks = 0;
  ExceptionSlot slot;
#pragma omp parallel reduction(+ : fallbacks)
  {
    std::vector<cplx> y;
    std::vector<cplx> acc;
    std::vector<std::size_t> hits;
    y.reserve(probe.element_count);
#pragma omp for schedule(dynamic, 4)
    for (long long r = 0; r < rows; ++r) {
      const auto row = static_cast<std::size_t>(r);
      for (std::size_t col = 0; col < grid.cols(); ++col) {
        const Pixel p = grid.pixel(row, col);
        bool fallback = false;
        const auto range = active_aperture(p, probe, focus.f_number, &fallback);
        fallbacks += fallback ? 1 : 0;
        acc.assign(range.count(), 0.0);
        hits.assign(range.count(), 0);
        for (std::size_t a = 0; a < frames.size(); ++a) {
          y.clear();
          gather_into(frames[a], probe, angles[a], p, range, frames[a].start_time, y);
          for (std::size_t k = 0; k < y.size(); ++k) {
            // Out-of-data samples were stored as exact zeros; they do not count as hits.
            if (y[k] != 0.0) {
              acc[k] += y[k];
              ++hits[k];
            }
          }
        }
        if (std::all_of(hits.begin(), hits.end(), [](auto h) { return h == 0; })) continue;
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] /= static_cast<double>(frames.size());
        const std::size_t i = row * grid.cols() + col;
        slot.run([&] {
          try {
            out.values[i] = apply_method(acc, config);
          } catch (const std::exception& e) {
            rethrow_with_context(e, row, col, "element-compounded angles");
          }
        });
        out.valid[i] = 1;
      }
    }
  }
  slot.rethrow();
  out.fallback_pixels = fallbacks;
  return out;
}

}  // namespace pwbf
