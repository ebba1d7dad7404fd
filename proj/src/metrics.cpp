#include "pwbf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>

#include "pwbf/errors.hpp"

namespace pwbf {
namespace {

constexpr double kMm = 1e3;

// Crossing of the -6 dB level between samples a (above) and b (below).
double crossing(const ProfileSample& a, const ProfileSample& b, double level) {
  const double t = (a.value_db - level) / (a.value_db - b.value_db);
  return a.position_mm + t * (b.position_mm - a.position_mm);
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;
  bool clipped = false;
};

Moments moments(const BModeImage& image, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  std::size_t clipped = 0;
  for (auto i : idx) {
    const double v = image.db.values[i];
    s += v;
    if (v <= -image.dynamic_range) ++clipped;
  }
  const double mean = s / static_cast<double>(idx.size());
  double ss = 0.0;
  for (auto i : idx) {
    const double d = image.db.values[i] - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(idx.size())),
          static_cast<double>(clipped) > 0.1 * static_cast<double>(idx.size())};
}

double scale_fitted_critical(std::size_t n, double alpha) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, double>, double> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(n, alpha);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  // The statistic is scale-free under the fitted null, so unit-scale draws suffice.
  constexpr std::size_t kTrials = 20000;
  std::mt19937_64 rng(0x6b73u + n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> stats;
  stats.reserve(kTrials);
  std::vector<double> draw(n);
  for (std::size_t t = 0; t < kTrials; ++t) {
    for (auto& v : draw) v = std::sqrt(-2.0 * std::log(1.0 - u(rng)));
    stats.push_back(*rayleigh_ks_statistic(draw));
  }
  std::sort(stats.begin(), stats.end());
  const auto q = static_cast<std::size_t>(std::ceil((1.0 - alpha) * kTrials)) - 1;
  const double value = stats[std::min(q, kTrials - 1)];
  cache.emplace(key, value);
  return value;
}

void append(std::string& out, const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  out += key + " = " + buf + "\n";
}

void append(std::string& out, const std::string& key, const std::string& value) {
  out += key + " = " + value + "\n";
}

}  // namespace

double fwhm(const std::vector<ProfileSample>& profile) {
  if (profile.size() < 3) throw NumericalError("fwhm: unresolved target (profile too short)");
  const auto peak_it = std::max_element(profile.begin(), profile.end(),
                                        [](auto& a, auto& b) { return a.value_db < b.value_db; });
  const auto peak = static_cast<std::size_t>(peak_it - profile.begin());
  const double level = peak_it->value_db - 6.0;

  std::optional<double> left;
  for (std::size_t i = peak; i > 0; --i) {
    if (profile[i - 1].value_db < level) {
      left = crossing(profile[i], profile[i - 1], level);
      break;
    }
  }
  std::optional<double> right;
  for (std::size_t i = peak; i + 1 < profile.size(); ++i) {
    if (profile[i + 1].value_db < level) {
      right = crossing(profile[i], profile[i + 1], level);
      break;
    }
  }
  if (!left || !right) throw NumericalError("fwhm: unresolved target");
  return std::abs(*right - *left);
}

void CnrRegions::validate(std::size_t min_pixels) const {
  if (cyst.size() < min_pixels || background.size() < min_pixels) {
    throw ConfigError("cnr: regions need at least " + std::to_string(min_pixels) + " pixels");
  }
  std::vector<std::size_t> a = cyst;
  std::vector<std::size_t> b = background;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (!common.empty()) throw ConfigError("cnr: cyst and background regions overlap");
}

CnrRegions cyst_regions(const ImagingGrid& grid, const CystAnnotation& cyst,
                        const std::vector<CystAnnotation>& all_cysts, RegionRule rule) {
  CnrRegions regions;
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      const Pixel p = grid.pixel(r, c);
      const double d = std::hypot(p.x - cyst.x, p.z - cyst.z);
      const std::size_t i = r * grid.cols() + c;
      if (d <= rule.inner * cyst.radius) {
        regions.cyst.push_back(i);
        continue;
      }
      if (d < rule.outer_min * cyst.radius || d > rule.outer_max * cyst.radius) continue;
      const bool near_other = std::any_of(all_cysts.begin(), all_cysts.end(), [&](auto& o) {
        return std::hypot(p.x - o.x, p.z - o.z) < rule.outer_min * o.radius;
      });
      if (!near_other) regions.background.push_back(i);
    }
  }
  return regions;
}

CnrResult cnr(const BModeImage& image, const CnrRegions& regions) {
  regions.validate(1);
  const auto c = moments(image, regions.cyst);
  const auto b = moments(image, regions.background);
  if (b.std == 0.0) throw NumericalError("cnr: background has zero standard deviation");
  return {std::abs(c.mean - b.mean) / b.std, c.mean, b.mean, b.std, c.clipped, b.clipped};
}

std::size_t SpeckleMap::count() const {
  return static_cast<std::size_t>(std::count(speckle.begin(), speckle.end(), 1));
}

std::optional<double> rayleigh_ks_statistic(std::vector<double> samples) {
  const std::size_t n = samples.size();
  if (n == 0) return std::nullopt;
  double mean_sq = 0.0;
  for (double a : samples) mean_sq += a * a;
  mean_sq /= static_cast<double>(n);
  const double two_var = mean_sq;  // 2 sigma^2 with sigma^2 = mean(a^2) / 2
  if (!(two_var > 0.0)) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) return std::nullopt;

  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = 1.0 - std::exp(-samples[i] * samples[i] / two_var);
    d = std::max({d, static_cast<double>(i + 1) / nn - f, f - static_cast<double>(i) / nn});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha, KsCritical mode) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) throw ConfigError("ks: invalid n or alpha");
  if (mode == KsCritical::kAsymptotic) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
  }
  return scale_fitted_critical(n, alpha);
}

SpeckleMap rayleigh_ks_map(const RealGrid& envelope, const KsSettings& settings) {
  const auto& s = settings;
  if (s.patch_rows == 0 || s.patch_cols == 0 || s.stride_rows == 0 || s.stride_cols == 0) {
    throw ConfigError("ks map: patch and stride must be positive");
  }
  if (envelope.rows < s.patch_rows || envelope.cols < s.patch_cols) {
    throw ConfigError("ks map: image smaller than one patch");
  }
  SpeckleMap map;
  map.rows = envelope.rows;
  map.cols = envelope.cols;
  map.settings = s;
  map.speckle.assign(envelope.rows * envelope.cols, 0);

  const std::size_t n = s.patch_rows * s.patch_cols;
  const double critical = ks_critical_value(n, s.alpha, s.critical);
  std::vector<std::pair<std::size_t, std::size_t>> origins;
  for (std::size_t r = 0; r + s.patch_rows <= envelope.rows; r += s.stride_rows) {
    for (std::size_t c = 0; c + s.patch_cols <= envelope.cols; c += s.stride_cols) {
      origins.emplace_back(r, c);
    }
  }
  std::vector<std::uint8_t> accepted(origins.size(), 0);
  const auto count = static_cast<long long>(origins.size());
#pragma omp parallel
  {
    std::vector<double> patch(n);
#pragma omp for schedule(static)
    for (long long p = 0; p < count; ++p) {
      const auto [r0, c0] = origins[static_cast<std::size_t>(p)];
      std::size_t k = 0;
      for (std::size_t r = r0; r < r0 + s.patch_rows; ++r) {
        for (std::size_t c = c0; c < c0 + s.patch_cols; ++c) patch[k++] = envelope.at(r, c);
      }
      const auto d = rayleigh_ks_statistic(patch);
      accepted[static_cast<std::size_t>(p)] = d && *d < critical ? 1 : 0;
    }
  }
  map.patches_tested = origins.size();
  for (std::size_t p = 0; p < origins.size(); ++p) {
    if (!accepted[p]) continue;
    ++map.patches_accepted;
    const auto [r0, c0] = origins[p];
    for (std::size_t r = r0; r < r0 + s.patch_rows; ++r) {
      std::fill_n(map.speckle.begin() + static_cast<long long>(r * map.cols + c0), s.patch_cols, 1);
    }
  }
  return map;
}

double speckle_similarity(const SpeckleMap& candidate, const SpeckleMap& reference) {
  if (candidate.rows != reference.rows || candidate.cols != reference.cols) {
    throw ConfigError("speckle_similarity: map dimensions differ");
  }
  std::size_t ref = 0;
  std::size_t both = 0;
  for (std::size_t i = 0; i < reference.speckle.size(); ++i) {
    if (!reference.speckle[i]) continue;
    ++ref;
    if (candidate.speckle[i]) ++both;
  }
  if (ref == 0) throw NumericalError("speckle_similarity: reference has no speckle region");
  return 100.0 * static_cast<double>(both) / static_cast<double>(ref);
}

TargetResolution measure_target(const BModeImage& image, const ImagingGrid& grid,
                                const PointAnnotation& target, double search_radius) {
  TargetResolution res;
  res.target = target;
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      const Pixel p = grid.pixel(r, c);
      if (std::hypot(p.x - target.x, p.z - target.z) > search_radius) continue;
      const std::size_t i = r * grid.cols() + c;
      if (!best || image.db.values[i] > image.db.values[*best]) best = i;
    }
  }
  if (!best) return res;
  const std::size_t pr = *best / grid.cols();
  const std::size_t pc = *best % grid.cols();

  // Profiles are restricted to a window around the target so neighbouring reflectors at
  // the same depth or lateral position do not interfere.
  const double window = 2.5 * search_radius;
  std::vector<ProfileSample> lateral;
  for (std::size_t c = 0; c < grid.cols(); ++c) {
    if (std::abs(grid.lateral[c] - grid.lateral[pc]) > window) continue;
    lateral.push_back({grid.lateral[c] * kMm, image.db.at(pr, c)});
  }
  std::vector<ProfileSample> axial;
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    if (std::abs(grid.axial[r] - grid.axial[pr]) > window) continue;
    axial.push_back({grid.axial[r] * kMm, image.db.at(r, pc)});
  }
  try {
    res.lateral_fwhm_mm = fwhm(lateral);
    res.axial_fwhm_mm = fwhm(axial);
    res.resolved = true;
  } catch (const NumericalError&) {
    res.resolved = false;
  }
  return res;
}

MetricsReport evaluate(const BModeImage& image, const ImagingGrid& grid,
                       const Annotations& annotations, RegionRule rule) {
  MetricsReport report;
  double ax = 0.0;
  double lat = 0.0;
  std::size_t resolved = 0;
  for (const auto& t : annotations.points) {
    auto r = measure_target(image, grid, t);
    if (r.resolved) {
      ax += r.axial_fwhm_mm;
      lat += r.lateral_fwhm_mm;
      ++resolved;
    }
    report.targets.push_back(r);
  }
  if (resolved > 0) {
    report.axial_fwhm_mm = ax / static_cast<double>(resolved);
    report.lateral_fwhm_mm = lat / static_cast<double>(resolved);
  }
  double total = 0.0;
  for (const auto& c : annotations.cysts) {
    const auto regions = cyst_regions(grid, c, annotations.cysts, rule);
    regions.validate();
    report.cysts.push_back({c, cnr(image, regions)});
    total += report.cysts.back().result.cnr;
  }
  if (!report.cysts.empty()) report.cnr = total / static_cast<double>(report.cysts.size());
  return report;
}

std::string MetricsReport::to_text() const {
  std::string out;
  append(out, "method", method.empty() ? std::string("unknown") : method);
  append(out, "target_count", std::to_string(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    const std::string p = "target." + std::to_string(i) + ".";
    append(out, p + "x_mm", t.target.x * kMm);
    append(out, p + "z_mm", t.target.z * kMm);
    append(out, p + "resolved", std::string(t.resolved ? "true" : "false"));
    if (t.resolved) {
      append(out, p + "axial_fwhm_mm", t.axial_fwhm_mm);
      append(out, p + "lateral_fwhm_mm", t.lateral_fwhm_mm);
    }
  }
  append(out, "cyst_count", std::to_string(cysts.size()));
  for (std::size_t i = 0; i < cysts.size(); ++i) {
    const auto& c = cysts[i];
    const std::string p = "cyst." + std::to_string(i) + ".";
    append(out, p + "x_mm", c.cyst.x * kMm);
    append(out, p + "z_mm", c.cyst.z * kMm);
    append(out, p + "radius_mm", c.cyst.radius * kMm);
    append(out, p + "cnr_db", c.result.cnr);
    append(out, p + "cyst_mean_db", c.result.cyst_mean_db);
    append(out, p + "background_mean_db", c.result.background_mean_db);
    append(out, p + "background_std_db", c.result.background_std_db);
    append(out, p + "cyst_clipped", std::string(c.result.cyst_clipped ? "true" : "false"));
  }
  if (axial_fwhm_mm) append(out, "axial_fwhm_mm", *axial_fwhm_mm);
  if (lateral_fwhm_mm) append(out, "lateral_fwhm_mm", *lateral_fwhm_mm);
  if (cnr) append(out, "cnr_db", *cnr);
  if (speckle_similarity) append(out, "speckle_similarity_percent", *speckle_similarity);
  return out;
}

}  // namespace pwbf
