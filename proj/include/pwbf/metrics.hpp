#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pwbf/dataset.hpp"
#include "pwbf/dsp.hpp"
#include "pwbf/geometry.hpp"

namespace pwbf {

struct ProfileSample {
  double position_mm = 0.0;
  double value_db = 0.0;
};

/// Width [mm] of the interval around the global maximum where the profile stays above
/// max - 6 dB, with linear interpolation at both crossings. Throws NumericalError when
/// either side never crosses ("unresolved target").
double fwhm(const std::vector<ProfileSample>& profile);

/// Flat pixel-index sets of a cyst and of its surrounding background.
struct CnrRegions {
  std::vector<std::size_t> cyst;
  std::vector<std::size_t> background;

  /// Throws ConfigError unless both are disjoint and hold at least `min_pixels`.
  void validate(std::size_t min_pixels = 30) const;
};

/// Region geometry relative to a cyst of radius r: the cyst region is the disk of radius
/// inner * r, the background the annulus between outer_min * r and outer_max * r minus any
/// pixel within outer_min * r of another cyst.
struct RegionRule {
  double inner = 0.8;
  double outer_min = 1.2;
  double outer_max = 1.8;
};

CnrRegions cyst_regions(const ImagingGrid& grid, const CystAnnotation& cyst,
                        const std::vector<CystAnnotation>& all_cysts, RegionRule rule = {});

struct CnrResult {
  double cnr = 0.0;
  double cyst_mean_db = 0.0;
  double background_mean_db = 0.0;
  double background_std_db = 0.0;
  bool cyst_clipped = false;  // more than 10% of cyst pixels sit at -dynamic_range
  bool background_clipped = false;
};

/// |mu_c - mu_b| / sigma_b over log-compressed values (population statistics).
CnrResult cnr(const BModeImage& image, const CnrRegions& regions);

enum class KsCritical {
  kAsymptotic,  // c(alpha) / sqrt(n) as for a fully specified distribution
  kScaleFitted  // Monte Carlo null distribution with the Rayleigh scale fitted per patch
};

struct KsSettings {
  std::size_t patch_rows = 20;  // axial
  std::size_t patch_cols = 15;  // lateral
  std::size_t stride_rows = 10;
  std::size_t stride_cols = 7;
  double alpha = 0.05;
  KsCritical critical = KsCritical::kScaleFitted;
};

struct SpeckleMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> speckle;
  KsSettings settings;
  std::size_t patches_tested = 0;
  std::size_t patches_accepted = 0;

  std::size_t count() const;
};

/// One-sample K-S statistic of `samples` against a Rayleigh CDF whose scale is the
/// maximum-likelihood fit sigma^2 = mean(a^2) / 2. Returns nullopt for zero-variance data.
std::optional<double> rayleigh_ks_statistic(std::vector<double> samples);

/// Critical value of the K-S statistic for n samples at level alpha.
double ks_critical_value(std::size_t n, double alpha, KsCritical mode);

/// Patches of the envelope that pass the Rayleigh K-S test mark their pixels as speckle.
SpeckleMap rayleigh_ks_map(const RealGrid& envelope, const KsSettings& settings = {});

/// 100 |candidate and reference| / |reference|. Throws for an empty reference or mismatched
/// dimensions.
double speckle_similarity(const SpeckleMap& candidate, const SpeckleMap& reference);

struct TargetResolution {
  PointAnnotation target;
  double axial_fwhm_mm = 0.0;
  double lateral_fwhm_mm = 0.0;
  bool resolved = false;
};

/// Measures the axial and lateral -6 dB widths through the brightest pixel within
/// `search_radius` of the annotated target.
TargetResolution measure_target(const BModeImage& image, const ImagingGrid& grid,
                                const PointAnnotation& target, double search_radius = 1e-3);

struct CystContrast {
  CystAnnotation cyst;
  CnrResult result;
};

struct MetricsReport {
  std::vector<TargetResolution> targets;
  std::vector<CystContrast> cysts;
  std::optional<double> axial_fwhm_mm;    // mean over resolved targets
  std::optional<double> lateral_fwhm_mm;  // mean over resolved targets
  std::optional<double> cnr;              // mean over cysts
  std::optional<double> speckle_similarity;
  std::string method;

  /// Stable key = value text.
  std::string to_text() const;
};

MetricsReport evaluate(const BModeImage& image, const ImagingGrid& grid,
                       const Annotations& annotations, RegionRule rule = {});

}  // namespace pwbf
