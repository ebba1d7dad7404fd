#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pwbf/dataset.hpp"
#include "pwbf/dsp.hpp"
#include "pwbf/engine.hpp"
#include "pwbf/grid.hpp"
#include "pwbf/metrics.hpp"

namespace pwbf {

/// Lateral and axial extent in metres with pixel counts.
struct GridSpec {
  double x_min = -8e-3;
  double x_max = 8e-3;
  std::size_t nx = 200;
  double z_min = 10e-3;
  double z_max = 26e-3;
  std::size_t nz = 200;

  ImagingGrid build() const;
  /// Parses "x0:x1:nx,z0:z1:nz" with positions in millimetres.
  static GridSpec parse(const std::string& text);
  std::string to_string() const;
};

/// How multi-transmit data reaches the estimators.
enum class AngleCombination {
  kPerAngle,           // estimate per transmit, then coherent compounding of the outputs
  kStacked,            // one aperture of length M x angles per pixel
  kElementCompounded,  // average each element over transmits, then estimate over elements
};

std::string_view combination_name(AngleCombination c);
AngleCombination parse_combination(std::string_view name);

struct RunConfig {
  MethodConfig method;
  std::size_t angle_count = 0;  // 0 = every recorded transmit, otherwise select_angles(n)
  double f_number = 1.75;
  GridSpec grid;
  double dynamic_range = 60.0;
  AngleCombination combination = AngleCombination::kPerAngle;
  bool keep_angle_grids = false;

  void validate() const;
};

struct PipelineResult {
  BeamformedGrid grid;  // compounded
  ImagingGrid geometry;
  BModeImage image;
  std::optional<MetricsReport> metrics;  // when the dataset carries annotations
  std::vector<BeamformedGrid> angle_grids;
  std::vector<std::size_t> angle_indices;  // transmits used, as indices into the dataset
};

/// Transmit indices selected by a run configuration.
std::vector<std::size_t> resolve_angles(const ChannelDataSet& data, std::size_t angle_count);

/// Envelope and log compression of a beamformed grid.
BModeImage to_bmode(const BeamformedGrid& grid, double dynamic_range);

PipelineResult run_pipeline(const ChannelDataSet& data, const RunConfig& config);

/// 8-bit binary PGM with [-dynamic_range, 0] dB mapped linearly to [0, 255] and rounded half
/// away from zero.
std::string encode_pgm(const BModeImage& image);
void render(const BModeImage& image, const std::filesystem::path& path);

/// Gray level of one dB value under the render mapping.
int gray_level(double value_db, double dynamic_range);

struct SweepPoint {
  std::string method;
  std::size_t angle_count = 0;
  double cnr = 0.0;
};

/// Mean cyst CNR for every (method, angle count) pair.
std::vector<SweepPoint> sweep_cnr(const ChannelDataSet& data, const RunConfig& base,
                                  const std::vector<MethodConfig>& methods,
                                  const std::vector<std::size_t>& angle_counts);

}  // namespace pwbf
