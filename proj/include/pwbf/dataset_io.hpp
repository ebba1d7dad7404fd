#pragma once

// Container formats. Both files share one layout:
//
//   bytes 0..7    magic ("PWBFCHAN" for channel data, "PWBFGRID" for beamformed grids)
//   bytes 8..11   format version, uint32 little-endian
//   bytes 12..19  header length N, uint64 little-endian
//   next N bytes  UTF-8 JSON metadata
//   remainder     raw little-endian payload, exactly header["payload_bytes"] long
//
// Channel payload: float32 samples in [angle][element][sample] order.
// Grid payload: float64 (re, im) pairs per pixel in row-major order, then one uint8
// validity flag per pixel.

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "pwbf/dataset.hpp"
#include "pwbf/geometry.hpp"
#include "pwbf/grid.hpp"

namespace pwbf {

inline constexpr std::string_view kChannelMagic = "PWBFCHAN";
inline constexpr std::string_view kGridMagic = "PWBFGRID";
inline constexpr std::uint32_t kFormatVersion = 1;

void write_dataset(const std::filesystem::path& path, const ChannelDataSet& data);
ChannelDataSet read_dataset(const std::filesystem::path& path);

/// Beamformed grid together with the pixel geometry it was computed on.
struct GridFile {
  BeamformedGrid grid;
  ImagingGrid geometry;
  Annotations annotations;
};

void write_grid(const std::filesystem::path& path, const GridFile& file);
GridFile read_grid(const std::filesystem::path& path);

}  // namespace pwbf
