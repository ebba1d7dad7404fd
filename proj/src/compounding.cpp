#include "pwbf/compounding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pwbf/errors.hpp"

namespace pwbf {

void CompoundAccumulator::add(const BeamformedGrid& grid) {
  if (count_ == 0) {
    sum_ = BeamformedGrid(grid.rows, grid.cols);
    sum_.method = grid.method;
    sum_.angle_tag = "compounded";
    hits_.assign(grid.size(), 0);
  } else if (grid.rows != sum_.rows || grid.cols != sum_.cols) {
    throw ConfigError("compound: grid dimensions differ");
  } else if (grid.method != sum_.method) {
    throw ConfigError("compound: grids come from different methods");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.valid[i]) continue;
    sum_.values[i] += grid.values[i];
    ++hits_[i];
  }
  sum_.fallback_pixels = std::max(sum_.fallback_pixels, grid.fallback_pixels);
  ++count_;
}

BeamformedGrid CompoundAccumulator::result() const {
  if (count_ == 0) throw ConfigError("compound: no grids");
  BeamformedGrid out = sum_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (hits_[i] == 0) {
      out.values[i] = 0.0;
      out.valid[i] = 0;
    } else {
      out.values[i] /= static_cast<double>(hits_[i]);
      out.valid[i] = 1;
    }
  }
  return out;
}

BeamformedGrid coherent_compound(const std::vector<BeamformedGrid>& grids) {
  CompoundAccumulator acc;
  for (const auto& g : grids) acc.add(g);
  return acc.result();
}

std::vector<double> select_angles(std::size_t n, double half_span_deg) {
  if (n < 1) throw ConfigError("select_angles: need at least one angle");
  if (n == 1) return {0.0};
  std::vector<double> angles(n);
  const double step = 2.0 * half_span_deg / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double deg = -half_span_deg + step * static_cast<double>(i);
    angles[i] = deg * std::numbers::pi / 180.0;
  }
  return angles;
}

std::vector<std::size_t> match_angles(const std::vector<double>& available,
                                      const std::vector<double>& wanted) {
  if (available.empty()) throw ConfigError("match_angles: dataset has no angles");
  if (wanted.size() > available.size()) {
    throw ConfigError("match_angles: more angles requested than recorded");
  }
  std::vector<std::size_t> idx;
  std::vector<bool> used(available.size(), false);
  for (double w : wanted) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < available.size(); ++i) {
      if (std::abs(available[i] - w) < std::abs(available[best] - w)) best = i;
    }
    if (used[best]) throw ConfigError("match_angles: requested angles collapse onto one transmit");
    used[best] = true;
    idx.push_back(best);
  }
  return idx;
}

}  // namespace pwbf
