#include "pwbf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pwbf/compounding.hpp"
#include "pwbf/errors.hpp"

namespace pwbf {

std::string_view combination_name(AngleCombination c) {
  switch (c) {
    case AngleCombination::kPerAngle: return "per-angle";
    case AngleCombination::kStacked: return "stacked";
    case AngleCombination::kElementCompounded: return "element-compounded";
  }
  return "unknown";
}

AngleCombination parse_combination(std::string_view name) {
  for (auto c : {AngleCombination::kPerAngle, AngleCombination::kStacked,
                 AngleCombination::kElementCompounded}) {
    if (name == combination_name(c)) return c;
  }
  throw ConfigError("unknown angle combination '" + std::string(name) +
                    "' (expected per-angle, stacked or element-compounded)");
}

ImagingGrid GridSpec::build() const {
  return ImagingGrid::uniform(x_min, x_max, nx, z_min, z_max, nz);
}

GridSpec GridSpec::parse(const std::string& text) {
  GridSpec g;
  double x0, x1, z0, z1;
  std::size_t nx, nz;
  char tail;
  if (std::sscanf(text.c_str(), "%lf:%lf:%zu,%lf:%lf:%zu%c", &x0, &x1, &nx, &z0, &z1, &nz,
                  &tail) != 6) {
    throw ConfigError("grid spec '" + text + "' is not of the form x0:x1:nx,z0:z1:nz (mm)");
  }
  g.x_min = x0 * 1e-3;
  g.x_max = x1 * 1e-3;
  g.nx = nx;
  g.z_min = z0 * 1e-3;
  g.z_max = z1 * 1e-3;
  g.nz = nz;
  g.build();  // validates
  return g;
}

std::string GridSpec::to_string() const {
  std::ostringstream s;
  s << x_min * 1e3 << ':' << x_max * 1e3 << ':' << nx << ',' << z_min * 1e3 << ':' << z_max * 1e3
    << ':' << nz;
  return s.str();
}

void RunConfig::validate() const {
  method.validate();
  if (!(f_number > 0.0)) throw ConfigError("f-number must be positive");
  if (!(dynamic_range > 0.0)) throw ConfigError("dynamic range must be positive");
  grid.build();
}

std::vector<std::size_t> resolve_angles(const ChannelDataSet& data, std::size_t angle_count) {
  if (angle_count == 0 || angle_count == data.angle_count()) {
    std::vector<std::size_t> all(data.angle_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  if (angle_count > data.angle_count()) {
    throw ConfigError("requested " + std::to_string(angle_count) + " angles but dataset has " +
                      std::to_string(data.angle_count()));
  }
  return match_angles(data.angles, select_angles(angle_count));
}

BModeImage to_bmode(const BeamformedGrid& grid, double dynamic_range) {
  return log_compress(envelope(grid.values, grid.rows, grid.cols), dynamic_range);
}

PipelineResult run_pipeline(const ChannelDataSet& data, const RunConfig& config) {
  config.validate();
  data.validate();
  PipelineResult result;
  result.geometry = config.grid.build();
  result.angle_indices = resolve_angles(data, config.angle_count);
  const FocusSettings focus{config.f_number};

  if (config.combination != AngleCombination::kPerAngle) {
    std::vector<AnalyticFrame> frames;
    std::vector<double> angles;
    for (auto a : result.angle_indices) {
      frames.push_back(make_analytic_frame(data, a));
      angles.push_back(data.angles[a]);
    }
    result.grid = config.combination == AngleCombination::kStacked
                      ? beamform_stacked(frames, angles, data.probe, result.geometry, focus,
                                         config.method)
                      : beamform_element_compounded(frames, angles, data.probe, result.geometry,
                                                    focus, config.method);
  } else {
    CompoundAccumulator acc;
    for (auto a : result.angle_indices) {
      const auto frame = make_analytic_frame(data, a);
      auto g = beamform_frame(frame, data.probe, data.angles[a], result.geometry, focus,
                              config.method);
      acc.add(g);
      if (config.keep_angle_grids) result.angle_grids.push_back(std::move(g));
    }
    result.grid = acc.result();
  }
  result.image = to_bmode(result.grid, config.dynamic_range);
  if (!data.annotations.empty()) {
    result.metrics = evaluate(result.image, result.geometry, data.annotations);
    result.metrics->method = result.grid.method;
  }
  return result;
}

int gray_level(double value_db, double dynamic_range) {
  const double clipped = std::clamp(value_db, -dynamic_range, 0.0);
  return static_cast<int>(std::round(255.0 * (clipped + dynamic_range) / dynamic_range));
}

std::string encode_pgm(const BModeImage& image) {
  std::string out = "P5\n" + std::to_string(image.db.cols) + " " + std::to_string(image.db.rows) +
                    "\n255\n";
  out.reserve(out.size() + image.db.values.size());
  for (double v : image.db.values) {
    out.push_back(static_cast<char>(static_cast<unsigned char>(gray_level(v, image.dynamic_range))));
  }
  return out;
}

void render(const BModeImage& image, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write image " + path.string());
  const auto bytes = encode_pgm(image);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed for " + path.string());
}

std::vector<SweepPoint> sweep_cnr(const ChannelDataSet& data, const RunConfig& base,
                                  const std::vector<MethodConfig>& methods,
                                  const std::vector<std::size_t>& angle_counts) {
  if (data.annotations.cysts.empty()) throw ConfigError("sweep: dataset has no cyst annotations");
  std::vector<SweepPoint> points;
  for (const auto& m : methods) {
    for (auto n : angle_counts) {
      RunConfig cfg = base;
      cfg.method = m;
      cfg.angle_count = n;
      const auto r = run_pipeline(data, cfg);
      points.push_back({m.tag(), n, *r.metrics->cnr});
    }
  }
  return points;
}

}  // namespace pwbf
