// pwbf: plane-wave beamforming command-line driver.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical error.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pwbf/compounding.hpp"
#include "pwbf/dataset_io.hpp"
#include "pwbf/errors.hpp"
#include "pwbf/metrics.hpp"
#include "pwbf/pipeline.hpp"
#include "pwbf/simulator.hpp"

namespace {

using namespace pwbf;

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("PWBF_LOG_LEVEL");
  if (!env) return LogLevel::kInfo;
  const std::string v(env);
  if (v == "quiet" || v == "error" || v == "0") return LogLevel::kQuiet;
  if (v == "debug" || v == "2") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::cerr << "pwbf: " << msg << '\n';
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& text, char sep, std::size_t expected,
                                  const std::string& what) {
  std::vector<double> values;
  for (const auto& f : split(text, sep)) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(f, &used));
      if (used != f.size()) throw std::invalid_argument(f);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse " + what + " '" + text + "'");
    }
  }
  if (values.size() != expected) throw ConfigError("malformed " + what + " '" + text + "'");
  return values;
}

std::vector<CystAnnotation> parse_cysts(const std::string& text) {
  std::vector<CystAnnotation> cysts;
  for (const auto& item : split(text, ';')) {
    const auto v = parse_numbers(item, ':', 3, "cyst (x:z:r in mm)");
    cysts.push_back({v[0] * 1e-3, v[1] * 1e-3, v[2] * 1e-3});
  }
  return cysts;
}

std::vector<PointAnnotation> parse_points(const std::string& text) {
  std::vector<PointAnnotation> points;
  for (const auto& item : split(text, ';')) {
    const auto v = parse_numbers(item, ':', 2, "point (x:z in mm)");
    points.push_back({v[0] * 1e-3, v[1] * 1e-3});
  }
  return points;
}

Region parse_region(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw ConfigError("region must be x0:x1,z0:z1 (mm)");
  const auto x = parse_numbers(parts[0], ':', 2, "region");
  const auto z = parse_numbers(parts[1], ':', 2, "region");
  return {x[0] * 1e-3, x[1] * 1e-3, z[0] * 1e-3, z[1] * 1e-3};
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_numbers(text, ',', split(text, ',').size(), "count list")) {
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw ConfigError("angle counts must be positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f << text;
}

// Options shared by every subcommand that runs the beamformer.
struct BeamformOptions {
  std::string method = "das";
  int iterations = 2;
  double alpha = 0.0;
  std::size_t subarray = 0;
  double loading = -1.0;
  std::size_t angles = 0;
  double f_number = 1.75;
  double dynamic_range = 60.0;
  std::string grid = "-8:8:200,10:26:200";
  std::string combination = "per-angle";

  void attach(CLI::App* app) {
    app->add_option("--method", method, "das, imap, cf, wiener, scw or mv")->capture_default_str();
    app->add_option("--iterations", iterations, "iMAP iterations")->capture_default_str();
    app->add_option("--alpha", alpha, "ScW noise scaling (0 = sqrt(M))")->capture_default_str();
    app->add_option("--subarray", subarray, "Wiener/MV subarray length (0 = M/2)")
        ->capture_default_str();
    app->add_option("--loading", loading, "MV diagonal loading factor (<0 = 1/(100 L))")
        ->capture_default_str();
    app->add_option("--angles", angles, "number of plane waves (0 = all recorded)")
        ->capture_default_str();
    app->add_option("--f-number", f_number, "receive f-number")->capture_default_str();
    app->add_option("--dynamic-range", dynamic_range, "display dynamic range [dB]")
        ->capture_default_str();
    app->add_option("--grid", grid, "x0:x1:nx,z0:z1:nz in mm")->capture_default_str();
    app->add_option("--combination", combination,
                    "per-angle, stacked or element-compounded")
        ->capture_default_str();
  }

  RunConfig run_config() const {
    RunConfig cfg;
    cfg.method.method = parse_method(method);
    cfg.method.iterations = iterations;
    cfg.method.alpha = alpha;
    cfg.method.subarray = subarray;
    cfg.method.loading = loading;
    cfg.angle_count = angles;
    cfg.f_number = f_number;
    cfg.dynamic_range = dynamic_range;
    cfg.grid = GridSpec::parse(grid);
    cfg.combination = parse_combination(combination);
    cfg.validate();
    return cfg;
  }
};

struct SimulateOptions {
  std::string phantom = "cyst";
  std::size_t elements = 64;
  double center_frequency = 5.2e6;
  double sampling_frequency = 20.8e6;
  double sound_speed = 1540.0;
  double pitch = 0.0;  // 0 = one wavelength
  std::size_t angles = 75;
  double bandwidth = 0.67;
  double noise = 0.0;
  std::uint64_t seed = 1;
  double density = 60.0;  // scatterers per mm^2
  std::string region = "-11:11,7:29";
  std::string cysts = "-4.5:18:2.5;4.5:18:2.5";
  std::string points = "0:14;0:18;0:22;-4:18;4:18";
  std::string out;
};

int run_simulate(const SimulateOptions& o) {
  const double pitch = o.pitch > 0.0 ? o.pitch : o.sound_speed / o.center_frequency;
  auto probe =
      ProbeGeometry::linear(o.elements, pitch, o.center_frequency, o.sampling_frequency,
                            o.sound_speed);
  Phantom phantom;
  if (o.phantom == "cyst") {
    phantom = make_cyst_phantom(parse_region(o.region), parse_cysts(o.cysts), o.density * 1e6,
                                1.0, o.seed);
  } else if (o.phantom == "speckle") {
    phantom = make_cyst_phantom(parse_region(o.region), {}, o.density * 1e6, 1.0, o.seed);
  } else if (o.phantom == "points") {
    phantom = make_point_phantom(parse_points(o.points));
  } else {
    throw ConfigError("unknown phantom '" + o.phantom + "' (expected cyst, speckle or points)");
  }
  AcquisitionSpec spec;
  spec.probe = probe;
  spec.angles = select_angles(o.angles);
  spec.fractional_bandwidth = o.bandwidth;
  spec.channel_noise_std = o.noise;
  spec.rng_seed = o.seed;
  spec.trace_length = required_trace_length(phantom, probe, spec.angles, o.bandwidth);
  log_info("simulating " + std::to_string(phantom.scatterers.size()) + " scatterers, " +
           std::to_string(spec.angles.size()) + " angles, " +
           std::to_string(spec.trace_length) + " samples");
  const auto result = simulate_channels(phantom, spec);
  if (result.truncated_contributions > 0) {
    log_info("warning: " + std::to_string(result.truncated_contributions) +
             " echoes truncated by the trace window");
  }
  write_dataset(o.out, result.data);
  return 0;
}

struct BeamformExtras {
  std::string in;
  std::string out;
  std::string image;
  std::string report;
  std::string per_angle_dir;
};

int run_beamform(const BeamformOptions& bo, const BeamformExtras& x) {
  auto cfg = bo.run_config();
  cfg.keep_angle_grids = !x.per_angle_dir.empty();
  const auto data = read_dataset(x.in);
  const auto result = run_pipeline(data, cfg);
  write_grid(x.out, {result.grid, result.geometry, data.annotations});
  if (!x.per_angle_dir.empty()) {
    std::filesystem::create_directories(x.per_angle_dir);
    for (std::size_t i = 0; i < result.angle_grids.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "angle_%03zu.grid", result.angle_indices[i]);
      write_grid(std::filesystem::path(x.per_angle_dir) / name,
                 {result.angle_grids[i], result.geometry, data.annotations});
    }
  }
  if (!x.image.empty()) render(result.image, x.image);
  if (!x.report.empty()) {
    if (!result.metrics) throw ConfigError("dataset carries no annotations for a report");
    write_text(x.report, result.metrics->to_text());
  }
  return 0;
}

int run_compound(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<BeamformedGrid> grids;
  std::optional<GridFile> first;
  for (const auto& path : inputs) {
    auto f = read_grid(path);
    if (!first) {
      first = f;
    } else if (!(f.geometry == first->geometry)) {
      throw ConfigError("compound: " + path + " uses a different pixel grid");
    }
    grids.push_back(std::move(f.grid));
  }
  if (!first) throw ConfigError("compound: no inputs");
  write_grid(out, {coherent_compound(grids), first->geometry, first->annotations});
  return 0;
}

int run_metrics(const std::string& in, const std::string& reference, double dynamic_range,
                const std::string& out) {
  const auto file = read_grid(in);
  const auto image = to_bmode(file.grid, dynamic_range);
  auto report = evaluate(image, file.geometry, file.annotations);
  report.method = file.grid.method;
  if (!reference.empty()) {
    const auto ref = read_grid(reference);
    const auto cand_map = rayleigh_ks_map(envelope(file.grid.values, file.grid.rows, file.grid.cols));
    const auto ref_map = rayleigh_ks_map(envelope(ref.grid.values, ref.grid.rows, ref.grid.cols));
    report.speckle_similarity = speckle_similarity(cand_map, ref_map);
  }
  write_text(out, report.to_text());
  return 0;
}

int run_render(const std::string& in, double dynamic_range, const std::string& out) {
  const auto file = read_grid(in);
  render(to_bmode(file.grid, dynamic_range), out);
  return 0;
}

int run_sweep(const BeamformOptions& bo, const std::string& in, const std::string& methods,
              const std::string& counts, const std::string& out) {
  const auto base = bo.run_config();
  std::vector<MethodConfig> list;
  for (const auto& name : split(methods, ',')) {
    MethodConfig m = base.method;
    // "imap1" / "imap2" select the iteration count inline.
    if (name.rfind("imap", 0) == 0 && name.size() > 4) {
      m.method = Method::kImap;
      m.iterations = std::stoi(name.substr(4));
    } else {
      m.method = parse_method(name);
    }
    list.push_back(m);
  }
  const auto data = read_dataset(in);
  const auto points = sweep_cnr(data, base, list, parse_counts(counts));
  std::string text = "method angles cnr_db\n";
  for (const auto& p : points) {
    char line[96];
    std::snprintf(line, sizeof line, "%s %zu %.6f\n", p.method.c_str(), p.angle_count, p.cnr);
    text += line;
  }
  write_text(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plane-wave ultrasound beamforming (DAS, iMAP, CF, Wiener, ScW, MV)"};
  app.set_config("--config", "", "read options from a TOML/INI file");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = PWBF_THREADS or OpenMP default)");

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "simulate plane-wave channel data");
  sim->add_option("--phantom", so.phantom, "cyst, speckle or points")->capture_default_str();
  sim->add_option("--elements", so.elements)->capture_default_str();
  sim->add_option("--pitch", so.pitch, "element pitch [m] (0 = one wavelength)");
  sim->add_option("--center-frequency", so.center_frequency)->capture_default_str();
  sim->add_option("--sampling-frequency", so.sampling_frequency)->capture_default_str();
  sim->add_option("--sound-speed", so.sound_speed)->capture_default_str();
  sim->add_option("--angles", so.angles, "plane waves spread over +/-16 deg")->capture_default_str();
  sim->add_option("--bandwidth", so.bandwidth, "fractional -6 dB bandwidth")->capture_default_str();
  sim->add_option("--noise", so.noise, "channel noise standard deviation")->capture_default_str();
  sim->add_option("--seed", so.seed)->capture_default_str();
  sim->add_option("--density", so.density, "scatterers per mm^2")->capture_default_str();
  sim->add_option("--region", so.region, "speckle region x0:x1,z0:z1 (mm)")->capture_default_str();
  sim->add_option("--cysts", so.cysts, "x:z:r;... (mm)")->capture_default_str();
  sim->add_option("--points", so.points, "x:z;... (mm)")->capture_default_str();
  sim->add_option("--out", so.out, "output dataset")->required();

  BeamformOptions bo;
  BeamformExtras bx;
  auto* bf = app.add_subcommand("beamform", "beamform a dataset into a grid file");
  bo.attach(bf);
  bf->add_option("--in", bx.in, "input dataset")->required();
  bf->add_option("--out", bx.out, "output grid file")->required();
  bf->add_option("--image", bx.image, "also write a PGM image");
  bf->add_option("--report", bx.report, "also write a metrics report");
  bf->add_option("--per-angle-dir", bx.per_angle_dir, "write per-angle grids here");

  std::vector<std::string> compound_in;
  std::string compound_out;
  auto* cp = app.add_subcommand("compound", "coherently compound grid files");
  cp->add_option("inputs", compound_in, "grid files")->required();
  cp->add_option("--out", compound_out)->required();

  std::string metrics_in, metrics_ref, metrics_out = "-";
  double metrics_dr = 60.0;
  auto* mt = app.add_subcommand("metrics", "FWHM, CNR and speckle similarity of a grid file");
  mt->add_option("--in", metrics_in)->required();
  mt->add_option("--reference", metrics_ref, "reference grid for speckle similarity");
  mt->add_option("--dynamic-range", metrics_dr)->capture_default_str();
  mt->add_option("--out", metrics_out, "report path (- = stdout)")->capture_default_str();

  std::string render_in, render_out;
  double render_dr = 60.0;
  auto* rd = app.add_subcommand("render", "write a grid file as an 8-bit PGM image");
  rd->add_option("--in", render_in)->required();
  rd->add_option("--dynamic-range", render_dr)->capture_default_str();
  rd->add_option("--out", render_out)->required();

  BeamformOptions so_sweep;
  std::string sweep_in, sweep_methods = "das,imap1,imap2", sweep_counts = "1,3,13,31,75",
                        sweep_out = "-";
  auto* sw = app.add_subcommand("sweep", "CNR as a function of the number of plane waves");
  so_sweep.attach(sw);
  sw->add_option("--in", sweep_in)->required();
  sw->add_option("--methods", sweep_methods)->capture_default_str();
  sw->add_option("--counts", sweep_counts)->capture_default_str();
  sw->add_option("--out", sweep_out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (threads <= 0) {
    if (const char* env = std::getenv("PWBF_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*sim) return run_simulate(so);
    if (*bf) return run_beamform(bo, bx);
    if (*cp) return run_compound(compound_in, compound_out);
    if (*mt) return run_metrics(metrics_in, metrics_ref, metrics_dr, metrics_out);
    if (*rd) return run_render(render_in, render_dr, render_out);
    if (*sw) return run_sweep(so_sweep, sweep_in, sweep_methods, sweep_counts, sweep_out);
  } catch (const ConfigError& e) {
    std::cerr << "pwbf: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "pwbf: data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "pwbf: numerical error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
