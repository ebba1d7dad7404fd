#include "pwbf/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <vector>

#include "pwbf/errors.hpp"

namespace pwbf {
namespace {

using nlohmann::json;
using Kind = DataError::Kind;

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed for " + path.string());
}

std::string frame(std::string_view magic, const json& header, const std::string& payload) {
  std::string out(magic);
  const std::string text = header.dump(1);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  out += payload;
  return out;
}

struct Parsed {
  json header;
  std::string_view payload;
};

Parsed unframe(const std::string& bytes, std::string_view magic, const std::string& name) {
  constexpr std::size_t kPrefix = 8 + 4 + 8;
  if (bytes.size() < 8 || std::string_view(bytes.data(), 8) != magic) {
    throw DataError(name + ": not a " + std::string(magic) + " file (bad magic)",
                    Kind::kNotADataset);
  }
  if (bytes.size() < kPrefix) throw DataError(name + ": truncated prefix", Kind::kTruncated);
  const auto version = get<std::uint32_t>(bytes, 8);
  if (version != kFormatVersion) {
    throw DataError(name + ": unsupported format version " + std::to_string(version),
                    Kind::kVersionMismatch);
  }
  const auto header_len = get<std::uint64_t>(bytes, 12);
  if (bytes.size() - kPrefix < header_len) {
    throw DataError(name + ": truncated header", Kind::kTruncated);
  }
  Parsed p;
  try {
    p.header = json::parse(bytes.begin() + kPrefix,
                           bytes.begin() + static_cast<long long>(kPrefix + header_len));
  } catch (const json::exception& e) {
    throw DataError(name + ": malformed header: " + e.what());
  }
  const std::size_t declared = p.header.value("payload_bytes", std::size_t{0});
  const std::size_t available = bytes.size() - kPrefix - header_len;
  if (available < declared) {
    throw DataError(name + ": truncated payload (" + std::to_string(available) + " of " +
                        std::to_string(declared) + " bytes)",
                    Kind::kTruncated);
  }
  if (available > declared) {
    throw DataError(name + ": trailing bytes after payload", Kind::kSizeMismatch);
  }
  p.payload = std::string_view(bytes).substr(kPrefix + header_len);
  return p;
}

json annotations_json(const Annotations& a) {
  json cysts = json::array();
  for (const auto& c : a.cysts) cysts.push_back({{"x", c.x}, {"z", c.z}, {"radius", c.radius}});
  json points = json::array();
  for (const auto& p : a.points) points.push_back({{"x", p.x}, {"z", p.z}});
  return {{"cysts", cysts}, {"points", points}};
}

Annotations annotations_from(const json& j) {
  Annotations a;
  if (j.is_null()) return a;
  for (const auto& c : j.value("cysts", json::array())) {
    a.cysts.push_back({c.at("x"), c.at("z"), c.at("radius")});
  }
  for (const auto& p : j.value("points", json::array())) a.points.push_back({p.at("x"), p.at("z")});
  return a;
}

json probe_json(const ProbeGeometry& p) {
  return {{"element_count", p.element_count},       {"pitch", p.pitch},
          {"element_x", p.element_x},               {"center_frequency", p.center_frequency},
          {"sampling_frequency", p.sampling_frequency}, {"sound_speed", p.sound_speed}};
}

ProbeGeometry probe_from(const json& j) {
  ProbeGeometry p;
  p.element_count = j.at("element_count");
  p.pitch = j.at("pitch");
  p.element_x = j.at("element_x").get<std::vector<double>>();
  p.center_frequency = j.at("center_frequency");
  p.sampling_frequency = j.at("sampling_frequency");
  p.sound_speed = j.at("sound_speed");
  return p;
}

}  // namespace

void ChannelDataSet::validate() const {
  try {
    probe.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("dataset: ") + e.what());
  }
  if (angles.empty()) throw DataError("dataset: no angles");
  if (traces.size() != angles.size() * probe.element_count * sample_count) {
    throw DataError("dataset: trace array does not match probe and angle list",
                    Kind::kSizeMismatch);
  }
  for (float v : traces) {
    if (!std::isfinite(v)) throw DataError("dataset: non-finite sample");
  }
}

void write_dataset(const std::filesystem::path& path, const ChannelDataSet& data) {
  data.validate();
  json header = {{"endianness", "little"},
                 {"sample_type", "float32"},
                 {"dimension_order", {"angle", "element", "sample"}},
                 {"probe", probe_json(data.probe)},
                 {"angles", data.angles},
                 {"angle_count", data.angles.size()},
                 {"element_count", data.probe.element_count},
                 {"sample_count", data.sample_count},
                 {"start_time", data.start_time},
                 {"provenance", data.provenance},
                 {"annotations", annotations_json(data.annotations)},
                 {"payload_bytes", data.traces.size() * sizeof(float)}};
  std::string payload(data.traces.size() * sizeof(float), '\0');
  std::memcpy(payload.data(), data.traces.data(), payload.size());
  dump(path, frame(kChannelMagic, header, payload));
}

ChannelDataSet read_dataset(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  const auto parsed = unframe(bytes, kChannelMagic, path.string());
  const auto& h = parsed.header;
  ChannelDataSet data;
  try {
    if (h.at("endianness") != "little" || h.at("sample_type") != "float32") {
      throw DataError(path.string() + ": unsupported sample encoding");
    }
    data.probe = probe_from(h.at("probe"));
    data.angles = h.at("angles").get<std::vector<double>>();
    data.sample_count = h.at("sample_count");
    data.start_time = h.at("start_time");
    data.provenance = h.value("provenance", "");
    data.annotations = annotations_from(h.value("annotations", json()));
    const std::size_t angle_count = h.at("angle_count");
    const std::size_t element_count = h.at("element_count");
    if (angle_count != data.angles.size() || element_count != data.probe.element_count) {
      throw DataError(path.string() + ": header dimensions disagree", Kind::kSizeMismatch);
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed header: " + e.what());
  }
  const std::size_t expected =
      data.angles.size() * data.probe.element_count * data.sample_count * sizeof(float);
  if (parsed.payload.size() != expected) {
    throw DataError(path.string() + ": payload holds " + std::to_string(parsed.payload.size()) +
                        " bytes but metadata implies " + std::to_string(expected),
                    Kind::kSizeMismatch);
  }
  data.traces.resize(expected / sizeof(float));
  std::memcpy(data.traces.data(), parsed.payload.data(), expected);
  data.validate();
  return data;
}

void write_grid(const std::filesystem::path& path, const GridFile& file) {
  const auto& g = file.grid;
  if (file.geometry.rows() != g.rows || file.geometry.cols() != g.cols) {
    throw ConfigError("write_grid: geometry does not match grid dimensions");
  }
  const std::size_t n = g.size();
  std::string payload;
  payload.reserve(n * 17);
  for (const auto& v : g.values) {
    put<double>(payload, v.real());
    put<double>(payload, v.imag());
  }
  payload.append(reinterpret_cast<const char*>(g.valid.data()), n);
  json header = {{"endianness", "little"},
                 {"value_type", "complex128"},
                 {"rows", g.rows},
                 {"cols", g.cols},
                 {"lateral", file.geometry.lateral},
                 {"axial", file.geometry.axial},
                 {"method", g.method},
                 {"angle", g.angle_tag},
                 {"fallback_pixels", g.fallback_pixels},
                 {"annotations", annotations_json(file.annotations)},
                 {"payload_bytes", payload.size()}};
  dump(path, frame(kGridMagic, header, payload));
}

GridFile read_grid(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  const auto parsed = unframe(bytes, kGridMagic, path.string());
  const auto& h = parsed.header;
  GridFile file;
  try {
    file.grid = BeamformedGrid(h.at("rows"), h.at("cols"));
    file.geometry.lateral = h.at("lateral").get<std::vector<double>>();
    file.geometry.axial = h.at("axial").get<std::vector<double>>();
    file.grid.method = h.at("method");
    file.grid.angle_tag = h.at("angle");
    file.grid.fallback_pixels = h.value("fallback_pixels", std::size_t{0});
    file.annotations = annotations_from(h.value("annotations", json()));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed header: " + e.what());
  }
  const std::size_t n = file.grid.size();
  if (parsed.payload.size() != n * 17 || file.geometry.rows() != file.grid.rows ||
      file.geometry.cols() != file.grid.cols) {
    throw DataError(path.string() + ": payload size does not match grid dimensions",
                    Kind::kSizeMismatch);
  }
  const std::string payload(parsed.payload);
  for (std::size_t i = 0; i < n; ++i) {
    file.grid.values[i] = {get<double>(payload, 16 * i), get<double>(payload, 16 * i + 8)};
  }
  std::memcpy(file.grid.valid.data(), payload.data() + 16 * n, n);
  return file;
}

}  // namespace pwbf
