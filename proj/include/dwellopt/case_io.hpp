#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "dwellopt/atomic_file.hpp"
#include "dwellopt/patient_model.hpp"

namespace dwellopt {

using json = nlohmann::ordered_json;

namespace io {

inline json to_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

// Reads `obj[key]`, reporting the dotted path of a missing or mistyped field.
inline const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("missing field " + path + (path.empty() ? "" : ".") + key);
  return *it;
}

inline std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError("field " + path + " must be a number");
  return j.get<double>();
}

inline double number(const json& obj, const char* key, const std::string& path) {
  return number(field(obj, key, path), join(path, key));
}

inline Vec3 vec3(const json& obj, const char* key, const std::string& path) {
  const json& j = field(obj, key, path);
  if (!j.is_array() || j.size() != 3) throw ValidationError("field " + join(path, key) + " must be a 3-vector");
  return {number(j[0], join(path, key)), number(j[1], join(path, key)), number(j[2], join(path, key))};
}

inline json to_json(const Primitive& prim) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          return {{"type", "ellipsoid"}, {"center", to_json(s.center)}, {"semi_axes", to_json(s.semi_axes)}};
        } else if constexpr (std::is_same_v<T, Box>) {
          return {{"type", "box"}, {"center", to_json(s.center)}, {"half_extents", to_json(s.half_extents)}};
        } else {
          return {{"type", "cylinder"}, {"base", to_json(s.base)}, {"axis", to_json(s.axis)}, {"length", s.length}, {"radius", s.radius}};
        }
      },
      prim);
}

inline Primitive primitive_from_json(const json& j, const std::string& path) {
  const json& type = field(j, "type", path);
  if (type == "ellipsoid") return Ellipsoid{vec3(j, "center", path), vec3(j, "semi_axes", path)};
  if (type == "box") return Box{vec3(j, "center", path), vec3(j, "half_extents", path)};
  if (type == "cylinder") {
    return Cylinder{vec3(j, "base", path), vec3(j, "axis", path), number(j, "length", path), number(j, "radius", path)};
  }
  throw ValidationError("field " + path + ".type: unknown primitive " + type.dump());
}

inline json bound_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const Shape& s) {
  json j;
  j["include"] = json::array();
  for (const auto& p : s.include) j["include"].push_back(to_json(p));
  j["exclude"] = json::array();
  for (const auto& p : s.exclude) j["exclude"].push_back(to_json(p));
  if (s.slab) {
    j["slab"] = {{"origin", to_json(s.slab->origin)},
                 {"axis", to_json(s.slab->axis)},
                 {"lo", bound_to_json(s.slab->lo)},
                 {"hi", bound_to_json(s.slab->hi)}};
  } else {
    j["slab"] = nullptr;
  }
  return j;
}

inline Shape shape_from_json(const json& j, const std::string& path) {
  Shape s;
  const json& inc = field(j, "include", path);
  if (!inc.is_array()) throw ValidationError("field " + join(path, "include") + " must be an array");
  for (std::size_t i = 0; i < inc.size(); ++i) s.include.push_back(primitive_from_json(inc[i], join(path, "include") + "[" + std::to_string(i) + "]"));
  if (auto it = j.find("exclude"); it != j.end()) {
    for (std::size_t i = 0; i < it->size(); ++i)
      s.exclude.push_back(primitive_from_json((*it)[i], join(path, "exclude") + "[" + std::to_string(i) + "]"));
  }
  if (auto it = j.find("slab"); it != j.end() && !it->is_null()) {
    const std::string sp = join(path, "slab");
    AxialSlab slab{vec3(*it, "origin", sp), vec3(*it, "axis", sp)};
    const json& lo = field(*it, "lo", sp);
    const json& hi = field(*it, "hi", sp);
    slab.lo = lo.is_null() ? -std::numeric_limits<double>::infinity() : number(lo, join(sp, "lo"));
    slab.hi = hi.is_null() ? std::numeric_limits<double>::infinity() : number(hi, join(sp, "hi"));
    s.slab = slab;
  }
  return s;
}

inline ChannelKind channel_kind_from_string(const std::string& text, const std::string& path) {
  for (auto k : {ChannelKind::intracavitary_tandem, ChannelKind::ovoid, ChannelKind::needle})
    if (to_string(k) == text) return k;
  throw ValidationError("field " + path + ": unknown channel kind '" + text + "'");
}

inline RoiKind roi_kind_from_string(const std::string& text, const std::string& path) {
  for (auto k : {RoiKind::target, RoiKind::oar, RoiKind::normal_tissue})
    if (to_string(k) == text) return k;
  throw ValidationError("field " + path + ": unknown ROI kind '" + text + "'");
}

// Converts a byte offset into a 1-based line number.
inline std::size_t line_of(const std::string& text, std::size_t byte) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size())), '\n'));
}

inline json parse_document(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": parse error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace io

inline json case_to_json(const PatientCase& c) {
  using io::to_json;
  json j;
  j["prescribed_dose_gy"] = c.prescribed_dose_gy;
  j["channels"] = json::array();
  for (const auto& ch : c.channels)
    j["channels"].push_back({{"id", ch.id}, {"kind", std::string(to_string(ch.kind))}, {"dwell_ids", ch.dwell_ids}});
  j["dwell_positions"] = json::array();
  for (const auto& d : c.dwell_positions)
    j["dwell_positions"].push_back({{"id", d.id}, {"channel_id", d.channel_id}, {"position", to_json(d.position)}});
  j["rois"] = json::array();
  for (const auto& r : c.rois) {
    j["rois"].push_back({{"name", std::string(to_string(r.name))},
                         {"kind", std::string(to_string(r.kind))},
                         {"volume_cm3", r.volume_cm3},
                         {"shape", to_json(r.shape)}});
  }
  j["reference_points"] = json::array();
  for (const auto& p : c.reference_points) j["reference_points"].push_back({{"name", p.name}, {"position", to_json(p.position)}});
  j["applicator_axis"] = {{"origin", to_json(c.applicator_axis.origin)}, {"direction", to_json(c.applicator_axis.direction)}};
  j["normal_tissue_envelope"] = c.normal_tissue_envelope ? to_json(*c.normal_tissue_envelope) : json(nullptr);
  j["clearance_mm"] = c.clearance_mm;
  return j;
}

/// Parses and validates a case document.
inline PatientCase case_from_json(const json& j, bool check_volumes = true) {
  using namespace io;
  if (!j.is_object()) throw ValidationError("case document must be a JSON object");
  PatientCase c;
  c.prescribed_dose_gy = number(j, "prescribed_dose_gy", "");

  const json& channels = field(j, "channels", "");
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const std::string p = "channels[" + std::to_string(i) + "]";
    const json& cj = channels[i];
    Channel ch;
    ch.id = field(cj, "id", p).get<int>();
    ch.kind = channel_kind_from_string(field(cj, "kind", p).get<std::string>(), join(p, "kind"));
    ch.dwell_ids = field(cj, "dwell_ids", p).get<std::vector<int>>();
    c.channels.push_back(std::move(ch));
  }
  const json& dwells = field(j, "dwell_positions", "");
  for (std::size_t i = 0; i < dwells.size(); ++i) {
    const std::string p = "dwell_positions[" + std::to_string(i) + "]";
    c.dwell_positions.push_back({field(dwells[i], "id", p).get<int>(), field(dwells[i], "channel_id", p).get<int>(), vec3(dwells[i], "position", p)});
  }
  const json& rois = field(j, "rois", "");
  for (std::size_t i = 0; i < rois.size(); ++i) {
    const std::string p = "rois[" + std::to_string(i) + "]";
    const std::string name = field(rois[i], "name", p).get<std::string>();
    auto rn = roi_name_from_string(name);
    if (!rn) throw ValidationError("field " + join(p, "name") + ": unknown ROI '" + name + "'");
    Roi r;
    r.name = *rn;
    r.kind = rois[i].contains("kind") ? roi_kind_from_string(rois[i]["kind"].get<std::string>(), join(p, "kind")) : default_kind(*rn);
    r.shape = shape_from_json(field(rois[i], "shape", p), join(p, "shape"));
    r.volume_cm3 = rois[i].contains("volume_cm3") ? number(rois[i], "volume_cm3", p) : shape_volume_cm3(r.shape);
    c.rois.push_back(std::move(r));
  }
  const json& points = field(j, "reference_points", "");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::string p = "reference_points[" + std::to_string(i) + "]";
    c.reference_points.push_back({field(points[i], "name", p).get<std::string>(), vec3(points[i], "position", p)});
  }
  const json& axis = field(j, "applicator_axis", "");
  c.applicator_axis = {vec3(axis, "origin", "applicator_axis"), vec3(axis, "direction", "applicator_axis")};
  if (auto it = j.find("normal_tissue_envelope"); it != j.end() && !it->is_null())
    c.normal_tissue_envelope = shape_from_json(*it, "normal_tissue_envelope");
  if (auto it = j.find("clearance_mm"); it != j.end()) c.clearance_mm = number(*it, "clearance_mm");

  validate(c, check_volumes);
  return c;
}

inline std::string case_to_string(const PatientCase& c) { return case_to_json(c).dump(2) + "\n"; }

inline PatientCase load_case(const std::filesystem::path& path) {
  const std::string text = io::read_text(path);
  try {
    return case_from_json(io::parse_document(text, path.string()));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline void save_case(const PatientCase& c, const std::filesystem::path& path) { write_file_atomic(path, case_to_string(c)); }

// Stable content hash used to key caches of derived data.
inline std::uint64_t case_hash(const PatientCase& c) { return fnv1a(case_to_json(c).dump()); }

// ---------------------------------------------------------------------------
// DC point cache: one JSON file per (case hash, roi, n, seed).

inline std::filesystem::path dc_cache_path(const std::filesystem::path& dir, const PatientCase& c, RoiName roi, std::size_t n,
                                           std::uint64_t seed) {
  std::ostringstream name;
  name << std::hex << case_hash(c) << std::dec << "_" << to_string(roi) << "_" << n << "_" << seed << ".json";
  return dir / name.str();
}

inline void save_dc_points(const DCPointSet& set, std::uint64_t hash, const std::filesystem::path& path) {
  json j;
  j["case_hash"] = hash;
  j["roi"] = std::string(to_string(set.roi_name));
  j["seed"] = set.seed;
  j["points"] = json::array();
  for (const auto& p : set.points) j["points"].push_back(io::to_json(p));
  write_file_atomic(path, j.dump());
}

/// Returns cached points when a matching file exists, otherwise samples and stores them.
inline DCPointSet cached_dc_points(const std::filesystem::path& dir, const PatientCase& c, RoiName roi, std::size_t n,
                                   std::uint64_t seed) {
  const auto path = dc_cache_path(dir, c, roi, n, seed);
  const std::uint64_t hash = case_hash(c);
  if (std::filesystem::exists(path)) {
    const json j = io::parse_document(io::read_text(path), path.string());
    if (j.value("case_hash", std::uint64_t{0}) == hash && j.value("seed", std::uint64_t{0}) == seed && j["points"].size() == n) {
      DCPointSet set{roi, {}, seed};
      for (const auto& p : j["points"]) set.points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
      return set;
    }
  }
  DCPointSet set = sample_dc_points(c, roi, n, seed);
  std::filesystem::create_directories(dir);
  save_dc_points(set, hash, path);
  return set;
}

}  // namespace dwellopt
