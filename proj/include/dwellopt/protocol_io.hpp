#pragma once

#include <filesystem>
#include <string>

#include "dwellopt/case_io.hpp"
#include "dwellopt/objective_model.hpp"

namespace dwellopt {

namespace io {

template <typename Enum, std::size_t N>
Enum enum_from_string(const std::string& text, const std::array<Enum, N>& values, const std::string& path) {
  for (Enum v : values)
    if (to_string(v) == text) return v;
  throw ValidationError("field " + path + ": unknown value '" + text + "'");
}

inline std::string string_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) throw ValidationError("field " + join(path, key) + ": expected a string");
  return v.get<std::string>();
}

}  // namespace io

inline json dvi_to_json(const DviSpec& d) {
  json j;
  j["kind"] = std::string(to_string(d.kind));
  if (d.kind == DviKind::D_point)
    j["point"] = d.point;
  else
    j["roi"] = std::string(to_string(d.roi));
  if (d.kind != DviKind::D_point) j["param"] = d.param;
  if (d.kind == DviKind::D_v) j["absolute_volume"] = d.absolute_volume;
  j["direction"] = std::string(to_string(d.direction));
  return j;
}

inline DviSpec dvi_from_json(const json& j, const std::string& path) {
  DviSpec d;
  d.kind = io::enum_from_string(io::string_field(j, "kind", path), std::array{DviKind::V_d, DviKind::D_v, DviKind::D_point},
                                io::join(path, "kind"));
  if (d.kind == DviKind::D_point) {
    d.point = io::string_field(j, "point", path);
  } else {
    const auto roi_text = io::string_field(j, "roi", path);
    const auto roi = roi_name_from_string(roi_text);
    if (!roi) throw ValidationError("field " + io::join(path, "roi") + ": unknown ROI '" + roi_text + "'");
    d.roi = *roi;
    d.param = io::number(j, "param", path);
  }
  if (d.kind == DviKind::D_v) {
    if (auto it = j.find("absolute_volume"); it != j.end()) {
      if (!it->is_boolean()) throw ValidationError("field " + io::join(path, "absolute_volume") + ": expected a boolean");
      d.absolute_volume = it->get<bool>();
    }
  }
  d.direction = io::enum_from_string(io::string_field(j, "direction", path), std::array{Direction::maximize, Direction::minimize},
                                     io::join(path, "direction"));
  return d;
}

inline json protocol_to_json(const ProtocolConfig& p) {
  json j;
  j["prescribed_dose_gy"] = p.prescribed_dose_gy;
  json aims = json::array();
  for (const auto& a : p.aims) {
    json aj;
    aj["id"] = a.id;
    aj["protocol"] = std::string(to_string(a.protocol));
    aj["group"] = std::string(to_string(a.group));
    aj["priority"] = a.priority;
    aj["dvi"] = dvi_to_json(a.dvi);
    if (a.adjustable) {
      aj["aspiration_strict"] = a.aspiration_strict;
      aj["aspiration_loose"] = a.aspiration_loose;
    } else {
      aj["aspiration"] = a.aspiration_strict;
    }
    aims.push_back(std::move(aj));
  }
  j["aims"] = std::move(aims);
  return j;
}

inline ProtocolConfig protocol_from_json(const json& j) {
  ProtocolConfig p;
  p.prescribed_dose_gy = io::number(j, "prescribed_dose_gy", "");
  const json& aims = io::field(j, "aims", "");
  if (!aims.is_array()) throw ValidationError("field aims: expected an array");
  for (std::size_t i = 0; i < aims.size(); ++i) {
    const std::string path = "aims[" + std::to_string(i) + "]";
    const json& aj = aims[i];
    AimSpec a;
    a.id = io::string_field(aj, "id", path);
    a.protocol = io::enum_from_string(io::string_field(aj, "protocol", path), std::array{AimProtocol::embrace, AimProtocol::added},
                                      io::join(path, "protocol"));
    a.group = io::enum_from_string(io::string_field(aj, "group", path), std::array{AimGroup::coverage, AimGroup::sparing},
                                   io::join(path, "group"));
    const double prio = io::number(aj, "priority", path);
    if (prio != std::floor(prio)) throw ValidationError("field " + io::join(path, "priority") + ": expected an integer");
    a.priority = static_cast<int>(prio);
    a.dvi = dvi_from_json(io::field(aj, "dvi", path), io::join(path, "dvi"));
    a.adjustable = a.protocol == AimProtocol::added;
    if (a.adjustable) {
      a.aspiration_strict = io::number(aj, "aspiration_strict", path);
      a.aspiration_loose = io::number(aj, "aspiration_loose", path);
    } else {
      a.aspiration_strict = a.aspiration_loose = io::number(aj, "aspiration", path);
    }
    p.aims.push_back(std::move(a));
  }
  validate(p);
  return p;
}

inline ProtocolConfig load_protocol(const std::filesystem::path& path) {
  try {
    return protocol_from_json(io::parse_document(io::read_text(path), path.string()));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline void save_protocol(const ProtocolConfig& p, const std::filesystem::path& path) {
  write_file_atomic(path, protocol_to_json(p).dump(2) + "\n");
}

}  // namespace dwellopt
