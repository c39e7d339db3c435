#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dwellopt/error.hpp"
#include "dwellopt/geometry.hpp"
#include "dwellopt/rng.hpp"

namespace dwellopt {

enum class ChannelKind { intracavitary_tandem, ovoid, needle };

enum class RoiName {
  CTV_HR,
  CTV_IR,
  GTV_RES,
  bladder,
  rectum,
  sigmoid,
  bowel,
  mid_CTV_IR,
  mid_normal_tissue,
  top_normal_tissue,
};

enum class RoiKind { target, oar, normal_tissue };

inline constexpr std::array<RoiName, 10> kAllRoiNames{
    RoiName::CTV_HR,  RoiName::CTV_IR, RoiName::GTV_RES,    RoiName::bladder,           RoiName::rectum,
    RoiName::sigmoid, RoiName::bowel,  RoiName::mid_CTV_IR, RoiName::mid_normal_tissue, RoiName::top_normal_tissue};

constexpr std::string_view to_string(RoiName name) {
  switch (name) {
    case RoiName::CTV_HR: return "CTV_HR";
    case RoiName::CTV_IR: return "CTV_IR";
    case RoiName::GTV_RES: return "GTV_RES";
    case RoiName::bladder: return "bladder";
    case RoiName::rectum: return "rectum";
    case RoiName::sigmoid: return "sigmoid";
    case RoiName::bowel: return "bowel";
    case RoiName::mid_CTV_IR: return "mid_CTV_IR";
    case RoiName::mid_normal_tissue: return "mid_normal_tissue";
    case RoiName::top_normal_tissue: return "top_normal_tissue";
  }
  return "?";
}

inline std::optional<RoiName> roi_name_from_string(std::string_view text) {
  for (auto n : kAllRoiNames)
    if (to_string(n) == text) return n;
  return std::nullopt;
}

constexpr std::string_view to_string(RoiKind kind) {
  switch (kind) {
    case RoiKind::target: return "target";
    case RoiKind::oar: return "oar";
    case RoiKind::normal_tissue: return "normal_tissue";
  }
  return "?";
}

constexpr std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::intracavitary_tandem: return "intracavitary_tandem";
    case ChannelKind::ovoid: return "ovoid";
    case ChannelKind::needle: return "needle";
  }
  return "?";
}

constexpr RoiKind default_kind(RoiName name) {
  switch (name) {
    case RoiName::CTV_HR:
    case RoiName::CTV_IR:
    case RoiName::GTV_RES: return RoiKind::target;
    case RoiName::mid_normal_tissue:
    case RoiName::top_normal_tissue: return RoiKind::normal_tissue;
    default: return RoiKind::oar;
  }
}

struct DwellPosition {
  int id = 0;
  int channel_id = 0;
  Vec3 position;
  friend bool operator==(const DwellPosition&, const DwellPosition&) = default;
};

struct Channel {
  int id = 0;
  ChannelKind kind = ChannelKind::intracavitary_tandem;
  std::vector<int> dwell_ids;
  friend bool operator==(const Channel&, const Channel&) = default;
};

struct Roi {
  RoiName name = RoiName::CTV_HR;
  RoiKind kind = RoiKind::target;
  Shape shape;
  double volume_cm3 = 0.0;
  friend bool operator==(const Roi&, const Roi&) = default;
};

struct ReferencePoint {
  std::string name;
  Vec3 position;
  friend bool operator==(const ReferencePoint&, const ReferencePoint&) = default;
};

struct ApplicatorAxis {
  Vec3 origin;
  Vec3 direction{0.0, 0.0, 1.0};
  friend bool operator==(const ApplicatorAxis&, const ApplicatorAxis&) = default;
};

inline constexpr std::string_view kIcruRectovaginal = "ICRU_rectovaginal";

/// Patient geometry. Dwell positions are the decision variables, indexed by
/// their position in `dwell_positions`; `id` is an external label.
struct PatientCase {
  double prescribed_dose_gy = 7.0;
  std::vector<Channel> channels;
  std::vector<DwellPosition> dwell_positions;
  std::vector<Roi> rois;
  std::vector<ReferencePoint> reference_points;
  ApplicatorAxis applicator_axis;
  // Region from which the normal-tissue ROIs are carved.
  std::optional<Shape> normal_tissue_envelope;
  double clearance_mm = 1.0;

  std::size_t n_dwells() const { return dwell_positions.size(); }

  const Roi* find_roi(RoiName name) const {
    for (const auto& r : rois)
      if (r.name == name) return &r;
    return nullptr;
  }

  const Roi& roi(RoiName name) const {
    if (const Roi* r = find_roi(name)) return *r;
    throw ContractError("case has no ROI named " + std::string(to_string(name)));
  }

  const ReferencePoint* find_point(std::string_view name) const {
    for (const auto& p : reference_points)
      if (p.name == name) return &p;
    return nullptr;
  }

  // Index into dwell_positions for a dwell id.
  std::size_t dwell_index(int id) const {
    for (std::size_t i = 0; i < dwell_positions.size(); ++i)
      if (dwell_positions[i].id == id) return i;
    throw ContractError("unknown dwell id " + std::to_string(id));
  }

  // Dwell indices of each needle channel.
  std::vector<std::vector<std::size_t>> needle_groups() const {
    std::vector<std::vector<std::size_t>> groups;
    for (const auto& ch : channels) {
      if (ch.kind != ChannelKind::needle) continue;
      auto& g = groups.emplace_back();
      for (int id : ch.dwell_ids) g.push_back(dwell_index(id));
    }
    return groups;
  }

  friend bool operator==(const PatientCase&, const PatientCase&) = default;
};

/// Checks every structural invariant; throws ValidationError naming the field.
inline void validate(const PatientCase& c, bool check_volumes = true) {
  if (!(c.prescribed_dose_gy > 0.0) || !std::isfinite(c.prescribed_dose_gy))
    throw ValidationError("prescribed_dose_gy must be positive");
  if (!(c.clearance_mm >= 0.0)) throw ValidationError("clearance_mm must be non-negative");

  std::set<int> ids;
  for (const auto& d : c.dwell_positions) {
    if (!ids.insert(d.id).second) throw ValidationError("dwell_positions: duplicate id " + std::to_string(d.id));
    if (!is_finite(d.position)) throw ValidationError("dwell_positions: non-finite position for id " + std::to_string(d.id));
  }
  if (c.dwell_positions.empty()) throw ValidationError("dwell_positions: at least one dwell position required");

  std::set<int> channel_ids;
  std::set<int> assigned;
  bool intracavitary = false;
  for (const auto& ch : c.channels) {
    if (!channel_ids.insert(ch.id).second) throw ValidationError("channels: duplicate id " + std::to_string(ch.id));
    if (ch.dwell_ids.empty()) throw ValidationError("channels: channel " + std::to_string(ch.id) + " has no dwell_ids");
    if (ch.kind != ChannelKind::needle) intracavitary = true;
    for (int id : ch.dwell_ids) {
      if (!ids.count(id)) throw ValidationError("channels: channel " + std::to_string(ch.id) + " references unknown dwell " + std::to_string(id));
      if (!assigned.insert(id).second) throw ValidationError("channels: dwell " + std::to_string(id) + " assigned to more than one channel");
    }
  }
  if (!intracavitary) throw ValidationError("channels: at least one intracavitary channel required");
  for (const auto& d : c.dwell_positions) {
    if (!channel_ids.count(d.channel_id))
      throw ValidationError("dwell_positions: id " + std::to_string(d.id) + " references unknown channel");
    if (!assigned.count(d.id)) throw ValidationError("dwell_positions: id " + std::to_string(d.id) + " not listed by any channel");
  }

  std::set<RoiName> names;
  for (const auto& r : c.rois) {
    const std::string label(to_string(r.name));
    if (!names.insert(r.name).second) throw ValidationError("rois: duplicate ROI " + label);
    if (r.shape.include.empty()) throw ValidationError("rois: " + label + " has an empty shape");
    if (!(r.volume_cm3 > 0.0)) throw ValidationError("rois: " + label + " volume_cm3 must be positive");
    if (check_volumes) {
      const double v = shape_volume_cm3(r.shape);
      if (std::abs(v - r.volume_cm3) > 1e-6 * v)
        throw ValidationError("rois: " + label + " volume_cm3 " + std::to_string(r.volume_cm3) +
                              " disagrees with shape volume " + std::to_string(v));
    }
    for (const auto& d : c.dwell_positions)
      if (!r.shape.is_clear_of(d.position, c.clearance_mm))
        throw ValidationError("rois: " + label + " is within clearance of dwell " + std::to_string(d.id));
  }

  std::set<std::string> point_names;
  for (const auto& p : c.reference_points) {
    if (!point_names.insert(p.name).second) throw ValidationError("reference_points: duplicate name " + p.name);
    if (!is_finite(p.position)) throw ValidationError("reference_points: non-finite position for " + p.name);
  }
  if (!(std::abs(norm(c.applicator_axis.direction) - 1.0) < 1e-9))
    throw ValidationError("applicator_axis: direction must be a unit vector");
}

// ---------------------------------------------------------------------------
// Dose-calculation points

struct DCPointSet {
  RoiName roi_name = RoiName::CTV_HR;
  std::vector<Vec3> points;
  std::uint64_t seed = 0;
};

/// Uniform rejection sampling of `n` points inside an ROI's shape.
inline DCPointSet sample_dc_points(const PatientCase& c, RoiName roi_name, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ContractError("sample_dc_points: n must be at least 1");
  const Roi& roi = c.roi(roi_name);
  if (!(roi.volume_cm3 > 0.0)) throw ContractError("sample_dc_points: ROI " + std::string(to_string(roi_name)) + " has zero volume");
  const Aabb box = roi.shape.bounds();
  if (box.empty()) throw ContractError("sample_dc_points: ROI " + std::string(to_string(roi_name)) + " has an empty bounding box");

  DCPointSet set{roi_name, {}, seed};
  set.points.reserve(n);
  Rng rng(derive_seed(seed, {fnv1a(to_string(roi_name))}));
  const std::size_t max_attempts = 100'000 * n + 10'000'000;
  std::size_t attempts = 0;
  while (set.points.size() < n) {
    if (++attempts > max_attempts)
      throw Error("sample_dc_points: acceptance rate too low for ROI " + std::string(to_string(roi_name)));
    const Vec3 p{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y), rng.uniform(box.lo.z, box.hi.z)};
    if (roi.shape.contains(p)) set.points.push_back(p);
  }
  return set;
}

// ---------------------------------------------------------------------------
// Mid/top subdivision

struct SlabBounds {
  double mid_lo = 0.0;
  double mid_hi = 0.0;
  double top_lo = 0.0;
};

// Axial extent of a shape's included primitives along the applicator axis.
inline std::pair<double, double> axial_extent(const Shape& shape, const ApplicatorAxis& axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& prim : shape.include) {
    auto [a, b] = axial_extent(prim, axis.origin, axis.direction);
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  return {lo, hi};
}

// The mid slab runs from the inferior end of CTV_IR to the superior end of
// CTV_HR; the top slab continues from there upward.
inline SlabBounds mid_top_slabs(const PatientCase& c) {
  const auto [ir_lo, ir_hi] = axial_extent(c.roi(RoiName::CTV_IR).shape, c.applicator_axis);
  const auto [hr_lo, hr_hi] = axial_extent(c.roi(RoiName::CTV_HR).shape, c.applicator_axis);
  (void)hr_lo;
  const double cut = std::min(hr_hi, ir_hi);
  return {ir_lo, cut, cut};
}

/// Returns a copy of the case with mid_CTV_IR, mid_normal_tissue and
/// top_normal_tissue (re)built from CTV_IR, CTV_HR and the normal-tissue
/// envelope. Slabs are closed on the inferior plane and open on the superior.
inline PatientCase split_mid_top(const PatientCase& c) {
  std::vector<std::string> missing;
  if (!c.find_roi(RoiName::CTV_IR)) missing.emplace_back("CTV_IR");
  if (!c.find_roi(RoiName::CTV_HR)) missing.emplace_back("CTV_HR");
  if (!c.normal_tissue_envelope) missing.emplace_back("normal_tissue_envelope");
  if (!missing.empty()) {
    std::string msg = "split_mid_top: missing";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }

  PatientCase out = c;
  std::erase_if(out.rois, [](const Roi& r) {
    return r.name == RoiName::mid_CTV_IR || r.name == RoiName::mid_normal_tissue || r.name == RoiName::top_normal_tissue;
  });

  const SlabBounds slabs = mid_top_slabs(c);
  const AxialSlab mid{c.applicator_axis.origin, c.applicator_axis.direction, slabs.mid_lo, slabs.mid_hi};
  const AxialSlab top{c.applicator_axis.origin, c.applicator_axis.direction, slabs.top_lo,
                      std::numeric_limits<double>::infinity()};

  Shape mid_ir = c.roi(RoiName::CTV_IR).shape;
  mid_ir.slab = mid;

  Shape tissue;
  tissue.include = c.normal_tissue_envelope->include;
  tissue.exclude = c.normal_tissue_envelope->exclude;
  for (const auto& r : out.rois) {
    if (r.kind == RoiKind::normal_tissue) continue;
    for (const auto& p : r.shape.include) tissue.exclude.push_back(p);
    for (const auto& p : r.shape.exclude)
      if (std::find(tissue.exclude.begin(), tissue.exclude.end(), p) == tissue.exclude.end()) tissue.exclude.push_back(p);
  }
  Shape mid_nt = tissue;
  mid_nt.slab = mid;
  Shape top_nt = tissue;
  top_nt.slab = top;

  for (auto [name, shape] : {std::pair{RoiName::mid_CTV_IR, mid_ir}, std::pair{RoiName::mid_normal_tissue, mid_nt},
                             std::pair{RoiName::top_normal_tissue, top_nt}}) {
    const double v = shape_volume_cm3(shape);
    if (!(v > 0.0)) throw ValidationError("split_mid_top: " + std::string(to_string(name)) + " is empty");
    out.rois.push_back(Roi{name, default_kind(name), std::move(shape), v});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic phantoms

/// Geometry recipe for a synthetic cervix phantom. The applicator axis is +z
/// through the origin; +y is anterior, +x is left lateral.
struct PhantomSpec {
  std::string name = "default";
  double prescribed_dose_gy = 7.0;
  double clearance_mm = 1.0;

  // Tandem: dwell positions spaced uniformly on [tandem_start_z, tandem_end_z].
  int tandem_dwells = 24;
  double tandem_start_z = -3.0;
  double tandem_end_z = 31.5;
  double tandem_lumen_radius = 3.0;

  // Ovoids: two straight channels at x = +-ovoid_offset_x inside spherical shells.
  int ovoid_dwells = 8;  // per ovoid
  double ovoid_offset_x = 17.0;
  double ovoid_center_z = -10.0;
  double ovoid_radius = 9.0;
  double ovoid_dwell_span = 7.0;

  // Needles: parallel to the axis on a ring, jittered per seed.
  int needles = 5;
  int needle_dwells = 8;
  double needle_ring_radius = 21.0;
  double needle_start_z = -4.0;
  double needle_step = 4.0;
  double needle_lumen_radius = 1.5;
  double needle_jitter_mm = 1.5;

  Ellipsoid ctv_hr{{0, 0, 10}, {16, 14, 18}};
  Ellipsoid gtv_res{{0, 0, 6}, {9, 8, 9}};
  Ellipsoid ctv_ir{{0, 0, 10}, {27, 21, 24}};
  Ellipsoid bladder{{0, 37, 14}, {30, 13, 20}};
  Ellipsoid rectum{{0, -31, 4}, {13, 8, 28}};
  Ellipsoid sigmoid{{0, -16, 51}, {18, 8, 10}};
  Ellipsoid bowel{{0, 14, 55}, {30, 9, 10}};
  Ellipsoid tissue_envelope{{0, 0, 12}, {42, 34, 42}};
  Vec3 icru_point{0, -21, -10};
};

inline PhantomSpec phantom_preset(std::string_view name) {
  PhantomSpec s;
  if (name == "default") return s;
  if (name == "easy") {
    s.name = "easy";
    s.tandem_dwells = 8;
    s.tandem_start_z = -2.0;
    s.tandem_end_z = 26.0;
    s.ovoid_dwells = 3;
    s.needles = 0;
    s.ctv_hr = {{0, 0, 10}, {15, 14, 17}};
    s.gtv_res = {{0, 0, 8}, {8, 7, 8}};
    s.ctv_ir = {{0, 0, 10}, {27, 22, 24}};
    s.bladder = {{0, 42, 14}, {30, 13, 20}};
    s.rectum = {{0, -37, 4}, {13, 8, 28}};
    s.sigmoid = {{0, -18, 56}, {18, 8, 10}};
    s.bowel = {{0, 16, 60}, {30, 9, 10}};
    s.icru_point = {0, -26, -10};
    return s;
  }
  if (name == "medium") {
    s.name = "medium";
    s.tandem_dwells = 10;
    s.tandem_start_z = -3.0;
    s.tandem_end_z = 29.0;
    s.ovoid_dwells = 4;
    s.needles = 2;
    s.needle_dwells = 5;
    s.needle_step = 5.0;
    s.ctv_hr = {{3, 0, 10}, {19, 14, 18}};
    s.gtv_res = {{5, 0, 7}, {10, 8, 9}};
    s.ctv_ir = {{3, 0, 10}, {29, 21, 24}};
    return s;
  }
  throw ConfigError("unknown phantom preset '" + std::string(name) + "' (expected easy, medium or default)");
}

namespace detail {

inline bool primitives_overlap(const Primitive& a, const Primitive& b) {
  const Aabb ba = bounds(a), bb = bounds(b);
  const Aabb box{{std::max(ba.lo.x, bb.lo.x), std::max(ba.lo.y, bb.lo.y), std::max(ba.lo.z, bb.lo.z)},
                 {std::min(ba.hi.x, bb.hi.x), std::min(ba.hi.y, bb.hi.y), std::min(ba.hi.z, bb.hi.z)}};
  if (box.empty()) return false;
  Rng rng(kVolumeSeed);
  for (int i = 0; i < 20000; ++i) {
    const Vec3 p{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y), rng.uniform(box.lo.z, box.hi.z)};
    if (contains(a, p) && contains(b, p)) return true;
  }
  return false;
}

inline void check_spec(const PhantomSpec& s) {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0)) throw ConfigError(std::string("phantom parameters: ") + field + " must be positive");
  };
  positive(s.prescribed_dose_gy, "prescribed_dose_gy");
  positive(s.tandem_lumen_radius, "tandem_lumen_radius");
  positive(s.ovoid_radius, "ovoid_radius");
  positive(s.needle_lumen_radius, "needle_lumen_radius");
  positive(s.needle_step, "needle_step");
  if (s.tandem_dwells < 1) throw ConfigError("phantom parameters: tandem_dwells must be at least 1");
  if (s.ovoid_dwells < 0) throw ConfigError("phantom parameters: ovoid_dwells must be non-negative");
  if (s.needles < 0 || s.needles > 8) throw ConfigError("phantom parameters: needles must be in [0, 8]");
  if (s.needles > 0 && s.needle_dwells < 1) throw ConfigError("phantom parameters: needle_dwells must be at least 1");
  if (!(s.tandem_end_z >= s.tandem_start_z)) throw ConfigError("phantom parameters: tandem_end_z must not precede tandem_start_z");
  for (const auto* e : {&s.ctv_hr, &s.gtv_res, &s.ctv_ir, &s.bladder, &s.rectum, &s.sigmoid, &s.bowel, &s.tissue_envelope}) {
    positive(e->semi_axes.x, "ellipsoid semi-axis");
    positive(e->semi_axes.y, "ellipsoid semi-axis");
    positive(e->semi_axes.z, "ellipsoid semi-axis");
  }
}

}  // namespace detail

/// Builds a deterministic phantom. The seed only perturbs needle placement.
inline PatientCase generate_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  detail::check_spec(spec);

  // Overlap between organs, and between organs and targets, is infeasible.
  const std::vector<std::pair<const char*, Ellipsoid>> targets{{"CTV_HR", spec.ctv_hr}, {"CTV_IR", spec.ctv_ir}, {"GTV_RES", spec.gtv_res}};
  const std::vector<std::pair<const char*, Ellipsoid>> organs{
      {"bladder", spec.bladder}, {"rectum", spec.rectum}, {"sigmoid", spec.sigmoid}, {"bowel", spec.bowel}};
  for (std::size_t i = 0; i < organs.size(); ++i) {
    for (const auto& t : targets)
      if (detail::primitives_overlap(organs[i].second, t.second))
        throw ConfigError(std::string("phantom parameters: ") + organs[i].first + " overlaps " + t.first);
    for (std::size_t j = i + 1; j < organs.size(); ++j)
      if (detail::primitives_overlap(organs[i].second, organs[j].second))
        throw ConfigError(std::string("phantom parameters: ") + organs[i].first + " overlaps " + organs[j].first);
  }

  PatientCase c;
  c.prescribed_dose_gy = spec.prescribed_dose_gy;
  c.clearance_mm = spec.clearance_mm;
  c.applicator_axis = {{0, 0, 0}, {0, 0, 1}};

  std::vector<Primitive> applicator;
  int next_id = 0;
  auto add_channel = [&](ChannelKind kind, const std::vector<Vec3>& points) {
    Channel ch{static_cast<int>(c.channels.size()), kind, {}};
    for (const auto& p : points) {
      c.dwell_positions.push_back({next_id, ch.id, p});
      ch.dwell_ids.push_back(next_id++);
    }
    c.channels.push_back(std::move(ch));
  };

  {
    std::vector<Vec3> pts;
    for (int i = 0; i < spec.tandem_dwells; ++i) {
      const double f = spec.tandem_dwells == 1 ? 0.0 : static_cast<double>(i) / (spec.tandem_dwells - 1);
      pts.push_back({0, 0, spec.tandem_start_z + f * (spec.tandem_end_z - spec.tandem_start_z)});
    }
    add_channel(ChannelKind::intracavitary_tandem, pts);
    const double base = std::min(spec.tandem_start_z, spec.ovoid_center_z) - spec.ovoid_radius - 5.0;
    applicator.push_back(Cylinder{{0, 0, base}, {0, 0, 1}, spec.tandem_end_z + 4.0 - base, spec.tandem_lumen_radius});
  }

  if (spec.ovoid_dwells > 0) {
    for (double side : {-1.0, 1.0}) {
      std::vector<Vec3> pts;
      for (int i = 0; i < spec.ovoid_dwells; ++i) {
        const double f = spec.ovoid_dwells == 1 ? 0.5 : static_cast<double>(i) / (spec.ovoid_dwells - 1);
        pts.push_back({side * spec.ovoid_offset_x, 0, spec.ovoid_center_z + (f - 0.5) * spec.ovoid_dwell_span});
      }
      add_channel(ChannelKind::ovoid, pts);
      const double r = spec.ovoid_radius;
      applicator.push_back(Ellipsoid{{side * spec.ovoid_offset_x, 0, spec.ovoid_center_z}, {r, r, r}});
    }
  }

  if (spec.needles > 0) {
    Rng rng(derive_seed(seed, {fnv1a("needles")}));
    for (int k = 0; k < spec.needles; ++k) {
      // Alternate left/right parametrial sectors, spreading posteriorly-to-anteriorly.
      const int per_side = (spec.needles + 1) / 2;
      const int slot = k / 2;
      const double spread = per_side == 1 ? 0.0 : (static_cast<double>(slot) / (per_side - 1) - 0.5) * (std::numbers::pi / 3.0);
      const double base_angle = (k % 2 == 0 ? 0.0 : std::numbers::pi) + (k % 2 == 0 ? spread : -spread);
      const double angle = base_angle + rng.uniform(-1.0, 1.0) * (spec.needle_jitter_mm / spec.needle_ring_radius);
      const double radius = spec.needle_ring_radius + rng.uniform(-1.0, 1.0) * spec.needle_jitter_mm;
      const Vec3 foot{radius * std::cos(angle), radius * std::sin(angle), spec.needle_start_z};
      std::vector<Vec3> pts;
      for (int i = 0; i < spec.needle_dwells; ++i) pts.push_back(foot + Vec3{0, 0, i * spec.needle_step});
      add_channel(ChannelKind::needle, pts);
      const double span = (spec.needle_dwells - 1) * spec.needle_step;
      applicator.push_back(Cylinder{foot - Vec3{0, 0, 5.0}, {0, 0, 1}, span + 10.0, spec.needle_lumen_radius});
    }
  }

  auto add_roi = [&](RoiName name, const Ellipsoid& e) {
    Shape shape;
    shape.include.push_back(e);
    for (const auto& p : applicator)
      if (detail::primitives_overlap(e, p)) shape.exclude.push_back(p);
    const double v = shape_volume_cm3(shape);
    c.rois.push_back(Roi{name, default_kind(name), std::move(shape), v});
  };
  add_roi(RoiName::CTV_HR, spec.ctv_hr);
  add_roi(RoiName::CTV_IR, spec.ctv_ir);
  add_roi(RoiName::GTV_RES, spec.gtv_res);
  add_roi(RoiName::bladder, spec.bladder);
  add_roi(RoiName::rectum, spec.rectum);
  add_roi(RoiName::sigmoid, spec.sigmoid);
  add_roi(RoiName::bowel, spec.bowel);

  c.reference_points.push_back({std::string(kIcruRectovaginal), spec.icru_point});

  Shape envelope;
  envelope.include.push_back(spec.tissue_envelope);
  envelope.exclude = applicator;
  c.normal_tissue_envelope = envelope;

  for (const auto& r : c.rois)
    for (const auto& d : c.dwell_positions)
      if (!r.shape.is_clear_of(d.position, c.clearance_mm))
        throw ConfigError("phantom parameters: dwell " + std::to_string(d.id) + " lies within clearance of " + std::string(to_string(r.name)));

  return split_mid_top(c);
}

}  // namespace dwellopt
