#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include "dwellopt/error.hpp"
#include "dwellopt/rng.hpp"

namespace dwellopt {

// All lengths are millimetres.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }
inline bool is_finite(Vec3 a) { return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z); }

inline Vec3 normalized(Vec3 a) {
  const double n = norm(a);
  if (!(n > 0.0)) throw ContractError("cannot normalize a zero vector");
  return (1.0 / n) * a;
}

struct Aabb {
  Vec3 lo;
  Vec3 hi;

  double volume() const { return std::max(0.0, hi.x - lo.x) * std::max(0.0, hi.y - lo.y) * std::max(0.0, hi.z - lo.z); }
  bool empty() const { return !(hi.x > lo.x && hi.y > lo.y && hi.z > lo.z); }

  Aabb merged(const Aabb& o) const {
    return {{std::min(lo.x, o.lo.x), std::min(lo.y, o.lo.y), std::min(lo.z, o.lo.z)},
            {std::max(hi.x, o.hi.x), std::max(hi.y, o.hi.y), std::max(hi.z, o.hi.z)}};
  }
};

// Axis-aligned ellipsoid.
struct Ellipsoid {
  Vec3 center;
  Vec3 semi_axes;
  friend bool operator==(const Ellipsoid&, const Ellipsoid&) = default;
};

// Axis-aligned box.
struct Box {
  Vec3 center;
  Vec3 half_extents;
  friend bool operator==(const Box&, const Box&) = default;
};

// Capped cylinder starting at `base` and extending `length` along the unit `axis`.
struct Cylinder {
  Vec3 base;
  Vec3 axis;
  double length = 0.0;
  double radius = 0.0;
  friend bool operator==(const Cylinder&, const Cylinder&) = default;
};

using Primitive = std::variant<Ellipsoid, Box, Cylinder>;

namespace detail {

inline double min_component(Vec3 v) { return std::min({v.x, v.y, v.z}); }

inline double ellipsoid_level(const Ellipsoid& e, Vec3 p, double scale) {
  const Vec3 d = p - e.center;
  const double ax = e.semi_axes.x * scale, ay = e.semi_axes.y * scale, az = e.semi_axes.z * scale;
  return (d.x * d.x) / (ax * ax) + (d.y * d.y) / (ay * ay) + (d.z * d.z) / (az * az);
}

}  // namespace detail

inline bool contains(const Primitive& prim, Vec3 p) {
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          return detail::ellipsoid_level(s, p, 1.0) <= 1.0;
        } else if constexpr (std::is_same_v<T, Box>) {
          const Vec3 d = p - s.center;
          return std::abs(d.x) <= s.half_extents.x && std::abs(d.y) <= s.half_extents.y && std::abs(d.z) <= s.half_extents.z;
        } else {
          const Vec3 d = p - s.base;
          const double t = dot(d, s.axis);
          if (t < 0.0 || t > s.length) return false;
          const Vec3 radial = d - t * s.axis;
          return dot(radial, radial) <= s.radius * s.radius;
        }
      },
      prim);
}

// Closed-form volume in mm^3.
inline double volume_mm3(const Primitive& prim) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          return 4.0 / 3.0 * std::numbers::pi * s.semi_axes.x * s.semi_axes.y * s.semi_axes.z;
        } else if constexpr (std::is_same_v<T, Box>) {
          return 8.0 * s.half_extents.x * s.half_extents.y * s.half_extents.z;
        } else {
          return std::numbers::pi * s.radius * s.radius * s.length;
        }
      },
      prim);
}

inline Aabb bounds(const Primitive& prim) {
  return std::visit(
      [](const auto& s) -> Aabb {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          return {s.center - s.semi_axes, s.center + s.semi_axes};
        } else if constexpr (std::is_same_v<T, Box>) {
          return {s.center - s.half_extents, s.center + s.half_extents};
        } else {
          const Vec3 tip = s.base + s.length * s.axis;
          Aabb box{{std::min(s.base.x, tip.x), std::min(s.base.y, tip.y), std::min(s.base.z, tip.z)},
                   {std::max(s.base.x, tip.x), std::max(s.base.y, tip.y), std::max(s.base.z, tip.z)}};
          // Exact disc extent per coordinate: r * sqrt(1 - axis_i^2).
          const Vec3 ext{s.radius * std::sqrt(std::max(0.0, 1.0 - s.axis.x * s.axis.x)),
                         s.radius * std::sqrt(std::max(0.0, 1.0 - s.axis.y * s.axis.y)),
                         s.radius * std::sqrt(std::max(0.0, 1.0 - s.axis.z * s.axis.z))};
          return {box.lo - ext, box.hi + ext};
        }
      },
      prim);
}

// [min, max] of dot(p - origin, axis) over the primitive. `axis` must be unit length.
inline std::pair<double, double> axial_extent(const Primitive& prim, Vec3 origin, Vec3 axis) {
  return std::visit(
      [&](const auto& s) -> std::pair<double, double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          const double c = dot(s.center - origin, axis);
          const double r = std::sqrt(std::pow(axis.x * s.semi_axes.x, 2) + std::pow(axis.y * s.semi_axes.y, 2) +
                                     std::pow(axis.z * s.semi_axes.z, 2));
          return {c - r, c + r};
        } else if constexpr (std::is_same_v<T, Box>) {
          const double c = dot(s.center - origin, axis);
          const double r = std::abs(axis.x) * s.half_extents.x + std::abs(axis.y) * s.half_extents.y +
                           std::abs(axis.z) * s.half_extents.z;
          return {c - r, c + r};
        } else {
          const double a = dot(s.base - origin, axis);
          const double b = a + s.length * dot(s.axis, axis);
          const double cosang = std::clamp(dot(s.axis, axis), -1.0, 1.0);
          const double r = s.radius * std::sqrt(std::max(0.0, 1.0 - cosang * cosang));
          return {std::min(a, b) - r, std::max(a, b) + r};
        }
      },
      prim);
}

// True when every point within `margin` of p lies outside the primitive.
// Conservative for ellipsoids: the Minkowski sum E(a) + B(m) lies inside
// E(a * (1 + m / a_min)).
inline bool clear_outside(const Primitive& prim, Vec3 p, double margin) {
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          return detail::ellipsoid_level(s, p, 1.0 + margin / detail::min_component(s.semi_axes)) > 1.0;
        } else if constexpr (std::is_same_v<T, Box>) {
          const Vec3 d = p - s.center;
          const double dx = std::max(0.0, std::abs(d.x) - s.half_extents.x);
          const double dy = std::max(0.0, std::abs(d.y) - s.half_extents.y);
          const double dz = std::max(0.0, std::abs(d.z) - s.half_extents.z);
          return std::sqrt(dx * dx + dy * dy + dz * dz) >= margin && (dx > 0.0 || dy > 0.0 || dz > 0.0);
        } else {
          const Vec3 d = p - s.base;
          const double t = dot(d, s.axis);
          if (t < -margin || t > s.length + margin) return true;
          return norm(d - t * s.axis) >= s.radius + margin;
        }
      },
      prim);
}

// True when the ball of radius `margin` around p lies inside the primitive.
inline bool contains_ball(const Primitive& prim, Vec3 p, double margin) {
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          const double shrink = 1.0 - margin / detail::min_component(s.semi_axes);
          return shrink > 0.0 && detail::ellipsoid_level(s, p, shrink) <= 1.0;
        } else if constexpr (std::is_same_v<T, Box>) {
          const Vec3 d = p - s.center;
          return std::abs(d.x) <= s.half_extents.x - margin && std::abs(d.y) <= s.half_extents.y - margin &&
                 std::abs(d.z) <= s.half_extents.z - margin;
        } else {
          const Vec3 d = p - s.base;
          const double t = dot(d, s.axis);
          if (t < margin || t > s.length - margin) return false;
          return norm(d - t * s.axis) <= s.radius - margin;
        }
      },
      prim);
}

// Half-open slab lo <= dot(p - origin, axis) < hi.
struct AxialSlab {
  Vec3 origin;
  Vec3 axis;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(Vec3 p) const {
    const double s = dot(p - origin, axis);
    return s >= lo && s < hi;
  }
  friend bool operator==(const AxialSlab&, const AxialSlab&) = default;
};

/// Region built as (union of `include`) minus (union of `exclude`),
/// optionally restricted to an axial slab.
struct Shape {
  std::vector<Primitive> include;
  std::vector<Primitive> exclude;
  std::optional<AxialSlab> slab;

  bool contains(Vec3 p) const {
    if (slab && !slab->contains(p)) return false;
    bool inside = false;
    for (const auto& prim : include) {
      if (dwellopt::contains(prim, p)) {
        inside = true;
        break;
      }
    }
    if (!inside) return false;
    for (const auto& prim : exclude)
      if (dwellopt::contains(prim, p)) return false;
    return true;
  }

  // Bounding box of the included primitives, tightened by the slab when the
  // slab axis is a coordinate axis.
  Aabb bounds() const {
    if (include.empty()) return {};
    Aabb box = dwellopt::bounds(include.front());
    for (std::size_t i = 1; i < include.size(); ++i) box = box.merged(dwellopt::bounds(include[i]));
    if (slab) {
      for (int k = 0; k < 3; ++k) {
        const double a = slab->axis[k];
        if (std::abs(std::abs(a) - 1.0) > 1e-15) continue;
        const double o = slab->origin[k];
        double lo = a > 0 ? o + slab->lo : o - slab->hi;
        double hi = a > 0 ? o + slab->hi : o - slab->lo;
        auto set = [&](Vec3& v, double value) { (k == 0 ? v.x : (k == 1 ? v.y : v.z)) = value; };
        if (lo > box.lo[k]) set(box.lo, lo);
        if (hi < box.hi[k]) set(box.hi, hi);
      }
    }
    return box;
  }

  bool is_single_primitive() const { return include.size() == 1 && exclude.empty() && !slab; }

  // Every point within `margin` of p is outside the shape (conservative).
  bool is_clear_of(Vec3 p, double margin) const {
    for (const auto& prim : exclude)
      if (contains_ball(prim, p, margin)) return true;
    for (const auto& prim : include)
      if (!clear_outside(prim, p, margin)) return false;
    return true;
  }

  friend bool operator==(const Shape&, const Shape&) = default;
};

inline constexpr std::uint64_t kVolumeSeed = 0x5eedb0c5ULL;
inline constexpr std::size_t kVolumeSamples = 1'000'000;

// Monte-Carlo volume estimate (mm^3) by uniform sampling of the bounding box.
inline double monte_carlo_volume_mm3(const Shape& shape, std::size_t samples, std::uint64_t seed) {
  const Aabb box = shape.bounds();
  if (box.empty()) return 0.0;
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec3 p{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y), rng.uniform(box.lo.z, box.hi.z)};
    if (shape.contains(p)) ++hits;
  }
  return box.volume() * static_cast<double>(hits) / static_cast<double>(samples);
}

// Analytic for a lone primitive, otherwise a fixed-seed Monte-Carlo estimate.
inline double shape_volume_mm3(const Shape& shape) {
  if (shape.is_single_primitive()) return volume_mm3(shape.include.front());
  return monte_carlo_volume_mm3(shape, kVolumeSamples, kVolumeSeed);
}

inline double shape_volume_cm3(const Shape& shape) { return shape_volume_mm3(shape) / 1000.0; }

}  // namespace dwellopt
