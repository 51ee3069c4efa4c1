#pragma once

// Test domains, boundary-knot placement and interior sample points.
//
//   Ellipse(a, b)                  centred at the origin
//   StarCurve(rho0, eps, lobes)    rho(t) = rho0 (1 + eps cos(lobes t))
//   CubeWithEllipsoidCavity(side)  cube [0, side]^3 with a centred ellipsoidal
//                                  hole of semi-axes (3/8, 1/8, 1/8) side
//
// Normals always point out of the material, i.e. into the cavity on the
// cavity surface. The x = 0 cube face carries Neumann data, every other
// boundary Dirichlet.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "bkm/errors.hpp"
#include "bkm/vec.hpp"

namespace bkm::geometry {

struct Ellipse {
  double a = 2.0;
  double b = 1.0;
};

struct StarCurve {
  double rho0 = 1.0;
  double eps = 0.3;
  int lobes = 5;
};

struct CubeWithEllipsoidCavity {
  double side = 1.0;
  /// Knots placed on the cavity surface by `place_boundary_knots`.
  int cavity_knots = 6;

  Vec3 center() const { return {0.5 * side, 0.5 * side, 0.5 * side}; }
  Vec3 semi_axes() const { return {0.375 * side, 0.125 * side, 0.125 * side}; }
};

using Domain = std::variant<Ellipse, StarCurve, CubeWithEllipsoidCavity>;

enum class BcKind { Dirichlet, Neumann };

struct BoundaryKnot {
  Vec3 position;
  Vec3 normal;
  BcKind bc = BcKind::Dirichlet;
  int index = 0;
};

struct KnotSet {
  std::vector<BoundaryKnot> dirichlet;
  std::vector<BoundaryKnot> neumann;
  std::vector<Vec3> interior;

  std::size_t boundary_count() const { return dirichlet.size() + neumann.size(); }
  /// Dirichlet knots followed by Neumann knots, the column order of the
  /// collocation matrix.
  std::vector<BoundaryKnot> boundary() const {
    std::vector<BoundaryKnot> all = dirichlet;
    all.insert(all.end(), neumann.begin(), neumann.end());
    return all;
  }
};

inline constexpr double kBoundaryTolerance = 1e-12;
inline constexpr double kOnSurfaceTolerance = 1e-10;

inline int dimension(const Domain& domain) {
  return std::holds_alternative<CubeWithEllipsoidCavity>(domain) ? 3 : 2;
}

inline void validate(const Domain& domain) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Ellipse>) {
          if (!(d.a > 0.0 && d.b > 0.0)) throw GeometryError("ellipse semi-axes must be positive");
        } else if constexpr (std::is_same_v<T, StarCurve>) {
          if (!(d.rho0 > 0.0)) throw GeometryError("star curve radius must be positive");
          if (!(std::abs(d.eps) < 1.0)) throw GeometryError("star curve needs |eps| < 1");
          if (d.lobes < 1) throw GeometryError("star curve needs at least one lobe");
        } else {
          if (!(d.side > 0.0)) throw GeometryError("cube side must be positive");
          if (d.cavity_knots < 0) throw GeometryError("cavity knot count must be >= 0");
        }
      },
      domain);
}

namespace detail {

inline double star_radius(const StarCurve& s, double t) {
  return s.rho0 * (1.0 + s.eps * std::cos(s.lobes * t));
}

// Scaled distance of p from the cavity surface: |(p - c)/axes|^2 - 1.
inline double cavity_level(const CubeWithEllipsoidCavity& c, Vec3 p) {
  const Vec3 q = p - c.center();
  const Vec3 ax = c.semi_axes();
  return q.x * q.x / (ax.x * ax.x) + q.y * q.y / (ax.y * ax.y) + q.z * q.z / (ax.z * ax.z) - 1.0;
}

inline Vec3 cavity_point(const CubeWithEllipsoidCavity& c, Vec3 unit) {
  const Vec3 ax = c.semi_axes();
  return c.center() + Vec3{ax.x * unit.x, ax.y * unit.y, ax.z * unit.z};
}

inline Vec3 cavity_normal(const CubeWithEllipsoidCavity& c, Vec3 p) {
  const Vec3 q = p - c.center();
  const Vec3 ax = c.semi_axes();
  return -1.0 * normalized(Vec3{q.x / (ax.x * ax.x), q.y / (ax.y * ax.y), q.z / (ax.z * ax.z)});
}

// Knot positions on one face in unit coordinates: the s x s cell-centred grid
// (s = floor(sqrt(k))), then the remaining k - s^2 points on the grid's
// interior vertices, then on quarter offsets inside the cells. The three sets
// are disjoint.
inline std::vector<std::pair<double, double>> face_pattern(int k) {
  std::vector<std::pair<double, double>> pts;
  if (k <= 0) return pts;
  const int s = static_cast<int>(std::floor(std::sqrt(static_cast<double>(k))));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) pts.emplace_back((i + 0.5) / s, (j + 0.5) / s);
  for (int i = 1; i < s; ++i)
    for (int j = 1; j < s; ++j)
      if (static_cast<int>(pts.size()) < k) pts.emplace_back(double(i) / s, double(j) / s);
  const std::pair<double, double> offsets[] = {{0.25, 0.25}, {0.75, 0.75}, {0.25, 0.75}, {0.75, 0.25}};
  for (auto [du, dv] : offsets)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        if (static_cast<int>(pts.size()) < k) pts.emplace_back((i + du) / s, (j + dv) / s);
  return pts;
}

// Quasi-uniform directions on the unit sphere (Fibonacci lattice).
inline std::vector<Vec3> sphere_directions(int count) {
  std::vector<Vec3> dirs;
  if (count == 6) {
    return {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    dirs.push_back({rho * std::cos(golden * i), rho * std::sin(golden * i), z});
  }
  return dirs;
}

}  // namespace detail

/// Strictly inside the material region, with a 1e-12 boundary margin.
inline bool inside(const Domain& domain, Vec3 p) {
  return std::visit(
      [p](const auto& d) -> bool {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Ellipse>) {
          return p.x * p.x / (d.a * d.a) + p.y * p.y / (d.b * d.b) < 1.0 - kBoundaryTolerance;
        } else if constexpr (std::is_same_v<T, StarCurve>) {
          const double r = std::hypot(p.x, p.y);
          return r < detail::star_radius(d, std::atan2(p.y, p.x)) - kBoundaryTolerance;
        } else {
          const double t = kBoundaryTolerance * d.side;
          const bool in_cube = p.x > t && p.y > t && p.z > t && p.x < d.side - t &&
                               p.y < d.side - t && p.z < d.side - t;
          return in_cube && detail::cavity_level(d, p) > kBoundaryTolerance;
        }
      },
      domain);
}

/// Unit normal at a boundary point, pointing out of the material.
inline Vec3 outward_normal(const Domain& domain, Vec3 p) {
  return std::visit(
      [p](const auto& d) -> Vec3 {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Ellipse>) {
          const double level = p.x * p.x / (d.a * d.a) + p.y * p.y / (d.b * d.b) - 1.0;
          if (std::abs(level) > kOnSurfaceTolerance || p.z != 0.0)
            throw GeometryError("outward_normal: point is not on the ellipse");
          return normalized(Vec3{p.x / (d.a * d.a), p.y / (d.b * d.b), 0.0});
        } else if constexpr (std::is_same_v<T, StarCurve>) {
          const double t = std::atan2(p.y, p.x);
          const double rho = detail::star_radius(d, t);
          if (std::abs(std::hypot(p.x, p.y) - rho) > kOnSurfaceTolerance || p.z != 0.0)
            throw GeometryError("outward_normal: point is not on the star curve");
          const double drho = -d.rho0 * d.eps * d.lobes * std::sin(d.lobes * t);
          const Vec3 tangent{drho * std::cos(t) - rho * std::sin(t),
                             drho * std::sin(t) + rho * std::cos(t), 0.0};
          return normalized(Vec3{tangent.y, -tangent.x, 0.0});
        } else {
          const double tol = kOnSurfaceTolerance * d.side;
          if (std::abs(detail::cavity_level(d, p)) <= kOnSurfaceTolerance)
            return detail::cavity_normal(d, p);
          const double coords[3] = {p.x, p.y, p.z};
          for (int axis = 0; axis < 3; ++axis) {
            Vec3 n{};
            if (std::abs(coords[axis]) <= tol) {
              (axis == 0 ? n.x : axis == 1 ? n.y : n.z) = -1.0;
              return n;
            }
            if (std::abs(coords[axis] - d.side) <= tol) {
              (axis == 0 ? n.x : axis == 1 ? n.y : n.z) = 1.0;
              return n;
            }
          }
          throw GeometryError("outward_normal: point is not on the cube or cavity surface");
        }
      },
      domain);
}

/// L boundary knots. 2D: equally spaced in the curve parameter starting at
/// t = 0. 3D: `cavity_knots` on the cavity, the rest split evenly over the
/// six faces (earlier faces take the remainder), Neumann on x = 0.
inline KnotSet place_boundary_knots(const Domain& domain, int count) {
  validate(domain);
  KnotSet set;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, CubeWithEllipsoidCavity>) {
          if (count < 14) throw GeometryError("3D domain needs at least 14 boundary knots");
          const int cavity = std::min(d.cavity_knots, count - 6);
          const int on_faces = count - cavity;
          int index = 0;
          // faces: x=0, x=1, y=0, y=1, z=0, z=1
          for (int face = 0; face < 6; ++face) {
            const int k = on_faces / 6 + (face < on_faces % 6 ? 1 : 0);
            const int axis = face / 2;
            const double level = (face % 2) ? d.side : 0.0;
            for (auto [u, v] : detail::face_pattern(k)) {
              Vec3 p{}, n{};
              const double a = u * d.side, b = v * d.side;
              switch (axis) {
                case 0: p = {level, a, b}; n = {face % 2 ? 1.0 : -1.0, 0, 0}; break;
                case 1: p = {a, level, b}; n = {0, face % 2 ? 1.0 : -1.0, 0}; break;
                default: p = {a, b, level}; n = {0, 0, face % 2 ? 1.0 : -1.0}; break;
              }
              const BcKind bc = face == 0 ? BcKind::Neumann : BcKind::Dirichlet;
              (bc == BcKind::Neumann ? set.neumann : set.dirichlet).push_back({p, n, bc, index++});
            }
          }
          for (Vec3 dir : detail::sphere_directions(cavity)) {
            const Vec3 p = detail::cavity_point(d, dir);
            set.dirichlet.push_back({p, detail::cavity_normal(d, p), BcKind::Dirichlet, index++});
          }
        } else {
          if (count < 4) throw GeometryError("2D domain needs at least 4 boundary knots");
          for (int k = 0; k < count; ++k) {
            const double t = 2.0 * std::numbers::pi * k / count;
            Vec3 p;
            if constexpr (std::is_same_v<T, Ellipse>) {
              p = {d.a * std::cos(t), d.b * std::sin(t), 0.0};
            } else {
              const double rho = detail::star_radius(d, t);
              p = {rho * std::cos(t), rho * std::sin(t), 0.0};
            }
            set.dirichlet.push_back({p, outward_normal(domain, p), BcKind::Dirichlet, k});
          }
        }
      },
      domain);
  return set;
}

enum class SamplingMode { Lattice, Random };

struct BoundingBox {
  Vec3 lo, hi;
};

inline BoundingBox bounding_box(const Domain& domain) {
  return std::visit(
      [](const auto& d) -> BoundingBox {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Ellipse>) {
          return {{-d.a, -d.b, 0.0}, {d.a, d.b, 0.0}};
        } else if constexpr (std::is_same_v<T, StarCurve>) {
          const double r = d.rho0 * (1.0 + std::abs(d.eps));
          return {{-r, -r, 0.0}, {r, r, 0.0}};
        } else {
          return {{0.0, 0.0, 0.0}, {d.side, d.side, d.side}};
        }
      },
      domain);
}

/// M points strictly inside the material.
///
/// Lattice mode: cell centres of a c^dim grid over the bounding box (c odd,
/// so the box centre is a lattice point), c grown until at least M points
/// are inside; M of them are then taken at evenly strided positions of the
/// lexicographic list. Random mode: seeded rejection sampling in the box.
inline std::vector<Vec3> sample_points(const Domain& domain, int count, std::uint64_t seed = 0,
                                       SamplingMode mode = SamplingMode::Lattice) {
  validate(domain);
  if (count < 1) throw GeometryError("sample_points: count must be >= 1");
  const int dim = dimension(domain);
  const BoundingBox box = bounding_box(domain);
  std::vector<Vec3> pts;

  if (mode == SamplingMode::Random) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y),
        uz(box.lo.z, box.hi.z);
    const long long max_draws = 1000LL * count + 100000;
    for (long long draw = 0; draw < max_draws && static_cast<int>(pts.size()) < count; ++draw) {
      Vec3 p{ux(rng), uy(rng), dim == 3 ? uz(rng) : 0.0};
      if (inside(domain, p)) pts.push_back(p);
    }
    if (static_cast<int>(pts.size()) < count)
      throw GeometryError("sample_points: acceptance region is empty or too small");
    return pts;
  }

  std::vector<Vec3> lattice;
  for (int c = 1; c <= 4001; c += 2) {
    lattice.clear();
    const Vec3 step = (box.hi - box.lo) / c;
    const int cz = dim == 3 ? c : 1;
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j)
        for (int k = 0; k < cz; ++k) {
          Vec3 p{box.lo.x + (i + 0.5) * step.x, box.lo.y + (j + 0.5) * step.y,
                 dim == 3 ? box.lo.z + (k + 0.5) * step.z : 0.0};
          if (inside(domain, p)) lattice.push_back(p);
        }
    if (static_cast<int>(lattice.size()) >= count) break;
    if (dim == 3 && c > 201) break;
  }
  if (static_cast<int>(lattice.size()) < count)
    throw GeometryError("sample_points: acceptance region is empty or too small");
  const double stride = static_cast<double>(lattice.size()) / count;
  for (int k = 0; k < count; ++k)
    pts.push_back(lattice[static_cast<std::size_t>((k + 0.5) * stride)]);
  return pts;
}

/// Residual of the implicit surface equation at a boundary knot (0 on the
/// surface).
inline double surface_residual(const Domain& domain, Vec3 p) {
  return std::visit(
      [p](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Ellipse>) {
          return p.x * p.x / (d.a * d.a) + p.y * p.y / (d.b * d.b) - 1.0;
        } else if constexpr (std::is_same_v<T, StarCurve>) {
          return std::hypot(p.x, p.y) - detail::star_radius(d, std::atan2(p.y, p.x));
        } else {
          const double cav = detail::cavity_level(d, p);
          const double face = std::min({std::abs(p.x), std::abs(p.y), std::abs(p.z),
                                        std::abs(p.x - d.side), std::abs(p.y - d.side),
                                        std::abs(p.z - d.side)});
          return std::min(std::abs(cav), face);
        }
      },
      domain);
}

}  // namespace bkm::geometry
