#pragma once

// Harmonic manufactured solutions used by the Laplace benchmarks.

#include <functional>
#include <string>

#include "bkm/errors.hpp"
#include "bkm/vec.hpp"

namespace bkm::manufactured {

struct ExactSolution {
  std::string name;
  std::function<double(Vec3)> value;
  std::function<Vec3(Vec3)> gradient;
};

/// u = x^3 y - x y^3 + 10 x + 10
inline ExactSolution laplace_2d() {
  return {"laplace_2d",
          [](Vec3 p) { return p.x * p.x * p.x * p.y - p.x * p.y * p.y * p.y + 10.0 * p.x + 10.0; },
          [](Vec3 p) {
            return Vec3{3.0 * p.x * p.x * p.y - p.y * p.y * p.y + 10.0,
                        p.x * p.x * p.x - 3.0 * p.x * p.y * p.y, 0.0};
          }};
}

/// u = x^3 y z - 2 x y^3 z + x y z^3 + 10 x + 10
inline ExactSolution laplace_3d() {
  return {"laplace_3d",
          [](Vec3 p) {
            const double x = p.x, y = p.y, z = p.z;
            return x * x * x * y * z - 2.0 * x * y * y * y * z + x * y * z * z * z + 10.0 * x + 10.0;
          },
          [](Vec3 p) {
            const double x = p.x, y = p.y, z = p.z;
            return Vec3{3.0 * x * x * y * z - 2.0 * y * y * y * z + y * z * z * z + 10.0,
                        x * x * x * z - 6.0 * x * y * y * z + x * z * z * z,
                        x * x * x * y - 2.0 * x * y * y * y + 3.0 * x * y * z * z};
          }};
}

inline ExactSolution by_name(const std::string& name) {
  if (name == "laplace_2d") return laplace_2d();
  if (name == "laplace_3d") return laplace_3d();
  throw ConfigError("unknown exact solution '" + name + "'");
}

}  // namespace bkm::manufactured
