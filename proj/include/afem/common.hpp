#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace afem {

inline constexpr int kMaxDim = 3;
inline constexpr int kMaxComponents = 4;

using Vec3 = std::array<double, 3>;
using Components = std::array<double, kMaxComponents>;

/// Boundary classification shared by vertices and simplex faces.
/// Codes match the mesh file format: 0 interior, 1 Dirichlet, 2 Neumann.
enum class BoundaryClass : std::uint8_t { interior = 0, dirichlet = 1, neumann = 2 };

/// Selects the OpenMP kernel or its serial reference.
enum class Execution { serial, parallel };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 sub3(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

inline double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

}  // namespace afem
