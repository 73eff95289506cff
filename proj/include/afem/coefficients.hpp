#pragma once

#include <afem/common.hpp>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace afem {

struct CoeffValue {
  double v = 0.0;
  Vec3 g{};
};

/// Scalar coefficient field. Without an analytic gradient the gradient is
/// taken by central differences (step 1e-6).
struct ScalarField {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
  std::string description;

  static ScalarField constant(double c);
  CoeffValue eval(const Vec3& x) const;
  bool is_constant = false;
};

/// Named coefficient fields. Problems resolve names to indices once; the
/// assembler evaluates every field at each quadrature point into a flat array.
class CoefficientSet {
 public:
  int set(const std::string& name, ScalarField field);
  bool has(const std::string& name) const;
  int index(const std::string& name) const;
  const ScalarField& field(int i) const { return fields_[i]; }
  const std::string& name(int i) const { return names_[i]; }
  int size() const { return static_cast<int>(fields_.size()); }
  void evaluate(const Vec3& x, std::span<CoeffValue> out) const;

 private:
  std::vector<std::string> names_;
  std::vector<ScalarField> fields_;
};

/// Parses a coefficient expression:
///   <number>
///   gaussian(a, sigma, x0, y0[, z0])   a exp(-|x-x0|^2 / (2 sigma^2))
///   poly(c0, cx, cy, cz[, cxx, cyy, czz])
///   trig(a, kx, ky, kz[, phase])       a sin(kx x + ky y + kz z + phase)
///   file(path)                         P1 data: an AFEM-MESH file followed by `values <n>` and n numbers
/// Relative file paths resolve against `base_dir`. Throws ConfigError.
ScalarField parse_scalar_field(const std::string& expr, const std::string& base_dir = ".");

}  // namespace afem
