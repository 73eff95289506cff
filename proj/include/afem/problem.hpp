#pragma once

#include <afem/coefficients.hpp>

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

namespace afem {

/// Value and gradient of an n-component field at a point.
struct FieldValue {
  Components val{};
  std::array<Vec3, kMaxComponents> grad{};
};

/// Everything an integrand sees about where it is evaluated.
struct PointContext {
  Vec3 x{};
  /// Unit normal: outward on boundary faces (t = 1), caller-chosen on interior faces (t = 2).
  Vec3 normal{};
  int simplex = -1;
  int dim = 2;
  std::span<const CoeffValue> coeff;
  /// The problem's clamp counter, set by the caller.
  std::atomic<long>* clamps = nullptr;
};

/// Weak-form integrand <F_t(u), v>: t = 0 volume, t = 1 Neumann boundary.
using ResidualForm = std::function<double(int t, const PointContext&, const FieldValue& u, const FieldValue& v)>;
/// Linearization <DF_t(u) w, v>.
using JacobianForm =
    std::function<double(int t, const PointContext&, const FieldValue& u, const FieldValue& w, const FieldValue& v)>;
/// Strong-form pieces: t = 0 interior residual B - div A, t = 1 Neumann residual
/// C + A n, t = 2 normal flux A n (jumps are differences of t = 2 across a face).
using StrongForm = std::function<Components(int t, const PointContext&, const FieldValue& u)>;
using VectorFunction = std::function<Components(const Vec3&)>;

struct ProblemDefinition {
  std::string name;
  int n_unknowns = 1;
  ResidualForm Ft;
  JacobianForm DFt;
  StrongForm SFt;
  /// Dirichlet data evaluated at Dirichlet vertices.
  VectorFunction dirichlet;
  /// Per-component starting value away from Dirichlet vertices; unset means zero.
  std::optional<Components> initial_guess;
  std::shared_ptr<const CoefficientSet> coefficients = std::make_shared<CoefficientSet>();
  /// DFt symmetric in (w, v): selects conjugate gradients.
  bool symmetric = false;
  /// Whether the problem is affine in u (exact linear solve ends Newton in one step).
  bool linear = false;
  /// Incremented by integrands that clamp their input (positivity guards).
  std::shared_ptr<std::atomic<long>> clamp_events = std::make_shared<std::atomic<long>>(0);
};

}  // namespace afem
