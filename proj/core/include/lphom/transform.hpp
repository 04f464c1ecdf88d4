#pragma once

#include <functional>

#include "lphom/geometry.hpp"

namespace lphom {

/// Rotation angle profile gamma(x3) with closed-form derivatives.
/// Required: 0 <= gamma <= pi, gamma in C^2.
struct RotationAngleField {
  std::function<double(double)> gamma;
  std::function<double(double)> dgamma;
  std::function<double(double)> ddgamma;

  static RotationAngleField constant(double value);
  /// gamma(t) = (pi/2) * (1 + sin(pi t)) / 2 — the default test profile:
  /// smooth, valued in [0, pi/2], nonconstant derivative.
  static RotationAngleField default_sin();
  /// gamma(t) = t (useful for hand-checked shear values).
  static RotationAngleField linear();

  /// Spot-checks dgamma/ddgamma against central differences at sample points.
  void check_derivatives(double lo, double hi, int samples = 17, double tol = 1e-5) const;
};

/// R(alpha): inverse of the rotation around the x3-axis by angle alpha,
/// rows ((cos, sin, 0), (-sin, cos, 0), (0, 0, 1)).
Mat3 rotation(double alpha);

/// W(x): unit upper-triangular shear with entry w(x) at (row 2, col 3),
/// w(x) = gamma'(x3) * (cos(gamma(x3)) x1 + sin(gamma(x3)) x2).
Mat3 shear(const Vec3& x, const RotationAngleField& gamma);
double shear_value(const Vec3& x, const RotationAngleField& gamma);

/// Space-dependent cell transformation y = D(x) ytilde with uniform
/// determinant bounds. For dim < 3 the trailing block is the identity.
struct TransformationField {
  std::function<Mat3(const Vec3&)> D;
  std::function<Mat3(const Vec3&)> Dinv;
  double det_lower = 1.0;
  double det_upper = 1.0;
  double lipschitz = 0.0;  // estimate for |D(x)-D(y)| / |x-y|

  static TransformationField identity();
  /// 1D scalar field D(x) = e^{x1} on [0,1] (the worked-example field).
  static TransformationField exp_1d();
  /// 2D rotation by gamma(x2) (scalar plywood analog in the plane).
  static TransformationField rotation_2d(const RotationAngleField& gamma);
  /// D(x) = R^{-1}(gamma(x3)) — locally-periodic plywood.
  static TransformationField plywood_lp(const RotationAngleField& gamma);
  /// D(x) = R^{-1}(gamma(x3)) W(x) — non-periodic plywood approximation.
  static TransformationField plywood_np(const RotationAngleField& gamma);

  /// Verifies D * Dinv = I and the det bounds at sampled points.
  void check(const DomainBox& domain, int samples = 64, double tol = 1e-12) const;
};

}  // namespace lphom
