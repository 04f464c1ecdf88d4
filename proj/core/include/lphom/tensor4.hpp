#pragma once

#include <array>

#include "lphom/geometry.hpp"

namespace lphom {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Rank-4 stiffness tensor with minor and major symmetries.
/// Voigt pair order is (11, 22, 33, 23, 13, 12) throughout.
class Tensor4 {
 public:
  Tensor4() { e_.fill(0.0); }

  static Tensor4 isotropic(double lambda, double mu);
  /// Reads a 6x6 stiffness matrix in Voigt order (no shear factors).
  static Tensor4 from_voigt(const Mat6& C);
  /// Scalar coefficient embedded as a*I on symmetric matrices (testing aid).
  static Tensor4 spherical(double a) { return isotropic(0.0, 0.5 * a); }

  double& operator()(int i, int j, int k, int l) { return e_[idx(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return e_[idx(i, j, k, l)]; }

  Mat6 voigt() const;
  Mat6 mandel() const;
  static Tensor4 from_mandel(const Mat6& M);

  /// sigma = E : xi for symmetric xi.
  Mat3 apply(const Mat3& xi) const;
  /// xi : E : xi.
  double quadratic_form(const Mat3& xi) const;

  /// Rank-4 conjugation E'_{ijkl} = Q_ia Q_jb Q_kc Q_ld E_{abcd}.
  Tensor4 rotated(const Mat3& Q) const;

  /// Inverse as an operator on symmetric matrices (via Mandel form).
  Tensor4 inverse() const;

  double minor_symmetry_defect() const;
  double major_symmetry_defect() const;
  /// Smallest eigenvalue of the Mandel form (operator on symmetric matrices).
  double min_eigenvalue() const;
  /// Min Rayleigh quotient over the canonical 6-probe basis l_ij.
  double min_probe_rayleigh() const;

  double frobenius_norm() const;

  /// Throws InvalidArgument naming the violated property (symmetry or
  /// positive definiteness).
  void validate(const char* name, double sym_tol = 1e-10) const;

  Tensor4 operator+(const Tensor4& other) const;
  Tensor4 operator-(const Tensor4& other) const;
  Tensor4 operator*(double s) const;

 private:
  static int idx(int i, int j, int k, int l) { return ((i * 3 + j) * 3 + k) * 3 + l; }
  std::array<double, 81> e_;
};

/// Canonical symmetric probe basis l_ij in Voigt order (11,22,33,23,13,12).
std::array<Mat3, 6> probe_basis();

/// Voigt (arithmetic) and Reuss (harmonic) volume-fraction bounds for a
/// two-phase mix with phase-1 fraction theta.
struct TensorBounds {
  Tensor4 reuss;
  Tensor4 voigt;
};
TensorBounds voigt_reuss_bounds(double theta, const Tensor4& E1, const Tensor4& E2);

/// Scalar laminate oracle: across-layer (harmonic) and along-layer
/// (arithmetic) effective coefficients of a 50/50 laminate.
struct LaminateScalar {
  double across;
  double along;
};
LaminateScalar laminate_effective(double a1, double a2, double fraction1 = 0.5);

}  // namespace lphom
