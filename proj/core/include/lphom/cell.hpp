#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "lphom/sparse.hpp"
#include "lphom/tensor4.hpp"
#include "lphom/transform.hpp"

namespace lphom {

/// n x n bilinear quads on the unit cell [0,1]^2 with periodic node
/// identification. shear_w != 0 means the grid parametrizes the sheared
/// cell Z-hat (pullback coordinates (s,t) -> (s + w t, t), det = 1).
/// Exactly one of (elastic phases + phase map) or scalar coefficients is
/// active.
struct PeriodicCellGrid {
  int n = 0;
  double shear_w = 0.0;
  // elastic: two-phase palette
  Tensor4 E1, E2;
  std::vector<std::uint8_t> phase;  // per element, 1 = fibre (E1), 0 = matrix (E2)
  // scalar
  std::vector<double> scalar;  // per element coefficient, empty for elastic grids

  bool is_scalar() const { return !scalar.empty(); }
  long elements() const { return static_cast<long>(n) * n; }
  long nodes() const { return static_cast<long>(n) * n; }
  double fibre_fraction() const;
};

/// Element coefficient = E1 inside the disk |yhat - (1/2,1/2)| <= a at the
/// element centroid, E2 outside. Tensors are validated first.
PeriodicCellGrid build_cell_coefficient(double a, const Tensor4& E1, const Tensor4& E2, int n);

/// Sheared-cell variant: fibre disks of radius a centered at the
/// Z_x-lattice cell centers, evaluated in physical yhat coordinates.
PeriodicCellGrid build_cell_coefficient_sheared(double a, const Tensor4& E1, const Tensor4& E2,
                                                int n, double w);

/// Scalar coefficient grid from a pointwise callable on the unit cell.
PeriodicCellGrid build_cell_scalar(const std::function<double(double, double)>& coeff, int n);

/// The 2x3 reduction matrix R-hat(gamma): rows (-sin, cos, 0), (0, 0, 1).
Eigen::Matrix<double, 2, 3> rhat(double gamma_value);

/// Reduced strain of a 3-component field from its 2D cell gradients:
/// e-hat^R_kl = 1/2 [ (Rhat^T grad v^l)_k + (Rhat^T grad v^k)_l ].
/// grads row c carries the 2D gradient of component c.
Mat3 reduced_strain(const Eigen::Matrix<double, 3, 2>& grads, double gamma_value);

/// Corrector fields omega_ij in Voigt order (11,22,33,23,13,12); 3 nodal
/// components per grid node, zero mean, periodic.
struct CorrectorSet {
  int n = 0;
  double gamma_value = 0.0;
  double shear_w = 0.0;
  std::array<std::vector<double>, 6> fields;
  std::array<double, 6> residuals{};
  std::array<long, 6> iterations{};
};

/// Scalar corrector per cell direction.
struct ScalarCorrectorSet {
  int n = 0;
  std::array<std::vector<double>, 2> fields;
  std::array<double, 2> residuals{};
};

/// Stiffness operator of the periodic cell problem (exposed for spectral
/// checks of the constant kernel).
CsrMatrix assemble_cell_matrix(const PeriodicCellGrid& grid, double gamma_value);

/// Solves the six elastic cell problems on the unit cell at the given
/// rotation angle; relative algebraic residual <= tol.
CorrectorSet solve_cell_elastic(const PeriodicCellGrid& grid, double gamma_value,
                                double tol = 1e-10);

/// Sheared-cell solve (grid must carry the shear); reduces to
/// solve_cell_elastic when w = 0.
CorrectorSet solve_cell_sheared(const PeriodicCellGrid& grid, double gamma_value,
                                double tol = 1e-10);

/// Periodic scalar (diffusion) cell problems for both basis directions.
ScalarCorrectorSet solve_cell_scalar(const PeriodicCellGrid& grid, double tol = 1e-10);

/// A^hom_ijkl = avg over the cell of (A~_ijkl + [A~ e-hat^R(omega_ij)]_kl).
/// Throws when the assembled tensor violates its symmetries beyond tol.
Tensor4 assemble_Ahom(const PeriodicCellGrid& grid, double gamma_value,
                      const CorrectorSet& correctors, double sym_tol = 1e-8);

/// Mirror of assemble_Ahom on the sheared cell.
Tensor4 assemble_Bhom(const PeriodicCellGrid& grid, double gamma_value,
                      const CorrectorSet& correctors, double sym_tol = 1e-8);

/// Effective 2x2 matrix of the scalar cell problem.
Eigen::Matrix2d assemble_scalar_hom(const PeriodicCellGrid& grid,
                                    const ScalarCorrectorSet& correctors);

/// Homogenized tensor sampled along a coordinate with piecewise-linear
/// interpolation between samples.
struct TensorSample {
  double coordinate = 0.0;
  Tensor4 tensor;
  double volume_fraction = 0.0;
  double max_residual = 0.0;
  int grid_n = 0;
};

struct HomogenizedTensorField {
  std::vector<TensorSample> samples;  // ascending coordinate

  Tensor4 at(double coordinate) const;
  std::string to_json() const;
  std::string to_csv() const;
  static HomogenizedTensorField from_json(const std::string& text);
};

/// Samples A^hom(x3) at Chebyshev-Lobatto points of [lo, hi] (they include
/// the endpoints, so interpolation covers the whole range).
HomogenizedTensorField sample_Ahom_field(const RotationAngleField& gamma, double a,
                                         const Tensor4& E1, const Tensor4& E2, int grid_n,
                                         double lo, double hi, int num_samples = 9);

/// B^hom at one macroscopic point x (angle gamma(x3), shear w(x)).
Tensor4 compute_Bhom(const RotationAngleField& gamma, double a, const Tensor4& E1,
                     const Tensor4& E2, int grid_n, const Vec3& x,
                     double* volume_fraction = nullptr, double* max_residual = nullptr);

/// B^hom(x) sampled along the x3-extent of a segment with fixed (x1, x2).
HomogenizedTensorField sample_Bhom_field(const RotationAngleField& gamma, double a,
                                         const Tensor4& E1, const Tensor4& E2, int grid_n,
                                         const Vec3& x12, double lo, double hi,
                                         int num_samples = 9);

}  // namespace lphom
