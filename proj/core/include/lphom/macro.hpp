#pragma once

#include <functional>
#include <span>
#include <string>

#include "lphom/cell.hpp"
#include "lphom/geometry.hpp"
#include "lphom/tensor4.hpp"

namespace lphom {

/// Structured quadrilateral (2D) / hexahedral (3D) mesh over a box.
struct MacroMesh {
  DomainBox box;
  Vec3i cells = Vec3i::Zero();  // elements per axis (active dims)

  static MacroMesh structured(const DomainBox& box, const Vec3i& cells);

  long node_count() const;
  long element_count() const;
  Vec3 node(long id) const;
  bool boundary_node(long id) const;
  double h(int axis) const { return box.side(axis) / cells[axis]; }
};

/// Dirichlet data g and body load G.
struct BoundaryData {
  std::function<Vec3(const Vec3&)> displacement;  // g
  std::function<Vec3(const Vec3&)> load;          // G
};

struct ScalarBoundaryData {
  std::function<double(const Vec3&)> value;  // g
  std::function<double(const Vec3&)> load;   // G
};

/// Nodal Galerkin solution; values are node-major with `components`
/// interleaved entries per node.
struct MacroSolution {
  MacroMesh mesh;
  int components = 1;
  std::vector<double> values;
  double residual = 0.0;  // relative algebraic residual of the free system
  double energy = 0.0;    // 1/2 a(u,u) - (G, u)

  double value(long node, int comp) const {
    return values[static_cast<std::size_t>(node) * components + comp];
  }

  /// JSON header + little-endian float64 binary, node-major.
  void write_field(const std::string& path_base) const;

  /// CSV samples along a mesh line through the domain center, parallel to
  /// `axis`: columns coordinate,v0[,v1,v2].
  std::string axis_csv(int axis) const;
};

/// -div(A^hom(x3) e(u)) = G with u = g on the boundary (3D, trilinear).
MacroSolution solve_macro_elastic(const HomogenizedTensorField& Ahom, const BoundaryData& bc,
                                  const MacroMesh& mesh, double rel_tol = 1e-9);

/// Scalar mirror with a 2x2 SPD coefficient field (2D, bilinear).
MacroSolution solve_macro_scalar(const std::function<Eigen::Matrix2d(const Vec3&)>& coeff,
                                 const ScalarBoundaryData& bc, const MacroMesh& mesh,
                                 double rel_tol = 1e-9);

/// Fine-scale scalar solve with a pointwise oscillating coefficient at
/// scale eps; the mesh must resolve eps (>= 8 elements per period).
MacroSolution solve_direct_micro_scalar(const std::function<double(const Vec3&)>& coeff,
                                        double epsilon, const ScalarBoundaryData& bc,
                                        const MacroMesh& mesh, double rel_tol = 1e-9);

/// Element-centroid gradient of a solution component (for error studies).
struct CentroidGradients {
  MacroMesh mesh;
  int components = 1;
  std::vector<double> grads;  // element-major: [elem][comp][axis]
  double grad(long elem, int comp, int axis) const {
    return grads[(static_cast<std::size_t>(elem) * components + comp) * 3 + axis];
  }
};
CentroidGradients centroid_gradients(const MacroSolution& u);

/// L2 norm of u - ref over the mesh by element Gauss quadrature.
double l2_error(const MacroSolution& u, const std::function<Vec3(const Vec3&)>& ref);
double l2_error_scalar(const MacroSolution& u, const std::function<double(const Vec3&)>& ref);

/// Scalar H1 seminorm and full H1 norm of the discrete field.
double h1_seminorm_scalar(const MacroSolution& u);
double l2_norm_scalar(const MacroSolution& u);

/// Flux of a scalar solution through the strip {x_axis = plane}, i.e.
/// int (A grad u) . e_axis over the cross-section nearest the plane.
double scalar_flux(const MacroSolution& u, const std::function<Eigen::Matrix2d(const Vec3&)>& coeff,
                   int axis, double plane);

/// 1/2 a(v,v) - (G, v) of an arbitrary nodal field (energy-minimality checks).
double elastic_energy(const HomogenizedTensorField& Ahom, const BoundaryData& bc,
                      const MacroMesh& mesh, std::span<const double> nodal_values);
double scalar_energy(const std::function<Eigen::Matrix2d(const Vec3&)>& coeff,
                     const ScalarBoundaryData& bc, const MacroMesh& mesh,
                     std::span<const double> nodal_values);

}  // namespace lphom
