#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lphom/geometry.hpp"
#include "lphom/transform.hpp"

namespace lphom {

/// How the fixed in-cube points x_n^eps are chosen. All downstream results
/// must be insensitive to this choice in the eps -> 0 limit.
enum class AnchorRule {
  center,        // center of cube ∩ Omega (default)
  lower_corner,  // lower corner of cube ∩ Omega
  random,        // seeded uniform point in cube ∩ Omega
};

struct CoveringOptions {
  AnchorRule anchors = AnchorRule::center;
  std::uint64_t seed = 0;  // for AnchorRule::random
  /// When set, shifts default to the lattice convention
  /// xtilde_n = D(x_n) * eps * k; otherwise to the cube lower corner.
  std::optional<TransformationField> field;
  /// Plywood layering: anchors in cubes with the same third lattice index
  /// share their x3 component (the layers' common rotation angle).
  bool layered_anchors = false;
};

struct CoveringCube {
  Vec3i index;       // lattice index; corner = index * side
  Vec3 corner;       // lower corner of the lattice cube
  Vec3 anchor;       // x_n^eps in cube ∩ Omega
  Vec3 shift;        // xtilde_n^eps
  bool interior;     // cube entirely inside Omega
};

/// Partition covering of a box domain by lattice cubes of side eps^r.
/// The lattice originates at the global origin so cube boundaries are
/// reproducible across eps.
struct Covering {
  DomainBox domain;
  double epsilon = 0.0;
  double r = 0.0;
  double side = 0.0;
  std::vector<CoveringCube> cubes;
  long N_eps = 0;              // cubes meeting Omega
  long N_tilde_eps = 0;        // cubes enclosed in Omega
  double remainder_measure = 0.0;  // |K^eps| = |Omega \ union of interior cubes|

  /// Index into cubes for the cube whose half-open lattice cell contains x,
  /// or -1 when x lies outside the covering.
  int find_cube(const Vec3& x) const;

  const CoveringCube& cube_at(const Vec3& x) const;

  std::string to_json() const;
  static Covering from_json(const std::string& text);

 private:
  friend Covering build_covering(const DomainBox&, double, double, const CoveringOptions&);
  Vec3i imin_ = Vec3i::Zero(), imax_ = Vec3i::Zero();
  std::vector<std::int32_t> lookup_;
};

Covering build_covering(const DomainBox& domain, double epsilon, double r,
                        const CoveringOptions& options = {});

/// Covering of one cube by transformed cells eps * D(x_n) * (Y + k),
/// anchored at the cube's shift point.
struct CellCovering {
  int cube_index = -1;
  long I_n_eps = 0;        // cells meeting the closed cube
  long I_tilde_n_eps = 0;  // cells enclosed in the cube
  double cell_measure = 0.0;           // eps^d |det D(x_n)|
  double boundary_band_measure = 0.0;  // |M_n^eps|, exact
};

CellCovering build_cell_covering(const Covering& covering, int cube_index,
                                 const TransformationField& D);

/// Smooth per-cube cutoffs phi_n = phi_{eps^rho} * chi_{Omega_{n,rho}} built
/// from the compactly supported bump c*exp(-1/(1-|x|^2)).  Values in [0,1],
/// support strictly inside the (open) cube, zero on boundary cubes.
class MollifiedCutoff {
 public:
  MollifiedCutoff(const Covering& covering, double rho);

  double rho() const { return rho_; }
  double mollifier_radius() const { return eps_rho_; }

  /// phi_n(x) for the cube containing x (0 when x is in no cube or the cube
  /// meets the boundary).
  double value(const Vec3& x) const;
  double value(const Vec3& x, int cube_index) const;

  /// Gradient of phi_n via the mollifier-gradient kernel.
  Vec3 gradient(const Vec3& x) const;

  /// Max-norm bound estimate of the Hessian at x (Frobenius norm).
  double hessian_norm(const Vec3& x) const;

  /// Sum over n of |phi_n - chi_n| measured in L2(Omega) by midpoint
  /// quadrature with n points per axis.
  double l2_distance_to_indicators(int points_per_axis) const;

 private:
  struct Node {
    Vec3 z;        // quadrature node in the unit ball, scaled later by eps^rho
    double w;      // normalized bump weight, sums to 1
    Vec3 gw;       // gradient-kernel weight
    Mat3 hw;       // hessian-kernel weight
  };
  bool in_shrunk_cube(const Vec3& x, const CoveringCube& cube) const;

  const Covering* covering_;
  double rho_ = 0.0;
  double eps_rho_ = 0.0;
  std::vector<Node> nodes_;
};

}  // namespace lphom
