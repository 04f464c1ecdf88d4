#pragma once

#include <functional>
#include <string>

#include "lphom/covering.hpp"
#include "lphom/geometry.hpp"
#include "lphom/transform.hpp"

namespace lphom {

/// Pointwise microstructure indicators. Evaluation is lazy: no voxel store,
/// quadrature and Monte-Carlo sample the callables directly.
struct IndicatorSpec {
  enum class Variant { plywood_lp, plywood_np, perforation };
  Variant variant = Variant::plywood_lp;
  double a = 0.25;  // fibre radius fraction, in (0, 1/2)
  RotationAngleField gamma;
  std::function<double(const Vec3&)> rho;  // perforation radius field
  double rho_min = 0.0, rho_max = 0.0;

  static IndicatorSpec plywood_lp(double a, const RotationAngleField& gamma);
  static IndicatorSpec plywood_np(double a, const RotationAngleField& gamma);
  static IndicatorSpec perforation(const std::function<double(const Vec3&)>& rho, double rho_min,
                                   double rho_max);
};

/// Locally-periodic plywood: eta-tilde at the periodic reduction of
/// D^{-1}_{x_n}(x - xtilde_n)/eps, fibre disk centered at the cell midpoint.
/// The covering must be 3D and built with the plywood transformation field.
int plywood_indicator_lp(const IndicatorSpec& spec, const Covering& covering, double epsilon,
                         const Vec3& x);

/// Non-periodic plywood: 1 iff theta_eps(R_k (x - x_k^eps)) = 1 for some
/// k in Z^3 (fibre axes through the rotated lattice points R_k^{-1} eps k);
/// only the O(1) candidates near x are enumerated.
int plywood_indicator_np(const IndicatorSpec& spec, double epsilon, const Vec3& x);

/// Space-dependent perforation (D = I): frozen-cell indicator of
/// |y| <= rho(x_n) with |y| the periodic distance to the eps-lattice.
int perforation_indicator(const IndicatorSpec& spec, const Covering& covering, double epsilon,
                          const Vec3& x);

/// ||theta_r(.+tau) - theta_r||^2_{L2} / (r L |tau|) for a single cylinder
/// of radius r and length L (axis e1), by voxel counting at `resolution`
/// voxels per radius. Throws ResolutionError when the voxel error would
/// exceed ~10% of the measured value.
double fiber_shift_bound(double radius, double length, const Vec3& tau, int resolution);

struct DiscrepancyEstimate {
  double measure = 0.0;    // |symmetric difference| estimate over the domain
  double std_error = 0.0;  // Monte-Carlo standard error
  long samples = 0;
};

/// Measure of the symmetric difference between the non-periodic plywood
/// indicator and its locally-periodic approximation on cubes of side eps^r
/// (anchors x_n = R^{-1}_{kappa_n} eps kappa_n, cells sheared by W(x_n)).
/// Requires 2/3 < r < 1. Deterministic given the seed.
DiscrepancyEstimate lp_np_discrepancy(const IndicatorSpec& spec, double epsilon, double r,
                                      long samples, std::uint64_t seed,
                                      const DomainBox& domain = DomainBox::unit(3));

/// Dense voxel export: one byte per voxel, row-major with axes ordered
/// (x1, x2, x3), plus a JSON sidecar {shape, spacing, epsilon, variant,
/// parameters, volume_fraction}. Returns the measured voxel fraction.
double write_voxels(const std::string& path_base, const std::function<int(const Vec3&)>& chi,
                    const DomainBox& domain, const Vec3i& shape, double epsilon,
                    const std::string& variant, const std::string& parameters_json);

}  // namespace lphom
