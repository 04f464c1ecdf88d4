#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lphom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec3i = Eigen::Vector3i;

/// Thrown on violated preconditions (bad parameters, invalid domains, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a grid/mesh is too coarse for the requested microscale.
/// Carries the resolution that would have been sufficient.
class ResolutionError : public std::runtime_error {
 public:
  ResolutionError(const std::string& what, long required)
      : std::runtime_error(what), required_resolution(required) {}
  long required_resolution;
};

/// Thrown when an iterative solve fails to reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fractional part in [0,1); ties at integers map to 0.
inline double frac01(double t) {
  double f = t - std::floor(t);
  return f < 1.0 ? f : 0.0;
}

/// Axis-aligned box domain in dimension d in {1,2,3}. Inactive coordinates
/// are pinned to [0,0] and ignored by all geometric predicates.
struct DomainBox {
  int dim = 0;
  Vec3 lower = Vec3::Zero();
  Vec3 upper = Vec3::Zero();

  DomainBox() = default;
  DomainBox(int d, const Vec3& lo, const Vec3& hi) : dim(d), lower(lo), upper(hi) {
    if (d < 1 || d > 3) throw InvalidArgument("DomainBox: dimension must be 1, 2 or 3");
    for (int a = 0; a < d; ++a)
      if (!(hi[a] > lo[a]) || !std::isfinite(lo[a]) || !std::isfinite(hi[a]))
        throw InvalidArgument("DomainBox: sides must be positive and finite");
    for (int a = d; a < 3; ++a) {
      lower[a] = 0.0;
      upper[a] = 0.0;
    }
  }

  static DomainBox unit(int d) {
    Vec3 hi = Vec3::Zero();
    for (int a = 0; a < d; ++a) hi[a] = 1.0;
    return DomainBox(d, Vec3::Zero(), hi);
  }

  double side(int axis) const { return upper[axis] - lower[axis]; }

  double volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= side(a);
    return v;
  }

  bool contains(const Vec3& x, double tol = 0.0) const {
    for (int a = 0; a < dim; ++a)
      if (x[a] < lower[a] - tol || x[a] > upper[a] + tol) return false;
    return true;
  }

  Vec3 center() const { return 0.5 * (lower + upper); }
};

}  // namespace lphom
