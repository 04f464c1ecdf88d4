#include "lphom/transform.hpp"

#include <cmath>

#include "lphom/parallel.hpp"

namespace lphom {

RotationAngleField RotationAngleField::constant(double value) {
  return {[value](double) { return value; }, [](double) { return 0.0; },
          [](double) { return 0.0; }};
}

RotationAngleField RotationAngleField::default_sin() {
  const double q = M_PI / 4.0;  // gamma = q*(1+sin(pi t))
  return {[q](double t) { return q * (1.0 + std::sin(M_PI * t)); },
          [q](double t) { return q * M_PI * std::cos(M_PI * t); },
          [q](double t) { return -q * M_PI * M_PI * std::sin(M_PI * t); }};
}

RotationAngleField RotationAngleField::linear() {
  return {[](double t) { return t; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
}

void RotationAngleField::check_derivatives(double lo, double hi, int samples, double tol) const {
  const double h = 1e-6 * std::max(1.0, hi - lo);
  for (int i = 0; i < samples; ++i) {
    double t = lo + (hi - lo) * (i + 0.5) / samples;
    double fd1 = (gamma(t + h) - gamma(t - h)) / (2 * h);
    double fd2 = (gamma(t + h) - 2 * gamma(t) + gamma(t - h)) / (h * h);
    if (std::abs(fd1 - dgamma(t)) > tol * std::max(1.0, std::abs(fd1)))
      throw InvalidArgument("RotationAngleField: dgamma disagrees with finite differences");
    if (std::abs(fd2 - ddgamma(t)) > 1e3 * tol * std::max(1.0, std::abs(fd2)))
      throw InvalidArgument("RotationAngleField: ddgamma disagrees with finite differences");
  }
}

Mat3 rotation(double alpha) {
  const double c = std::cos(alpha), s = std::sin(alpha);
  Mat3 r;
  r << c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

double shear_value(const Vec3& x, const RotationAngleField& gamma) {
  const double g = gamma.gamma(x[2]);
  return gamma.dgamma(x[2]) * (std::cos(g) * x[0] + std::sin(g) * x[1]);
}

Mat3 shear(const Vec3& x, const RotationAngleField& gamma) {
  Mat3 w = Mat3::Identity();
  w(1, 2) = shear_value(x, gamma);
  return w;
}

TransformationField TransformationField::identity() {
  return {[](const Vec3&) { return Mat3::Identity(); },
          [](const Vec3&) { return Mat3::Identity(); }, 1.0, 1.0, 0.0};
}

TransformationField TransformationField::exp_1d() {
  auto d = [](const Vec3& x) {
    Mat3 m = Mat3::Identity();
    m(0, 0) = std::exp(x[0]);
    return m;
  };
  auto dinv = [](const Vec3& x) {
    Mat3 m = Mat3::Identity();
    m(0, 0) = std::exp(-x[0]);
    return m;
  };
  return {d, dinv, 1.0, std::exp(1.0), std::exp(1.0)};
}

TransformationField TransformationField::rotation_2d(const RotationAngleField& gamma) {
  auto rot2 = [gamma](double t) {
    const double c = std::cos(gamma.gamma(t)), s = std::sin(gamma.gamma(t));
    Mat3 m = Mat3::Identity();
    m(0, 0) = c;
    m(0, 1) = -s;
    m(1, 0) = s;
    m(1, 1) = c;
    return m;
  };
  auto d = [rot2](const Vec3& x) { return rot2(x[1]); };
  auto dinv = [rot2](const Vec3& x) { return rot2(x[1]).transpose().eval(); };
  return {d, dinv, 1.0, 1.0, M_PI};
}

TransformationField TransformationField::plywood_lp(const RotationAngleField& gamma) {
  auto d = [gamma](const Vec3& x) { return rotation(gamma.gamma(x[2])).transpose().eval(); };
  auto dinv = [gamma](const Vec3& x) { return rotation(gamma.gamma(x[2])); };
  return {d, dinv, 1.0, 1.0, M_PI};
}

TransformationField TransformationField::plywood_np(const RotationAngleField& gamma) {
  auto d = [gamma](const Vec3& x) {
    return (rotation(gamma.gamma(x[2])).transpose() * shear(x, gamma)).eval();
  };
  auto dinv = [gamma](const Vec3& x) {
    Mat3 winv = Mat3::Identity();
    winv(1, 2) = -shear_value(x, gamma);
    return (winv * rotation(gamma.gamma(x[2]))).eval();
  };
  return {d, dinv, 1.0, 1.0, 2.0 * M_PI};
}

void TransformationField::check(const DomainBox& domain, int samples, double tol) const {
  Rng rng(0x5eed);
  for (int i = 0; i < samples; ++i) {
    Vec3 x = Vec3::Zero();
    for (int a = 0; a < domain.dim; ++a)
      x[a] = rng.uniform(domain.lower[a], domain.upper[a]);
    Mat3 prod = D(x) * Dinv(x);
    if ((prod - Mat3::Identity()).cwiseAbs().maxCoeff() > tol)
      throw InvalidArgument("TransformationField: D * Dinv != I at a sampled point");
    double det = std::abs(D(x).determinant());
    if (det < det_lower - 1e-9 || det > det_upper + 1e-9)
      throw InvalidArgument("TransformationField: |det D| outside declared bounds");
  }
}

}  // namespace lphom
