#include "lphom/tensor4.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace lphom {

namespace {
constexpr int kPair[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
const double kSqrt2 = std::sqrt(2.0);
}  // namespace

Tensor4 Tensor4::isotropic(double lambda, double mu) {
  Tensor4 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          t(i, j, k, l) = lambda * (i == j) * (k == l) +
                          mu * ((i == k) * (j == l) + (i == l) * (j == k));
  return t;
}

Tensor4 Tensor4::from_voigt(const Mat6& C) {
  Tensor4 t;
  for (int I = 0; I < 6; ++I) {
    for (int J = 0; J < 6; ++J) {
      int i = kPair[I][0], j = kPair[I][1], k = kPair[J][0], l = kPair[J][1];
      double v = C(I, J);
      t(i, j, k, l) = v;
      t(j, i, k, l) = v;
      t(i, j, l, k) = v;
      t(j, i, l, k) = v;
    }
  }
  return t;
}

Mat6 Tensor4::voigt() const {
  Mat6 C;
  for (int I = 0; I < 6; ++I)
    for (int J = 0; J < 6; ++J)
      C(I, J) = (*this)(kPair[I][0], kPair[I][1], kPair[J][0], kPair[J][1]);
  return C;
}

Mat6 Tensor4::mandel() const {
  Mat6 M = voigt();
  for (int I = 0; I < 6; ++I)
    for (int J = 0; J < 6; ++J) {
      double f = (I >= 3 ? kSqrt2 : 1.0) * (J >= 3 ? kSqrt2 : 1.0);
      M(I, J) *= f;
    }
  return M;
}

Tensor4 Tensor4::from_mandel(const Mat6& M) {
  Mat6 C = M;
  for (int I = 0; I < 6; ++I)
    for (int J = 0; J < 6; ++J) {
      double f = (I >= 3 ? kSqrt2 : 1.0) * (J >= 3 ? kSqrt2 : 1.0);
      C(I, J) /= f;
    }
  return from_voigt(C);
}

Mat3 Tensor4::apply(const Mat3& xi) const {
  Mat3 s = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s(i, j) += (*this)(i, j, k, l) * xi(k, l);
  return s;
}

double Tensor4::quadratic_form(const Mat3& xi) const {
  return (apply(xi).array() * xi.array()).sum();
}

Tensor4 Tensor4::rotated(const Mat3& Q) const {
  Tensor4 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double acc = 0.0;
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d)
                  acc += Q(i, a) * Q(j, b) * Q(k, c) * Q(l, d) * (*this)(a, b, c, d);
          out(i, j, k, l) = acc;
        }
  return out;
}

Tensor4 Tensor4::inverse() const {
  Mat6 M = mandel();
  Eigen::FullPivLU<Mat6> lu(M);
  if (!lu.isInvertible()) throw InvalidArgument("Tensor4: singular tensor has no inverse");
  return from_mandel(lu.inverse());
}

double Tensor4::minor_symmetry_defect() const {
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          d = std::max(d, std::abs((*this)(i, j, k, l) - (*this)(j, i, k, l)));
          d = std::max(d, std::abs((*this)(i, j, k, l) - (*this)(i, j, l, k)));
        }
  return d;
}

double Tensor4::major_symmetry_defect() const {
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          d = std::max(d, std::abs((*this)(i, j, k, l) - (*this)(k, l, i, j)));
  return d;
}

double Tensor4::min_eigenvalue() const {
  Mat6 M = 0.5 * (mandel() + mandel().transpose());
  Eigen::SelfAdjointEigenSolver<Mat6> es(M);
  return es.eigenvalues().minCoeff();
}

double Tensor4::min_probe_rayleigh() const {
  double m = 1e300;
  for (const Mat3& xi : probe_basis()) {
    double q = quadratic_form(xi) / xi.squaredNorm();
    m = std::min(m, q);
  }
  return m;
}

double Tensor4::frobenius_norm() const {
  double s = 0.0;
  for (double v : e_) s += v * v;
  return std::sqrt(s);
}

void Tensor4::validate(const char* name, double sym_tol) const {
  double scale = std::max(1.0, frobenius_norm());
  auto index_str = [](int i, int j, int k, int l) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + "," +
           std::to_string(l) + ")";
  };
  // minor symmetries first so a joint violation is reported as such
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          if (std::abs((*this)(i, j, k, l) - (*this)(j, i, k, l)) > sym_tol * scale)
            throw InvalidArgument(std::string(name) + ": minor symmetry E_ijkl = E_jikl violated at " +
                                  index_str(i, j, k, l));
          if (std::abs((*this)(i, j, k, l) - (*this)(i, j, l, k)) > sym_tol * scale)
            throw InvalidArgument(std::string(name) + ": minor symmetry E_ijkl = E_ijlk violated at " +
                                  index_str(i, j, k, l));
        }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          if (std::abs((*this)(i, j, k, l) - (*this)(k, l, i, j)) > sym_tol * scale)
            throw InvalidArgument(std::string(name) + ": major symmetry E_ijkl = E_klij violated at " +
                                  index_str(i, j, k, l));
  if (min_eigenvalue() <= 0.0)
    throw InvalidArgument(std::string(name) + ": not positive definite on symmetric matrices");
}

Tensor4 Tensor4::operator+(const Tensor4& other) const {
  Tensor4 t;
  for (int n = 0; n < 81; ++n) t.e_[n] = e_[n] + other.e_[n];
  return t;
}

Tensor4 Tensor4::operator-(const Tensor4& other) const {
  Tensor4 t;
  for (int n = 0; n < 81; ++n) t.e_[n] = e_[n] - other.e_[n];
  return t;
}

Tensor4 Tensor4::operator*(double s) const {
  Tensor4 t;
  for (int n = 0; n < 81; ++n) t.e_[n] = e_[n] * s;
  return t;
}

std::array<Mat3, 6> probe_basis() {
  std::array<Mat3, 6> basis;
  for (int I = 0; I < 6; ++I) {
    Mat3 m = Mat3::Zero();
    int i = kPair[I][0], j = kPair[I][1];
    m(i, j) += 0.5;
    m(j, i) += 0.5;
    basis[static_cast<std::size_t>(I)] = m;
  }
  return basis;
}

TensorBounds voigt_reuss_bounds(double theta, const Tensor4& E1, const Tensor4& E2) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("voigt_reuss_bounds: theta in [0,1]");
  TensorBounds b;
  b.voigt = E1 * theta + E2 * (1.0 - theta);
  Tensor4 hinv = E1.inverse() * theta + E2.inverse() * (1.0 - theta);
  b.reuss = hinv.inverse();
  return b;
}

LaminateScalar laminate_effective(double a1, double a2, double fraction1) {
  double f = fraction1;
  return {1.0 / (f / a1 + (1.0 - f) / a2), f * a1 + (1.0 - f) * a2};
}

}  // namespace lphom
