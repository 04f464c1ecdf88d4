#include "lphom/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace lphom {

CsrMatrix CsrMatrix::from_triplets(std::int64_t n, std::vector<Triplet>&& triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t i = 0; i < triplets.size();) {
    std::size_t j = i;
    double acc = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col) {
      acc += triplets[j].value;
      ++j;
    }
    m.col_.push_back(triplets[i].col);
    m.val_.push_back(acc);
    ++m.row_ptr_[static_cast<std::size_t>(triplets[i].row) + 1];
    i = j;
  }
  for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::int64_t r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (std::int64_t k = row_ptr_[static_cast<std::size_t>(r)];
         k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
      acc += val_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_[static_cast<std::size_t>(k)])];
    y[static_cast<std::size_t>(r)] = acc;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(n_), 0.0);
  for (std::int64_t r = 0; r < n_; ++r)
    for (std::int64_t k = row_ptr_[static_cast<std::size_t>(r)];
         k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
      if (col_[static_cast<std::size_t>(k)] == r) d[static_cast<std::size_t>(r)] = val_[static_cast<std::size_t>(k)];
  return d;
}

double CsrMatrix::symmetry_defect() const {
  // max |A_ij - A_ji| via a transposed lookup; O(nnz log) would need maps,
  // so walk both triangles through binary search in rows.
  double defect = 0.0;
  for (std::int64_t r = 0; r < n_; ++r) {
    for (std::int64_t k = row_ptr_[static_cast<std::size_t>(r)];
         k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
      std::int64_t c = col_[static_cast<std::size_t>(k)];
      if (c < r) continue;
      double vij = val_[static_cast<std::size_t>(k)];
      double vji = 0.0;
      auto beg = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[static_cast<std::size_t>(c)]);
      auto end = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[static_cast<std::size_t>(c) + 1]);
      auto it = std::lower_bound(beg, end, r);
      if (it != end && *it == r)
        vji = val_[static_cast<std::size_t>(std::distance(col_.begin(), it))];
      defect = std::max(defect, std::abs(vij - vji));
    }
  }
  return defect;
}

namespace {

void deflate(std::span<double> v, int components) {
  if (components <= 0) return;
  std::size_t nodes = v.size() / static_cast<std::size_t>(components);
  for (int c = 0; c < components; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) mean += v[i * components + c];
    mean /= static_cast<double>(nodes);
    for (std::size_t i = 0; i < nodes; ++i) v[i * components + c] -= mean;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

CgResult cg_solve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                  const CgOptions& options) {
  const std::size_t n = static_cast<std::size_t>(A.rows());
  std::vector<double> r(n), z(n), p(n), Ap(n);
  std::vector<double> rhs(b.begin(), b.end());
  deflate(rhs, options.deflate_components);

  std::vector<double> diag = A.diagonal();
  for (double& d : diag) {
    if (d <= 0.0) d = 1.0;  // guarded; true indefiniteness is caught below
  }

  A.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
  deflate(r, options.deflate_components);

  double bnorm = std::sqrt(dot(rhs, rhs));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0, true};
  }

  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = dot(r, z);

  std::int64_t cap = options.max_iterations > 0
                         ? options.max_iterations
                         : 50 * static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)) + 1);
  CgResult res;
  for (std::int64_t it = 0; it < cap; ++it) {
    A.multiply(p, Ap);
    deflate(Ap, options.deflate_components);
    double pAp = dot(p, Ap);
    if (pAp <= 0.0) throw SolverError("cg_solve: operator not positive definite on the search space");
    double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    deflate(r, options.deflate_components);
    double rnorm = std::sqrt(dot(r, r));
    res.iterations = it + 1;
    res.rel_residual = rnorm / bnorm;
    if (res.rel_residual <= options.rel_tol) {
      res.converged = true;
      deflate(x, options.deflate_components);
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    double rz_next = dot(r, z);
    double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("cg_solve: iteration cap reached before tolerance");
}

}  // namespace lphom
