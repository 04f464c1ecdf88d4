#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lphom/geometry.hpp"

namespace lphom {

struct Triplet {
  std::int64_t row;
  std::int64_t col;
  double value;
};

/// Compressed sparse row matrix assembled by a deterministic ordered merge
/// of element triplets.
class CsrMatrix {
 public:
  static CsrMatrix from_triplets(std::int64_t n, std::vector<Triplet>&& triplets);

  std::int64_t rows() const { return n_; }
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  double symmetry_defect() const;

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int64_t>& cols() const { return col_; }
  const std::vector<double>& values() const { return val_; }

 private:
  std::int64_t n_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int64_t> col_;
  std::vector<double> val_;
};

struct CgOptions {
  double rel_tol = 1e-10;
  std::int64_t max_iterations = 0;  // 0: 50 * sqrt(n) heuristic cap
  /// Number of interleaved components whose per-component constants span the
  /// matrix kernel; they are projected out of rhs and residual every
  /// iteration (cell problems). 0 disables deflation.
  int deflate_components = 0;
};

struct CgResult {
  std::int64_t iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients; x holds the initial guess and
/// the solution. Throws SolverError when the iteration cap is hit or the
/// operator is detected indefinite.
CgResult cg_solve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                  const CgOptions& options = {});

}  // namespace lphom
