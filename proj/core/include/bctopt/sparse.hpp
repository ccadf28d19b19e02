#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bctopt {

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Square sparse matrix in compressed row storage.  Rows are sorted by
/// column and duplicate triplets are summed on construction.
class SparseOperator {
 public:
  SparseOperator() = default;
  static SparseOperator from_triplets(int n, std::vector<Triplet> triplets);

  int size() const { return static_cast<int>(row_ptr_.size()) - 1; }
  int nonzero_count() const { return static_cast<int>(values_.size()); }

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(const std::vector<double>& x) const;

  /// a^T A b.
  double inner(std::span<const double> a, std::span<const double> b) const;

  std::vector<double> diagonal() const;
  bool is_symmetric(double tol) const;

  std::span<const int> row_pointers() const { return row_ptr_; }
  std::span<const int> columns() const { return cols_; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<int> row_ptr_ = {0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

struct CgOptions {
  double rel_tol = 1e-10;
  /// Iteration cap as a multiple of the unknown count (0 keeps the default).
  int max_iteration_factor = 10;
};

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradient for symmetric positive
/// definite systems.  x holds the initial guess on entry and the solution
/// on exit.  Throws SolveError with the final residual if the relative
/// residual fails to reach opt.rel_tol within the iteration cap.
CgResult conjugate_gradient(const SparseOperator& a, std::span<const double> b,
                            std::vector<double>& x, const CgOptions& opt = {});

}  // namespace bctopt
