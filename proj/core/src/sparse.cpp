#include "bctopt/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace bctopt {

SparseOperator SparseOperator::from_triplets(int n, std::vector<Triplet> triplets) {
  if (n < 0) throw SolveError("matrix size must be nonnegative");
  for (const auto& t : triplets)
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw SolveError("triplet index out of range");

  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseOperator m;
  m.row_ptr_.assign(n + 1, 0);
  m.cols_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::size_t i = 0;
  for (int row = 0; row < n; ++row) {
    while (i < triplets.size() && triplets[i].row == row) {
      const int col = triplets[i].col;
      double sum = 0.0;
      while (i < triplets.size() && triplets[i].row == row && triplets[i].col == col)
        sum += triplets[i++].value;
      m.cols_.push_back(col);
      m.values_.push_back(sum);
    }
    m.row_ptr_[row + 1] = static_cast<int>(m.cols_.size());
  }
  return m;
}

void SparseOperator::multiply(std::span<const double> x, std::span<double> y) const {
  const int n = size();
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw SolveError("matvec size mismatch");
  for (int row = 0; row < n; ++row) {
    double sum = 0.0;
    for (int k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) sum += values_[k] * x[cols_[k]];
    y[row] = sum;
  }
}

std::vector<double> SparseOperator::multiply(const std::vector<double>& x) const {
  std::vector<double> y(size());
  multiply(x, y);
  return y;
}

double SparseOperator::inner(std::span<const double> a, std::span<const double> b) const {
  const int n = size();
  if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n)
    throw SolveError("inner product size mismatch");
  double total = 0.0;
  for (int row = 0; row < n; ++row) {
    double sum = 0.0;
    for (int k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) sum += values_[k] * b[cols_[k]];
    total += a[row] * sum;
  }
  return total;
}

std::vector<double> SparseOperator::diagonal() const {
  std::vector<double> d(size(), 0.0);
  for (int row = 0; row < size(); ++row)
    for (int k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      if (cols_[k] == row) d[row] = values_[k];
  return d;
}

bool SparseOperator::is_symmetric(double tol) const {
  auto entry = [this](int row, int col) {
    for (int k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      if (cols_[k] == col) return values_[k];
    return 0.0;
  };
  for (int row = 0; row < size(); ++row)
    for (int k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      if (std::abs(values_[k] - entry(cols_[k], row)) > tol) return false;
  return true;
}

CgResult conjugate_gradient(const SparseOperator& a, std::span<const double> b,
                            std::vector<double>& x, const CgOptions& opt) {
  const int n = a.size();
  if (static_cast<int>(b.size()) != n) throw SolveError("right-hand side size mismatch");
  x.resize(n, 0.0);

  double b_norm = 0.0;
  for (double v : b) b_norm += v * v;
  b_norm = std::sqrt(b_norm);
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (d <= 0.0) throw SolveError("matrix diagonal is not positive");
    d = 1.0 / d;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  a.multiply(x, ap);
  for (int i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = 0.0;
  for (int i = 0; i < n; ++i) rz += r[i] * z[i];

  const long max_iter =
      static_cast<long>(opt.max_iteration_factor > 0 ? opt.max_iteration_factor : 10) * n;
  double rel = 0.0;
  for (long iter = 1; iter <= max_iter; ++iter) {
    a.multiply(p, ap);
    double p_ap = 0.0;
    for (int i = 0; i < n; ++i) p_ap += p[i] * ap[i];
    if (p_ap <= 0.0) throw SolveError("matrix is not positive definite (p^T A p <= 0)");
    const double step = rz / p_ap;
    for (int i = 0; i < n; ++i) x[i] += step * p[i];
    for (int i = 0; i < n; ++i) r[i] -= step * ap[i];

    double r_norm = 0.0;
    for (double v : r) r_norm += v * v;
    rel = std::sqrt(r_norm) / b_norm;
    if (rel <= opt.rel_tol) return {static_cast<int>(iter), rel};

    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    double rz_next = 0.0;
    for (int i = 0; i < n; ++i) rz_next += r[i] * z[i];
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolveError("conjugate gradient failed to converge: relative residual " +
                   std::to_string(rel) + " after " + std::to_string(max_iter) + " iterations");
}

}  // namespace bctopt
