#pragma once

#include <Eigen/Sparse>

namespace swimfem {

/// Sparse LU factorization backed by UMFPACK.
class SparseLU {
 public:
  SparseLU() = default;
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;
  ~SparseLU();

  /// Throws NumericalError when the matrix is singular to working precision.
  void factorize(const Eigen::SparseMatrix<double>& matrix);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// Reciprocal condition number estimate of the last factorization.
  double rcond() const { return rcond_; }

  /// ||A x - b||_inf / (||A||_inf ||x||_inf + ||b||_inf).
  static double backward_error(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& b);

 private:
  void release();

  Eigen::SparseMatrix<double> matrix_;
  void* numeric_ = nullptr;
  double rcond_ = 0.0;
};

}  // namespace swimfem
