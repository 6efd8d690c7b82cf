#include "swimfem/sparse_lu.hpp"

#include "swimfem/errors.hpp"

#include <umfpack.h>

#include <string>

namespace swimfem {

SparseLU::~SparseLU() { release(); }

void SparseLU::release() {
  if (numeric_) umfpack_di_free_numeric(&numeric_);
  numeric_ = nullptr;
}

void SparseLU::factorize(const Eigen::SparseMatrix<double>& matrix) {
  release();
  if (matrix.rows() != matrix.cols()) throw NumericalError("LU factorization needs a square matrix");
  matrix_ = matrix;
  matrix_.makeCompressed();
  const int n = static_cast<int>(matrix_.rows());
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  // Saddle-point systems have a symmetric pattern; the symmetric strategy
  // cuts the fill several times over the automatic choice.
  control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  control[UMFPACK_ORDERING] = UMFPACK_ORDERING_AMD;
  void* symbolic = nullptr;
  int status = umfpack_di_symbolic(n, n, matrix_.outerIndexPtr(), matrix_.innerIndexPtr(), matrix_.valuePtr(),
                                   &symbolic, control, info);
  if (status != UMFPACK_OK) {
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
    throw NumericalError("sparse LU symbolic analysis failed (status " + std::to_string(status) + ")");
  }
  status = umfpack_di_numeric(matrix_.outerIndexPtr(), matrix_.innerIndexPtr(), matrix_.valuePtr(), symbolic,
                              &numeric_, control, info);
  umfpack_di_free_symbolic(&symbolic);
  rcond_ = info[UMFPACK_RCOND];
  if (status == UMFPACK_WARNING_singular_matrix || !(rcond_ > 1e-15)) {
    release();
    throw NumericalError("singular matrix (reciprocal condition estimate " + std::to_string(rcond_) + ")");
  }
  if (status != UMFPACK_OK) {
    release();
    throw NumericalError("sparse LU factorization failed (status " + std::to_string(status) + ")");
  }
}

Eigen::VectorXd SparseLU::solve(const Eigen::VectorXd& rhs) const {
  if (!numeric_) throw NumericalError("solve called without a factorization");
  Eigen::VectorXd x(rhs.size());
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  control[UMFPACK_IRSTEP] = 0;
  const int status = umfpack_di_solve(UMFPACK_A, matrix_.outerIndexPtr(), matrix_.innerIndexPtr(), matrix_.valuePtr(),
                                      x.data(), rhs.data(), numeric_, control, info);
  if (status != UMFPACK_OK) throw NumericalError("sparse LU solve failed (status " + std::to_string(status) + ")");
  return x;
}

double SparseLU::backward_error(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& b) {
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) row_sum[it.row()] += std::abs(it.value());
  const double anorm = row_sum.size() ? row_sum.maxCoeff() : 0.0;
  const double denom = anorm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  const double r = (a * x - b).lpNorm<Eigen::Infinity>();
  return denom > 0.0 ? r / denom : r;
}

}  // namespace swimfem
