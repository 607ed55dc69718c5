#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace multiap::numerics {

using cplx = std::complex<double>;

/// Dense row-major complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);

  static ComplexMatrix identity(std::size_t dim);
  static ComplexMatrix diagonal(const std::vector<double>& values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  ComplexMatrix adjoint() const;
  ComplexMatrix operator*(const ComplexMatrix& other) const;
  ComplexMatrix operator+(const ComplexMatrix& other) const;
  ComplexMatrix operator-(const ComplexMatrix& other) const;
  ComplexMatrix operator*(cplx scale) const;

  cplx trace() const;
  double frobenius_norm() const;
  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Square complex matrix checked to be Hermitian at construction.
class HermitianMatrix {
 public:
  /// Throws ValidationError when |H_ab - conj(H_ba)| > tol * max(1, max|H|)
  /// or the matrix is empty / non-square. The stored matrix is symmetrized.
  explicit HermitianMatrix(ComplexMatrix m, double tol = 1e-12);

  std::size_t dim() const noexcept { return m_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  cplx operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

 private:
  ComplexMatrix m_;
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // descending
  ComplexMatrix eigenvectors;       // columns
};

/// Cyclic complex Jacobi. Throws NumericError if sweeps do not converge.
EigenDecomposition eig_hermitian(const HermitianMatrix& h, std::size_t max_sweeps = 100);

/// ||H - V D V^dagger||_F
double reconstruction_error(const HermitianMatrix& h, const EigenDecomposition& e);

}  // namespace multiap::numerics
