#pragma once

#include <string>
#include <vector>

#include "spectra/common.hpp"

namespace spectra {

inline constexpr int kDimCap = 2048;  // dense work above this is out of scope

// Dense row-major matrix. Plumbing type; no view semantics.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static Matrix identity(int n);
};

// Symmetric matrix, full storage. Builders keep the two triangles bit-identical.
struct SymMatrix {
  int n = 0;
  std::vector<double> a;

  SymMatrix() = default;
  explicit SymMatrix(int n_) : n(n_), a(static_cast<size_t>(n_) * n_, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

  // sets (i,j) and (j,i) together so symmetry is exact by construction
  void set(int i, int j, double v) {
    a[static_cast<size_t>(i) * n + j] = v;
    a[static_cast<size_t>(j) * n + i] = v;
  }

  static SymMatrix identity(int n);
  // (A + A^T)/2 of a square dense matrix
  static SymMatrix symmetrized(const Matrix& A);
};

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]; orthonormal
};

// Full symmetric eigendecomposition: Householder tridiagonalization followed by
// implicit-shift QL sweeps (iteration cap 60 per eigenvalue).
EigenDecomposition eigh(const SymMatrix& A);

// V diag(sqrt(lambda)) V^T with tiny negative eigenvalues clipped at zero.
SymMatrix sym_sqrt(const SymMatrix& A);

// T_{ij} = rho^{|i-j|}
SymMatrix toeplitz(double rho, int M);

// S_half * X * X^T * S_half, symmetrized. X is M x N with pre-scaled entries.
SymMatrix sample_covariance(const SymMatrix& S_half, const Matrix& X);

Matrix matmul(const Matrix& A, const Matrix& B);

// CSV: first line "rows,cols", then one row per line.
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

// CSV: one value per line; lines starting with '#' skipped.
void write_values_csv(const std::string& path, const std::vector<double>& v);
std::vector<double> read_values_csv(const std::string& path);

}  // namespace spectra
