#include "spectra/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace spectra {

LogLevel log_level() {
  static LogLevel lvl = [] {
    const char* e = std::getenv("SPECTRA_LOG");
    if (!e) return LogLevel::warn;
    std::string s(e);
    if (s == "error") return LogLevel::error;
    if (s == "info") return LogLevel::info;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::warn;
  }();
  return lvl;
}

void log_msg(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static const char* tag[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[spectra:%s] %s\n", tag[static_cast<int>(level)], msg.c_str());
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::symmetrized(const Matrix& A) {
  if (A.rows != A.cols) throw Error(Code::validation, "symmetrized: matrix not square");
  SymMatrix s(A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j <= i; ++j) s.set(i, j, 0.5 * (A(i, j) + A(j, i)));
  return s;
}

namespace {

void check_dim(int n, const char* who) {
  if (n <= 0) throw Error(Code::validation, std::string(who) + ": empty matrix");
  if (n > kDimCap)
    throw Error(Code::validation,
                std::string(who) + ": dimension " + std::to_string(n) +
                    " exceeds cap " + std::to_string(kDimCap));
}

// Householder reduction to tridiagonal form with accumulated transformations.
// On exit z holds the orthogonal matrix, d the diagonal, e the subdiagonal
// (e[0] unused).
void tred2(Matrix& z, std::vector<double>& d, std::vector<double>& e) {
  const int n = z.rows;
  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::fabs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z(i, j);
          const double gj = e[j] - hh * f;
          e[j] = gj;
          for (int k = 0; k <= j; ++k) z(j, k) -= (f * e[k] + gj * z(i, k));
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += z(i, k) * z(k, j);
        for (int k = 0; k <= l; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal (d, e), rotations applied to z columns.
void tql2(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
  const int n = static_cast<int>(d.size());
  constexpr int kIterCap = 60;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd || std::fabs(e[m]) < 1e-300) break;
      }
      if (m != l) {
        if (iter++ == kIterCap)
          throw Error(Code::numeric, "eigh: QL failed to converge within 60 sweeps");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

EigenDecomposition eigh(const SymMatrix& A) {
  check_dim(A.n, "eigh");
  const int n = A.n;
  Matrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = A(i, j);
      if (!std::isfinite(v)) throw Error(Code::validation, "eigh: non-finite entry");
      z(i, j) = v;
    }
  std::vector<double> d(n, 0.0), e(n, 0.0);
  tred2(z, d, e);
  tql2(d, e, z);

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return d[i] > d[j]; });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = d[idx[k]];
    for (int i = 0; i < n; ++i) out.vectors(i, k) = z(i, idx[k]);
  }
  return out;
}

SymMatrix sym_sqrt(const SymMatrix& A) {
  EigenDecomposition ed = eigh(A);
  const double top = ed.values.empty() ? 0.0 : std::fabs(ed.values.front());
  const double tol = 1e-10 * std::max(1.0, top);
  for (double& v : ed.values) {
    if (v < -tol)
      throw Error(Code::domain,
                  "sym_sqrt: matrix has a significantly negative eigenvalue " +
                      std::to_string(v));
    v = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  const int n = A.n;
  SymMatrix out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += ed.vectors(i, k) * ed.values[k] * ed.vectors(j, k);
      out.set(i, j, s);
    }
  return out;
}

SymMatrix toeplitz(double rho, int M) {
  check_dim(M, "toeplitz");
  if (rho < 0.0 || rho >= 1.0)
    throw Error(Code::validation, "toeplitz: rho must be in [0,1)");
  SymMatrix T(M);
  std::vector<double> pw(M);
  pw[0] = 1.0;
  for (int k = 1; k < M; ++k) pw[k] = pw[k - 1] * rho;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j <= i; ++j) T.set(i, j, pw[i - j]);
  return T;
}

SymMatrix sample_covariance(const SymMatrix& S_half, const Matrix& X) {
  const int M = S_half.n;
  if (X.rows != M) throw Error(Code::validation, "sample_covariance: dimension mismatch");
  const int N = X.cols;
  // G = X X^T
  Matrix G(M, M);
  for (int i = 0; i < M; ++i) {
    for (int k = 0; k < N; ++k) {
      const double xik = X(i, k);
      if (xik == 0.0) continue;
      const double* xs = &X.a[static_cast<size_t>(0) * N + k];
      for (int j = 0; j <= i; ++j) G(i, j) += xik * xs[static_cast<size_t>(j) * N];
    }
    for (int j = 0; j < i; ++j) G(j, i) = G(i, j);
  }
  // Q = S G S
  Matrix T(M, M);
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < M; ++k) {
      const double s = S_half(i, k);
      if (s == 0.0) continue;
      for (int j = 0; j < M; ++j) T(i, j) += s * G(k, j);
    }
  Matrix Q(M, M);
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < M; ++k) {
      const double t = T(i, k);
      if (t == 0.0) continue;
      for (int j = 0; j < M; ++j) Q(i, j) += t * S_half(k, j);
    }
  return SymMatrix::symmetrized(Q);
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  if (A.cols != B.rows) throw Error(Code::validation, "matmul: dimension mismatch");
  Matrix C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw Error(Code::io, "cannot open for writing: " + path);
  out << m.rows << "," << m.cols << "\n";
  out.precision(17);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      if (j) out << ",";
      out << m(i, j);
    }
    out << "\n";
  }
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Code::io, "cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(Code::io, "empty matrix file: " + path);
  int rows = 0, cols = 0;
  {
    std::istringstream hs(line);
    char comma = 0;
    if (!(hs >> rows >> comma >> cols) || comma != ',' || rows <= 0 || cols <= 0)
      throw Error(Code::io, "bad matrix header in " + path);
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw Error(Code::io, "truncated matrix file: " + path);
    std::istringstream ls(line);
    std::string cell;
    for (int j = 0; j < cols; ++j) {
      if (!std::getline(ls, cell, ',')) throw Error(Code::io, "short row in " + path);
      m(i, j) = std::stod(cell);
    }
  }
  return m;
}

void write_values_csv(const std::string& path, const std::vector<double>& v) {
  std::ofstream out(path);
  if (!out) throw Error(Code::io, "cannot open for writing: " + path);
  out.precision(17);
  for (double x : v) out << x << "\n";
}

std::vector<double> read_values_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Code::io, "cannot open: " + path);
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    // tolerate a trailing comma column
    const auto comma = line.find(',');
    v.push_back(std::stod(comma == std::string::npos ? line : line.substr(0, comma)));
  }
  return v;
}

}  // namespace spectra
