#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "spectra/model.hpp"

namespace spectra {

// The inverse function of the limiting Stieltjes transform:
//   f(x) = -1/x + (1/c_N) sum_i w_i / (x + 1/sigma_i)
// over the distinct undeformed population atoms. Poles at 0 and -1/sigma_i.
struct FFunction {
  BulkSpectrum bulk;
  double c_N = 1.0;
  int N = 0;  // sample count used for classical locations / bulk counts

  int M() const { return bulk.M; }
  int q() const { return static_cast<int>(bulk.atoms.size()); }
};

FFunction make_f_function(const PopulationModel& model);
FFunction make_f_function(const BulkSpectrum& bulk, double c_N, int N = 0);

double f_eval(const FFunction& F, double x);
std::complex<double> f_eval(const FFunction& F, std::complex<double> x);
double f_derivative(const FFunction& F, double x, int order);
std::complex<double> f_derivative(const FFunction& F, std::complex<double> x,
                                  int order);

// Critical points and edges of the limiting spectral density.
//
// critical_points: x_1 >= ... >= x_{2p-1} from the intervals right of the
// poles, plus x_{2p} from I_0 appended last (its value may be positive when
// c_N < 1, or a sentinel when c_N = 1). edges: a_k = f(x_k), descending.
// Component k of the support is [a_{2k}, a_{2k-1}], k = 1 the rightmost.
struct BulkStructure {
  std::vector<double> critical_points;
  std::vector<double> edges;
  int p = 0;
  std::vector<std::pair<double, double>> support;  // (lo, hi) per component
  std::vector<int> bulk_counts;                    // N_k, sums to min(M, N)
  std::vector<double> masses;  // limiting fraction of sample eigenvalues per
                               // component; sums to min(1, 1/c_N)
  double c_N = 1.0;
  int M = 0, N = 0;
  bool has_sentinel = false;  // c_N = 1: x_{2p} stands for the critical at inf

  double scale() const { return edges.front() - edges.back(); }
};

BulkStructure find_bulk_structure(const FFunction& F);

struct StieltjesValue {
  std::complex<double> z;
  std::complex<double> m;
  bool converged = false;
  double residual = 0.0;
};

// Solves z = f(m) on the Im m >= 0 branch. For real z strictly outside the
// support, returns the real root on the monotone branch adjacent to the
// relevant edge. Real z inside the support is a domain error.
StieltjesValue solve_m(const FFunction& F, std::complex<double> z);
StieltjesValue solve_m(const FFunction& F, const BulkStructure& B,
                       std::complex<double> z);

// Continuous part of the limiting density at E, via (1/pi) Im m(E + i eta0),
// eta0 = 1e-7 * (a_1 - a_{2p}). Zero when E is farther than eta0 from the
// support.
double density(const FFunction& F, const BulkStructure& B, double E);

// Density over an ascending grid of energies; successive solves are seeded
// from the previous point, which is much faster than calling density() in a
// loop for fine grids. Entries off the support come back as exact zeros.
std::vector<double> density_grid(const FFunction& F, const BulkStructure& B,
                                 const std::vector<double>& Es);

// gamma_{k,j} solving N * integral_{gamma}^{a_{2k-1}} rho = j - 1/2, per
// component k (descending within each component).
std::vector<std::vector<double>> classical_locations(const FFunction& F,
                                                     const BulkStructure& B, int N);

// tau-regularity of the structure: edges bounded away from zero and from each
// other, critical points away from the poles, and a positive density floor on
// the middle 80% of each component.
ValidationReport check_edge_regularity(const BulkStructure& B, const FFunction& F,
                                       double tau);

}  // namespace spectra
