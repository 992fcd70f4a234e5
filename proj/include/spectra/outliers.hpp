#pragma once

#include <string>
#include <vector>

#include "spectra/stieltjes.hpp"

namespace spectra {

// Small constants of the finite-N statements. c0 < 0 means "auto": the
// minimum of 0.01 and half the smallest inter-component critical gap.
// asymptotic = true replaces the N^{-1/3+eps0} outlier threshold by 0, i.e.
// classifies by the sign of the margin alone.
struct OutlierParams {
  double eps0 = 0.05;
  double eps1 = 0.02;
  double Cw = 2.0;  // multiplies eps0/eps1 inside half-width exponents
  double c0 = -1.0;
  bool asymptotic = false;
};

struct SpikeClass {
  int base_index = 0;
  double sigma_g = 0.0;
  double x_g = 0.0;  // -1/sigma_g
  int component = 0;  // 1-based, 1 = rightmost bulk component
  int rank = 0;       // 1-based among spikes attached to the same component
  double margin = 0.0;  // x_g - x_{2i-1}; positive means right of the edge
  bool is_outlier = false;
  double threshold_used = 0.0;
};

struct SpikeClassification {
  std::vector<SpikeClass> spikes;  // aligned with model.spikes order
  std::vector<int> r_i;            // spikes attached per component
  std::vector<int> r_plus_i;       // outliers per component
  int r = 0;
  double c0 = 0.0;
  double eps0 = 0.0;
  bool asymptotic = false;
};

SpikeClassification classify_spikes(const PopulationModel& model,
                                    const BulkStructure& B, double eps0, double c0);
SpikeClassification classify_spikes(const PopulationModel& model,
                                    const BulkStructure& B,
                                    const OutlierParams& params = {});

struct OutlierPrediction {
  int spike_index = 0;  // into model.spikes order
  int component = 0;
  int rank = 0;
  bool is_outlier = false;
  double margin = 0.0;
  double location = 0.0;    // f(-1/sigma_g) for outliers, else the edge value
  double half_width = 0.0;  // N^{-1/2+C eps0} margin^{1/2}, or N^{-2/3+C eps0}
  double edge_fallback = 0.0;  // f(x_{2i-1}) of the attached component
  double overlap = 0.0;        // u for outliers, 0 otherwise
  double overlap_error = 0.0;  // diagonal R bound for outliers, 0 otherwise
};

std::vector<OutlierPrediction> predict_outliers(const PopulationModel& model,
                                                const BulkStructure& B,
                                                const SpikeClassification& cls,
                                                const OutlierParams& params = {});

// u = (1/sigma_g) f'(-1/sigma_g) / f(-1/sigma_g); requires a positive margin.
double overlap_limit(const PopulationModel& model, const BulkStructure& B,
                     const Spike& spike);

// Two-spike overlap error kernel evaluated exactly as stated: the diagonal
// N^{-1/2} margin^{-1/2} term plus N^{-1}(nu^{-2} + [same] margin^{-2}).
double overlap_error_bound(const Spike& spike1, const Spike& spike2,
                           const PopulationModel& model, const BulkStructure& B,
                           double nu, int N);

struct ProjectionResult {
  double value = 0.0;  // sum over A of u_{i,j} w_{i,j}^2
  double bound = 0.0;  // kernel double sum over all outlier pairs
};

// w holds the coordinates of the test vector on the spike directions, aligned
// with model.spikes order; A holds 0-based indices into the same order and
// must contain outliers only.
ProjectionResult projection_limit(const std::vector<double>& w,
                                  const std::vector<int>& A,
                                  const PopulationModel& model,
                                  const BulkStructure& B,
                                  const OutlierParams& params = {});

struct StickingBound {
  int component = 0;
  double alpha_plus = 0.0;  // +inf when the component carries no spikes
  double bound = 0.0;       // N^{2 eps1} / (N alpha_plus)
  std::string regime;       // "sticking" or "rigidity"
};

std::vector<StickingBound> sticking_bounds(const PopulationModel& model,
                                           const BulkStructure& B, int N,
                                           double eps1);

// Rigidity scale N^{-2/3+eps1} (j ^ (N_i+1-j))^{-1/3} for unspiked components.
double rigidity_scale(int N, int N_i, int j, double eps1);

// Bound on the squared overlap of an outlier spike direction with the bulk
// eigenvector (l, j): N^{6 eps1} / (N (kappa_d + margin^2)).
double nonoutlier_vector_bound(const Spike& spike, int l, int j,
                               const PopulationModel& model,
                               const BulkStructure& B, int N, double eps1);

// Generalized-vector form: sum of C w_k^2 * bound over outlier spikes k.
double nonoutlier_vector_bound_general(const std::vector<double>& w, int l, int j,
                                       const PopulationModel& model,
                                       const BulkStructure& B, int N, double eps1,
                                       double C = 1.0);

// nu_{i,j}(A) for every outlier spike against the separation requirement
// nu >= margin^{-1/2} N^{-1/2+eps0}.
ValidationReport check_nonoverlap(const PopulationModel& model,
                                  const BulkStructure& B,
                                  const std::vector<int>& A, double eps0, int N);

// nu_{i,j}(A): min |x_g - x_g'| over outliers on the other side of A from the
// given spike; +inf when that set is empty.
double nu_of_spike(const SpikeClassification& cls, int spike_index,
                   const std::vector<int>& A);

}  // namespace spectra
