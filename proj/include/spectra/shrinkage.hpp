#pragma once

#include <string>
#include <vector>

#include "spectra/model.hpp"
#include "spectra/outliers.hpp"
#include "spectra/stieltjes.hpp"

namespace spectra {

// One de-biasing pass for an observed eigenvalue mu sitting to the right of
// its component edge: l is the population eigenvalue recovered by inverting
// the forward map, c2/s2 split the sample eigenvector energy between the
// population direction and its complement.
struct ShrinkInputs {
    double mu = 0.0;
    double l = 0.0;
    double c2 = 0.0;
    double s2 = 0.0;
};

// Names accepted by apply_shrinker, in a stable order.
const std::vector<std::string>& shrinker_names();

// Inverts mu = f(x) on the increasing branch attached to the component edge
// just below mu and returns l = -1/x*.  mu inside the support (or exactly on
// an edge) is a domain error.
double invert_f_outlier(const FFunction& F, const BulkStructure& B, double mu);

// c^2(mu) = (1/l) f'(-1/l) / f(-1/l) with l = invert_f_outlier(mu), clamped
// to [0,1] (clamping is logged, not an error).
double cosine_sq(const FFunction& F, const BulkStructure& B, double mu);

// Runs the full pipeline mu -> (l, c2, s2).
ShrinkInputs shrink_pipeline(const FFunction& F, const BulkStructure& B, double mu);

// Loss-specific shrinker beta(l, c2).  Unknown name -> config error.
double apply_shrinker(const std::string& name, double l, double c2);

// Limiting Frobenius-optimal value for an isolated spike:
// d_hat = (sigma_g)^2 / f(-1/sigma_g).  When a BulkStructure is supplied the
// spike is required to be a genuine outlier (margin > 0).
double oracle_outlier_value(const FFunction& F, double sigma_g,
                            const BulkStructure* B = nullptr);

// Bulk entries of the oracle estimator.  For each observed eigenvalue mu_i,
// evaluates the empirical Stieltjes transform at z = mu_i + i*eta and returns
// 1 / (mu_i |m_hat(z)|^2).  The transform is taken over the N-dimensional
// companion spectrum: when fewer than N eigenvalues are supplied the missing
// ones are zeros and contribute (N-K)/(0-z).  eta < 0 selects the default
// N^{-1/2}.
std::vector<double> oracle_bulk_values(const std::vector<double>& sample_eigs,
                                       int N, double eta = -1.0);

// Same values computed through the M-dimensional transform m1 and the exact
// identity m = (c^-1 - 1 + c^-1 z m1) / z with c = N/M.  Agrees with
// oracle_bulk_values to rounding; kept as an independent cross-check.
std::vector<double> oracle_bulk_values_m1(const std::vector<double>& sample_eigs,
                                          int N, int M, double eta = -1.0);

struct ShrinkageEntry {
    int index = 0;        // position in the descending observed spectrum
    double mu = 0.0;
    std::string method;   // "outlier-formula" | "bulk" | "bulk-stieltjes"
    int component = 0;    // 1-based component the eigenvalue attaches to
    int rank = 0;         // 1-based rank among outliers of that component, 0 for bulk
    double l = 0.0;       // NaN for bulk entries
    double c2 = 0.0;      // NaN for bulk entries
    double beta = 0.0;
};

struct ShrinkagePlan {
    std::vector<ShrinkageEntry> entries;
    std::string loss;
    double buffer = 0.0;          // edge buffer used for outlier detection
    double eta = 0.0;             // only meaningful for the oracle bulk path
    int n_outliers = 0;
    // The bulk formula divides by the observed mu_i; kept explicit because the
    // alternative (dividing by the matching population value) changes results.
    std::string bulk_denominator = "mu";
};

// Classifies each observed eigenvalue against the component edges plus a
// N^{-2/3 + C*eps0} buffer, shrinks detected outliers through the pipeline,
// and fills bulk entries either with the model's own bulk values (rank-aware
// pass-through, default) or with oracle_bulk_values when loss is
// "Frobenius-oracle".  In the oracle mode detected outliers are matched to
// model spikes by (component, rank) and use oracle_outlier_value; unmatched
// ones fall back to the Frobenius pipeline.
ShrinkagePlan shrink_spectrum(const std::vector<double>& sample_eigs,
                              const PopulationModel& model,
                              const BulkStructure& B,
                              const std::string& loss,
                              const OutlierParams& params = OutlierParams(),
                              double eta = -1.0);

}  // namespace spectra
