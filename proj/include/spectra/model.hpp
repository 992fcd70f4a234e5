#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spectra/common.hpp"
#include "spectra/linalg.hpp"

namespace spectra {

struct BulkStructure;  // stieltjes.hpp

// One distinct population eigenvalue of the undeformed covariance, with its
// multiplicity. Atoms are kept strictly descending.
struct BulkAtom {
  double sigma = 1.0;
  int multiplicity = 1;
};

struct BulkSpectrum {
  std::vector<BulkAtom> atoms;  // strictly descending sigma
  int M = 0;                    // total multiplicity

  double sigma_max() const { return atoms.front().sigma; }
  double sigma_min() const { return atoms.back().sigma; }
  // weight of atom i, i.e. multiplicity / M
  double weight(int i) const {
    return static_cast<double>(atoms[i].multiplicity) / M;
  }
  // full descending list with multiplicities expanded
  std::vector<double> expand() const;
};

// Collapses a raw eigenvalue list into atoms, merging values that agree to
// 1e-10 relative. Accepts any order.
BulkSpectrum build_bulk_from_eigenvalues(const std::vector<double>& values);

// M equally-spaced midpoint atoms on [lo, hi] (each with multiplicity 1).
BulkSpectrum build_uniform_bulk(double lo, double hi, int M);

struct ToeplitzPopulation {
  BulkSpectrum bulk;
  Matrix basis;  // columns: eigenvectors of the Toeplitz matrix, matching
                 // bulk.expand() order
};

// Spectrum and eigenbasis of the M x M matrix with entries rho^{|i-j|}.
ToeplitzPopulation build_toeplitz_population(double rho, int M);

// A finite-rank additive perturbation of one population direction:
// sigma_b -> sigma_g = sigma_b (1 + d). base_index is 1-based into the
// descending expanded population list.
struct Spike {
  int base_index = 0;
  double d = 0.0;
  double sigma_b = 0.0;
  double sigma_g = 0.0;
};

struct SpikeSet {
  std::vector<Spike> spikes;  // sorted by sigma_g descending, then base_index
  int r() const { return static_cast<int>(spikes.size()); }
};

inline constexpr int kSpikeCap = 32;

SpikeSet attach_spikes(const BulkSpectrum& bulk,
                       const std::vector<std::pair<int, double>>& index_d);
// same, but the perturbed value is given directly
SpikeSet attach_spikes_sigma(const BulkSpectrum& bulk,
                             const std::vector<std::pair<int, double>>& index_sigma_g);

struct PopulationModel {
  BulkSpectrum bulk;
  SpikeSet spikes;
  double c_N = 1.0;  // N / M
  int N = 0;
  std::optional<Matrix> basis;  // population eigenvectors if not coordinate

  int M() const { return bulk.M; }
  // descending spectrum of the deformed covariance (spikes substituted at
  // their base positions; the list is re-sorted)
  std::vector<double> population_eigenvalues() const;
};

PopulationModel make_model(const BulkSpectrum& bulk, const SpikeSet& spikes, int N,
                           std::optional<Matrix> basis = std::nullopt);

// Structural sanity of the model: sigma bounds, weight normalization, aspect
// ratio, basis orthonormality; with a bulk structure also the right-side
// spike separation conditions.
ValidationReport validate_assumptions(const PopulationModel& model, double tau = 0.01,
                                      const BulkStructure* structure = nullptr);

}  // namespace spectra
