#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectra/linalg.hpp"
#include "spectra/model.hpp"
#include "spectra/outliers.hpp"
#include "spectra/stieltjes.hpp"

namespace spectra {

// Counter-style 64-bit generator (splitmix finalizer).  Streams derived with
// split_stream are independent, so replicates can run in any order and still
// reproduce the serial results bit for bit.
struct Rng64 {
    std::uint64_t state = 0;

    explicit Rng64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t x = (state += 0x9E3779B97F4A7C15ull);
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double normal();  // Box-Muller, caches the second deviate

  private:
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t split_stream(std::uint64_t seed, std::uint64_t index);

struct SimulationConfig {
    PopulationModel model;
    int replicates = 50;
    std::uint64_t seed = 12345;
    std::string entry_law = "gaussian";  // gaussian | rademacher | uniform
    bool coupled = true;
    OutlierParams params;  // classification settings for predictions

    SimulationConfig() { params.asymptotic = true; }
};

// Data matrix with i.i.d. entries q/sqrt(N), q standardized to mean 0 and
// variance 1 under the requested law.
Matrix draw_X(int M, int N, const std::string& law, Rng64& rng);

struct ReplicateRecord {
    std::vector<double> mu;           // deformed sample eigenvalues, descending
    std::vector<double> lambda;       // undeformed (coupled) eigenvalues
    std::vector<int> mu_counts;       // per-component split of mu
    std::vector<int> lambda_counts;
    std::vector<double> spike_location;  // matched eigenvalue per model spike
    std::vector<double> spike_overlap;   // squared overlap per model spike
    std::vector<std::vector<double>> sticking_gaps;  // [component][j-1]
    int interlacing_violations = 0;
    bool counts_match = false;   // component split equals the classical counts
    int outliers_detected = 0;   // eigenvalues beyond edge + buffer
};

struct SpikeSummary {
    int base_index = 0;
    double sigma_g = 0.0;
    double mean_location = 0.0;
    double se_location = 0.0;
    double mean_overlap = 0.0;
    double se_overlap = 0.0;
};

struct SimulationResult {
    SimulationConfig config;
    BulkStructure structure;
    SpikeClassification classification;
    std::vector<ReplicateRecord> reps;
    std::vector<SpikeSummary> spikes;  // aligned with model.spikes order
    long total_interlacing_violations = 0;
    int count_match_reps = 0;
    int outlier_count_reps = 0;  // replicates where detected == sum of r_plus
};

SimulationResult run(const SimulationConfig& config);

// Compares replicate statistics against the deterministic predictions:
// outlier locations and overlaps against their Monte Carlo standard errors,
// sticking gaps against N^{2 eps1}/(N alpha_plus), extremal non-outliers
// against the N^{-2/3} edge scale, and the interlacing/count invariants.
ValidationReport verify_theorems(const SimulationResult& result,
                                 const std::vector<OutlierPrediction>& predictions,
                                 double slack = 3.0);

// Rigidity of the undeformed spectrum against classical locations.  gammas
// comes from classical_locations on the same structure.
ValidationReport rigidity_check(const SimulationResult& result,
                                const std::vector<std::vector<double>>& gammas,
                                double eps1 = 0.02, double slack = 5.0);

}  // namespace spectra
