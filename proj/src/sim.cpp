#include "spectra/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "spectra/common.hpp"

namespace spectra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * v[lo] + w * v[hi];
}

// Population eigenvalues by coordinate position (not re-sorted): the spike
// replaces the bulk value at its base position.
std::vector<double> position_values(const PopulationModel& model, bool deformed) {
    std::vector<double> vals = model.bulk.expand();
    if (deformed) {
        for (const auto& s : model.spikes.spikes) {
            vals[static_cast<size_t>(s.base_index - 1)] = s.sigma_g;
        }
    }
    return vals;
}

SymMatrix make_sigma_half(const PopulationModel& model, bool deformed) {
    const int M = model.M();
    const std::vector<double> vals = position_values(model, deformed);
    SymMatrix S(M);
    if (!model.basis) {
        for (int i = 0; i < M; ++i) S.set(i, i, std::sqrt(vals[i]));
        return S;
    }
    const Matrix& U = *model.basis;
    Matrix T = U;
    for (int k = 0; k < M; ++k) {
        const double s = std::sqrt(vals[k]);
        for (int i = 0; i < M; ++i) T(i, k) *= s;
    }
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (int k = 0; k < M; ++k) acc += T(i, k) * T(j, k);
            S.set(i, j, acc);
        }
    }
    return S;
}

// Splits a descending spectrum at the spectral-gap midpoints.
void relabel(const std::vector<double>& eigs, const std::vector<double>& seps,
             std::vector<std::vector<double>>& comps, std::vector<int>& counts) {
    const int p = static_cast<int>(seps.size()) + 1;
    comps.assign(p, {});
    counts.assign(p, 0);
    int ci = 0;
    for (double v : eigs) {
        while (ci < p - 1 && v <= seps[ci]) ++ci;
        comps[ci].push_back(v);
        ++counts[ci];
    }
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v, double mean) {
    const size_t n = v.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

}  // namespace

double Rng64::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return r * std::cos(kTwoPi * u2);
}

std::uint64_t split_stream(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index));
}

Matrix draw_X(int M, int N, const std::string& law, Rng64& rng) {
    if (M <= 0 || N <= 0) throw Error(Code::precondition, "draw_X: dimensions must be positive");
    int kind = -1;
    if (law == "gaussian") kind = 0;
    else if (law == "rademacher") kind = 1;
    else if (law == "uniform") kind = 2;
    else throw Error(Code::config, "draw_X: unknown entry law \"" + law + "\"");

    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    const double root3 = std::sqrt(3.0);
    Matrix X(M, N);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < N; ++j) {
            double q;
            switch (kind) {
                case 0: q = rng.normal(); break;
                case 1: q = (rng.next() >> 63) ? 1.0 : -1.0; break;
                default: q = (2.0 * rng.uniform01() - 1.0) * root3; break;
            }
            X(i, j) = q * scale;
        }
    }
    return X;
}

SimulationResult run(const SimulationConfig& config) {
    if (config.replicates < 1) {
        throw Error(Code::precondition, "run: replicates must be at least 1");
    }
    if (config.entry_law != "gaussian" && config.entry_law != "rademacher" &&
        config.entry_law != "uniform") {
        throw Error(Code::config, "run: unknown entry law \"" + config.entry_law + "\"");
    }
    const PopulationModel& model = config.model;
    const int M = model.M();
    const int N = model.N;
    if (N <= 0) throw Error(Code::precondition, "run: sample size N must be positive");
    const int K = std::min(M, N);

    SimulationResult res;
    res.config = config;
    const FFunction F = make_f_function(model);
    res.structure = find_bulk_structure(F);
    const BulkStructure& B = res.structure;
    res.classification = classify_spikes(model, B, config.params);
    const SpikeClassification& cls = res.classification;

    std::vector<double> seps;
    for (int i = 1; i < B.p; ++i) seps.push_back(0.5 * (B.edges[2 * i - 1] + B.edges[2 * i]));

    const SymMatrix Sg = make_sigma_half(model, true);
    const SymMatrix Sb = make_sigma_half(model, false);

    const int r = model.spikes.r();
    bool psd = true;
    for (const auto& s : model.spikes.spikes) {
        if (s.d < 0.0) psd = false;
    }

    // Spike directions in the observation coordinates.
    Matrix V(M, std::max(1, r));
    for (int j = 0; j < r; ++j) {
        const int pos = model.spikes.spikes[j].base_index - 1;
        for (int i = 0; i < M; ++i) {
            V(i, j) = model.basis ? (*model.basis)(i, pos) : (i == pos ? 1.0 : 0.0);
        }
    }

    const double buffer =
        std::pow(static_cast<double>(N), -2.0 / 3.0 + config.params.Cw * config.params.eps0);

    res.reps.reserve(config.replicates);
    for (int rep = 0; rep < config.replicates; ++rep) {
        Rng64 rng(split_stream(config.seed, static_cast<std::uint64_t>(rep)));
        const Matrix X = draw_X(M, N, config.entry_law, rng);

        EigenDecomposition Eg;
        try {
            Eg = eigh(sample_covariance(Sg, X));
        } catch (const Error& e) {
            throw Error(Code::numeric,
                        "run: eigensolver failed on replicate " + std::to_string(rep) + ": " +
                            e.what());
        }

        ReplicateRecord rec;
        rec.mu.assign(Eg.values.begin(), Eg.values.begin() + K);
        const double clip = 1e-10 * std::max(1.0, rec.mu.empty() ? 1.0 : rec.mu[0]);
        for (double& v : rec.mu) {
            if (v < 0.0 && v > -clip) v = 0.0;
        }

        EigenDecomposition Eb;
        if (config.coupled) {
            try {
                Eb = eigh(sample_covariance(Sb, X));
            } catch (const Error& e) {
                throw Error(Code::numeric,
                            "run: eigensolver failed on replicate " + std::to_string(rep) +
                                " (undeformed): " + e.what());
            }
        } else {
            Rng64 rng_b(split_stream(config.seed,
                                     static_cast<std::uint64_t>(rep) | (1ull << 63)));
            const Matrix Xb = draw_X(M, N, config.entry_law, rng_b);
            Eb = eigh(sample_covariance(Sb, Xb));
        }
        rec.lambda.assign(Eb.values.begin(), Eb.values.begin() + K);
        for (double& v : rec.lambda) {
            if (v < 0.0 && v > -clip) v = 0.0;
        }

        std::vector<std::vector<double>> mu_comp, lam_comp;
        relabel(rec.mu, seps, mu_comp, rec.mu_counts);
        relabel(rec.lambda, seps, lam_comp, rec.lambda_counts);
        rec.counts_match =
            (rec.mu_counts == B.bulk_counts) && (rec.lambda_counts == B.bulk_counts);

        rec.outliers_detected = 0;
        for (int i = 0; i < B.p; ++i) {
            const double edge = B.edges[2 * i];
            for (double v : mu_comp[i]) {
                if (v > edge + buffer) ++rec.outliers_detected;
                else break;  // descending
            }
        }

        // Matched eigenvalue and squared overlap per spike: the k-th spike of
        // a component pairs with the k-th largest eigenvalue in its zone.
        rec.spike_location.assign(r, std::numeric_limits<double>::quiet_NaN());
        rec.spike_overlap.assign(r, std::numeric_limits<double>::quiet_NaN());
        std::vector<int> offset(B.p, 0);
        for (int i = 1; i < B.p; ++i) offset[i] = offset[i - 1] + rec.mu_counts[i - 1];
        for (int j = 0; j < r; ++j) {
            const int comp = cls.spikes[j].component;
            const int k = cls.spikes[j].rank;
            const int idx = offset[comp - 1] + k - 1;
            if (comp < 1 || comp > B.p || k < 1 || k > rec.mu_counts[comp - 1] || idx >= K) {
                log_warn("run: spike " + std::to_string(j) + " has no matching eigenvalue");
                continue;
            }
            rec.spike_location[j] = rec.mu[idx];
            double dot = 0.0;
            for (int mrow = 0; mrow < M; ++mrow) dot += Eg.vectors(mrow, idx) * V(mrow, j);
            rec.spike_overlap[j] = dot * dot;
        }

        rec.sticking_gaps.assign(B.p, {});
        for (int i = 0; i < B.p; ++i) {
            const int rp = cls.r_plus_i[i];
            const int jmax = std::min(
                {10, rec.mu_counts[i] - rp, rec.lambda_counts[i]});
            for (int j = 1; j <= jmax; ++j) {
                rec.sticking_gaps[i].push_back(
                    std::fabs(mu_comp[i][rp + j - 1] - lam_comp[i][j - 1]));
            }
        }

        const double tol = 1e-8 * std::max(1.0, rec.mu.empty() ? 1.0 : std::fabs(rec.mu[0]));
        rec.interlacing_violations = 0;
        for (int j = 0; j < K; ++j) {
            if (j >= r && rec.mu[j] > rec.lambda[j - r] + tol) ++rec.interlacing_violations;
            if (psd) {
                if (rec.mu[j] < rec.lambda[j] - tol) ++rec.interlacing_violations;
            } else if (j + r < K && rec.mu[j] < rec.lambda[j + r] - tol) {
                ++rec.interlacing_violations;
            }
        }
        if (config.coupled) res.total_interlacing_violations += rec.interlacing_violations;
        if (rec.counts_match) ++res.count_match_reps;
        int rp_total = 0;
        for (int i = 0; i < B.p; ++i) rp_total += cls.r_plus_i[i];
        if (rec.outliers_detected == rp_total) ++res.outlier_count_reps;

        res.reps.push_back(std::move(rec));
    }

    res.spikes.resize(r);
    for (int j = 0; j < r; ++j) {
        std::vector<double> locs, ovs;
        for (const auto& rec : res.reps) {
            if (std::isfinite(rec.spike_location[j])) locs.push_back(rec.spike_location[j]);
            if (std::isfinite(rec.spike_overlap[j])) ovs.push_back(rec.spike_overlap[j]);
        }
        SpikeSummary& s = res.spikes[j];
        s.base_index = model.spikes.spikes[j].base_index;
        s.sigma_g = model.spikes.spikes[j].sigma_g;
        s.mean_location = mean_of(locs);
        s.se_location = se_of(locs, s.mean_location);
        s.mean_overlap = mean_of(ovs);
        s.se_overlap = se_of(ovs, s.mean_overlap);
    }
    return res;
}

ValidationReport verify_theorems(const SimulationResult& result,
                                 const std::vector<OutlierPrediction>& predictions,
                                 double slack) {
    const PopulationModel& model = result.config.model;
    const BulkStructure& B = result.structure;
    const SpikeClassification& cls = result.classification;
    const int N = model.N;
    const double eps1 = result.config.params.eps1;
    const int R = static_cast<int>(result.reps.size());

    ValidationReport rep;
    for (const auto& pr : predictions) {
        const int j = pr.spike_index;
        if (j < 0 || j >= static_cast<int>(result.spikes.size())) continue;
        const std::string tag = "spike@" + std::to_string(result.spikes[j].base_index);
        if (pr.is_outlier) {
            const SpikeSummary& s = result.spikes[j];
            double thr = (R >= 2) ? std::max(3.0 * s.se_location, 1e-12)
                                  : slack * pr.half_width;
            double dev = std::fabs(s.mean_location - pr.location);
            rep.add("location:" + tag, dev <= thr, dev, thr,
                    "predicted " + std::to_string(pr.location) + ", half width " +
                        std::to_string(pr.half_width));
            thr = (R >= 2) ? std::max(3.0 * s.se_overlap, 1e-12)
                           : std::min(1.0, slack * pr.overlap_error);
            dev = std::fabs(s.mean_overlap - pr.overlap);
            rep.add("overlap:" + tag, dev <= thr, dev, thr,
                    "predicted " + std::to_string(pr.overlap) + ", error bound " +
                        std::to_string(pr.overlap_error));
        } else {
            // Sub-critical spike: its direction should barely project onto the
            // matched (edge) eigenvector.
            const SpikeSummary& s = result.spikes[j];
            const Spike& sp = model.spikes.spikes[j];
            const double bound = nonoutlier_vector_bound(sp, pr.component, std::max(1, pr.rank),
                                                         model, B, N, eps1);
            const double thr = std::min(1.0, slack * bound);
            rep.add("nonoutlier-overlap:" + tag, s.mean_overlap <= thr, s.mean_overlap, thr,
                    "kappa-d bound " + std::to_string(bound));
        }
    }

    const std::vector<StickingBound> st = sticking_bounds(model, B, N, eps1);
    for (int i = 1; i <= B.p; ++i) {
        if (cls.r_i[i - 1] == 0) continue;
        const double bound = st[i - 1].bound;
        int total = 0, within = 0;
        for (const auto& rc : result.reps) {
            for (double g : rc.sticking_gaps[i - 1]) {
                ++total;
                if (g <= slack * bound) ++within;
            }
        }
        const double frac = (total > 0) ? static_cast<double>(within) / total : 1.0;
        rep.add("sticking:component" + std::to_string(i), frac >= 0.9, frac, 0.9,
                "bound " + std::to_string(bound) + " x slack " + std::to_string(slack) +
                    ", regime " + st[i - 1].regime);
    }

    // Extremal non-outlier sticks to its edge at the N^{-2/3} scale, measured
    // in the component's own units: the square-root edge density has
    // coefficient c_e = (1/pi) sqrt(2/f''(x)), so the classical location of
    // the first bulk eigenvalue sits delta_1 = (3/(4 c_e N))^{2/3} below the
    // edge, and delta_1 is the natural one-eigenvalue spacing there.
    const FFunction F = make_f_function(model);
    for (int i = 1; i <= B.p; ++i) {
        std::vector<double> tops;
        for (const auto& rc : result.reps) {
            const int rp = cls.r_plus_i[i - 1];
            int off = 0;
            for (int q = 1; q < i; ++q) off += rc.mu_counts[q - 1];
            if (rp < rc.mu_counts[i - 1]) tops.push_back(rc.mu[off + rp]);
        }
        if (tops.empty()) continue;
        const double edge = B.edges[2 * i - 2];
        const double f2 = std::fabs(f_derivative(F, B.critical_points[2 * i - 2], 2));
        const double base = std::pow(static_cast<double>(N), -2.0 / 3.0);
        double delta1 = base;
        if (f2 > 0.0) {
            const double ce = std::sqrt(2.0 / f2) / 3.14159265358979323846;
            delta1 = std::pow(0.75 / (ce * N), 2.0 / 3.0);
        }
        const double dev = std::fabs(mean_of(tops) - (edge - delta1));
        const double thr =
            slack * std::max(delta1, std::pow(static_cast<double>(N), -2.0 / 3.0 + 0.1));
        rep.add("edge-nonoutlier:component" + std::to_string(i), dev <= thr, dev, thr,
                "edge " + std::to_string(edge) + ", spacing " + std::to_string(delta1));
    }

    if (result.config.coupled) {
        rep.add("interlacing", result.total_interlacing_violations == 0,
                static_cast<double>(result.total_interlacing_violations), 0.0,
                "coupled eigenvalue interlacing violations");
    }
    const double frac_counts =
        (R > 0) ? static_cast<double>(result.count_match_reps) / R : 1.0;
    rep.add("component-counts", frac_counts >= 0.95, frac_counts, 0.95,
            "replicates with the classical per-component split");
    const double frac_out =
        (R > 0) ? static_cast<double>(result.outlier_count_reps) / R : 1.0;
    rep.add("outlier-count", frac_out >= 0.95, frac_out, 0.95,
            "replicates detecting exactly sum(r_plus) outliers beyond the buffer");
    return rep;
}

ValidationReport rigidity_check(const SimulationResult& result,
                                const std::vector<std::vector<double>>& gammas,
                                double eps1, double slack) {
    const BulkStructure& B = result.structure;
    const int N = result.config.model.N;
    if (static_cast<int>(gammas.size()) != B.p) {
        throw Error(Code::precondition, "rigidity_check: gamma components do not match");
    }
    std::vector<double> seps;
    for (int i = 1; i < B.p; ++i) seps.push_back(0.5 * (B.edges[2 * i - 1] + B.edges[2 * i]));

    long total = 0, within = 0;
    std::vector<double> dev_top, dev_mid;
    for (const auto& rc : result.reps) {
        const std::vector<double>& vals = rc.lambda.empty() ? rc.mu : rc.lambda;
        std::vector<std::vector<double>> comps;
        std::vector<int> counts;
        relabel(vals, seps, comps, counts);
        for (int i = 0; i < B.p; ++i) {
            const int Ni = static_cast<int>(gammas[i].size());
            const int jmax = std::min(Ni, counts[i]);
            for (int j = 0; j < jmax; ++j) {
                const double dev = std::fabs(comps[i][j] - gammas[i][j]);
                ++total;
                if (dev <= slack * rigidity_scale(N, Ni, j + 1, eps1)) ++within;
                if (i == 0 && j < 10) dev_top.push_back(dev);
                if (j >= Ni / 4 && j < (3 * Ni) / 4) dev_mid.push_back(dev);
            }
        }
    }

    ValidationReport rep;
    const double frac = (total > 0) ? static_cast<double>(within) / total : 1.0;
    rep.add("rigidity-fraction", frac >= 0.99, frac, 0.99,
            "indices within slack " + std::to_string(slack) + " x rigidity scale");
    const double med_top = median_of(dev_top);
    const double thr_top = 5.0 * std::pow(static_cast<double>(N), -2.0 / 3.0);
    rep.add("edge-median", med_top <= thr_top, med_top, thr_top,
            "median |lambda - gamma| over the top ten indices");
    const double med_mid = median_of(dev_mid);
    const double thr_mid = 3.0 * std::pow(static_cast<double>(N), 0.2) /
                           static_cast<double>(N);
    rep.add("midbulk-median", med_mid <= thr_mid, med_mid, thr_mid,
            "median over the middle half of each component");
    const double p95 = quantile_of(dev_mid, 0.95);
    rep.add("midbulk-p95", p95 <= thr_mid, p95, thr_mid,
            "95th percentile over the middle half");
    return rep;
}

}  // namespace spectra
