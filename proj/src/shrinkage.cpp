#include "spectra/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "spectra/common.hpp"

namespace spectra {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_structure(const BulkStructure& B, const char* who) {
    if (B.p < 1 || static_cast<int>(B.edges.size()) != 2 * B.p ||
        static_cast<int>(B.critical_points.size()) != 2 * B.p) {
        throw Error(Code::precondition, std::string(who) + ": bulk structure is incomplete");
    }
}

void check_spectrum(const std::vector<double>& eigs, const char* who) {
    if (eigs.empty()) throw Error(Code::precondition, std::string(who) + ": empty spectrum");
    double prev = std::numeric_limits<double>::infinity();
    for (double v : eigs) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw Error(Code::validation, std::string(who) + ": eigenvalues must be positive and finite");
        }
        if (v > prev * (1.0 + 1e-12) + 1e-300) {
            throw Error(Code::validation, std::string(who) + ": eigenvalues must be sorted descending");
        }
        prev = v;
    }
}

// Which component's right-hand gap contains mu.  Values inside the support
// (edges included) and values left of the support are rejected.
int outlier_component_of(const BulkStructure& B, double mu) {
    if (!std::isfinite(mu) || mu <= 0.0) {
        throw Error(Code::domain, "invert_f_outlier: observation must be positive");
    }
    if (mu > B.edges[0]) return 1;
    for (int i = 1; i <= B.p; ++i) {
        const double hi = B.edges[2 * i - 2];
        const double lo = B.edges[2 * i - 1];
        if (mu >= lo && mu <= hi) {
            throw Error(Code::domain, "invert_f_outlier: not an outlier observation (inside the support)");
        }
        if (i < B.p && mu > B.edges[2 * i] && mu < lo) return i + 1;
    }
    throw Error(Code::domain, "invert_f_outlier: observation left of the support");
}

}  // namespace

const std::vector<std::string>& shrinker_names() {
    static const std::vector<std::string> names = {
        "Frobenius",      "InverseFrobenius", "RelativeFrobeniusA",
        "RelativeFrobeniusB", "SymmetrizedRelative", "Stein",
        "Entropy",        "Divergence",       "MatusitaAffinity", "Frechet"};
    return names;
}

double invert_f_outlier(const FFunction& F, const BulkStructure& B, double mu) {
    check_structure(B, "invert_f_outlier");
    const int comp = outlier_component_of(B, mu);

    // f is strictly increasing on the branch between the component's right
    // critical point and the next singularity (x = 0 for the top component).
    double lo = B.critical_points[2 * comp - 2];
    double hi;
    if (comp == 1) {
        hi = 0.5 * lo;
        int guard = 0;
        for (;;) {
            double fh;
            try {
                fh = f_eval(F, hi);
            } catch (const Error&) {
                throw Error(Code::domain, "invert_f_outlier: observation too large to invert");
            }
            if (fh > mu) break;
            hi *= 0.5;
            if (++guard > 2000) {
                throw Error(Code::numeric, "invert_f_outlier: bracket search failed");
            }
        }
    } else {
        hi = B.critical_points[2 * comp - 3];
    }

    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f_eval(F, mid) - mu < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        const double span = std::max({std::fabs(lo), std::fabs(hi), 1e-3});
        if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * span) break;
    }
    return -1.0 / (0.5 * (lo + hi));
}

ShrinkInputs shrink_pipeline(const FFunction& F, const BulkStructure& B, double mu) {
    ShrinkInputs si;
    si.mu = mu;
    si.l = invert_f_outlier(F, B, mu);
    const double x = -1.0 / si.l;
    const double fx = f_eval(F, x);
    const double fpx = f_derivative(F, x, 1);
    if (!(fx > 0.0)) throw Error(Code::numeric, "shrink_pipeline: f(-1/l) not positive");
    double c2 = fpx / (si.l * fx);
    if (c2 < 0.0 || c2 > 1.0) {
        log_info("shrink_pipeline: clamping c^2 = " + std::to_string(c2) + " into [0,1]");
        c2 = std::min(1.0, std::max(0.0, c2));
    }
    si.c2 = c2;
    si.s2 = 1.0 - c2;
    return si;
}

double cosine_sq(const FFunction& F, const BulkStructure& B, double mu) {
    return shrink_pipeline(F, B, mu).c2;
}

double apply_shrinker(const std::string& name, double l, double c2) {
    if (!(l > 0.0) || !std::isfinite(l)) {
        throw Error(Code::precondition, "apply_shrinker: l must be positive");
    }
    if (!(c2 >= 0.0 && c2 <= 1.0)) {
        throw Error(Code::precondition, "apply_shrinker: c2 must lie in [0,1]");
    }
    bool known = false;
    for (const auto& n : shrinker_names()) {
        if (n == name) {
            known = true;
            break;
        }
    }
    if (!known) throw Error(Code::config, "apply_shrinker: unknown shrinker \"" + name + "\"");

    if (c2 == 1.0) return l;   // perfect alignment: keep the de-biased value
    if (l == 1.0) return 1.0;  // no-spike fixed point

    const double s2 = 1.0 - c2;
    if (name == "Frobenius" || name == "Entropy") return l * c2 + s2;
    if (name == "InverseFrobenius" || name == "Stein") return l / (c2 + l * s2);
    if (name == "RelativeFrobeniusA") return (l * c2 + l * l * s2) / (c2 + l * l * s2);
    if (name == "RelativeFrobeniusB") return (l * l * c2 + s2) / (l * c2 + s2);
    if (name == "SymmetrizedRelative") {
        const double d = c2 + l * s2;
        return 1.0 + (l - 1.0) * c2 / (d * d);
    }
    if (name == "Divergence") return std::sqrt((l * l * c2 + l * s2) / (c2 + l * s2));
    if (name == "MatusitaAffinity") return ((1.0 + c2) * l + s2) / (1.0 + c2 + l * s2);
    // Frechet
    const double r = std::sqrt(l) * c2 + s2;
    return r * r;
}

double oracle_outlier_value(const FFunction& F, double sigma_g, const BulkStructure* B) {
    if (!(sigma_g > 0.0) || !std::isfinite(sigma_g)) {
        throw Error(Code::precondition, "oracle_outlier_value: sigma_g must be positive");
    }
    const double xg = -1.0 / sigma_g;
    if (B != nullptr) {
        check_structure(*B, "oracle_outlier_value");
        bool on_branch = false;
        for (int i = 1; i <= B->p && !on_branch; ++i) {
            const double lo = B->critical_points[2 * i - 2];
            const double hi = (i == 1) ? 0.0 : B->critical_points[2 * i - 3];
            if (xg > lo && xg < hi) on_branch = true;
        }
        if (!on_branch) {
            throw Error(Code::precondition, "oracle_outlier_value: spike is not an outlier");
        }
    }
    const double fx = f_eval(F, xg);
    if (!(fx > 0.0)) throw Error(Code::domain, "oracle_outlier_value: f(-1/sigma_g) not positive");
    return sigma_g * sigma_g / fx;
}

std::vector<double> oracle_bulk_values(const std::vector<double>& sample_eigs, int N, double eta) {
    check_spectrum(sample_eigs, "oracle_bulk_values");
    if (N <= 0) throw Error(Code::precondition, "oracle_bulk_values: N must be positive");
    if (eta < 0.0) eta = 1.0 / std::sqrt(static_cast<double>(N));
    if (!(eta > 0.0)) throw Error(Code::precondition, "oracle_bulk_values: eta must be positive");

    const int K = static_cast<int>(sample_eigs.size());
    if (K > N) log_warn("oracle_bulk_values: more eigenvalues than N, no zero padding applied");
    const double pad = (K < N) ? static_cast<double>(N - K) : 0.0;

    std::vector<double> out(K);
    for (int i = 0; i < K; ++i) {
        const std::complex<double> z(sample_eigs[i], eta);
        std::complex<double> s(0.0, 0.0);
        for (int k = 0; k < K; ++k) s += 1.0 / (sample_eigs[k] - z);
        if (pad > 0.0) s += pad / (0.0 - z);
        const std::complex<double> m = s / static_cast<double>(N);
        out[i] = 1.0 / (sample_eigs[i] * std::norm(m));
    }
    return out;
}

std::vector<double> oracle_bulk_values_m1(const std::vector<double>& sample_eigs, int N, int M,
                                          double eta) {
    check_spectrum(sample_eigs, "oracle_bulk_values");
    if (N <= 0 || M <= 0) throw Error(Code::precondition, "oracle_bulk_values: dimensions must be positive");
    if (eta < 0.0) eta = 1.0 / std::sqrt(static_cast<double>(N));
    if (!(eta > 0.0)) throw Error(Code::precondition, "oracle_bulk_values: eta must be positive");

    const int K = static_cast<int>(sample_eigs.size());
    if (K > M) log_warn("oracle_bulk_values: more eigenvalues than M, no zero padding applied");
    const double pad = (K < M) ? static_cast<double>(M - K) : 0.0;
    const double cinv = static_cast<double>(M) / static_cast<double>(N);

    std::vector<double> out(K);
    for (int i = 0; i < K; ++i) {
        const std::complex<double> z(sample_eigs[i], eta);
        std::complex<double> s(0.0, 0.0);
        for (int k = 0; k < K; ++k) s += 1.0 / (sample_eigs[k] - z);
        if (pad > 0.0) s += pad / (0.0 - z);
        const std::complex<double> m1 = s / static_cast<double>(M);
        const std::complex<double> m = (cinv - 1.0 + cinv * z * m1) / z;
        out[i] = 1.0 / (sample_eigs[i] * std::norm(m));
    }
    return out;
}

ShrinkagePlan shrink_spectrum(const std::vector<double>& sample_eigs, const PopulationModel& model,
                              const BulkStructure& B, const std::string& loss,
                              const OutlierParams& params, double eta) {
    check_spectrum(sample_eigs, "shrink_spectrum");
    check_structure(B, "shrink_spectrum");
    const bool oracle_mode = (loss == "Frobenius-oracle");
    if (!oracle_mode) {
        bool known = false;
        for (const auto& n : shrinker_names()) {
            if (n == loss) {
                known = true;
                break;
            }
        }
        if (!known) throw Error(Code::config, "shrink_spectrum: unknown loss \"" + loss + "\"");
    }

    const FFunction F = make_f_function(model);
    const int N = (B.N > 0) ? B.N : model.N;
    if (N <= 0) throw Error(Code::precondition, "shrink_spectrum: sample size N unknown");
    const double buffer = std::pow(static_cast<double>(N), -2.0 / 3.0 + params.Cw * params.eps0);

    ShrinkagePlan plan;
    plan.loss = loss;
    plan.buffer = buffer;
    plan.eta = 0.0;

    std::vector<double> bulkvals;
    std::vector<double> oraclevals;
    if (oracle_mode) {
        if (eta < 0.0) eta = 1.0 / std::sqrt(static_cast<double>(N));
        plan.eta = eta;
        oraclevals = oracle_bulk_values(sample_eigs, N, eta);
    } else {
        bulkvals = model.bulk.expand();
    }

    // For the oracle, detected outliers are matched to model spikes of the
    // same component, largest first.
    std::vector<std::vector<double>> comp_spikes(B.p + 1);
    if (oracle_mode && model.spikes.r() > 0) {
        OutlierParams p2 = params;
        p2.asymptotic = true;
        const SpikeClassification cls = classify_spikes(model, B, p2);
        for (const auto& s : cls.spikes) {
            if (s.is_outlier && s.component >= 1 && s.component <= B.p) {
                comp_spikes[s.component].push_back(s.sigma_g);
            }
        }
    }

    const int K = static_cast<int>(sample_eigs.size());
    std::vector<int> rank_counter(B.p + 1, 0);
    plan.entries.reserve(K);
    for (int j = 0; j < K; ++j) {
        const double mu = sample_eigs[j];
        int ci = B.p;
        bool is_out = false;
        if (mu > B.edges[0] + buffer) {
            ci = 1;
            is_out = true;
        } else {
            for (int i = 1; i <= B.p; ++i) {
                if (i >= 2 && mu > B.edges[2 * i - 2] + buffer) {
                    ci = i;
                    is_out = true;
                    break;
                }
                if (mu >= B.edges[2 * i - 1]) {
                    ci = i;
                    break;
                }
            }
        }

        ShrinkageEntry e;
        e.index = j;
        e.mu = mu;
        e.component = ci;
        if (is_out) {
            e.rank = ++rank_counter[ci];
            ++plan.n_outliers;
            e.method = "outlier-formula";
            const bool matched =
                oracle_mode && e.rank <= static_cast<int>(comp_spikes[ci].size());
            if (matched) {
                const double sg = comp_spikes[ci][e.rank - 1];
                e.l = sg;
                e.c2 = kNaN;
                e.beta = oracle_outlier_value(F, sg, &B);
            } else {
                if (oracle_mode) {
                    log_warn("shrink_spectrum: no model spike for outlier at index " +
                             std::to_string(j) + ", falling back to the pipeline");
                }
                const ShrinkInputs si = shrink_pipeline(F, B, mu);
                e.l = si.l;
                e.c2 = si.c2;
                e.beta = apply_shrinker(oracle_mode ? "Frobenius" : loss, si.l, si.c2);
            }
        } else {
            e.rank = 0;
            e.l = kNaN;
            e.c2 = kNaN;
            if (oracle_mode) {
                e.method = "bulk-stieltjes";
                e.beta = oraclevals[j];
            } else {
                e.method = "bulk";
                e.beta = bulkvals.empty()
                             ? 1.0
                             : (j < static_cast<int>(bulkvals.size()) ? bulkvals[j]
                                                                      : bulkvals.back());
            }
        }
        plan.entries.push_back(e);
    }
    return plan;
}

}  // namespace spectra
