#include "spectra/outliers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace spectra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double auto_c0(const BulkStructure& B) {
  double half_gap = kInf;
  for (int i = 2; i <= B.p; ++i)
    half_gap = std::min(
        half_gap, 0.5 * (B.critical_points[2 * i - 3] - B.critical_points[2 * i - 2]));
  return std::min(0.01, 0.999 * half_gap);
}

int model_N(const PopulationModel& model) {
  if (model.N <= 0) throw Error(Code::precondition, "model has no sample count N");
  return model.N;
}

}  // namespace

SpikeClassification classify_spikes(const PopulationModel& model,
                                    const BulkStructure& B,
                                    const OutlierParams& params) {
  const int N = model_N(model);
  double c0 = params.c0;
  if (c0 < 0.0) c0 = auto_c0(B);
  {
    double lim = kInf;
    for (int i = 2; i <= B.p; ++i)
      lim = std::min(lim, 0.5 * (B.critical_points[2 * i - 3] -
                                 B.critical_points[2 * i - 2]));
    if (!(c0 > 0.0) || !(c0 < lim))
      throw Error(Code::precondition,
                  "c0 = " + std::to_string(c0) +
                      " outside (0, half minimal inter-component gap)");
  }
  const double threshold =
      params.asymptotic ? 0.0 : std::pow(N, -1.0 / 3.0 + params.eps0);

  SpikeClassification cls;
  cls.r = model.spikes.r();
  cls.r_i.assign(B.p, 0);
  cls.r_plus_i.assign(B.p, 0);
  cls.c0 = c0;
  cls.eps0 = params.eps0;
  cls.asymptotic = params.asymptotic;

  for (int s = 0; s < cls.r; ++s) {
    const Spike& sp = model.spikes.spikes[s];
    SpikeClass e;
    e.base_index = sp.base_index;
    e.sigma_g = sp.sigma_g;
    e.x_g = -1.0 / sp.sigma_g;
    for (const auto& at : model.bulk.atoms)
      if (std::fabs(e.x_g + 1.0 / at.sigma) <= 1e-14)
        throw Error(Code::domain, "spike at base " + std::to_string(sp.base_index) +
                                      " collides with a population pole");
    // walk the zones right to left: (x_{2i-1}, x_{2i-2}) has positive margin
    // for component i, [x_{2i}, x_{2i-1}] negative
    int comp = -1;
    for (int i = 1; i <= B.p; ++i) {
      const double upper = (i == 1) ? 0.0 : B.critical_points[2 * i - 3];
      const double lower = (i == B.p) ? -kInf : B.critical_points[2 * i - 1];
      if (e.x_g < upper && e.x_g >= lower) {
        comp = i;
        break;
      }
    }
    if (comp < 0)
      throw Error(Code::domain, "spike at base " + std::to_string(sp.base_index) +
                                    " falls outside every component zone");
    e.component = comp;
    e.margin = e.x_g - B.critical_points[2 * comp - 2];
    e.threshold_used = threshold;
    bool upper_ok = true;
    if (comp >= 2) upper_ok = e.x_g < B.critical_points[2 * comp - 3] - c0;
    e.is_outlier = upper_ok && (params.asymptotic ? e.margin > 0.0
                                                  : e.margin >= threshold);
    e.rank = ++cls.r_i[comp - 1];
    if (e.is_outlier) ++cls.r_plus_i[comp - 1];
    cls.spikes.push_back(e);
  }
  return cls;
}

SpikeClassification classify_spikes(const PopulationModel& model,
                                    const BulkStructure& B, double eps0,
                                    double c0) {
  OutlierParams p;
  p.eps0 = eps0;
  p.c0 = c0;
  return classify_spikes(model, B, p);
}

double nu_of_spike(const SpikeClassification& cls, int spike_index,
                   const std::vector<int>& A) {
  const std::set<int> inA(A.begin(), A.end());
  const bool self_in = inA.count(spike_index) > 0;
  double nu = kInf;
  for (int t = 0; t < cls.r; ++t) {
    if (t == spike_index) continue;
    if (!cls.spikes[t].is_outlier) continue;
    const bool other_in = inA.count(t) > 0;
    if (other_in == self_in) continue;  // minimum runs over the other side
    nu = std::min(nu, std::fabs(cls.spikes[spike_index].x_g - cls.spikes[t].x_g));
  }
  return nu;
}

double overlap_limit(const PopulationModel& model, const BulkStructure& B,
                     const Spike& spike) {
  const FFunction F = make_f_function(model);
  const double xg = -1.0 / spike.sigma_g;
  // locate the component edge to verify the spike separates from the bulk
  OutlierParams pa;
  pa.asymptotic = true;
  SpikeClassification cls = classify_spikes(model, B, pa);
  double margin = -kInf;
  for (const auto& e : cls.spikes)
    if (e.base_index == spike.base_index) margin = e.margin;
  if (margin == -kInf) {
    // spike not part of the model's set: classify it standalone
    for (int i = 1; i <= B.p; ++i) {
      const double upper = (i == 1) ? 0.0 : B.critical_points[2 * i - 3];
      if (xg < upper && xg > B.critical_points[2 * i - 2]) {
        margin = xg - B.critical_points[2 * i - 2];
        break;
      }
    }
  }
  if (!(margin > 0.0))
    throw Error(Code::precondition,
                "overlap limit requested for a spike that is not an outlier");
  const double fx = f_eval(F, xg);
  if (!(fx > 0.0))
    throw Error(Code::numeric, "overlap limit: nonpositive predicted location");
  return (1.0 / spike.sigma_g) * f_derivative(F, xg, 1) / fx;
}

double overlap_error_bound(const Spike& spike1, const Spike& spike2,
                           const PopulationModel& model, const BulkStructure& B,
                           double nu, int N) {
  if (N <= 0) throw Error(Code::precondition, "overlap_error_bound: N must be positive");
  OutlierParams p;
  p.asymptotic = true;
  const SpikeClassification cls = classify_spikes(model, B, p);
  auto margin_of = [&](const Spike& s) {
    for (const auto& e : cls.spikes)
      if (e.base_index == s.base_index) return e.margin;
    throw Error(Code::precondition, "overlap_error_bound: spike not in the model");
  };
  const double m1 = margin_of(spike1), m2 = margin_of(spike2);
  if (!(m1 > 0.0) || !(m2 > 0.0))
    throw Error(Code::precondition, "overlap_error_bound: spikes must be outliers");
  const bool same = spike1.base_index == spike2.base_index;
  if (nu == 0.0) return kInf;
  const double rtN = std::sqrt(static_cast<double>(N));
  double R = 0.0;
  if (same) R += (1.0 / rtN) / std::sqrt(m1);
  double inner = 1.0 / (nu * nu);
  if (same) inner += 1.0 / (m2 * m2);
  R += inner / N;
  return R;
}

std::vector<OutlierPrediction> predict_outliers(const PopulationModel& model,
                                                const BulkStructure& B,
                                                const SpikeClassification& cls,
                                                const OutlierParams& params) {
  const int N = model_N(model);
  const FFunction F = make_f_function(model);
  std::vector<int> all_outliers;
  for (int s = 0; s < cls.r; ++s)
    if (cls.spikes[s].is_outlier) all_outliers.push_back(s);

  std::vector<OutlierPrediction> out;
  for (int s = 0; s < cls.r; ++s) {
    const SpikeClass& e = cls.spikes[s];
    OutlierPrediction pr;
    pr.spike_index = s;
    pr.component = e.component;
    pr.rank = e.rank;
    pr.is_outlier = e.is_outlier;
    pr.margin = e.margin;
    pr.edge_fallback = f_eval(F, B.critical_points[2 * e.component - 2]);
    if (e.is_outlier) {
      pr.location = f_eval(F, e.x_g);
      pr.half_width =
          std::pow(N, -0.5 + params.Cw * params.eps0) * std::sqrt(e.margin);
      pr.overlap = overlap_limit(model, B, model.spikes.spikes[s]);
      const double nu = nu_of_spike(cls, s, all_outliers);
      pr.overlap_error = overlap_error_bound(model.spikes.spikes[s],
                                             model.spikes.spikes[s], model, B,
                                             nu, N);
    } else {
      pr.location = pr.edge_fallback;
      pr.half_width = std::pow(N, -2.0 / 3.0 + params.Cw * params.eps0);
    }
    out.push_back(pr);
  }
  return out;
}

ProjectionResult projection_limit(const std::vector<double>& w,
                                  const std::vector<int>& A,
                                  const PopulationModel& model,
                                  const BulkStructure& B,
                                  const OutlierParams& params) {
  const int N = model_N(model);
  if (static_cast<int>(w.size()) != model.spikes.r())
    throw Error(Code::precondition,
                "projection_limit: w must align with the spike list");
  OutlierParams p = params;
  const SpikeClassification cls = classify_spikes(model, B, p);
  const std::set<int> inA(A.begin(), A.end());
  for (int idx : A) {
    if (idx < 0 || idx >= cls.r)
      throw Error(Code::precondition, "projection_limit: index out of range");
    if (!cls.spikes[idx].is_outlier)
      throw Error(Code::precondition,
                  "projection_limit: A contains a non-outlier spike");
  }

  ProjectionResult res;
  for (int idx : inA)
    res.value += overlap_limit(model, B, model.spikes.spikes[idx]) * w[idx] * w[idx];

  std::vector<int> outliers;
  for (int s = 0; s < cls.r; ++s)
    if (cls.spikes[s].is_outlier) outliers.push_back(s);
  const double rtN = std::sqrt(static_cast<double>(N));

  auto nu_term = [&](int s) {
    const double nu = nu_of_spike(cls, s, A);
    double t = std::isinf(nu) ? 0.0 : 1.0 / nu;
    if (inA.count(s)) t += 1.0 / cls.spikes[s].margin;
    return t;
  };

  for (int s1 : outliers)
    for (int s2 : outliers) {
      const bool in1 = inA.count(s1) > 0, in2 = inA.count(s2) > 0;
      const double m1 = cls.spikes[s1].margin, m2 = cls.spikes[s2].margin;
      double K = 0.0;
      if (in1 && in2) {
        K += (1.0 / rtN) / (std::pow(m1, 0.25) * std::pow(m2, 0.25));
      } else if (in1 != in2) {
        const double delta = std::fabs(cls.spikes[s1].x_g - cls.spikes[s2].x_g);
        const double mi = in1 ? m1 : m2;
        K += delta > 0.0 ? (1.0 / rtN) * std::sqrt(mi) / delta : kInf;
      }
      K += nu_term(s1) * nu_term(s2) / N;
      res.bound += std::fabs(w[s1]) * std::fabs(w[s2]) * K;
    }
  return res;
}

std::vector<StickingBound> sticking_bounds(const PopulationModel& model,
                                           const BulkStructure& B, int N,
                                           double eps1) {
  if (N <= 0) throw Error(Code::precondition, "sticking_bounds: N must be positive");
  OutlierParams p;
  p.asymptotic = true;
  const SpikeClassification cls = classify_spikes(model, B, p);
  const double regime_threshold = std::pow(N, -1.0 / 3.0 + 2.0 * eps1);

  std::vector<StickingBound> out;
  for (int i = 1; i <= B.p; ++i) {
    StickingBound sb;
    sb.component = i;
    sb.alpha_plus = kInf;
    for (const auto& e : cls.spikes)
      if (e.component == i) sb.alpha_plus = std::min(sb.alpha_plus, std::fabs(e.margin));
    if (std::isinf(sb.alpha_plus)) {
      sb.bound = 0.0;
      sb.regime = "rigidity";  // unspiked component: rigidity is the sharp scale
    } else {
      sb.bound = std::pow(N, 2.0 * eps1) / (N * sb.alpha_plus);
      sb.regime = sb.alpha_plus >= regime_threshold ? "sticking" : "rigidity";
    }
    out.push_back(sb);
  }
  return out;
}

double rigidity_scale(int N, int N_i, int j, double eps1) {
  if (N <= 0 || N_i <= 0 || j < 1 || j > N_i)
    throw Error(Code::precondition, "rigidity_scale: bad indices");
  const double jj = std::min(j, N_i + 1 - j);
  return std::pow(N, -2.0 / 3.0 + eps1) * std::pow(jj, -1.0 / 3.0);
}

double nonoutlier_vector_bound(const Spike& spike, int l, int j,
                               const PopulationModel& model,
                               const BulkStructure& B, int N, double eps1) {
  if (N <= 0) throw Error(Code::precondition, "nonoutlier_vector_bound: bad N");
  if (l < 1 || l > B.p)
    throw Error(Code::precondition, "nonoutlier_vector_bound: bad component");
  const int Nl = B.bulk_counts[l - 1];
  if (j < 1 || j > Nl)
    throw Error(Code::precondition, "nonoutlier_vector_bound: bad bulk index");
  OutlierParams p;
  p.asymptotic = true;
  const SpikeClassification cls = classify_spikes(model, B, p);
  double margin = 0.0;
  int comp = 0;
  for (const auto& e : cls.spikes)
    if (e.base_index == spike.base_index) {
      margin = e.margin;
      comp = e.component;
    }
  if (comp == 0)
    throw Error(Code::precondition, "nonoutlier_vector_bound: spike not in model");
  const double kappa_d =
      std::pow(std::min(j, Nl + 1 - j), 2.0 / 3.0) * std::pow(N, -2.0 / 3.0);
  return std::pow(N, 6.0 * eps1) / (N * (kappa_d + margin * margin));
}

double nonoutlier_vector_bound_general(const std::vector<double>& w, int l, int j,
                                       const PopulationModel& model,
                                       const BulkStructure& B, int N, double eps1,
                                       double C) {
  if (static_cast<int>(w.size()) != model.spikes.r())
    throw Error(Code::precondition, "w must align with the spike list");
  OutlierParams p;
  p.asymptotic = true;
  const SpikeClassification cls = classify_spikes(model, B, p);
  double s = 0.0;
  for (int k = 0; k < cls.r; ++k)
    if (cls.spikes[k].is_outlier)
      s += C * w[k] * w[k] *
           nonoutlier_vector_bound(model.spikes.spikes[k], l, j, model, B, N, eps1);
  return s;
}

ValidationReport check_nonoverlap(const PopulationModel& model,
                                  const BulkStructure& B,
                                  const std::vector<int>& A, double eps0, int N) {
  if (N <= 0) throw Error(Code::precondition, "check_nonoverlap: bad N");
  OutlierParams p;
  p.asymptotic = true;
  const SpikeClassification cls = classify_spikes(model, B, p);
  for (int idx : A) {
    if (idx < 0 || idx >= cls.r)
      throw Error(Code::precondition, "check_nonoverlap: index out of range");
    if (!cls.spikes[idx].is_outlier)
      throw Error(Code::precondition, "check_nonoverlap: A contains a non-outlier");
  }
  ValidationReport rep;
  for (int s = 0; s < cls.r; ++s) {
    if (!cls.spikes[s].is_outlier) continue;
    const double nu = nu_of_spike(cls, s, A);
    const double rhs =
        std::pow(cls.spikes[s].margin, -0.5) * std::pow(N, -0.5 + eps0);
    rep.add("nonoverlap:spike@" + std::to_string(cls.spikes[s].base_index),
            nu >= rhs, nu, rhs,
            "component " + std::to_string(cls.spikes[s].component) + " rank " +
                std::to_string(cls.spikes[s].rank));
  }
  return rep;
}

}  // namespace spectra
