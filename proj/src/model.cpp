#include "spectra/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spectra/stieltjes.hpp"

namespace spectra {

std::vector<double> BulkSpectrum::expand() const {
  std::vector<double> out;
  out.reserve(M);
  for (const auto& a : atoms)
    for (int k = 0; k < a.multiplicity; ++k) out.push_back(a.sigma);
  return out;
}

BulkSpectrum build_bulk_from_eigenvalues(const std::vector<double>& values) {
  if (values.empty()) throw Error(Code::validation, "bulk: empty eigenvalue list");
  for (double v : values) {
    if (!std::isfinite(v) || v <= 0.0)
      throw Error(Code::validation,
                  "bulk: eigenvalues must be finite and positive, got " +
                      std::to_string(v));
  }
  std::vector<double> s = values;
  std::sort(s.begin(), s.end(), std::greater<double>());

  BulkSpectrum out;
  out.M = static_cast<int>(s.size());
  size_t i = 0;
  while (i < s.size()) {
    // chain-merge values within 1e-10 relative of the running neighbor
    size_t j = i + 1;
    double sum = s[i];
    while (j < s.size() && s[j - 1] - s[j] <= 1e-10 * std::max(1.0, s[j - 1])) {
      sum += s[j];
      ++j;
    }
    const int mult = static_cast<int>(j - i);
    out.atoms.push_back({sum / mult, mult});
    i = j;
  }
  return out;
}

BulkSpectrum build_uniform_bulk(double lo, double hi, int M) {
  if (!(0.0 < lo && lo < hi) || M <= 0)
    throw Error(Code::validation, "uniform bulk: need 0 < lo < hi and M > 0");
  std::vector<double> v(M);
  for (int i = 0; i < M; ++i)
    v[i] = lo + (hi - lo) * (i + 0.5) / M;  // cell midpoints
  return build_bulk_from_eigenvalues(v);
}

ToeplitzPopulation build_toeplitz_population(double rho, int M) {
  EigenDecomposition ed = eigh(toeplitz(rho, M));
  ToeplitzPopulation out;
  out.bulk = build_bulk_from_eigenvalues(ed.values);
  out.basis = std::move(ed.vectors);
  return out;
}

namespace {

SpikeSet finish_spikes(std::vector<Spike> spikes) {
  std::sort(spikes.begin(), spikes.end(), [](const Spike& a, const Spike& b) {
    if (a.sigma_g != b.sigma_g) return a.sigma_g > b.sigma_g;
    return a.base_index < b.base_index;
  });
  return SpikeSet{std::move(spikes)};
}

double base_sigma(const BulkSpectrum& bulk, int index) {
  if (index < 1 || index > bulk.M)
    throw Error(Code::validation,
                "spike: base index " + std::to_string(index) + " outside 1.." +
                    std::to_string(bulk.M));
  int seen = 0;
  for (const auto& a : bulk.atoms) {
    seen += a.multiplicity;
    if (index <= seen) return a.sigma;
  }
  throw Error(Code::validation, "spike: index resolution failed");
}

void check_unique(const std::vector<Spike>& spikes) {
  if (static_cast<int>(spikes.size()) > kSpikeCap)
    throw Error(Code::validation, "spike: more than " + std::to_string(kSpikeCap) +
                                      " spikes requested");
  std::set<int> seen;
  for (const auto& s : spikes)
    if (!seen.insert(s.base_index).second)
      throw Error(Code::validation, "spike: duplicate base index " +
                                        std::to_string(s.base_index));
}

}  // namespace

SpikeSet attach_spikes(const BulkSpectrum& bulk,
                       const std::vector<std::pair<int, double>>& index_d) {
  std::vector<Spike> spikes;
  for (const auto& [idx, d] : index_d) {
    if (!(d > 0.0) || !std::isfinite(d))
      throw Error(Code::validation,
                  "spike: strength d must be positive, got " + std::to_string(d));
    Spike s;
    s.base_index = idx;
    s.d = d;
    s.sigma_b = base_sigma(bulk, idx);
    s.sigma_g = s.sigma_b * (1.0 + d);
    spikes.push_back(s);
  }
  check_unique(spikes);
  return finish_spikes(std::move(spikes));
}

SpikeSet attach_spikes_sigma(const BulkSpectrum& bulk,
                             const std::vector<std::pair<int, double>>& index_sigma_g) {
  std::vector<Spike> spikes;
  for (const auto& [idx, sg] : index_sigma_g) {
    Spike s;
    s.base_index = idx;
    s.sigma_b = base_sigma(bulk, idx);
    if (!(sg > s.sigma_b) || !std::isfinite(sg))
      throw Error(Code::validation,
                  "spike: sigma_g must exceed the base eigenvalue " +
                      std::to_string(s.sigma_b));
    s.sigma_g = sg;
    s.d = sg / s.sigma_b - 1.0;
    spikes.push_back(s);
  }
  check_unique(spikes);
  return finish_spikes(std::move(spikes));
}

std::vector<double> PopulationModel::population_eigenvalues() const {
  std::vector<double> v = bulk.expand();
  for (const auto& s : spikes.spikes) v[s.base_index - 1] = s.sigma_g;
  std::sort(v.begin(), v.end(), std::greater<double>());
  return v;
}

PopulationModel make_model(const BulkSpectrum& bulk, const SpikeSet& spikes, int N,
                           std::optional<Matrix> basis) {
  if (N <= 0) throw Error(Code::validation, "model: N must be positive");
  if (bulk.M <= 0 || bulk.atoms.empty())
    throw Error(Code::validation, "model: empty bulk");
  if (N > kDimCap || bulk.M > kDimCap)
    throw Error(Code::validation, "model: dimension exceeds cap");
  if (basis && (basis->rows != bulk.M || basis->cols != bulk.M))
    throw Error(Code::validation, "model: basis must be M x M");
  PopulationModel m;
  m.bulk = bulk;
  m.spikes = spikes;
  m.N = N;
  m.c_N = static_cast<double>(N) / bulk.M;
  m.basis = std::move(basis);
  return m;
}

ValidationReport validate_assumptions(const PopulationModel& model, double tau,
                                      const BulkStructure* structure) {
  ValidationReport rep;
  const auto& bulk = model.bulk;

  const double smax = bulk.sigma_max();
  const double smin = bulk.sigma_min();
  rep.add("bulk-upper-bound", std::isfinite(smax) && smax > 0.0, smax, 0.0,
          "largest undeformed eigenvalue is finite and positive");
  rep.add("bulk-lower-bound", smin >= tau, smin, tau,
          "smallest undeformed eigenvalue stays away from zero");

  double wsum = 0.0;
  for (int i = 0; i < static_cast<int>(bulk.atoms.size()); ++i)
    wsum += bulk.weight(i);
  rep.add("weights-normalized", std::fabs(wsum - 1.0) <= 1e-12, wsum, 1.0,
          "atom multiplicities sum to M");

  const double c = model.c_N;
  rep.add("aspect-ratio", c >= tau && c <= 1.0 / tau, c, tau,
          "N/M within [tau, 1/tau]");

  bool desc = true;
  for (size_t i = 1; i < bulk.atoms.size(); ++i)
    if (!(bulk.atoms[i - 1].sigma > bulk.atoms[i].sigma)) desc = false;
  rep.add("atoms-strictly-descending", desc, 0.0, 0.0, "");

  if (model.basis) {
    const Matrix& U = *model.basis;
    double worst = 0.0;
    for (int i = 0; i < U.cols; ++i)
      for (int j = i; j < U.cols; ++j) {
        double dot = 0.0;
        for (int k = 0; k < U.rows; ++k) dot += U(k, i) * U(k, j);
        worst = std::max(worst, std::fabs(dot - (i == j ? 1.0 : 0.0)));
      }
    rep.add("basis-orthonormal", worst <= 1e-8, worst, 1e-8,
            "max deviation of U^T U from the identity");
  }

  if (structure != nullptr) {
    const BulkStructure& B = *structure;
    const FFunction F = make_f_function(model);
    // spikes grouped by the component interval their -1/sigma_g lands in,
    // ordered from the right
    for (const auto& s : model.spikes.spikes) {
      const double xg = -1.0 / s.sigma_g;
      // locate component: i = 1 corresponds to x in (x_1, 0)
      int comp = -1;
      if (xg > B.critical_points[0]) {
        comp = 1;
      } else {
        for (int i = 2; i <= B.p; ++i) {
          const double upper = B.critical_points[2 * i - 3];  // x_{2(i-1)}
          const double lower = B.critical_points[2 * i - 2];  // x_{2i-1}
          if (xg > lower && xg <= upper) {
            comp = i;
            break;
          }
        }
      }
      const std::string who = "spike@" + std::to_string(s.base_index);
      if (comp < 0) {
        rep.add("right-side-dd:" + who, false, xg, 0.0,
                "perturbed point does not sit right of any component");
        continue;
      }
      const double fxg = f_eval(F, xg);
      const double f_lower = f_eval(F, B.critical_points[2 * comp - 2]);
      const bool lower_ok = fxg >= f_lower - 1e-12;
      bool upper_ok = true;
      double f_upper = 0.0;
      if (comp >= 2) {
        f_upper = f_eval(F, B.critical_points[2 * comp - 3]);
        upper_ok = fxg <= f_upper + 1e-12;
      }
      rep.add("right-side-dd:" + who, lower_ok && upper_ok, fxg, f_lower,
              "f at the perturbed point between the adjacent edge values");
      if (comp >= 2) {
        const double sep =
            std::fabs(fxg - f_upper) - std::fabs(fxg - f_lower);
        rep.add("right-side-margin:" + who, sep >= tau, sep, tau,
                "perturbed point resolved toward its own component");
      }
    }
  }
  return rep;
}

}  // namespace spectra
