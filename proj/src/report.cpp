#include "spectra/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "json.hpp"
#include "spectra/outliers.hpp"
#include "spectra/shrinkage.hpp"
#include "spectra/sim.hpp"
#include "spectra/stieltjes.hpp"

namespace spectra {
namespace {

using json = nlohmann::ordered_json;

// JSON has no inf/nan literals; keep them readable instead of null.
json jnum(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json to_json(const ValidationReport& r) {
  json items = json::array();
  for (const auto& it : r.items) {
    items.push_back({{"name", it.name},
                     {"pass", it.pass},
                     {"value", jnum(it.value)},
                     {"threshold", jnum(it.threshold)},
                     {"detail", it.detail}});
  }
  return {{"all_pass", r.all_pass()}, {"items", items}};
}

json to_json(const BulkStructure& B) {
  json support = json::array();
  for (const auto& [lo, hi] : B.support) support.push_back({jnum(lo), jnum(hi)});
  json crit = json::array();
  for (double x : B.critical_points) crit.push_back(jnum(x));
  return {{"p", B.p},
          {"critical_points", crit},
          {"edges", B.edges},
          {"support", support},
          {"masses", B.masses},
          {"bulk_counts", B.bulk_counts},
          {"has_sentinel", B.has_sentinel},
          {"scale", jnum(B.scale())}};
}

json to_json(const SpikeClassification& cls) {
  json spikes = json::array();
  for (const auto& s : cls.spikes) {
    spikes.push_back({{"base_index", s.base_index},
                      {"sigma_g", jnum(s.sigma_g)},
                      {"component", s.component},
                      {"rank", s.rank},
                      {"margin", jnum(s.margin)},
                      {"is_outlier", s.is_outlier},
                      {"threshold", jnum(s.threshold_used)}});
  }
  return {{"r", cls.r},
          {"r_i", cls.r_i},
          {"r_plus_i", cls.r_plus_i},
          {"c0", jnum(cls.c0)},
          {"eps0", jnum(cls.eps0)},
          {"asymptotic", cls.asymptotic},
          {"spikes", spikes}};
}

json to_json(const std::vector<OutlierPrediction>& preds) {
  json out = json::array();
  for (const auto& p : preds) {
    out.push_back({{"spike_index", p.spike_index},
                   {"component", p.component},
                   {"rank", p.rank},
                   {"is_outlier", p.is_outlier},
                   {"margin", jnum(p.margin)},
                   {"location", jnum(p.location)},
                   {"half_width", jnum(p.half_width)},
                   {"edge_fallback", jnum(p.edge_fallback)},
                   {"overlap", jnum(p.overlap)},
                   {"overlap_error", jnum(p.overlap_error)}});
  }
  return out;
}

json to_json(const std::vector<StickingBound>& bounds) {
  json out = json::array();
  for (const auto& b : bounds) {
    out.push_back({{"component", b.component},
                   {"alpha_plus", jnum(b.alpha_plus)},
                   {"bound", jnum(b.bound)},
                   {"regime", b.regime}});
  }
  return out;
}

json model_summary(const PopulationModel& model) {
  return {{"M", model.M()},
          {"N", model.N},
          {"c", jnum(model.c_N)},
          {"distinct_atoms", static_cast<int>(model.bulk.atoms.size())},
          {"r", model.spikes.r()}};
}

OutlierParams to_params(const AnalyzeOptions& o) {
  OutlierParams p;
  p.eps0 = o.eps0;
  p.eps1 = o.eps1;
  p.Cw = o.Cw;
  p.c0 = o.c0;
  p.asymptotic = o.asymptotic;
  return p;
}

struct Gate {
  ValidationReport regularity;
  ValidationReport assumptions;
  bool ok = true;
};

Gate run_gate(const PopulationModel& model, const FFunction& F,
              const BulkStructure& B, double tau) {
  Gate g;
  g.regularity = check_edge_regularity(B, F, tau);
  g.assumptions = validate_assumptions(model, tau, &B);
  g.ok = g.regularity.all_pass() && g.assumptions.all_pass();
  return g;
}

}  // namespace

AnalyzeOutcome run_analyze(const PopulationModel& model, const AnalyzeOptions& opt) {
  const FFunction F = make_f_function(model);
  const BulkStructure B = find_bulk_structure(F);
  const Gate gate = run_gate(model, F, B, opt.tau);
  const OutlierParams params = to_params(opt);
  const SpikeClassification cls = classify_spikes(model, B, params);
  const std::vector<OutlierPrediction> preds = predict_outliers(model, B, cls, params);
  const std::vector<StickingBound> stick = sticking_bounds(model, B, model.N, opt.eps1);

  json j;
  j["model"] = model_summary(model);
  j["options"] = {{"tau", jnum(opt.tau)},    {"eps0", jnum(opt.eps0)},
                  {"eps1", jnum(opt.eps1)},  {"C", jnum(opt.Cw)},
                  {"c0", jnum(opt.c0)},      {"asymptotic", opt.asymptotic}};
  j["structure"] = to_json(B);
  j["regularity"] = to_json(gate.regularity);
  j["assumptions"] = to_json(gate.assumptions);
  j["classification"] = to_json(cls);
  j["predictions"] = to_json(preds);
  j["sticking"] = to_json(stick);
  j["assumptions_ok"] = gate.ok;

  AnalyzeOutcome out;
  out.json = j.dump(2) + "\n";
  out.assumptions_ok = gate.ok;
  return out;
}

DensityOutcome run_density(const PopulationModel& model, const DensityOptions& opt,
                           const AnalyzeOptions& pipeline) {
  const FFunction F = make_f_function(model);
  const BulkStructure B = find_bulk_structure(F);
  const Gate gate = run_gate(model, F, B, pipeline.tau);

  const double emin = opt.emin >= 0.0 ? opt.emin : 0.0;
  const double emax = opt.emax >= 0.0 ? opt.emax : 1.1 * B.edges.front();
  if (!(emax > emin))
    throw Error(Code::config, "density: emax must exceed emin");
  std::vector<double> Es(opt.grid);
  for (int i = 0; i < opt.grid; ++i)
    Es[i] = emin + (emax - emin) * i / (opt.grid - 1.0);
  const std::vector<double> rho = density_grid(F, B, Es);

  std::string csv = "E,rho\n";
  for (int i = 0; i < opt.grid; ++i)
    csv += fmt(Es[i]) + "," + fmt(rho[i]) + "\n";

  DensityOutcome out;
  out.csv = std::move(csv);
  out.assumptions_ok = gate.ok;
  return out;
}

SimulateOutcome run_simulate(const PopulationModel& model, const SimulateOptions& opt) {
  const FFunction F = make_f_function(model);
  const BulkStructure B = find_bulk_structure(F);
  const Gate gate = run_gate(model, F, B, opt.pipeline.tau);

  SimulationConfig sc;
  sc.model = model;
  sc.replicates = opt.replicates;
  sc.seed = opt.seed;
  sc.entry_law = opt.law;
  sc.coupled = opt.coupled;
  sc.params = to_params(opt.pipeline);
  const SimulationResult res = run(sc);

  const std::vector<OutlierPrediction> preds =
      predict_outliers(model, res.structure, res.classification, sc.params);
  const ValidationReport verify = verify_theorems(res, preds, opt.slack);

  json j;
  j["model"] = model_summary(model);
  j["config"] = {{"replicates", opt.replicates},
                 {"seed", opt.seed},
                 {"law", opt.law},
                 {"coupled", opt.coupled},
                 {"slack", jnum(opt.slack)}};
  j["structure"] = to_json(res.structure);
  j["regularity"] = to_json(gate.regularity);
  j["assumptions"] = to_json(gate.assumptions);
  j["classification"] = to_json(res.classification);
  j["predictions"] = to_json(preds);

  json spikes = json::array();
  for (const auto& s : res.spikes) {
    spikes.push_back({{"base_index", s.base_index},
                      {"sigma_g", jnum(s.sigma_g)},
                      {"mean_location", jnum(s.mean_location)},
                      {"se_location", jnum(s.se_location)},
                      {"mean_overlap", jnum(s.mean_overlap)},
                      {"se_overlap", jnum(s.se_overlap)}});
  }
  j["spike_summaries"] = spikes;
  j["interlacing_violations"] = res.total_interlacing_violations;
  j["count_match_reps"] = res.count_match_reps;
  j["outlier_count_reps"] = res.outlier_count_reps;
  j["verification"] = to_json(verify);

  if (opt.rigidity) {
    const std::vector<std::vector<double>> gammas =
        classical_locations(F, B, model.N);
    j["rigidity"] = to_json(rigidity_check(res, gammas, opt.pipeline.eps1));
  }
  j["assumptions_ok"] = gate.ok;

  // One row per model spike per replicate; lambda is the undeformed
  // eigenvalue holding the same within-component rank as the spike.
  std::string csv = "replicate,component,rank,mu,lambda,overlap\n";
  const auto& cls = res.classification;
  for (size_t rep = 0; rep < res.reps.size(); ++rep) {
    const ReplicateRecord& rec = res.reps[rep];
    for (size_t s = 0; s < cls.spikes.size(); ++s) {
      const int comp = cls.spikes[s].component;
      const int rank = cls.spikes[s].rank;
      int off = 0;
      for (int i = 0; i + 1 < comp; ++i) off += rec.lambda_counts[i];
      const int li = off + rank - 1;
      const double lam =
          (li >= 0 && li < static_cast<int>(rec.lambda.size())) ? rec.lambda[li]
                                                                : std::nan("");
      csv += std::to_string(rep) + "," + std::to_string(comp) + "," +
             std::to_string(rank) + "," + fmt(rec.spike_location[s]) + "," +
             fmt(lam) + "," + fmt(rec.spike_overlap[s]) + "\n";
    }
  }

  SimulateOutcome out;
  out.json = j.dump(2) + "\n";
  out.csv = std::move(csv);
  out.assumptions_ok = gate.ok;
  return out;
}

ShrinkOutcome run_shrink(const PopulationModel& model, std::vector<double> eigenvalues,
                         const ShrinkOptions& opt) {
  const FFunction F = make_f_function(model);
  const BulkStructure B = find_bulk_structure(F);
  const Gate gate = run_gate(model, F, B, opt.pipeline.tau);

  std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<double>());
  const ShrinkagePlan plan = shrink_spectrum(eigenvalues, model, B, opt.loss,
                                             to_params(opt.pipeline), opt.eta);

  std::string csv = "index,mu,method,l,c2,beta\n";
  for (const auto& e : plan.entries) {
    csv += std::to_string(e.index) + "," + fmt(e.mu) + "," + e.method + "," +
           fmt(e.l) + "," + fmt(e.c2) + "," + fmt(e.beta) + "\n";
  }

  json outliers = json::array();
  for (const auto& e : plan.entries) {
    if (e.method != "outlier-formula") continue;
    outliers.push_back({{"index", e.index},
                        {"mu", jnum(e.mu)},
                        {"component", e.component},
                        {"rank", e.rank},
                        {"l", jnum(e.l)},
                        {"c2", jnum(e.c2)},
                        {"beta", jnum(e.beta)}});
  }
  json j;
  j["model"] = model_summary(model);
  j["loss"] = plan.loss;
  j["buffer"] = jnum(plan.buffer);
  j["eta"] = jnum(plan.eta);
  j["bulk_denominator"] = plan.bulk_denominator;
  j["entries"] = static_cast<int>(plan.entries.size());
  j["n_outliers"] = plan.n_outliers;
  j["outliers"] = outliers;
  j["regularity"] = to_json(gate.regularity);
  j["assumptions"] = to_json(gate.assumptions);
  j["assumptions_ok"] = gate.ok;

  ShrinkOutcome out;
  out.csv = std::move(csv);
  out.json = j.dump(2) + "\n";
  out.assumptions_ok = gate.ok;
  return out;
}

}  // namespace spectra
