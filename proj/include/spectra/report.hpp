#pragma once

#include <string>
#include <vector>

#include "spectra/config.hpp"

namespace spectra {

// Orchestration of the CLI commands over an already-built model. Each
// function returns the finished artifact payloads plus a flag telling whether
// the model assumption and edge regularity checks passed; the payloads are
// written either way so that a failing gate still ships its report.

struct AnalyzeOutcome {
  std::string json;
  bool assumptions_ok = true;
};
AnalyzeOutcome run_analyze(const PopulationModel& model, const AnalyzeOptions& opt);

struct DensityOutcome {
  std::string csv;  // header "E,rho"
  bool assumptions_ok = true;
};
DensityOutcome run_density(const PopulationModel& model, const DensityOptions& opt,
                           const AnalyzeOptions& pipeline);

struct SimulateOutcome {
  std::string json;  // verification report
  std::string csv;   // per-spike rows: replicate,component,rank,mu,lambda,overlap
  bool assumptions_ok = true;
};
SimulateOutcome run_simulate(const PopulationModel& model, const SimulateOptions& opt);

struct ShrinkOutcome {
  std::string csv;  // index,mu,method,l,c2,beta
  std::string json;  // summary with the outlier entries expanded
  bool assumptions_ok = true;
};
ShrinkOutcome run_shrink(const PopulationModel& model, std::vector<double> eigenvalues,
                         const ShrinkOptions& opt);

}  // namespace spectra
