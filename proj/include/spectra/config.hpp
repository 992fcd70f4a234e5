#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectra/model.hpp"

namespace spectra {

// Knobs of the deterministic analysis pipeline. c0 < 0 means "auto" (half the
// smallest critical gap, capped at 0.01). asymptotic controls whether spikes
// are classified by the sign of the margin alone or against the finite-N
// threshold.
struct AnalyzeOptions {
  double tau = 0.01;
  double eps0 = 0.05;
  double eps1 = 0.02;
  double Cw = 2.0;
  double c0 = -1.0;
  bool asymptotic = true;
};

struct DensityOptions {
  int grid = 1000;
  double emin = -1.0;  // < 0: start at 0
  double emax = -1.0;  // < 0: 1.1 * top edge
};

struct SimulateOptions {
  int replicates = 50;
  std::uint64_t seed = 12345;
  std::string law = "gaussian";
  bool coupled = true;
  double slack = 3.0;
  bool rigidity = false;  // additionally run the classical-location check
  AnalyzeOptions pipeline;
};

struct ShrinkOptions {
  std::string loss = "Frobenius";
  double eta = -1.0;                // < 0: N^{-1/2}
  std::vector<double> eigenvalues;  // inline spectrum, descending or not
  std::string eigenvalue_file;      // CSV, one value per line (alternative)
  AnalyzeOptions pipeline;
};

// Builds a population model from the JSON text of either a bare model object
// or a full experiment config ({"model": {...}, ...}). Model keys:
//   bulk   object {type: "list"|"atoms"|"toeplitz"|"uniform", ...} or a plain
//          array of population values (shorthand for type "list")
//   spikes array of {index, d} or {index, sigma_g}
//   M      total population dimension (required for toeplitz/uniform,
//          cross-checked otherwise)
//   N      sample count (required)
// Unknown keys anywhere raise Error(Code::config).
PopulationModel model_from_json(const std::string& text);

// Section parsers for the experiment config. Each accepts the full config
// text and reads its section ("analyze", "density", ...), falling back to
// defaults when the section is absent. Unknown keys inside a section raise
// Error(Code::config).
AnalyzeOptions analyze_options_from_json(const std::string& text);
DensityOptions density_options_from_json(const std::string& text);
SimulateOptions simulate_options_from_json(const std::string& text);
ShrinkOptions shrink_options_from_json(const std::string& text, bool oracle);

// Reads a whole file into a string (Error(Code::io) on failure).
std::string read_text_file(const std::string& path);

// Parses "one eigenvalue per line" CSV text; blank lines and lines starting
// with '#' are skipped, a leading header line is tolerated.
std::vector<double> parse_eigenvalue_csv(const std::string& text);

}  // namespace spectra
