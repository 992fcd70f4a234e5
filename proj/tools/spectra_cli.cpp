// Command-line front end. Everything numerical happens behind the C API in
// libspectra; this file only shuttles config text and artifact files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "spectra_capi.h"

namespace {

struct Flags {
  std::string config;
  std::string out = ".";
  std::optional<unsigned long long> seed;
  std::optional<int> grid;
  std::optional<double> slack;
  std::optional<double> tau;
  std::optional<double> eps0;
  std::optional<double> eps1;
};

void add_common_flags(CLI::App* sub, Flags& fl) {
  sub->add_option("--config", fl.config, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", fl.out, "output directory (created if missing)");
  sub->add_option("--seed", fl.seed, "override simulate.seed");
  sub->add_option("--grid", fl.grid, "override density.grid");
  sub->add_option("--slack", fl.slack, "override simulate.slack");
  sub->add_option("--tau", fl.tau, "override analyze.tau");
  sub->add_option("--eps0", fl.eps0, "override analyze.eps0");
  sub->add_option("--eps1", fl.eps1, "override analyze.eps1");
}

// Folds the command-line overrides into the config text. A bare model object
// is wrapped under "model" first so that sections can sit next to it. Invalid
// JSON is passed through untouched — the library reports it consistently.
std::string with_overrides(const std::string& text, const Flags& fl) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return text;
  if (!j.contains("model") && j.contains("bulk")) j = nlohmann::json{{"model", j}};
  if (fl.seed) j["simulate"]["seed"] = *fl.seed;
  if (fl.grid) j["density"]["grid"] = *fl.grid;
  if (fl.slack) j["simulate"]["slack"] = *fl.slack;
  if (fl.tau) j["analyze"]["tau"] = *fl.tau;
  if (fl.eps0) j["analyze"]["eps0"] = *fl.eps0;
  if (fl.eps1) j["analyze"]["eps1"] = *fl.eps1;
  return j.dump();
}

int fail(const std::string& what) {
  const char* msg = spectra_last_error();
  std::cerr << "error: " << what;
  if (msg && *msg) std::cerr << ": " << msg;
  std::cerr << "\n";
  return 1;
}

bool write_file(const std::filesystem::path& path, const char* content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << (content ? content : "");
  return static_cast<bool>(out);
}

struct StringGuard {
  char* s = nullptr;
  ~StringGuard() { spectra_string_free(s); }
};

// rc semantics: 0 ok, SPECTRA_EC_ASSUMPTION → artifacts written, exit 2.
int finish(int rc, const std::filesystem::path& dir,
           std::initializer_list<std::pair<const char*, const char*>> artifacts) {
  if (rc != SPECTRA_OK && rc != SPECTRA_EC_ASSUMPTION) return fail("command failed");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  for (const auto& [name, content] : artifacts) {
    const auto path = dir / name;
    if (!write_file(path, content)) {
      std::cerr << "error: cannot write " << path << "\n";
      return 1;
    }
    std::cout << "wrote " << path.string() << "\n";
  }
  if (rc == SPECTRA_EC_ASSUMPTION) {
    std::cerr << "assumption checks failed; reports written anyway\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis of spiked sample covariance models"};
  app.require_subcommand(1);
  Flags fl;

  CLI::App* analyze = app.add_subcommand(
      "analyze", "bulk structure, outlier predictions, sticking bounds");
  CLI::App* density =
      app.add_subcommand("density", "limiting spectral density on a grid");
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo verification of the predictions");
  CLI::App* shrink =
      app.add_subcommand("shrink", "optimal shrinkage of an observed spectrum");
  CLI::App* oracle = app.add_subcommand(
      "oracle", "oracle Frobenius estimator (Stieltjes bulk, plug-in outliers)");
  for (CLI::App* sub : {analyze, density, simulate, shrink, oracle})
    add_common_flags(sub, fl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // usage problems are exit 1 by contract
  }

  std::string text;
  try {
    std::ifstream in(fl.config, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read " << fl.config << "\n";
      return 1;
    }
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  text = with_overrides(text, fl);

  spectra_model* model = nullptr;
  if (spectra_model_from_json(text.c_str(), &model) != SPECTRA_OK)
    return fail("bad model config");
  struct ModelGuard {
    spectra_model* m;
    ~ModelGuard() { spectra_model_free(m); }
  } guard{model};

  const std::filesystem::path dir(fl.out);
  if (app.got_subcommand(analyze)) {
    StringGuard rep;
    const int rc = spectra_analyze(model, text.c_str(), &rep.s);
    return finish(rc, dir, {{"analysis.json", rep.s}});
  }
  if (app.got_subcommand(density)) {
    StringGuard csv;
    const int rc = spectra_density(model, text.c_str(), &csv.s);
    return finish(rc, dir, {{"density.csv", csv.s}});
  }
  if (app.got_subcommand(simulate)) {
    StringGuard rep, csv;
    const int rc = spectra_simulate(model, text.c_str(), &rep.s, &csv.s);
    return finish(rc, dir, {{"simulation.json", rep.s}, {"replicates.csv", csv.s}});
  }
  if (app.got_subcommand(shrink)) {
    StringGuard csv, sum;
    const int rc = spectra_shrink(model, nullptr, 0, text.c_str(), &csv.s, &sum.s);
    return finish(rc, dir, {{"shrinkage.csv", csv.s}, {"shrinkage.json", sum.s}});
  }
  StringGuard csv, sum;
  const int rc = spectra_oracle(model, nullptr, 0, text.c_str(), &csv.s, &sum.s);
  return finish(rc, dir, {{"oracle.csv", csv.s}, {"oracle.json", sum.s}});
}
