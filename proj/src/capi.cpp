#include "spectra_capi.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "spectra/config.hpp"
#include "spectra/report.hpp"

struct spectra_model {
  spectra::PopulationModel m;
};

namespace {

thread_local std::string g_last_error;

int code_of(const spectra::Error& e) { return static_cast<int>(e.code()); }

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

// Runs fn, translating exceptions into status codes and recording the
// message. fn returns the status itself (for the assumption-gate case).
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const spectra::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPECTRA_EC_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return SPECTRA_EC_INTERNAL;
  }
}

std::string options_text(const char* options_json) {
  return options_json && *options_json ? std::string(options_json)
                                       : std::string("{}");
}

int require(bool cond, const char* msg) {
  if (cond) return SPECTRA_OK;
  g_last_error = msg;
  return SPECTRA_EC_PRECONDITION;
}

int finish_gate(bool assumptions_ok) {
  if (assumptions_ok) return SPECTRA_OK;
  g_last_error = "assumption or regularity checks failed; see the report";
  return SPECTRA_EC_ASSUMPTION;
}

std::vector<double> resolve_eigenvalues(const double* eigenvalues, int n,
                                        const spectra::ShrinkOptions& opt) {
  if (eigenvalues && n > 0) return std::vector<double>(eigenvalues, eigenvalues + n);
  if (!opt.eigenvalues.empty()) return opt.eigenvalues;
  if (!opt.eigenvalue_file.empty())
    return spectra::parse_eigenvalue_csv(spectra::read_text_file(opt.eigenvalue_file));
  throw spectra::Error(spectra::Code::precondition,
                       "no eigenvalues: pass an array or configure "
                       "\"eigenvalues\" / \"eigenvalue_file\"");
}

int shrink_impl(const spectra_model* model, const double* eigenvalues, int n,
                const char* options_json, char** csv, char** summary_json,
                bool oracle) {
  if (int rc = require(model && csv && summary_json, "null argument")) return rc;
  *csv = nullptr;
  *summary_json = nullptr;
  return guarded([&] {
    const spectra::ShrinkOptions opt =
        spectra::shrink_options_from_json(options_text(options_json), oracle);
    spectra::ShrinkOutcome out =
        spectra::run_shrink(model->m, resolve_eigenvalues(eigenvalues, n, opt), opt);
    *csv = dup_string(out.csv);
    *summary_json = dup_string(out.json);
    return finish_gate(out.assumptions_ok);
  });
}

}  // namespace

extern "C" {

const char* spectra_version(void) { return "1.0.0"; }

const char* spectra_last_error(void) { return g_last_error.c_str(); }

int spectra_model_from_json(const char* json_text, spectra_model** out) {
  if (int rc = require(json_text && out, "null argument")) return rc;
  *out = nullptr;
  return guarded([&] {
    auto* handle = new spectra_model{spectra::model_from_json(json_text)};
    *out = handle;
    return SPECTRA_OK;
  });
}

void spectra_model_free(spectra_model* model) { delete model; }

int spectra_analyze(const spectra_model* model, const char* options_json,
                    char** report_json) {
  if (int rc = require(model && report_json, "null argument")) return rc;
  *report_json = nullptr;
  return guarded([&] {
    const spectra::AnalyzeOptions opt =
        spectra::analyze_options_from_json(options_text(options_json));
    spectra::AnalyzeOutcome out = spectra::run_analyze(model->m, opt);
    *report_json = dup_string(out.json);
    return finish_gate(out.assumptions_ok);
  });
}

int spectra_density(const spectra_model* model, const char* options_json,
                    char** csv) {
  if (int rc = require(model && csv, "null argument")) return rc;
  *csv = nullptr;
  return guarded([&] {
    const std::string text = options_text(options_json);
    spectra::DensityOutcome out =
        spectra::run_density(model->m, spectra::density_options_from_json(text),
                             spectra::analyze_options_from_json(text));
    *csv = dup_string(out.csv);
    return finish_gate(out.assumptions_ok);
  });
}

int spectra_simulate(const spectra_model* model, const char* options_json,
                     char** report_json, char** rows_csv) {
  if (int rc = require(model && report_json && rows_csv, "null argument")) return rc;
  *report_json = nullptr;
  *rows_csv = nullptr;
  return guarded([&] {
    const spectra::SimulateOptions opt =
        spectra::simulate_options_from_json(options_text(options_json));
    spectra::SimulateOutcome out = spectra::run_simulate(model->m, opt);
    *report_json = dup_string(out.json);
    *rows_csv = dup_string(out.csv);
    return finish_gate(out.assumptions_ok);
  });
}

int spectra_shrink(const spectra_model* model, const double* eigenvalues, int n,
                   const char* options_json, char** csv, char** summary_json) {
  return shrink_impl(model, eigenvalues, n, options_json, csv, summary_json, false);
}

int spectra_oracle(const spectra_model* model, const double* eigenvalues, int n,
                   const char* options_json, char** csv, char** summary_json) {
  return shrink_impl(model, eigenvalues, n, options_json, csv, summary_json, true);
}

void spectra_string_free(char* s) { std::free(s); }

}  // extern "C"
