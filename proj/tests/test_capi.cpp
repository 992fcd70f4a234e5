#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "spectra_capi.h"

using nlohmann::json;

namespace {

const char* kSpiked =
    R"({"bulk": [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
                 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
        "spikes": [{"index": 1, "d": 3.0}], "N": 60})";

struct StringGuard {
  char* s = nullptr;
  ~StringGuard() { spectra_string_free(s); }
};

struct ModelGuard {
  spectra_model* m = nullptr;
  ~ModelGuard() { spectra_model_free(m); }
};

spectra_model* make_spiked() {
  spectra_model* m = nullptr;
  REQUIRE(spectra_model_from_json(kSpiked, &m) == SPECTRA_OK);
  REQUIRE(m != nullptr);
  return m;
}

}  // namespace

TEST_CASE("version and error strings are always available") {
  REQUIRE(spectra_version() != nullptr);
  CHECK(std::string(spectra_version()) == "1.0.0");
  REQUIRE(spectra_last_error() != nullptr);
}

TEST_CASE("model construction round trips and reports schema problems") {
  ModelGuard g;
  CHECK(spectra_model_from_json(kSpiked, &g.m) == SPECTRA_OK);
  CHECK(g.m != nullptr);
  CHECK(std::string(spectra_last_error()).empty());

  spectra_model* bad = reinterpret_cast<spectra_model*>(1);
  CHECK(spectra_model_from_json("{ not json", &bad) == SPECTRA_EC_CONFIG);
  CHECK(bad == nullptr);  // cleared before the attempt
  CHECK(!std::string(spectra_last_error()).empty());

  CHECK(spectra_model_from_json(R"({"bulk": [1], "N": 2, "wat": 0})", &bad) ==
        SPECTRA_EC_CONFIG);

  CHECK(spectra_model_from_json(nullptr, &bad) == SPECTRA_EC_PRECONDITION);
  CHECK(spectra_model_from_json(kSpiked, nullptr) == SPECTRA_EC_PRECONDITION);

  // both free functions accept NULL
  spectra_model_free(nullptr);
  spectra_string_free(nullptr);
}

TEST_CASE("analyze produces a parseable report and respects the handle") {
  ModelGuard m{make_spiked()};
  StringGuard rep;
  REQUIRE(spectra_analyze(m.m, nullptr, &rep.s) == SPECTRA_OK);
  REQUIRE(rep.s != nullptr);
  const json j = json::parse(rep.s);
  CHECK(j.at("model").at("M").get<int>() == 30);
  CHECK(j.at("model").at("N").get<int>() == 60);
  CHECK(j.at("structure").at("p").get<int>() == 1);
  CHECK(j.at("assumptions_ok").get<bool>() == true);
  CHECK(j.at("classification").at("spikes").size() == 1);
  CHECK(j.at("classification").at("spikes")[0].at("is_outlier").get<bool>());
  const double loc =
      j.at("predictions")[0].at("location").get<double>();
  CHECK(loc == doctest::Approx(1.0 + 3.0 + 0.5 * (1.0 + 1.0 / 3.0)).epsilon(1e-9));

  // a "model" key inside the options is ignored: the handle wins
  StringGuard rep2;
  REQUIRE(spectra_analyze(
              m.m, R"({"model": {"bulk": [7, 7], "N": 4}, "analyze": {}})",
              &rep2.s) == SPECTRA_OK);
  CHECK(json::parse(rep2.s).at("model").at("M").get<int>() == 30);

  CHECK(spectra_analyze(nullptr, nullptr, &rep2.s) == SPECTRA_EC_PRECONDITION);
  CHECK(spectra_analyze(m.m, nullptr, nullptr) == SPECTRA_EC_PRECONDITION);
  CHECK(spectra_analyze(m.m, "][", &rep2.s) == SPECTRA_EC_CONFIG);
}

TEST_CASE("failed assumption checks still deliver the report, with status 100") {
  ModelGuard m{make_spiked()};
  StringGuard rep;
  REQUIRE(spectra_analyze(m.m, R"({"analyze": {"tau": 0.9}})", &rep.s) ==
          SPECTRA_EC_ASSUMPTION);
  REQUIRE(rep.s != nullptr);
  const json j = json::parse(rep.s);
  CHECK(j.at("assumptions_ok").get<bool>() == false);
  CHECK(!std::string(spectra_last_error()).empty());
  bool found = false;
  for (const auto& it : j.at("assumptions").at("items")) {
    if (it.at("name").get<std::string>() == "aspect-ratio" &&
        !it.at("pass").get<bool>()) {
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("density returns the configured grid") {
  ModelGuard m{make_spiked()};
  StringGuard csv;
  REQUIRE(spectra_density(m.m, R"({"density": {"grid": 16}})", &csv.s) ==
          SPECTRA_OK);
  const std::string text(csv.s);
  CHECK(text.rfind("E,rho\n", 0) == 0);
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 17);  // header + 16 samples
}

TEST_CASE("simulate emits a report and per-spike rows") {
  ModelGuard m{make_spiked()};
  StringGuard rep, rows;
  REQUIRE(spectra_simulate(m.m,
                           R"({"simulate": {"replicates": 2, "seed": 7}})",
                           &rep.s, &rows.s) == SPECTRA_OK);
  const json j = json::parse(rep.s);
  CHECK(j.at("config").at("replicates").get<int>() == 2);
  CHECK(j.at("verification").is_object());
  const std::string csv(rows.s);
  CHECK(csv.rfind("replicate,component,rank,mu,lambda,overlap\n", 0) == 0);
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 3);  // header + 2 replicates x 1 spike

  // identical call, identical bytes
  StringGuard rep2, rows2;
  REQUIRE(spectra_simulate(m.m,
                           R"({"simulate": {"replicates": 2, "seed": 7}})",
                           &rep2.s, &rows2.s) == SPECTRA_OK);
  CHECK(std::strcmp(rep.s, rep2.s) == 0);
  CHECK(std::strcmp(rows.s, rows2.s) == 0);
}

TEST_CASE("shrink consumes a caller-supplied spectrum") {
  ModelGuard m{make_spiked()};
  const double eigs[4] = {5.0, 1.2, 1.0, 0.8};
  StringGuard csv, summary;
  REQUIRE(spectra_shrink(m.m, eigs, 4, nullptr, &csv.s, &summary.s) ==
          SPECTRA_OK);
  CHECK(std::string(csv.s).rfind("index,mu,method,l,c2,beta", 0) == 0);
  const json j = json::parse(summary.s);
  CHECK(j.at("loss").get<std::string>() == "Frobenius");
  CHECK(j.at("n_outliers").get<int>() == 1);
  CHECK(j.at("outliers")[0].at("component").get<int>() == 1);
  CHECK(j.at("outliers")[0].at("rank").get<int>() == 1);

  CHECK(spectra_shrink(m.m, nullptr, 0, nullptr, &csv.s, &summary.s) ==
        SPECTRA_EC_PRECONDITION);  // no eigenvalues anywhere
}

TEST_CASE("shrink reads inline eigenvalues or a CSV file from the config") {
  ModelGuard m{make_spiked()};
  StringGuard csv, summary;
  REQUIRE(spectra_shrink(m.m, nullptr, 0,
                         R"({"shrink": {"eigenvalues": [5.0, 1.0, 0.5],
                                        "loss": "Stein"}})",
                         &csv.s, &summary.s) == SPECTRA_OK);
  CHECK(json::parse(summary.s).at("loss").get<std::string>() == "Stein");

  const std::filesystem::path p =
      std::filesystem::temp_directory_path() / "spectra_capi_eigs.csv";
  {
    std::ofstream out(p);
    out << "eigenvalue\n5.0\n1.0\n0.5\n";
  }
  StringGuard c2, s2;
  const std::string opts =
      std::string(R"({"shrink": {"eigenvalue_file": ")") + p.string() +
      "\"}}";
  REQUIRE(spectra_shrink(m.m, nullptr, 0, opts.c_str(), &c2.s, &s2.s) ==
          SPECTRA_OK);
  CHECK(json::parse(s2.s).at("entries").get<int>() == 3);
  std::filesystem::remove(p);

  StringGuard c3, s3;
  CHECK(spectra_shrink(m.m, nullptr, 0,
                       R"({"shrink": {"eigenvalue_file": "/no/such/file"}})",
                       &c3.s, &s3.s) == SPECTRA_EC_IO);
}

TEST_CASE("oracle fixes the loss and accepts an eta override") {
  ModelGuard m{make_spiked()};
  const double eigs[4] = {5.0, 1.2, 1.0, 0.8};
  StringGuard csv, summary;
  REQUIRE(spectra_oracle(m.m, eigs, 4, R"({"oracle": {"eta": 0.05}})", &csv.s,
                         &summary.s) == SPECTRA_OK);
  const json j = json::parse(summary.s);
  CHECK(j.at("loss").get<std::string>() == "Frobenius-oracle");
  CHECK(j.at("eta").get<double>() == doctest::Approx(0.05));
  CHECK(std::string(csv.s).find("bulk-stieltjes") != std::string::npos);

  // the oracle section refuses a "loss" key
  StringGuard c2, s2;
  CHECK(spectra_oracle(m.m, eigs, 4, R"({"oracle": {"loss": "Stein"}})", &c2.s,
                       &s2.s) == SPECTRA_EC_CONFIG);
}

TEST_CASE("analyze output is byte-stable across calls") {
  ModelGuard m{make_spiked()};
  StringGuard a, b;
  REQUIRE(spectra_analyze(m.m, "{}", &a.s) == SPECTRA_OK);
  REQUIRE(spectra_analyze(m.m, "{}", &b.s) == SPECTRA_OK);
  CHECK(std::strcmp(a.s, b.s) == 0);
}
