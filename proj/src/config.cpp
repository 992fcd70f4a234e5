#include "spectra/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace spectra {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw Error(Code::config, msg); }

json parse_or_throw(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) bad("config: not valid JSON");
  if (!j.is_object()) bad("config: top level must be an object");
  return j;
}

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const auto& a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) bad(where + ": unknown key \"" + key + "\"");
  }
}

double get_num(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) bad(where + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

int get_int(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) bad(where + ": \"" + key + "\" must be an integer");
  return v.get<int>();
}

bool get_bool(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) bad(where + ": \"" + key + "\" must be a boolean");
  return v.get<bool>();
}

std::vector<double> get_num_array(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) bad(where + " must be a non-empty array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) bad(where + " must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

// The model section: either the value of a top-level "model" key or the whole
// object when it already looks like one.
const json& model_section(const json& j) {
  if (j.contains("model")) {
    if (!j["model"].is_object()) bad("config: \"model\" must be an object");
    check_keys(j, {"model", "analyze", "density", "simulate", "shrink", "oracle"},
               "config");
    return j["model"];
  }
  if (j.contains("bulk")) return j;
  bad("config: no \"model\" section (and no bare \"bulk\" key)");
}

struct ParsedBulk {
  BulkSpectrum bulk;
  std::optional<Matrix> basis;
};

ParsedBulk parse_bulk(const json& b, const json& md) {
  ParsedBulk out;
  if (b.is_array()) {
    out.bulk = build_bulk_from_eigenvalues(get_num_array(b, "model.bulk"));
    return out;
  }
  if (!b.is_object()) bad("model.bulk: expected an object or an array of values");
  if (!b.contains("type") || !b["type"].is_string())
    bad("model.bulk: \"type\" string is required");
  const std::string type = b["type"].get<std::string>();

  if (type == "list") {
    check_keys(b, {"type", "values"}, "model.bulk");
    if (!b.contains("values")) bad("model.bulk: \"values\" is required for type list");
    out.bulk = build_bulk_from_eigenvalues(get_num_array(b["values"], "model.bulk.values"));
  } else if (type == "atoms") {
    check_keys(b, {"type", "atoms"}, "model.bulk");
    if (!b.contains("atoms") || !b["atoms"].is_array() || b["atoms"].empty())
      bad("model.bulk: \"atoms\" must be a non-empty array");
    std::vector<double> values;
    for (const auto& a : b["atoms"]) {
      if (!a.is_object()) bad("model.bulk.atoms: entries must be objects");
      check_keys(a, {"sigma", "multiplicity"}, "model.bulk.atoms");
      if (!a.contains("sigma")) bad("model.bulk.atoms: \"sigma\" is required");
      const double sigma = get_num(a, "sigma", "model.bulk.atoms");
      int mult = 1;
      if (a.contains("multiplicity")) mult = get_int(a, "multiplicity", "model.bulk.atoms");
      if (mult <= 0) bad("model.bulk.atoms: multiplicity must be positive");
      for (int k = 0; k < mult; ++k) values.push_back(sigma);
    }
    out.bulk = build_bulk_from_eigenvalues(values);
  } else if (type == "toeplitz") {
    check_keys(b, {"type", "rho"}, "model.bulk");
    if (!b.contains("rho")) bad("model.bulk: \"rho\" is required for type toeplitz");
    if (!md.contains("M")) bad("model: \"M\" is required for a toeplitz bulk");
    ToeplitzPopulation pop =
        build_toeplitz_population(get_num(b, "rho", "model.bulk"), get_int(md, "M", "model"));
    out.bulk = std::move(pop.bulk);
    out.basis = std::move(pop.basis);
  } else if (type == "uniform") {
    check_keys(b, {"type", "lo", "hi"}, "model.bulk");
    if (!b.contains("lo") || !b.contains("hi"))
      bad("model.bulk: \"lo\" and \"hi\" are required for type uniform");
    if (!md.contains("M")) bad("model: \"M\" is required for a uniform bulk");
    out.bulk = build_uniform_bulk(get_num(b, "lo", "model.bulk"), get_num(b, "hi", "model.bulk"),
                                  get_int(md, "M", "model"));
  } else {
    bad("model.bulk: unknown type \"" + type + "\"");
  }
  return out;
}

SpikeSet parse_spikes(const json& md, const BulkSpectrum& bulk) {
  if (!md.contains("spikes")) return {};
  const json& sp = md["spikes"];
  if (!sp.is_array()) bad("model.spikes: expected an array");
  const std::vector<double> expanded = bulk.expand();
  std::vector<std::pair<int, double>> index_sigma;
  for (const auto& s : sp) {
    if (!s.is_object()) bad("model.spikes: entries must be objects");
    check_keys(s, {"index", "d", "sigma_g"}, "model.spikes");
    if (!s.contains("index")) bad("model.spikes: \"index\" is required");
    const int idx = get_int(s, "index", "model.spikes");
    if (idx < 1 || idx > bulk.M)
      bad("model.spikes: index " + std::to_string(idx) + " outside 1.." +
          std::to_string(bulk.M));
    const bool has_d = s.contains("d"), has_sg = s.contains("sigma_g");
    if (has_d == has_sg)
      bad("model.spikes: give exactly one of \"d\" or \"sigma_g\"");
    const double sigma_g =
        has_sg ? get_num(s, "sigma_g", "model.spikes")
               : expanded[idx - 1] * (1.0 + get_num(s, "d", "model.spikes"));
    index_sigma.emplace_back(idx, sigma_g);
  }
  return attach_spikes_sigma(bulk, index_sigma);
}

// Returns the named section, or a null json when absent. Accepts a full
// config, a sections-only object, or a bare model (which has no sections).
json section_of(const std::string& text, const std::string& name) {
  const json j = parse_or_throw(text);
  if (j.contains("bulk")) return json();  // bare model text
  check_keys(j, {"model", "analyze", "density", "simulate", "shrink", "oracle"},
             "config");
  if (!j.contains(name)) return json();
  if (!j[name].is_object()) bad("config: \"" + name + "\" must be an object");
  return j[name];
}

void fill_pipeline(const json& a, AnalyzeOptions& opt) {
  if (a.is_null()) return;
  check_keys(a, {"tau", "eps0", "eps1", "C", "c0", "asymptotic"}, "analyze");
  if (a.contains("tau")) opt.tau = get_num(a, "tau", "analyze");
  if (a.contains("eps0")) opt.eps0 = get_num(a, "eps0", "analyze");
  if (a.contains("eps1")) opt.eps1 = get_num(a, "eps1", "analyze");
  if (a.contains("C")) opt.Cw = get_num(a, "C", "analyze");
  if (a.contains("c0")) opt.c0 = get_num(a, "c0", "analyze");
  if (a.contains("asymptotic")) opt.asymptotic = get_bool(a, "asymptotic", "analyze");
}

}  // namespace

PopulationModel model_from_json(const std::string& text) {
  const json j = parse_or_throw(text);
  const json& md = model_section(j);
  check_keys(md, {"bulk", "spikes", "M", "N"}, "model");
  if (!md.contains("bulk")) bad("model: \"bulk\" is required");
  if (!md.contains("N")) bad("model: \"N\" is required");

  ParsedBulk pb = parse_bulk(md["bulk"], md);
  if (md.contains("M") && get_int(md, "M", "model") != pb.bulk.M)
    bad("model: \"M\" = " + std::to_string(get_int(md, "M", "model")) +
        " disagrees with the bulk size " + std::to_string(pb.bulk.M));
  const int N = get_int(md, "N", "model");

  SpikeSet spikes = parse_spikes(md, pb.bulk);
  return make_model(pb.bulk, spikes, N, std::move(pb.basis));
}

AnalyzeOptions analyze_options_from_json(const std::string& text) {
  AnalyzeOptions opt;
  fill_pipeline(section_of(text, "analyze"), opt);
  return opt;
}

DensityOptions density_options_from_json(const std::string& text) {
  DensityOptions opt;
  const json d = section_of(text, "density");
  if (d.is_null()) return opt;
  check_keys(d, {"grid", "emin", "emax"}, "density");
  if (d.contains("grid")) opt.grid = get_int(d, "grid", "density");
  if (d.contains("emin")) opt.emin = get_num(d, "emin", "density");
  if (d.contains("emax")) opt.emax = get_num(d, "emax", "density");
  if (opt.grid < 2) bad("density: grid must be at least 2");
  return opt;
}

SimulateOptions simulate_options_from_json(const std::string& text) {
  SimulateOptions opt;
  fill_pipeline(section_of(text, "analyze"), opt.pipeline);
  const json s = section_of(text, "simulate");
  if (s.is_null()) return opt;
  check_keys(s, {"replicates", "seed", "law", "coupled", "slack", "rigidity"},
             "simulate");
  if (s.contains("replicates")) opt.replicates = get_int(s, "replicates", "simulate");
  if (opt.replicates <= 0) bad("simulate: replicates must be positive");
  if (s.contains("seed")) {
    const auto& v = s.at("seed");
    if (!v.is_number_integer() && !v.is_number_unsigned())
      bad("simulate: \"seed\" must be an integer");
    if (v.is_number_integer() && v.get<long long>() < 0)
      bad("simulate: \"seed\" must be non-negative");
    opt.seed = v.get<std::uint64_t>();
  }
  if (s.contains("law")) {
    if (!s["law"].is_string()) bad("simulate: \"law\" must be a string");
    opt.law = s["law"].get<std::string>();
  }
  if (s.contains("coupled")) opt.coupled = get_bool(s, "coupled", "simulate");
  if (s.contains("slack")) opt.slack = get_num(s, "slack", "simulate");
  if (s.contains("rigidity")) opt.rigidity = get_bool(s, "rigidity", "simulate");
  return opt;
}

ShrinkOptions shrink_options_from_json(const std::string& text, bool oracle) {
  ShrinkOptions opt;
  fill_pipeline(section_of(text, "analyze"), opt.pipeline);
  const std::string name = oracle ? "oracle" : "shrink";
  if (oracle) opt.loss = "Frobenius-oracle";
  const json s = section_of(text, name);
  if (s.is_null()) return opt;
  if (oracle)
    check_keys(s, {"eta", "eigenvalues", "eigenvalue_file"}, name);
  else
    check_keys(s, {"loss", "eta", "eigenvalues", "eigenvalue_file"}, name);
  if (s.contains("loss")) {
    if (!s["loss"].is_string()) bad(name + ": \"loss\" must be a string");
    opt.loss = s["loss"].get<std::string>();
  }
  if (s.contains("eta")) opt.eta = get_num(s, "eta", name);
  if (s.contains("eigenvalues"))
    opt.eigenvalues = get_num_array(s["eigenvalues"], name + ".eigenvalues");
  if (s.contains("eigenvalue_file")) {
    if (!s["eigenvalue_file"].is_string())
      bad(name + ": \"eigenvalue_file\" must be a string");
    opt.eigenvalue_file = s["eigenvalue_file"].get<std::string>();
  }
  if (!opt.eigenvalues.empty() && !opt.eigenvalue_file.empty())
    bad(name + ": give either \"eigenvalues\" or \"eigenvalue_file\", not both");
  return opt;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Code::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Code::io, "read failure on " + path);
  return ss.str();
}

std::vector<double> parse_eigenvalue_csv(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip whitespace and anything after the first comma
    const size_t comma = line.find(',');
    if (comma != std::string::npos) line = line.substr(0, comma);
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t b = line.find_last_not_of(" \t\r");
    line = line.substr(a, b - a + 1);
    if (line.empty() || line[0] == '#') continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || *end != '\0') {
      if (lineno == 1 && out.empty()) continue;  // header line
      throw Error(Code::config,
                  "eigenvalue CSV: cannot parse line " + std::to_string(lineno));
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(Code::config, "eigenvalue CSV: no values found");
  return out;
}

}  // namespace spectra
