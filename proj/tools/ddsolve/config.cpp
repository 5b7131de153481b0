#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include <ddsplit/error.hpp>

#include "expression.hpp"

namespace ddsolve {

using json = nlohmann::json;
using ddsplit::ConfigError;

namespace {

[[noreturn]] void field_error(const std::string& pointer, const std::string& what) {
  throw ConfigError("config field " + pointer + ": " + what);
}

void reject_unknown(const json& obj, const std::string& pointer,
                    const std::set<std::string>& allowed) {
  if (!obj.is_object()) field_error(pointer.empty() ? "/" : pointer, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) field_error(pointer + "/" + key, "unknown key");
  }
}

double get_number(const json& v, const std::string& pointer) {
  if (!v.is_number()) field_error(pointer, "expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& pointer) {
  if (!v.is_number_integer()) field_error(pointer, "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& v, const std::string& pointer) {
  if (!v.is_boolean()) field_error(pointer, "expected true or false");
  return v.get<bool>();
}

template <typename T, typename F>
std::vector<T> get_list(const json& v, const std::string& pointer, F item) {
  if (!v.is_array()) field_error(pointer, "expected an array");
  std::vector<T> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(item(v[k], pointer + "/" + std::to_string(k)));
  return out;
}

ddsplit::Schedule get_schedule(const json& v, const std::string& pointer) {
  if (v.is_array()) {
    if (v.empty()) field_error(pointer, "schedule must not be empty");
    return ddsplit::Schedule(get_list<double>(v, pointer, get_number));
  }
  return ddsplit::Schedule(get_number(v, pointer));
}

FieldSpec get_field(const json& v, const std::string& pointer,
                    const std::filesystem::path& base) {
  FieldSpec f;
  if (v.is_number()) {
    f.kind = FieldSpec::Kind::constant;
    f.constant = v.get<double>();
  } else if (v.is_string()) {
    f.kind = FieldSpec::Kind::expression;
    f.text = v.get<std::string>();
    try {
      Expression check(f.text);
    } catch (const ConfigError& e) {
      field_error(pointer, e.what());
    }
  } else if (v.is_object()) {
    reject_unknown(v, pointer, {"csv"});
    if (!v.contains("csv") || !v["csv"].is_string()) field_error(pointer + "/csv", "expected a path");
    f.kind = FieldSpec::Kind::csv;
    std::filesystem::path p = v["csv"].get<std::string>();
    f.text = (p.is_relative() ? base / p : p).string();
  } else {
    field_error(pointer, "expected a number, an expression string, or {\"csv\": path}");
  }
  return f;
}

GeometryConfig get_geometry(const json& g) {
  const std::string ptr = "/geometry";
  reject_unknown(g, ptr, {"dim", "length", "width", "height", "cuts", "nodes", "nx", "ny",
                          "allow_floating", "floating_weight"});
  GeometryConfig out;
  if (!g.contains("dim")) field_error(ptr + "/dim", "missing");
  out.dim = get_int(g["dim"], ptr + "/dim");
  if (out.dim != 1 && out.dim != 2) field_error(ptr + "/dim", "must be 1 or 2");
  if (g.contains("cuts")) out.cuts = get_list<double>(g["cuts"], ptr + "/cuts", get_number);
  if (g.contains("allow_floating")) out.allow_floating = get_bool(g["allow_floating"], ptr + "/allow_floating");
  if (g.contains("floating_weight")) {
    out.floating_weight = get_number(g["floating_weight"], ptr + "/floating_weight");
    if (!(out.floating_weight > 0)) field_error(ptr + "/floating_weight", "must be positive");
  }
  if (out.dim == 1) {
    for (const char* k : {"width", "height", "nx", "ny"}) {
      if (g.contains(k)) field_error(ptr + "/" + k, "not used in 1D");
    }
    if (g.contains("length")) out.length = get_number(g["length"], ptr + "/length");
    if (!g.contains("nodes")) field_error(ptr + "/nodes", "missing");
    if (g["nodes"].is_array()) {
      out.nodes = get_list<int>(g["nodes"], ptr + "/nodes", get_int);
      if (out.nodes.size() != out.cuts.size() + 1) {
        field_error(ptr + "/nodes", "needs one count per subdomain");
      }
    } else {
      out.total_nodes = get_int(g["nodes"], ptr + "/nodes");
    }
  } else {
    for (const char* k : {"length", "nodes"}) {
      if (g.contains(k)) field_error(ptr + "/" + k, "not used in 2D");
    }
    if (g.contains("width")) out.length = get_number(g["width"], ptr + "/width");
    if (g.contains("height")) out.height = get_number(g["height"], ptr + "/height");
    if (!g.contains("nx")) field_error(ptr + "/nx", "missing");
    if (!g.contains("ny")) field_error(ptr + "/ny", "missing");
    if (g["nx"].is_array()) {
      out.nx = get_list<int>(g["nx"], ptr + "/nx", get_int);
      if (out.nx.size() != out.cuts.size() + 1) field_error(ptr + "/nx", "needs one count per strip");
    } else {
      out.nx.assign(out.cuts.size() + 1, get_int(g["nx"], ptr + "/nx"));
    }
    out.ny = get_int(g["ny"], ptr + "/ny");
  }
  return out;
}

void get_algorithm(const json& a, ddsplit::AlgorithmParams& p) {
  const std::string ptr = "/algorithm";
  reject_unknown(a, ptr, {"epsilon", "gamma", "mu", "lambda", "max_iters", "stop_tol",
                          "relative_stop", "fused_update", "rho_guard"});
  if (a.contains("epsilon")) p.epsilon = get_number(a["epsilon"], ptr + "/epsilon");
  if (a.contains("gamma")) p.gamma = get_schedule(a["gamma"], ptr + "/gamma");
  if (a.contains("mu")) p.mu = get_schedule(a["mu"], ptr + "/mu");
  if (a.contains("lambda")) p.lambda = get_schedule(a["lambda"], ptr + "/lambda");
  if (a.contains("max_iters")) p.max_iters = get_int(a["max_iters"], ptr + "/max_iters");
  if (a.contains("stop_tol")) p.stop_tol = get_number(a["stop_tol"], ptr + "/stop_tol");
  if (a.contains("relative_stop")) p.relative_stop = get_bool(a["relative_stop"], ptr + "/relative_stop");
  if (a.contains("fused_update")) p.fused_update = get_bool(a["fused_update"], ptr + "/fused_update");
  if (a.contains("rho_guard")) p.rho_guard = get_number(a["rho_guard"], ptr + "/rho_guard");
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config field /algorithm: ") + e.what());
  }
}

std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config syntax error at " + locate(text, e.byte > 0 ? e.byte - 1 : 0) +
                      ": " + e.what());
  }
  reject_unknown(doc, "", {"kind", "geometry", "source", "obstacle", "p", "p_per_subdomain",
                           "plap_delta", "orientation", "permeability", "algorithm", "verify",
                           "output", "seed"});
  RunConfig c;
  c.source_file = origin;
  const std::filesystem::path base = origin.empty() ? "." : origin.parent_path();

  if (!doc.contains("kind")) field_error("/kind", "missing (one of poisson, plaplacian, obstacle, unilateral, membrane)");
  if (!doc["kind"].is_string()) field_error("/kind", "expected a string");
  try {
    c.kind = ddsplit::problem_kind_from_string(doc["kind"].get<std::string>());
  } catch (const ConfigError& e) {
    field_error("/kind", e.what());
  }
  if (!doc.contains("geometry")) field_error("/geometry", "missing");
  c.geometry = get_geometry(doc["geometry"]);
  if (!doc.contains("source")) field_error("/source", "missing");
  c.source = get_field(doc["source"], "/source", base);
  if (doc.contains("obstacle")) c.obstacle = get_field(doc["obstacle"], "/obstacle", base);
  if (c.kind == ddsplit::ProblemKind::obstacle && !c.obstacle.present()) {
    field_error("/obstacle", "required for kind obstacle");
  }
  if (doc.contains("p")) c.p = get_number(doc["p"], "/p");
  if (doc.contains("p_per_subdomain")) {
    c.p_per_subdomain = get_list<double>(doc["p_per_subdomain"], "/p_per_subdomain", get_number);
  }
  if (doc.contains("plap_delta")) c.plap_delta = get_number(doc["plap_delta"], "/plap_delta");
  if (doc.contains("orientation")) c.orientation = get_list<int>(doc["orientation"], "/orientation", get_int);
  if (doc.contains("permeability")) {
    c.permeability = get_list<double>(doc["permeability"], "/permeability", get_number);
  }
  if (doc.contains("algorithm")) get_algorithm(doc["algorithm"], c.params);
  if (doc.contains("verify")) {
    const json& v = doc["verify"];
    reject_unknown(v, "/verify", {"energy_tol", "flux_tol"});
    if (v.contains("energy_tol")) c.verify.energy_tol = get_number(v["energy_tol"], "/verify/energy_tol");
    if (v.contains("flux_tol")) c.verify.flux_tol = get_number(v["flux_tol"], "/verify/flux_tol");
  }
  if (doc.contains("output")) {
    const json& o = doc["output"];
    reject_unknown(o, "/output", {"dir"});
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) field_error("/output/dir", "expected a string");
      c.out_dir = o["dir"].get<std::string>();
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) field_error("/seed", "expected a nonnegative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

ddsplit::Partition build_partition(const GeometryConfig& g) {
  ddsplit::PartitionOptions opt;
  opt.allow_floating = g.allow_floating;
  opt.floating_weight = g.floating_weight;
  if (g.dim == 1) {
    std::vector<int> nodes = g.nodes;
    if (nodes.empty()) nodes = ddsplit::distribute_nodes_1d(g.length, g.cuts, g.total_nodes);
    return ddsplit::build_partition_1d(g.length, g.cuts, nodes, opt);
  }
  std::vector<ddsplit::StripResolution> res;
  for (int nx : g.nx) res.push_back({nx, g.ny});
  return ddsplit::build_partition_2d_strips(g.length, g.height, g.cuts, res, opt);
}

ddsplit::Vector evaluate_field(const FieldSpec& field, const ddsplit::Grid& grid,
                               const std::string& name) {
  const int n = grid.n_nodes();
  switch (field.kind) {
    case FieldSpec::Kind::none:
      return ddsplit::Vector::Zero(n);
    case FieldSpec::Kind::constant:
      return ddsplit::Vector::Constant(n, field.constant);
    case FieldSpec::Kind::expression: {
      const Expression e(field.text);
      return grid.sample([&](ddsplit::Point p) { return e(p.x, p.y); });
    }
    case FieldSpec::Kind::csv: {
      std::ifstream in(field.text);
      if (!in) throw ConfigError(name + ": cannot read " + field.text);
      std::vector<double> values;
      std::string line;
      int lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string cell = line.substr(line.find_last_of(',') == std::string::npos
                                                 ? 0
                                                 : line.find_last_of(',') + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(cell, &used);
        } catch (const std::exception&) {
          if (lineno == 1) continue;  // header
          throw ConfigError(name + ": " + field.text + " line " + std::to_string(lineno) +
                            " is not a number");
        }
        values.push_back(v);
      }
      if (static_cast<int>(values.size()) != n) {
        throw ConfigError(name + ": " + field.text + " has " + std::to_string(values.size()) +
                          " values, the grid has " + std::to_string(n) + " nodes");
      }
      return Eigen::Map<ddsplit::Vector>(values.data(), n);
    }
  }
  return ddsplit::Vector::Zero(n);
}

ddsplit::ProblemSpec make_spec(const RunConfig& c) {
  ddsplit::ProblemSpec s;
  s.partition = std::make_shared<const ddsplit::Partition>(build_partition(c.geometry));
  s.kind = c.kind;
  s.source = evaluate_field(c.source, s.partition->global, "source");
  if (c.obstacle.present()) s.obstacle = evaluate_field(c.obstacle, s.partition->global, "obstacle");
  s.p = c.p;
  s.p_per_subdomain = c.p_per_subdomain;
  s.plap_delta = c.plap_delta;
  s.orientation = c.orientation;
  s.permeability = c.permeability;
  s.params = c.params;
  return s;
}

}  // namespace ddsolve
