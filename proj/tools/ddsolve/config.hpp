#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <ddsplit/problems.hpp>

namespace ddsolve {

/// A scalar field given as a constant, an expression, or a CSV of nodal values.
struct FieldSpec {
  enum class Kind { none, constant, expression, csv } kind = Kind::none;
  double constant = 0.0;
  std::string text;  ///< expression text or CSV path (resolved)

  bool present() const { return kind != Kind::none; }
};

struct GeometryConfig {
  int dim = 1;
  double length = 1.0;  ///< 1D length or 2D width
  double height = 1.0;
  std::vector<double> cuts;
  int total_nodes = 0;             ///< 1D: distributed over subdomains
  std::vector<int> nodes;          ///< 1D: per subdomain
  std::vector<int> nx;             ///< 2D: cells across each strip
  int ny = 0;                      ///< 2D: cells along the strips
  bool allow_floating = false;
  double floating_weight = 1.0;
};

struct VerifyConfig {
  double energy_tol = 1e-6;
  double flux_tol = 1e-4;
};

struct RunConfig {
  std::filesystem::path source_file;
  ddsplit::ProblemKind kind = ddsplit::ProblemKind::poisson;
  GeometryConfig geometry;
  FieldSpec source;
  FieldSpec obstacle;
  double p = 2.0;
  std::vector<double> p_per_subdomain;
  double plap_delta = -1.0;
  std::vector<int> orientation;
  std::vector<double> permeability;
  ddsplit::AlgorithmParams params;
  VerifyConfig verify;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
};

/// Parses and validates a JSON document. Errors name the offending field
/// (as a JSON pointer) or the line and column of a syntax error.
RunConfig parse_config(const std::string& text, const std::filesystem::path& origin = {});
RunConfig load_config(const std::filesystem::path& path);

ddsplit::Partition build_partition(const GeometryConfig& g);

/// Nodal values of a field on the global grid.
ddsplit::Vector evaluate_field(const FieldSpec& field, const ddsplit::Grid& grid,
                               const std::string& name);

ddsplit::ProblemSpec make_spec(const RunConfig& config);

}  // namespace ddsolve
