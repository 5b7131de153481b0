#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <ddsplit/error.hpp>
#include <ddsplit/oracle.hpp>

#include "output.hpp"

namespace ddsolve {

using ddsplit::Vector;

namespace {

void configure_logging() {
  auto logger = spdlog::get("ddsolve");
  if (!logger) logger = spdlog::stderr_color_mt("ddsolve");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("DD_LOG_LEVEL");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    if (level != "info") spdlog::warn("DD_LOG_LEVEL={} not recognized; using info", level);
  }
}

std::string pairs_string(const ddsplit::Partition& p) {
  std::string s = "{";
  for (int k = 0; k < p.n_interfaces(); ++k) {
    const auto& f = p.interfaces[static_cast<std::size_t>(k)];
    if (k) s += ",";
    s += "(" + std::to_string(f.left + 1) + "," + std::to_string(f.right + 1) + ")";
  }
  return s + "}";
}

std::string index_set(const std::vector<int>& v) {
  std::string s = "{";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(v[k] + 1);
  }
  return s + "}";
}

}  // namespace

RunConfig apply_overrides(RunConfig config, const CommandOptions& options) {
  config.params.threads = options.threads;
  if (options.out_dir) config.out_dir = *options.out_dir;
  if (options.max_iters) config.params.max_iters = *options.max_iters;
  if (options.tol) config.params.stop_tol = *options.tol;
  config.params.validate();
  return config;
}

SolveOutcome solve(const RunConfig& config) {
  SolveOutcome out;
  out.problem = ddsplit::build(make_spec(config));
  out.trace_csv = trace_header();
  const auto start = std::chrono::steady_clock::now();
  out.result = ddsplit::run(
      out.problem.x0, out.problem.oracles, config.params,
      [&](const ddsplit::IterationReport& r, const auto&, const auto&, const auto&) {
        out.trace_csv += trace_row(r);
        if (r.n % 500 == 0) {
          spdlog::debug("n={} residual={:.3e} branch={}", r.n, r.kt_residual,
                        ddsplit::to_string(r.branch));
        }
      });
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_outputs(const std::filesystem::path& dir, const RunConfig& config,
                   const SolveOutcome& outcome) {
  std::filesystem::create_directories(dir);
  const ddsplit::Partition& part = *outcome.problem.spec.partition;
  const ddsplit::GluedSolution glued = ddsplit::glue(part, outcome.result.point);
  write_text(dir / "trace.csv", outcome.trace_csv);
  write_text(dir / "solution.csv", solution_csv(part, glued));
  for (int k = 0; k < part.n_interfaces(); ++k) {
    const auto& iface = part.interfaces[static_cast<std::size_t>(k)];
    write_text(dir / dual_file_name(iface),
               duals_csv(iface, outcome.result.point.dual[static_cast<std::size_t>(k)],
                         part.global.dim));
  }
  const auto& r = outcome.result;
  nlohmann::ordered_json summary;
  summary["config"] = config.source_file.string();
  summary["kind"] = ddsplit::to_string(config.kind);
  summary["converged"] = r.converged;
  summary["iterations"] = r.iterations;
  summary["initial_residual"] = r.initial_residual;
  summary["final_residual"] = r.final_residual;
  summary["relative_residual"] =
      r.initial_residual > 0 ? r.final_residual / r.initial_residual : 0.0;
  summary["max_interface_jump"] = glued.max_jump;
  summary["wall_time_s"] = outcome.seconds;
  summary["threads"] = config.params.threads;
  summary["seed"] = config.seed;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

int run_command(const std::filesystem::path& path, const CommandOptions& options,
                std::ostream& out) {
  const RunConfig config = apply_overrides(load_config(path), options);
  spdlog::info("solving {} ({})", path.string(), ddsplit::to_string(config.kind));
  const SolveOutcome outcome = solve(config);
  write_outputs(config.out_dir, config, outcome);
  const auto& r = outcome.result;
  out << "iterations: " << r.iterations << "\n"
      << "converged: " << (r.converged ? "yes" : "no") << "\n"
      << "residual: " << format_double(r.final_residual) << " (initial "
      << format_double(r.initial_residual) << ")\n"
      << "output: " << config.out_dir << "\n";
  return r.converged ? exit_ok : exit_max_iters;
}

int verify_command(const std::filesystem::path& path, const CommandOptions& options,
                   std::ostream& out) {
  using ddsplit::ProblemKind;
  const RunConfig config = apply_overrides(load_config(path), options);
  if (config.kind != ProblemKind::poisson && config.kind != ProblemKind::plaplacian &&
      config.kind != ProblemKind::obstacle) {
    throw ddsplit::ConfigError("verify supports kinds poisson, plaplacian and obstacle");
  }
  if (config.kind == ProblemKind::plaplacian && !config.p_per_subdomain.empty()) {
    throw ddsplit::ConfigError("verify: per-subdomain exponents have no monolithic reference");
  }
  const SolveOutcome outcome = solve(config);
  const ddsplit::ProblemSpec& spec = outcome.problem.spec;
  const ddsplit::Partition& part = *spec.partition;
  const ddsplit::Grid& global = part.global;

  Vector reference;
  Vector multiplier;
  switch (config.kind) {
    case ProblemKind::poisson:
      reference = ddsplit::oracle::monolithic_poisson(global, spec.source);
      break;
    case ProblemKind::plaplacian:
      reference = ddsplit::oracle::monolithic_plaplacian(global, spec.source, spec.p,
                                                         spec.plap_delta);
      break;
    default: {
      const auto obst = ddsplit::oracle::monolithic_obstacle(global, spec.source, spec.obstacle);
      reference = obst.u;
      multiplier = obst.multiplier;
      break;
    }
  }
  const auto ref_parts = ddsplit::oracle::restrict_to_subdomains(part, reference);
  const auto& point = outcome.result.point;
  const double energy = ddsplit::oracle::energy_distance(part, point.primal, ref_parts);
  const ddsplit::PrimalDualPoint z =
      ddsplit::oracle::kt_reference(part, ref_parts, outcome.problem.oracles.energies);
  double flux = 0.0;
  for (std::size_t k = 0; k < z.dual.size(); ++k) {
    if (z.dual[k].size() > 0) flux = std::max(flux, (z.dual[k] - point.dual[k]).lpNorm<Eigen::Infinity>());
  }
  const auto report = ddsplit::dual_flux_report(part, point);

  out << "iterations: " << outcome.result.iterations
      << (outcome.result.converged ? " (converged)" : " (iteration cap)") << "\n"
      << "energy discrepancy: " << format_double(energy) << " (tol "
      << format_double(config.verify.energy_tol) << ")\n"
      << "dual discrepancy vs reference duals: " << format_double(flux) << "\n"
      << "dual vs one-sided difference flux: " << format_double(report.max_discrepancy) << "\n";

  bool ok = energy <= config.verify.energy_tol;
  if (config.kind == ProblemKind::obstacle) {
    // Duals are not unique where the contact set touches an interface, so
    // the dual comparison is reported but not enforced.
    const ddsplit::GluedSolution glued = ddsplit::glue(part, point);
    const Vector u = global.to_dofs(glued.nodal);
    const Vector h = global.to_dofs(spec.obstacle);
    const Vector lambda =
        ddsplit::assemble_stiffness(global).apply(u) - ddsplit::assemble_load(global, spec.source);
    const double infeas = std::max(0.0, (h - u).maxCoeff());
    const double comp = (u - h).cwiseMin(lambda).cwiseAbs().maxCoeff();
    out << "feasibility violation: " << format_double(infeas) << "\n"
        << "complementarity residual: " << format_double(comp) << "\n";
    ok = ok && infeas <= 1e-10 && comp <= 1e-6;
  } else {
    ok = ok && flux <= config.verify.flux_tol;
    out << "(dual tol " << format_double(config.verify.flux_tol) << ")\n";
  }
  out << (ok ? "verify: PASS" : "verify: FAIL") << "\n";
  return ok ? exit_ok : exit_error;
}

int describe_command(const std::filesystem::path& path, std::ostream& out) {
  const RunConfig config = load_config(path);
  const ddsplit::Partition part = build_partition(config.geometry);
  out << "kind: " << ddsplit::to_string(config.kind) << "\n"
      << "dimension: " << config.geometry.dim << "\n"
      << "m=" << part.size() << "\n"
      << "K=" << pairs_string(part) << "\n";
  for (int i = 0; i < part.size(); ++i) {
    const auto& g = part.subdomains[static_cast<std::size_t>(i)];
    out << "subdomain " << i + 1 << ": dofs=" << g.n_dofs() << " nodes=" << g.n_nodes()
        << " J+=" << index_set(part.neighbors_plus(i))
        << " J-=" << index_set(part.neighbors_minus(i))
        << (g.floating ? " floating" : "") << "\n";
  }
  for (const auto& f : part.interfaces) {
    out << "interface (" << f.left + 1 << "," << f.right + 1 << "): " << f.size()
        << (f.size() == 1 ? " node, x=" : " nodes, x=") << f.nodes.front().x;
    if (config.geometry.dim == 2) out << ", y in [" << f.nodes.front().y << "," << f.nodes.back().y << "]";
    out << "\n";
  }
  return exit_ok;
}

int main_entry(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Domain-decomposition solver by best-approximation primal-dual splitting"};
  app.require_subcommand(1);
  CommandOptions options;
  std::string config;

  auto add_solve_flags = [&](CLI::App* sub) {
    sub->add_option("config", config, "JSON problem configuration")->required();
    sub->add_option("--threads", options.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", options.out_dir, "output directory");
    sub->add_option("--max-iters", options.max_iters, "iteration cap")->check(CLI::NonNegativeNumber);
    sub->add_option("--tol", options.tol, "stopping tolerance")->check(CLI::NonNegativeNumber);
  };
  CLI::App* run = app.add_subcommand("run", "solve and write trace, solution and duals");
  add_solve_flags(run);
  CLI::App* verify = app.add_subcommand("verify", "solve and compare with the monolithic oracle");
  add_solve_flags(verify);
  CLI::App* describe = app.add_subcommand("describe", "print the partition without solving");
  describe->add_option("config", config, "JSON problem configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_error;
  }

  try {
    if (run->parsed()) return run_command(config, options, std::cout);
    if (verify->parsed()) return verify_command(config, options, std::cout);
    return describe_command(config, std::cout);
  } catch (const ddsplit::SolverError& e) {
    spdlog::error("{} (residual {:.3e})", e.what(), e.residual());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
  }
  return exit_error;
}

}  // namespace ddsolve
