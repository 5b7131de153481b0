#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ddsplit/splitting.hpp"

namespace ddsplit {

enum class ProblemKind { poisson, plaplacian, obstacle, unilateral, membrane };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

struct ProblemSpec {
  std::shared_ptr<const Partition> partition;
  ProblemKind kind = ProblemKind::poisson;
  Vector source;    ///< f at the nodes of partition->global
  Vector obstacle;  ///< h at the nodes of partition->global (obstacle kind)
  double p = 2.0;
  std::vector<double> p_per_subdomain;  ///< overrides p when nonempty
  double plap_delta = -1.0;             ///< negative selects 1e-10 for p < 2, else 0
  std::vector<int> orientation;         ///< ε_ij ∈ {+1, -1} per interface; default +1
  std::vector<double> permeability;     ///< μ_ij per interface (membrane kind)
  AlgorithmParams params;

  void validate() const;
  double exponent(int i) const;
  double smoothing(int i) const;
};

struct Problem {
  ProblemSpec spec;
  ProblemOracles oracles;
  PrimalDualPoint x0;
};

Problem build(const ProblemSpec& spec);

/// Per-subdomain source values taken from global nodal values.
Vector restrict_nodal(const Grid& subdomain, const Vector& global_nodal);

/// prox_{γφ_i}(u_i − γΛ*g) computed with a single Gram-metric solve.
Vector efficient_primal_update(const ProblemOracles& oracles, int i, const Vector& u_i,
                               double gamma, std::span<const Vector> duals);

struct GluedSolution {
  Vector nodal;  ///< one value per node of partition.global
  std::vector<Vector> duals;
  double max_jump = 0.0;
};

GluedSolution glue(const Partition& partition, const PrimalDualPoint& point);

struct FluxReport {
  std::vector<Vector> duals;
  /// One-sided difference of the glued field along the outward normal of
  /// the right subdomain.
  std::vector<Vector> normal_derivative;
  double max_discrepancy = 0.0;
};

FluxReport dual_flux_report(const Partition& partition, const PrimalDualPoint& point);

}  // namespace ddsplit
