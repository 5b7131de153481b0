#include "ddsplit/problems.hpp"

#include <cmath>

#include "ddsplit/error.hpp"

namespace ddsplit {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::poisson: return "poisson";
    case ProblemKind::plaplacian: return "plaplacian";
    case ProblemKind::obstacle: return "obstacle";
    case ProblemKind::unilateral: return "unilateral";
    case ProblemKind::membrane: return "membrane";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  for (ProblemKind k : {ProblemKind::poisson, ProblemKind::plaplacian, ProblemKind::obstacle,
                        ProblemKind::unilateral, ProblemKind::membrane}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown problem kind '" + name + "'");
}

double ProblemSpec::exponent(int i) const {
  return p_per_subdomain.empty() ? p : p_per_subdomain.at(static_cast<std::size_t>(i));
}

double ProblemSpec::smoothing(int i) const {
  if (plap_delta >= 0.0) return plap_delta;
  return exponent(i) < 2.0 ? 1e-10 : 0.0;
}

void ProblemSpec::validate() const {
  if (!partition) throw ConfigError("problem: missing partition");
  const int n_nodes = partition->global.n_nodes();
  if (source.size() != n_nodes) throw ConfigError("problem: source needs one value per node");
  if (!all_finite(source)) throw ConfigError("problem: source must be finite");
  const int nk = partition->n_interfaces();
  switch (kind) {
    case ProblemKind::obstacle:
      if (obstacle.size() != n_nodes) {
        throw ConfigError("problem: obstacle kind requires h with one value per node");
      }
      break;
    case ProblemKind::plaplacian:
      if (!p_per_subdomain.empty() &&
          static_cast<int>(p_per_subdomain.size()) != partition->size()) {
        throw ConfigError("problem: p_per_subdomain needs one exponent per subdomain");
      }
      for (int i = 0; i < partition->size(); ++i) {
        if (!(exponent(i) > 1.0)) throw ConfigError("problem: p must exceed 1");
      }
      break;
    case ProblemKind::membrane:
      if (static_cast<int>(permeability.size()) != nk) {
        throw ConfigError("problem: membrane kind requires one permeability per interface");
      }
      [[fallthrough]];
    case ProblemKind::unilateral:
      if (!orientation.empty() && static_cast<int>(orientation.size()) != nk) {
        throw ConfigError("problem: orientation needs one entry per interface");
      }
      for (int e : orientation) {
        if (e != 1 && e != -1) throw ConfigError("problem: orientation entries must be +1 or -1");
      }
      break;
    case ProblemKind::poisson:
      break;
  }
  params.validate();
}

Vector restrict_nodal(const Grid& subdomain, const Vector& global_nodal) {
  Vector out(subdomain.n_nodes());
  for (int k = 0; k < subdomain.n_nodes(); ++k) {
    out[k] = global_nodal[subdomain.global_node[static_cast<std::size_t>(k)]];
  }
  return out;
}

Problem build(const ProblemSpec& spec) {
  spec.validate();
  Problem prob;
  prob.spec = spec;
  ProblemOracles& o = prob.oracles;
  o.partition = spec.partition;
  o.lifts = make_lifts(spec.partition);
  const Partition& part = *spec.partition;

  for (int i = 0; i < part.size(); ++i) {
    const Grid& grid = part.subdomains[static_cast<std::size_t>(i)];
    const auto gram = o.lifts[static_cast<std::size_t>(i)].space().gram_ptr();
    Vector load = assemble_load(grid, restrict_nodal(grid, spec.source));
    std::shared_ptr<const SubdomainEnergy> energy;
    switch (spec.kind) {
      case ProblemKind::obstacle:
        energy = std::make_shared<ObstacleEnergy>(
            assemble_stiffness(grid), std::move(load),
            grid.to_dofs(restrict_nodal(grid, spec.obstacle)), gram);
        break;
      case ProblemKind::plaplacian:
        energy = std::make_shared<PLaplacianEnergy>(grid, std::move(load), spec.exponent(i),
                                                    spec.smoothing(i), gram);
        break;
      default:
        energy = std::make_shared<QuadraticEnergy>(assemble_stiffness(grid), std::move(load), gram);
        break;
    }
    o.energies.push_back(std::move(energy));
  }

  for (int k = 0; k < part.n_interfaces(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const int eps = spec.orientation.empty() ? 1 : spec.orientation[uk];
    InterfaceCoupling c;
    switch (spec.kind) {
      case ProblemKind::unilateral:
        c.kind = eps > 0 ? CouplingKind::cone_plus : CouplingKind::cone_minus;
        break;
      case ProblemKind::membrane:
        c.kind = eps > 0 ? CouplingKind::membrane_plus : CouplingKind::membrane_minus;
        c.permeability = spec.permeability[uk];
        break;
      default:
        c.kind = CouplingKind::equality;
        break;
    }
    o.couplings.push_back(c);
  }
  o.validate();
  prob.x0 = o.space().zeros();
  return prob;
}

Vector efficient_primal_update(const ProblemOracles& oracles, int i, const Vector& u_i,
                               double gamma, std::span<const Vector> duals) {
  const auto ui = static_cast<std::size_t>(i);
  const HarmonicLift& lift = oracles.lifts.at(ui);
  const Vector c = lift.gram().apply(u_i) - gamma * lift.neumann_rhs(duals);
  return oracles.energies.at(ui)->prox_target(c, gamma);
}

GluedSolution glue(const Partition& partition, const PrimalDualPoint& point) {
  if (static_cast<int>(point.primal.size()) != partition.size() ||
      static_cast<int>(point.dual.size()) != partition.n_interfaces()) {
    throw Error("glue: point does not match the partition");
  }
  const Grid& global = partition.global;
  Vector sum = Vector::Zero(global.n_nodes());
  Vector count = Vector::Zero(global.n_nodes());
  for (int i = 0; i < partition.size(); ++i) {
    const Grid& g = partition.subdomains[static_cast<std::size_t>(i)];
    const Vector nodal = g.to_nodal(point.primal[static_cast<std::size_t>(i)]);
    for (int k = 0; k < g.n_nodes(); ++k) {
      const int gid = g.global_node[static_cast<std::size_t>(k)];
      sum[gid] += nodal[k];
      count[gid] += 1.0;
    }
  }
  GluedSolution out;
  out.nodal = sum.cwiseQuotient(count.cwiseMax(1.0));
  out.duals = point.dual;
  for (const Interface& iface : partition.interfaces) {
    const Vector jump =
        iface.left_trace.apply(point.primal[static_cast<std::size_t>(iface.left)]) -
        iface.right_trace.apply(point.primal[static_cast<std::size_t>(iface.right)]);
    if (jump.size() > 0) out.max_jump = std::max(out.max_jump, jump.lpNorm<Eigen::Infinity>());
  }
  return out;
}

FluxReport dual_flux_report(const Partition& partition, const PrimalDualPoint& point) {
  const GluedSolution glued = glue(partition, point);
  FluxReport out;
  out.duals = point.dual;
  for (int k = 0; k < partition.n_interfaces(); ++k) {
    const Interface& iface = partition.interfaces[static_cast<std::size_t>(k)];
    const Grid& right = partition.subdomains[static_cast<std::size_t>(iface.right)];
    Vector fd(iface.size());
    for (int r = 0; r < iface.size(); ++r) {
      // Local numbering is row-major in x, so the inward neighbour is +1.
      const int a = iface.right_nodes[static_cast<std::size_t>(r)];
      const int b = a + 1;
      const double dx = right.nodes[static_cast<std::size_t>(b)].x - right.nodes[static_cast<std::size_t>(a)].x;
      const double ua = glued.nodal[right.global_node[static_cast<std::size_t>(a)]];
      const double ub = glued.nodal[right.global_node[static_cast<std::size_t>(b)]];
      fd[r] = -(ub - ua) / dx;
    }
    const Vector& g = point.dual[static_cast<std::size_t>(k)];
    if (fd.size() > 0) {
      out.max_discrepancy = std::max(out.max_discrepancy, (g - fd).lpNorm<Eigen::Infinity>());
    }
    out.normal_derivative.push_back(std::move(fd));
  }
  return out;
}

}  // namespace ddsplit
