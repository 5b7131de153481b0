#pragma once

#include <memory>
#include <vector>

#include "ddsplit/linalg.hpp"
#include "ddsplit/mesh.hpp"
#include "ddsplit/prox.hpp"
#include "ddsplit/splitting.hpp"

namespace ddsplit::oracle {

/// Global stiffness solve on the free dofs of `grid` (CG).
Vector monolithic_poisson(const Grid& grid, const Vector& f_nodal);

struct ObstacleSolution {
  Vector u;           ///< free dofs
  Vector multiplier;  ///< Ku − b; zero off the contact set
  int sweeps = 0;
};

/// min ½uᵀKu − bᵀu over u ≥ h by primal-dual active sets.
ObstacleSolution monolithic_obstacle(const Grid& grid, const Vector& f_nodal,
                                     const Vector& h_nodal, int max_sweeps = 200);

/// Damped Newton on Σ|c|(|Du|²+δ)^{p/2}/p − bᵀu. A negative delta selects
/// 1e-10 for p < 2 and 0 otherwise.
Vector monolithic_plaplacian(const Grid& grid, const Vector& f_nodal, double p,
                             double delta = -1.0, double tol = 1e-12);

/// {z : ⟨z − anchor, normal⟩ ≤ 0}.
struct HalfSpace {
  Vector anchor;
  Vector normal;
};

struct QpProjection {
  Vector x;
  double multiplier_a = 0.0;
  double multiplier_b = 0.0;
  int active = 0;  ///< bit 0: A active, bit 1: B active
};

/**
 * Projection of x0 onto A ∩ B in the metric of `gram` (Euclidean when null)
 * by enumerating the four active sets and keeping the KKT candidate.
 * Throws AlgorithmError when no candidate is feasible.
 */
QpProjection qp_project_two_halfspaces(const Vector& x0, const HalfSpace& a,
                                       const HalfSpace& b,
                                       const SparseSpd* gram = nullptr,
                                       double tol = 1e-12);

/// Splits global free dofs into per-subdomain dof vectors.
std::vector<Vector> restrict_to_subdomains(const Partition& partition, const Vector& global_dofs);

/// sqrt(Σ_i (u_i − v_i)ᵀ K_i (u_i − v_i)) with K_i the subdomain stiffness.
double energy_distance(const Partition& partition, const std::vector<Vector>& u,
                       const std::vector<Vector>& v);

/**
 * A Kuhn-Tucker pair for the decomposed problem built from per-subdomain
 * primal values. Duals are recovered from the subdomain residuals
 * r_i = ∇φ_i(u_i): g = M⁻¹(T_j r_j − T_i r_i)/2 on each interface, which
 * satisfies stationarity on both sides for any admissible u.
 */
PrimalDualPoint kt_reference(const Partition& partition, const std::vector<Vector>& primal,
                             const std::vector<std::shared_ptr<const SubdomainEnergy>>& energies);

struct TransmissionSolution {
  std::vector<Vector> primal;
  std::vector<Vector> jumps;
  std::vector<Vector> duals;
  int patterns_tried = 0;
};

/**
 * Quadratic subdomain energies (source f) coupled through pointwise
 * interface laws, solved exactly by enumerating which interface nodes are
 * closed (zero jump) or open. Intended for a handful of interface nodes.
 */
TransmissionSolution transmission_reference(const Partition& partition, const Vector& f_nodal,
                                            const std::vector<InterfaceCoupling>& couplings);

}  // namespace ddsplit::oracle
