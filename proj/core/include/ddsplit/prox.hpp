#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ddsplit/linalg.hpp"
#include "ddsplit/mesh.hpp"

namespace ddsplit {

/**
 * Convex energy φ on the free dofs of one subdomain, with its proximity
 * operator in the inner product of a Gram matrix G.
 *
 * Every oracle reduces to prox_target(c, γ) = argmin_w γφ(w) + ½wᵀGw − cᵀw,
 * so prox(v) = prox_target(Gv) and the fused primal update
 * prox(u − γG⁻¹r) = prox_target(Gu − γr) costs no extra G solve.
 */
class SubdomainEnergy {
 public:
  explicit SubdomainEnergy(std::shared_ptr<const SparseSpd> gram);
  virtual ~SubdomainEnergy() = default;

  const SparseSpd& gram() const { return *gram_; }
  InnerProductSpace space() const { return InnerProductSpace(gram_); }
  Eigen::Index dim() const { return gram_->dim(); }

  Vector prox(const Vector& v, double gamma) const;
  virtual Vector prox_target(const Vector& c, double gamma) const = 0;

  virtual double value(const Vector& w) const = 0;
  /// Gradient of the smooth part (constraints excluded), in dof space.
  virtual Vector gradient(const Vector& w) const = 0;
  virtual std::string name() const = 0;

 protected:
  void check_gamma(double gamma) const;
  std::shared_ptr<const SparseSpd> gram_;
};

/// Caches the factorization of γK + G for the few step sizes in use.
class ShiftedFactorCache {
 public:
  ShiftedFactorCache(const SparseSpd* stiffness, const SparseSpd* gram)
      : stiffness_(stiffness), gram_(gram) {}
  SpdFactorization get(double gamma) const;

 private:
  const SparseSpd* stiffness_;
  const SparseSpd* gram_;
  mutable std::mutex mutex_;
  mutable std::map<double, SpdFactorization> cache_;
};

/// φ(w) = ½wᵀKw − bᵀw.
class QuadraticEnergy : public SubdomainEnergy {
 public:
  QuadraticEnergy(SparseSpd stiffness, Vector load,
                  std::shared_ptr<const SparseSpd> gram);

  Vector prox_target(const Vector& c, double gamma) const override;
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  std::string name() const override { return "quadratic"; }

  const SparseSpd& stiffness() const { return stiffness_; }
  const Vector& load() const { return load_; }
  /// G⁻¹b, the lift Q_i(f, 0) of the load.
  Vector load_lift() const;

 protected:
  SparseSpd stiffness_;
  Vector load_;
  ShiftedFactorCache cache_;
};

struct PdasOptions {
  int max_sweeps = 50;
  double tol = 1e-12;
  int fallback_iters = 20000;
};

struct PdasResult {
  Vector x;
  Vector multiplier;  ///< Ax − rhs; nonnegative on the active set
  int sweeps = 0;
  bool fallback = false;
};

/// min ½xᵀAx − rhsᵀx subject to x ≥ lower, by primal-dual active sets with
/// a projected-gradient fallback.
PdasResult pdas_lower_bound(const SparseSpd& a, const Vector& rhs,
                            const Vector& lower, const PdasOptions& options = {});

/// Quadratic energy restricted to {w ≥ h}.
class ObstacleEnergy : public QuadraticEnergy {
 public:
  ObstacleEnergy(SparseSpd stiffness, Vector load, Vector obstacle,
                 std::shared_ptr<const SparseSpd> gram,
                 PdasOptions options = {});

  Vector prox_target(const Vector& c, double gamma) const override;
  double value(const Vector& w) const override;
  std::string name() const override { return "obstacle"; }

  const Vector& obstacle() const { return obstacle_; }

 private:
  Vector obstacle_;
  PdasOptions options_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const SparseSpd>> shifted_;
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_iters = 200;
};

/// φ(w) = Σ_cells |c|·(|Dw|²+δ)^{p/2}/p − bᵀw on P1 elements.
class PLaplacianEnergy : public SubdomainEnergy {
 public:
  PLaplacianEnergy(const Grid& grid, Vector load, double p, double delta,
                   std::shared_ptr<const SparseSpd> gram,
                   NewtonOptions options = {});

  Vector prox_target(const Vector& c, double gamma) const override;
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  std::string name() const override { return "plaplacian"; }

  double p() const { return p_; }
  double delta() const { return delta_; }
  /// Hessian of the integral term at w.
  SparseSpd hessian(const Vector& w) const;

 private:
  struct NewtonRun {
    Vector w;
    double gnorm = 0.0;
    bool converged = false;
  };

  std::vector<std::array<double, 3>> cell_gradient(const Vector& w, double delta) const;
  double value(const Vector& w, double delta) const;
  Vector gradient(const Vector& w, double delta) const;
  SparseSpd hessian(const Vector& w, double delta) const;
  NewtonRun newton(const Vector& c, double gamma, Vector w, double delta, double tol,
                   int max_iters) const;

  std::vector<CellGradient> cells_;
  std::vector<int> dof_of_node_;
  Vector load_;
  double p_;
  double delta_;
  NewtonOptions options_;
};

enum class CouplingKind {
  equality,
  cone_plus,
  cone_minus,
  membrane_plus,
  membrane_minus,
  quadratic,
};

std::string to_string(CouplingKind kind);
CouplingKind coupling_kind_from_string(const std::string& name);

/// Interface energy ψ_ij, applied nodally (the interface Gram is diagonal).
struct InterfaceCoupling {
  CouplingKind kind = CouplingKind::equality;
  double permeability = 0.0;  ///< μ_ij for membrane and quadratic kinds

  void validate() const;
};

Vector prox_interface(const InterfaceCoupling& coupling, const Vector& x, double mu);

}  // namespace ddsplit
