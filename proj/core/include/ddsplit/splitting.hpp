#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ddsplit/harmonic.hpp"
#include "ddsplit/linalg.hpp"
#include "ddsplit/mesh.hpp"
#include "ddsplit/prox.hpp"

namespace ddsplit {

/// ((u_i)_{i∈I}, (g_ij)_{(i,j)∈K}).
struct PrimalDualPoint {
  std::vector<Vector> primal;
  std::vector<Vector> dual;

  PrimalDualPoint operator+(const PrimalDualPoint& o) const;
  PrimalDualPoint operator-(const PrimalDualPoint& o) const;
  PrimalDualPoint operator*(double s) const;
};

PrimalDualPoint operator*(double s, const PrimalDualPoint& x);

/// H ⊕ G: energy products on the primal blocks, interface L² on the duals.
/// Reductions run over blocks in index order.
class ProductSpace {
 public:
  ProductSpace() = default;
  ProductSpace(std::vector<InnerProductSpace> primal, std::vector<InnerProductSpace> dual);

  double inner(const PrimalDualPoint& a, const PrimalDualPoint& b) const;
  double norm_sq(const PrimalDualPoint& a) const { return inner(a, a); }
  double norm(const PrimalDualPoint& a) const;
  PrimalDualPoint zeros() const;
  void check(const PrimalDualPoint& a) const;

  const std::vector<InnerProductSpace>& primal() const { return primal_; }
  const std::vector<InnerProductSpace>& dual() const { return dual_; }

 private:
  std::vector<InnerProductSpace> primal_;
  std::vector<InnerProductSpace> dual_;
};

/// A step-size sequence: the listed values in order, then the last one held.
class Schedule {
 public:
  Schedule(double value = 1.0) : values_{value} {}  // NOLINT: implicit by design
  explicit Schedule(std::vector<double> values);

  double at(int n) const;
  const std::vector<double>& values() const { return values_; }
  void check_range(double lo, double hi, const std::string& name) const;

 private:
  std::vector<double> values_;
};

struct AlgorithmParams {
  double epsilon = 0.01;
  Schedule gamma{1.0};
  Schedule mu{1.0};
  Schedule lambda{1.0};
  int max_iters = 5000;
  double stop_tol = 1e-8;
  bool relative_stop = true;  ///< stop_tol scales the initial residual
  bool fused_update = true;   ///< one Gram-metric solve per subdomain
  int threads = 1;
  double rho_guard = 1e-14;

  /// Throws ConfigError unless γ_n, μ_n ∈ [ε, 1/ε] and λ_n ∈ [ε, 1].
  void validate() const;
};

/// Everything the engine needs to know about a decomposed problem.
struct ProblemOracles {
  std::shared_ptr<const Partition> partition;
  std::vector<HarmonicLift> lifts;
  std::vector<std::shared_ptr<const SubdomainEnergy>> energies;
  std::vector<InterfaceCoupling> couplings;

  int n_subdomains() const { return static_cast<int>(lifts.size()); }
  int n_interfaces() const { return static_cast<int>(couplings.size()); }
  ProductSpace space() const;
  void validate() const;
};

enum class Branch { fixpoint, case_a, case_b, case_c };

std::string to_string(Branch b);

struct IterationReport {
  int n = 0;
  double gamma = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  double tau = 0.0;
  double theta = 0.0;
  double chi = 0.0;
  double dist0_sq = 0.0;     ///< ‖x0 − xn‖²
  double halfstep_sq = 0.0;  ///< ‖xn − xn+½‖²
  double rho = 0.0;
  Branch branch = Branch::fixpoint;
  double kt_residual = 0.0;
};

/// Quantities of one prox sweep at the current point.
struct Sweep {
  std::vector<Vector> p;
  std::vector<Vector> l;
  std::vector<Vector> q;
  PrimalDualPoint step;  ///< (s, t)
  double numerator = 0.0;  ///< γ⁻¹Σ‖u−p‖² + μ⁻¹Σ‖l−q‖²
  double tau = 0.0;

  double residual() const;
};

Sweep sweep(const PrimalDualPoint& x, const ProblemOracles& oracles,
            const AlgorithmParams& params, int n);

struct HaugazeauResult {
  PrimalDualPoint point;
  Branch branch = Branch::case_a;
  double chi = 0.0;
  double dist0_sq = 0.0;
  double halfstep_sq = 0.0;
  double rho = 0.0;
};

/// Projection of x0 onto {z : ⟨z − xn, x0 − xn⟩ ≤ 0} ∩ {z : ⟨z − xh, xn − xh⟩ ≤ 0}.
/// Throws AlgorithmError when the intersection is empty.
HaugazeauResult haugazeau_project(const ProductSpace& space, const PrimalDualPoint& x0,
                                  const PrimalDualPoint& xn, const PrimalDualPoint& xh,
                                  double rho_guard = 1e-14);

struct StepResult {
  PrimalDualPoint next;
  PrimalDualPoint half;
  IterationReport report;
};

StepResult iterate_once(const PrimalDualPoint& state, const PrimalDualPoint& x0,
                        const ProblemOracles& oracles, const AlgorithmParams& params,
                        int n);

double kt_residual(const PrimalDualPoint& state, const ProblemOracles& oracles,
                   const AlgorithmParams& params, int n);

/// Called after every step with the report and the points xn, xn+½, xn+1.
using IterationCallback =
    std::function<void(const IterationReport&, const PrimalDualPoint& xn,
                       const PrimalDualPoint& half, const PrimalDualPoint& next)>;

struct RunResult {
  PrimalDualPoint point;
  std::vector<IterationReport> reports;
  bool converged = false;
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
};

RunResult run(const PrimalDualPoint& x0, const ProblemOracles& oracles,
              const AlgorithmParams& params, const IterationCallback& callback = {});

}  // namespace ddsplit
