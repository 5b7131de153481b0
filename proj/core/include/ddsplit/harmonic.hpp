#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ddsplit/linalg.hpp"
#include "ddsplit/mesh.hpp"

namespace ddsplit {

/// One interface touching a subdomain. sign is +1 when the subdomain is the
/// left member (j ∈ J(i+)) and -1 when it is the right member (j ∈ J(i−)).
struct Incidence {
  int interface = 0;
  int neighbor = 0;
  int sign = 1;
  const TraceMap* trace = nullptr;
};

/**
 * Discrete mixed Dirichlet-Neumann solve on one subdomain.
 *
 * q_lift solves G u = f + Σ_{J+} TᵀM h − Σ_{J−} TᵀM h with G the energy Gram
 * of the subdomain. The factorization of G is computed once and shared.
 */
class HarmonicLift {
 public:
  HarmonicLift(std::shared_ptr<const Partition> partition, int i);

  int index() const { return index_; }
  const Partition& partition() const { return *partition_; }
  const Grid& grid() const { return partition_->subdomains[static_cast<std::size_t>(index_)]; }
  const InnerProductSpace& space() const { return space_; }
  const SparseSpd& gram() const { return space_.gram(); }
  const std::vector<Incidence>& incidences() const { return incidences_; }

  /// Σ_k sign_k · T_kᵀ M_k g_k over the interfaces of this subdomain;
  /// duals is indexed by K (one vector per interface of the partition).
  Vector neumann_rhs(std::span<const Vector> duals) const;
  /// G⁻¹ rhs.
  Vector solve(const Vector& rhs) const;

  /// Q_i(f, h): plus holds one vector per J(i+) neighbor, minus one per J(i−)
  /// neighbor, both in increasing neighbor order.
  Vector q_lift(const Vector& f_load, std::span<const Vector> plus,
                std::span<const Vector> minus) const;

  /// Σ_k Λ*_ki g_k: the energy adjoint of the signed traces.
  Vector adjoint(std::span<const Vector> duals) const;

  /// Trace of u on interface k (which must touch this subdomain).
  Vector trace(int k, const Vector& u) const;

 private:
  std::shared_ptr<const Partition> partition_;
  int index_;
  InnerProductSpace space_;
  SpdFactorization factor_;
  std::vector<Incidence> incidences_;
};

/// Builds one lift per subdomain.
std::vector<HarmonicLift> make_lifts(const std::shared_ptr<const Partition>& partition);

/// Per-subdomain adjoint Λ*g for duals indexed by K.
std::vector<Vector> adjoint_sum(std::span<const HarmonicLift> lifts,
                                std::span<const Vector> duals);

}  // namespace ddsplit
