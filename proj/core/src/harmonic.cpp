#include "ddsplit/harmonic.hpp"

#include "ddsplit/error.hpp"

namespace ddsplit {

HarmonicLift::HarmonicLift(std::shared_ptr<const Partition> partition, int i)
    : partition_(std::move(partition)), index_(i) {
  if (!partition_ || i < 0 || i >= partition_->size()) {
    throw Error("HarmonicLift: subdomain index out of range");
  }
  auto gram = std::make_shared<const SparseSpd>(assemble_energy_gram(*partition_, i));
  factor_ = SpdFactorization(*gram);
  space_ = InnerProductSpace(std::move(gram));
  for (int k = 0; k < partition_->n_interfaces(); ++k) {
    const Interface& iface = partition_->interfaces[static_cast<std::size_t>(k)];
    if (iface.left == i) {
      incidences_.push_back({k, iface.right, +1, &iface.left_trace});
    } else if (iface.right == i) {
      incidences_.push_back({k, iface.left, -1, &iface.right_trace});
    }
  }
}

Vector HarmonicLift::neumann_rhs(std::span<const Vector> duals) const {
  if (static_cast<int>(duals.size()) != partition_->n_interfaces()) {
    throw Error("HarmonicLift::neumann_rhs: expected one dual per interface");
  }
  Vector rhs = Vector::Zero(grid().n_dofs());
  for (const Incidence& inc : incidences_) {
    const Interface& iface = partition_->interfaces[static_cast<std::size_t>(inc.interface)];
    const Vector& g = duals[static_cast<std::size_t>(inc.interface)];
    if (g.size() != iface.size()) {
      throw Error("HarmonicLift::neumann_rhs: dual has wrong length");
    }
    rhs += inc.sign * inc.trace->apply_transpose(iface.weights.cwiseProduct(g));
  }
  return rhs;
}

Vector HarmonicLift::solve(const Vector& rhs) const { return factor_.solve(rhs); }

Vector HarmonicLift::q_lift(const Vector& f_load, std::span<const Vector> plus,
                            std::span<const Vector> minus) const {
  if (f_load.size() != grid().n_dofs()) {
    throw Error("q_lift: load has wrong length");
  }
  Vector rhs = f_load;
  std::size_t ip = 0;
  std::size_t im = 0;
  for (const Incidence& inc : incidences_) {
    const Interface& iface = partition_->interfaces[static_cast<std::size_t>(inc.interface)];
    const Vector* h = nullptr;
    if (inc.sign > 0) {
      if (ip >= plus.size()) throw Error("q_lift: missing J(i+) Neumann data");
      h = &plus[ip++];
    } else {
      if (im >= minus.size()) throw Error("q_lift: missing J(i-) Neumann data");
      h = &minus[im++];
    }
    if (h->size() != iface.size()) throw Error("q_lift: Neumann data has wrong length");
    rhs += inc.sign * inc.trace->apply_transpose(iface.weights.cwiseProduct(*h));
  }
  if (ip != plus.size() || im != minus.size()) {
    throw Error("q_lift: too much Neumann data");
  }
  return solve(rhs);
}

Vector HarmonicLift::adjoint(std::span<const Vector> duals) const {
  return solve(neumann_rhs(duals));
}

Vector HarmonicLift::trace(int k, const Vector& u) const {
  for (const Incidence& inc : incidences_) {
    if (inc.interface == k) return inc.trace->apply(u);
  }
  throw Error("HarmonicLift::trace: interface does not touch the subdomain");
}

std::vector<HarmonicLift> make_lifts(const std::shared_ptr<const Partition>& partition) {
  std::vector<HarmonicLift> lifts;
  lifts.reserve(static_cast<std::size_t>(partition->size()));
  for (int i = 0; i < partition->size(); ++i) lifts.emplace_back(partition, i);
  return lifts;
}

std::vector<Vector> adjoint_sum(std::span<const HarmonicLift> lifts,
                                std::span<const Vector> duals) {
  std::vector<Vector> out;
  out.reserve(lifts.size());
  for (const HarmonicLift& lift : lifts) out.push_back(lift.adjoint(duals));
  return out;
}

}  // namespace ddsplit
