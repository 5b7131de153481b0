#include "ddsplit/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddsplit/error.hpp"

namespace ddsplit {

SubdomainEnergy::SubdomainEnergy(std::shared_ptr<const SparseSpd> gram)
    : gram_(std::move(gram)) {
  if (!gram_) throw Error("SubdomainEnergy: null Gram matrix");
}

Vector SubdomainEnergy::prox(const Vector& v, double gamma) const {
  return prox_target(gram_->apply(v), gamma);
}

void SubdomainEnergy::check_gamma(double gamma) const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("prox: step size must be positive and finite");
  }
}

namespace {

SparseSpd shifted(const SparseSpd& k, const SparseSpd& g, double gamma) {
  SparseMatrix a = gamma * k.matrix() + g.matrix();
  return SparseSpd(std::move(a));
}

constexpr std::size_t kCacheLimit = 8;

}  // namespace

SpdFactorization ShiftedFactorCache::get(double gamma) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(gamma);
  if (it != cache_.end()) return it->second;
  if (cache_.size() >= kCacheLimit) cache_.clear();
  SpdFactorization f(shifted(*stiffness_, *gram_, gamma));
  cache_.emplace(gamma, f);
  return f;
}

QuadraticEnergy::QuadraticEnergy(SparseSpd stiffness, Vector load,
                                 std::shared_ptr<const SparseSpd> gram)
    : SubdomainEnergy(std::move(gram)),
      stiffness_(std::move(stiffness)),
      load_(std::move(load)),
      cache_(&stiffness_, gram_.get()) {
  if (stiffness_.dim() != gram_->dim() || load_.size() != gram_->dim()) {
    throw Error("QuadraticEnergy: dimension mismatch");
  }
}

Vector QuadraticEnergy::prox_target(const Vector& c, double gamma) const {
  check_gamma(gamma);
  if (c.size() != dim()) throw Error("prox: dimension mismatch");
  return cache_.get(gamma).solve(gamma * load_ + c);
}

double QuadraticEnergy::value(const Vector& w) const {
  return 0.5 * w.dot(stiffness_.apply(w)) - load_.dot(w);
}

Vector QuadraticEnergy::gradient(const Vector& w) const {
  return stiffness_.apply(w) - load_;
}

Vector QuadraticEnergy::load_lift() const {
  return SpdFactorization(*gram_).solve(load_);
}

namespace {

// Solves A_II x_I = rhs_I − A_IA lower_A with x_A = lower_A.
Vector solve_reduced(const SparseSpd& a, const Vector& rhs, const Vector& lower,
                     const std::vector<char>& active) {
  const Eigen::Index n = a.dim();
  std::vector<int> map(static_cast<std::size_t>(n), -1);
  int free_count = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!active[static_cast<std::size_t>(k)]) map[static_cast<std::size_t>(k)] = free_count++;
  }
  Vector x = lower;
  if (free_count == 0) return x;
  Vector r(free_count);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (map[static_cast<std::size_t>(k)] >= 0) r[map[static_cast<std::size_t>(k)]] = rhs[k];
  }
  std::vector<Triplet> entries;
  const SparseMatrix& m = a.matrix();
  for (int col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      const int ri = map[static_cast<std::size_t>(it.row())];
      const int ci = map[static_cast<std::size_t>(it.col())];
      if (ri >= 0 && ci >= 0) {
        entries.emplace_back(ri, ci, it.value());
      } else if (ri >= 0) {
        r[ri] -= it.value() * lower[it.col()];
      }
    }
  }
  const Vector xi = SpdFactorization(SparseSpd::from_triplets(free_count, entries)).solve(r);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (map[static_cast<std::size_t>(k)] >= 0) x[k] = xi[map[static_cast<std::size_t>(k)]];
  }
  return x;
}

double quad_value(const SparseSpd& a, const Vector& rhs, const Vector& x) {
  return 0.5 * x.dot(a.apply(x)) - rhs.dot(x);
}

}  // namespace

PdasResult pdas_lower_bound(const SparseSpd& a, const Vector& rhs,
                            const Vector& lower, const PdasOptions& options) {
  const Eigen::Index n = a.dim();
  if (rhs.size() != n || lower.size() != n) {
    throw Error("pdas_lower_bound: dimension mismatch");
  }
  PdasResult result;
  std::vector<char> active(static_cast<std::size_t>(n), 0);
  Vector x = solve_reduced(a, rhs, lower, active);
  const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
  for (int sweep = 0; sweep <= options.max_sweeps; ++sweep) {
    const Vector lambda = a.apply(x) - rhs;
    std::vector<char> next(static_cast<std::size_t>(n), 0);
    for (Eigen::Index k = 0; k < n; ++k) {
      next[static_cast<std::size_t>(k)] =
          active[static_cast<std::size_t>(k)] ? lambda[k] > 0.0 : x[k] < lower[k];
    }
    if (next == active) {
      result.x = x;
      result.multiplier = lambda;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (!active[static_cast<std::size_t>(k)]) result.multiplier[k] = 0.0;
      }
      result.sweeps = sweep;
      return result;
    }
    active = std::move(next);
    x = solve_reduced(a, rhs, lower, active);
  }

  // Projected gradient with backtracking from the last PDAS iterate.
  result.fallback = true;
  x = x.cwiseMax(lower);
  double step = 1.0;
  {
    const SparseMatrix& m = a.matrix();
    double bound = 0.0;
    for (int col = 0; col < m.outerSize(); ++col) {
      double sum = 0.0;
      for (SparseMatrix::InnerIterator it(m, col); it; ++it) sum += std::abs(it.value());
      bound = std::max(bound, sum);
    }
    step = 1.0 / bound;
  }
  double f = quad_value(a, rhs, x);
  double gap = 0.0;
  for (int it = 0; it < options.fallback_iters; ++it) {
    const Vector grad = a.apply(x) - rhs;
    gap = (x - (x - grad).cwiseMax(lower)).lpNorm<Eigen::Infinity>();
    if (gap <= options.tol * scale) {
      result.x = x;
      result.multiplier = grad;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (x[k] > lower[k]) result.multiplier[k] = 0.0;
      }
      result.sweeps = options.max_sweeps;
      return result;
    }
    double t = 2.0 * step;
    Vector trial;
    double ft = 0.0;
    do {
      t *= 0.5;
      trial = (x - t * grad).cwiseMax(lower);
      ft = quad_value(a, rhs, trial);
    } while (ft > f - 0.5 / t * (trial - x).squaredNorm() + 1e-15 * std::abs(f) &&
             t > 1e-20);
    x = trial;
    f = ft;
  }
  throw SolverError("pdas_lower_bound: projection did not converge", gap);
}

ObstacleEnergy::ObstacleEnergy(SparseSpd stiffness, Vector load, Vector obstacle,
                               std::shared_ptr<const SparseSpd> gram,
                               PdasOptions options)
    : QuadraticEnergy(std::move(stiffness), std::move(load), std::move(gram)),
      obstacle_(std::move(obstacle)),
      options_(options) {
  if (obstacle_.size() != dim()) throw Error("ObstacleEnergy: obstacle has wrong length");
  if (!all_finite(obstacle_)) throw ConfigError("ObstacleEnergy: obstacle must be finite");
}

Vector ObstacleEnergy::prox_target(const Vector& c, double gamma) const {
  const Vector free = QuadraticEnergy::prox_target(c, gamma);
  if ((free.array() >= obstacle_.array()).all()) return free;
  std::shared_ptr<const SparseSpd> a;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = shifted_.find(gamma);
    if (it == shifted_.end()) {
      if (shifted_.size() >= kCacheLimit) shifted_.clear();
      it = shifted_.emplace(gamma, std::make_shared<const SparseSpd>(
                                         shifted(stiffness_, *gram_, gamma))).first;
    }
    a = it->second;
  }
  return pdas_lower_bound(*a, gamma * load_ + c, obstacle_, options_).x;
}

double ObstacleEnergy::value(const Vector& w) const {
  if (((w - obstacle_).array() < 0.0).any()) {
    return std::numeric_limits<double>::infinity();
  }
  return QuadraticEnergy::value(w);
}

PLaplacianEnergy::PLaplacianEnergy(const Grid& grid, Vector load, double p,
                                   double delta,
                                   std::shared_ptr<const SparseSpd> gram,
                                   NewtonOptions options)
    : SubdomainEnergy(std::move(gram)),
      cells_(cell_gradients(grid)),
      dof_of_node_(grid.dof_of_node),
      load_(std::move(load)),
      p_(p),
      delta_(delta),
      options_(options) {
  if (!(p_ > 1.0) || !std::isfinite(p_)) throw ConfigError("p-Laplacian: p must exceed 1");
  if (!(delta_ >= 0.0)) throw ConfigError("p-Laplacian: smoothing must be nonnegative");
  if (p_ < 2.0 && delta_ == 0.0) {
    throw ConfigError("p-Laplacian: p < 2 needs a positive smoothing");
  }
  if (load_.size() != grid.n_dofs() || gram_->dim() != grid.n_dofs()) {
    throw Error("PLaplacianEnergy: dimension mismatch");
  }
}

std::vector<std::array<double, 3>> PLaplacianEnergy::cell_gradient(const Vector& w,
                                                                     double delta) const {
  if (w.size() != dim()) throw Error("p-Laplacian: dimension mismatch");
  std::vector<std::array<double, 3>> out;
  out.reserve(cells_.size());
  for (const CellGradient& cg : cells_) {
    double gx = 0.0;
    double gy = 0.0;
    for (int k = 0; k < 3 && cg.nodes[static_cast<std::size_t>(k)] >= 0; ++k) {
      const int d = dof_of_node_[static_cast<std::size_t>(cg.nodes[static_cast<std::size_t>(k)])];
      if (d < 0) continue;
      gx += w[d] * cg.dx[static_cast<std::size_t>(k)];
      gy += w[d] * cg.dy[static_cast<std::size_t>(k)];
    }
    out.push_back({gx, gy, gx * gx + gy * gy + delta});
  }
  return out;
}

double PLaplacianEnergy::value(const Vector& w) const { return value(w, delta_); }

double PLaplacianEnergy::value(const Vector& w, double delta) const {
  const auto g = cell_gradient(w, delta);
  double sum = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    sum += cells_[c].measure * std::pow(g[c][2], 0.5 * p_) / p_;
  }
  return sum - load_.dot(w);
}

Vector PLaplacianEnergy::gradient(const Vector& w) const { return gradient(w, delta_); }

Vector PLaplacianEnergy::gradient(const Vector& w, double delta) const {
  const auto g = cell_gradient(w, delta);
  Vector out = -load_;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const CellGradient& cg = cells_[c];
    const double s = g[c][2];
    const double coef = s > 0.0 ? cg.measure * std::pow(s, 0.5 * p_ - 1.0) : 0.0;
    for (int k = 0; k < 3 && cg.nodes[static_cast<std::size_t>(k)] >= 0; ++k) {
      const int d = dof_of_node_[static_cast<std::size_t>(cg.nodes[static_cast<std::size_t>(k)])];
      if (d < 0) continue;
      out[d] += coef * (g[c][0] * cg.dx[static_cast<std::size_t>(k)] +
                        g[c][1] * cg.dy[static_cast<std::size_t>(k)]);
    }
  }
  return out;
}

SparseSpd PLaplacianEnergy::hessian(const Vector& w) const { return hessian(w, delta_); }

SparseSpd PLaplacianEnergy::hessian(const Vector& w, double delta) const {
  const auto g = cell_gradient(w, delta);
  std::vector<Triplet> entries;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const CellGradient& cg = cells_[c];
    const double s = g[c][2];
    double a = 0.0;
    double b = 0.0;
    if (s > 0.0) {
      a = std::pow(s, 0.5 * p_ - 1.0);
      b = (p_ - 2.0) * a / s;
    } else if (p_ == 2.0) {
      a = 1.0;
    }
    const int npc = cg.nodes[2] >= 0 ? 3 : 2;
    std::array<double, 3> gphi{};
    for (int k = 0; k < npc; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      gphi[uk] = g[c][0] * cg.dx[uk] + g[c][1] * cg.dy[uk];
    }
    for (int k = 0; k < npc; ++k) {
      const int dk = dof_of_node_[static_cast<std::size_t>(cg.nodes[static_cast<std::size_t>(k)])];
      if (dk < 0) continue;
      for (int l = 0; l < npc; ++l) {
        const int dl = dof_of_node_[static_cast<std::size_t>(cg.nodes[static_cast<std::size_t>(l)])];
        if (dl < 0) continue;
        const auto lo = static_cast<std::size_t>(std::min(k, l));
        const auto hi = static_cast<std::size_t>(std::max(k, l));
        const double value =
            cg.measure * (a * (cg.dx[lo] * cg.dx[hi] + cg.dy[lo] * cg.dy[hi]) +
                          b * gphi[lo] * gphi[hi]);
        entries.emplace_back(dk, dl, value);
      }
    }
  }
  return SparseSpd::from_triplets(dim(), entries);
}

PLaplacianEnergy::NewtonRun PLaplacianEnergy::newton(const Vector& c, double gamma, Vector w,
                                                     double delta, double tol,
                                                     int max_iters) const {
  auto objective = [&](const Vector& v) {
    return gamma * value(v, delta) + 0.5 * v.dot(gram_->apply(v)) - c.dot(v);
  };
  double f = objective(w);
  const double scale = 1.0 + c.norm();
  double gnorm = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    const Vector grad = gamma * gradient(w, delta) + gram_->apply(w) - c;
    gnorm = grad.norm();
    if (gnorm <= tol * scale) return {std::move(w), gnorm, true};
    SparseMatrix h = gamma * hessian(w, delta).matrix() + gram_->matrix();
    const Vector d = -SpdFactorization(SparseSpd(std::move(h))).solve(grad);
    const double slope = grad.dot(d);
    double t = 1.0;
    Vector trial = w + d;
    double ft = objective(trial);
    // Below the resolution of F the Armijo test only sees roundoff; the
    // full step is then taken, as Newton is in its quadratic regime.
    const bool resolved = -slope > 1e-13 * (1.0 + std::abs(f));
    while (resolved && ft > f + 1e-4 * t * slope + 1e-15 * std::abs(f) && t > 1e-12) {
      t *= 0.5;
      trial = w + t * d;
      ft = objective(trial);
    }
    if (t <= 1e-12) {
      // No decrease left at working precision.
      return {std::move(w), gnorm, gnorm <= 1e-8 * scale};
    }
    const double step = (trial - w).lpNorm<Eigen::Infinity>();
    w = std::move(trial);
    f = ft;
    if (t == 1.0 && step <= 1e-15 * (1.0 + w.lpNorm<Eigen::Infinity>())) {
      return {std::move(w), gnorm, true};
    }
  }
  return {std::move(w), gnorm, false};
}

Vector PLaplacianEnergy::prox_target(const Vector& c, double gamma) const {
  check_gamma(gamma);
  if (c.size() != dim()) throw Error("prox: dimension mismatch");
  const Vector start = SpdFactorization(*gram_).solve(c);
  if (p_ >= 2.0) {
    NewtonRun r = newton(c, gamma, start, delta_, options_.tol, options_.max_iters);
    if (!r.converged) throw SolverError("p-Laplacian prox: Newton did not converge", r.gnorm);
    return std::move(r.w);
  }
  // For p < 2 the smoothed kink is only sqrt(delta) wide and damped Newton
  // can crawl through it; continuation in delta recovers fast convergence.
  NewtonRun r = newton(c, gamma, start, delta_, options_.tol, 40);
  if (r.converged) return std::move(r.w);
  Vector w = start;
  for (double d = std::max(delta_, 1e-2); d > delta_; d *= 1e-2) {
    w = newton(c, gamma, std::move(w), d, 1e-10, options_.max_iters).w;
  }
  r = newton(c, gamma, std::move(w), delta_, options_.tol, options_.max_iters);
  if (!r.converged) throw SolverError("p-Laplacian prox: Newton did not converge", r.gnorm);
  return std::move(r.w);
}

std::string to_string(CouplingKind kind) {
  switch (kind) {
    case CouplingKind::equality: return "equality";
    case CouplingKind::cone_plus: return "cone_plus";
    case CouplingKind::cone_minus: return "cone_minus";
    case CouplingKind::membrane_plus: return "membrane_plus";
    case CouplingKind::membrane_minus: return "membrane_minus";
    case CouplingKind::quadratic: return "quadratic";
  }
  return "unknown";
}

CouplingKind coupling_kind_from_string(const std::string& name) {
  for (CouplingKind k : {CouplingKind::equality, CouplingKind::cone_plus,
                         CouplingKind::cone_minus, CouplingKind::membrane_plus,
                         CouplingKind::membrane_minus, CouplingKind::quadratic}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown coupling kind '" + name + "'");
}

void InterfaceCoupling::validate() const {
  const bool needs_mu = kind == CouplingKind::membrane_plus ||
                        kind == CouplingKind::membrane_minus ||
                        kind == CouplingKind::quadratic;
  if (needs_mu && !(permeability > 0.0 && std::isfinite(permeability))) {
    throw ConfigError(to_string(kind) + " coupling needs a positive permeability");
  }
}

Vector prox_interface(const InterfaceCoupling& coupling, const Vector& x, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ConfigError("prox_interface: step size must be positive and finite");
  }
  const double shrink = 1.0 / (1.0 + mu * coupling.permeability);
  switch (coupling.kind) {
    case CouplingKind::equality: return Vector::Zero(x.size());
    case CouplingKind::cone_plus: return x.cwiseMax(0.0);
    case CouplingKind::cone_minus: return x.cwiseMin(0.0);
    case CouplingKind::membrane_plus: return shrink * x.cwiseMax(0.0);
    case CouplingKind::membrane_minus: return shrink * x.cwiseMin(0.0);
    case CouplingKind::quadratic: return shrink * x;
  }
  throw Error("prox_interface: unknown coupling kind");
}

}  // namespace ddsplit
