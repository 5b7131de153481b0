#include "ddsplit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ddsplit/error.hpp"

namespace ddsplit::oracle {

namespace {

Vector global_load(const Grid& grid, const Vector& f_nodal) {
  return assemble_load(grid, f_nodal);
}

}  // namespace

Vector monolithic_poisson(const Grid& grid, const Vector& f_nodal) {
  const SparseSpd k = assemble_stiffness(grid);
  return spd_solve(k, global_load(grid, f_nodal));
}

ObstacleSolution monolithic_obstacle(const Grid& grid, const Vector& f_nodal,
                                     const Vector& h_nodal, int max_sweeps) {
  const SparseSpd k = assemble_stiffness(grid);
  const Vector b = global_load(grid, f_nodal);
  const Vector h = grid.to_dofs(h_nodal);
  const Eigen::Index n = k.dim();
  const SparseMatrix& km = k.matrix();

  // Active set A: u = h there; elsewhere (Ku)_I = b_I. Update by the sign
  // of λ + c(h − u) with c = 1.
  std::vector<char> active(static_cast<std::size_t>(n), 0);
  Vector u = Vector::Zero(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    std::vector<int> idx(static_cast<std::size_t>(n), -1);
    int nf = 0;
    for (Eigen::Index d = 0; d < n; ++d) {
      if (!active[static_cast<std::size_t>(d)]) idx[static_cast<std::size_t>(d)] = nf++;
    }
    std::vector<Triplet> t;
    Vector rhs(nf);
    for (Eigen::Index d = 0; d < n; ++d) {
      if (idx[static_cast<std::size_t>(d)] >= 0) rhs[idx[static_cast<std::size_t>(d)]] = b[d];
    }
    for (int col = 0; col < km.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(km, col); it; ++it) {
        const int r = idx[static_cast<std::size_t>(it.row())];
        const int c = idx[static_cast<std::size_t>(it.col())];
        if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
        else if (r >= 0) rhs[r] -= it.value() * h[it.col()];
      }
    }
    Vector uf = nf > 0 ? spd_solve(SparseSpd::from_triplets(nf, t), rhs) : Vector();
    for (Eigen::Index d = 0; d < n; ++d) {
      const int r = idx[static_cast<std::size_t>(d)];
      u[d] = r >= 0 ? uf[r] : h[d];
    }
    Vector lambda = km * u - b;
    std::vector<char> next(static_cast<std::size_t>(n), 0);
    for (Eigen::Index d = 0; d < n; ++d) {
      const double l = active[static_cast<std::size_t>(d)] ? lambda[d] : 0.0;
      next[static_cast<std::size_t>(d)] = l + (h[d] - u[d]) > 0.0;
    }
    if (next == active) {
      for (Eigen::Index d = 0; d < n; ++d) {
        if (!active[static_cast<std::size_t>(d)]) lambda[d] = 0.0;
      }
      return {u, lambda, sweep};
    }
    active = std::move(next);
  }
  throw SolverError("monolithic_obstacle: active set did not settle", 0.0);
}

namespace {

struct PLapFunctional {
  std::vector<CellGradient> cells;
  const Grid* grid;
  Vector b;
  double p;
  double delta;

  void gradients(const Vector& u, std::vector<double>& gx, std::vector<double>& gy) const {
    gx.assign(cells.size(), 0.0);
    gy.assign(cells.size(), 0.0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      for (int k = 0; k <= grid->dim; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const int d = grid->dof_of_node[static_cast<std::size_t>(cells[c].nodes[uk])];
        if (d < 0) continue;
        gx[c] += u[d] * cells[c].dx[uk];
        gy[c] += u[d] * cells[c].dy[uk];
      }
    }
  }

  double value(const Vector& u) const {
    std::vector<double> gx, gy;
    gradients(u, gx, gy);
    double s = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      s += cells[c].measure * std::pow(gx[c] * gx[c] + gy[c] * gy[c] + delta, p / 2) / p;
    }
    return s - b.dot(u);
  }

  // Gradient and Hessian together.
  void derivatives(const Vector& u, Vector& grad, SparseMatrix& hess) const {
    std::vector<double> gx, gy;
    gradients(u, gx, gy);
    grad = -b;
    std::vector<Triplet> t;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const CellGradient& cg = cells[c];
      const double s = gx[c] * gx[c] + gy[c] * gy[c] + delta;
      const double a = s > 0 ? std::pow(s, p / 2 - 1) : (p == 2 ? 1.0 : 0.0);
      const double e = s > 0 ? (p - 2) * std::pow(s, p / 2 - 2) : 0.0;
      const int npc = grid->dim + 1;
      for (int k = 0; k < npc; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const int dk = grid->dof_of_node[static_cast<std::size_t>(cg.nodes[uk])];
        if (dk < 0) continue;
        const double wk = gx[c] * cg.dx[uk] + gy[c] * cg.dy[uk];
        grad[dk] += cg.measure * a * wk;
        for (int l = 0; l < npc; ++l) {
          const auto ul = static_cast<std::size_t>(l);
          const int dl = grid->dof_of_node[static_cast<std::size_t>(cg.nodes[ul])];
          if (dl < 0) continue;
          const double wl = gx[c] * cg.dx[ul] + gy[c] * cg.dy[ul];
          const double kl = cg.dx[uk] * cg.dx[ul] + cg.dy[uk] * cg.dy[ul];
          // Written symmetric in (k, l) term by term.
          t.emplace_back(dk, dl, cg.measure * (a * kl + e * (wk * wl)));
        }
      }
    }
    hess.resize(u.size(), u.size());
    hess.setFromTriplets(t.begin(), t.end());
  }
};

}  // namespace

Vector monolithic_plaplacian(const Grid& grid, const Vector& f_nodal, double p,
                             double delta, double tol) {
  if (!(p > 1.0)) throw ConfigError("monolithic_plaplacian: p must exceed 1");
  if (delta < 0.0) delta = p < 2.0 ? 1e-10 : 0.0;
  PLapFunctional fn{cell_gradients(grid), &grid, global_load(grid, f_nodal), p, delta};
  Vector u = monolithic_poisson(grid, f_nodal);
  double f = fn.value(u);
  const double scale = 1.0 + fn.b.norm();
  double gnorm = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 500; ++it) {
    Vector grad;
    SparseMatrix h;
    fn.derivatives(u, grad, h);
    gnorm = grad.norm();
    if (gnorm <= tol * scale) return u;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    double shift = 0.0;
    SparseMatrix eye(u.size(), u.size());
    eye.setIdentity();
    for (;;) {
      ldlt.compute(shift > 0 ? SparseMatrix(h + shift * eye) : h);
      if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all()) break;
      shift = shift == 0 ? 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff()) : shift * 10;
    }
    const Vector d = -ldlt.solve(grad);
    double t = 1.0;
    Vector trial = u + d;
    double ft = fn.value(trial);
    const bool resolved = -grad.dot(d) > 1e-13 * (1.0 + std::abs(f));
    while (resolved && ft > f + 1e-4 * t * grad.dot(d) + 1e-15 * std::abs(f) && t > 1e-14) {
      t *= 0.5;
      trial = u + t * d;
      ft = fn.value(trial);
    }
    if (t <= 1e-14) {
      if (gnorm <= 1e-8 * scale) return u;
      throw SolverError("monolithic_plaplacian: line search failed", gnorm);
    }
    const double step = (trial - u).lpNorm<Eigen::Infinity>();
    u = trial;
    f = ft;
    if (t == 1.0 && step <= 1e-15 * (1.0 + u.lpNorm<Eigen::Infinity>())) return u;
  }
  throw SolverError("monolithic_plaplacian: Newton did not converge", gnorm);
}

QpProjection qp_project_two_halfspaces(const Vector& x0, const HalfSpace& a,
                                       const HalfSpace& b, const SparseSpd* gram,
                                       double tol) {
  auto ip = [&](const Vector& u, const Vector& v) {
    return gram ? u.dot(gram->matrix() * v) : u.dot(v);
  };
  const double naa = ip(a.normal, a.normal);
  const double nbb = ip(b.normal, b.normal);
  const double nab = ip(a.normal, b.normal);
  const double ca = ip(x0 - a.anchor, a.normal);
  const double cb = ip(x0 - b.anchor, b.normal);
  const double scale =
      1.0 + std::sqrt(ip(x0, x0)) + std::sqrt(ip(a.anchor, a.anchor)) +
      std::sqrt(ip(b.anchor, b.anchor)) + std::sqrt(naa) + std::sqrt(nbb);
  const double feas_tol = tol * scale * scale;

  QpProjection best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int pattern = 0; pattern < 4; ++pattern) {
    const bool act_a = pattern & 1;
    const bool act_b = pattern & 2;
    if ((act_a && naa == 0.0) || (act_b && nbb == 0.0)) continue;
    double la = 0.0;
    double lb = 0.0;
    if (act_a && act_b) {
      const double det = naa * nbb - nab * nab;
      if (!(det > 1e-14 * naa * nbb)) continue;
      la = (ca * nbb - cb * nab) / det;
      lb = (cb * naa - ca * nab) / det;
    } else if (act_a) {
      la = ca / naa;
    } else if (act_b) {
      lb = cb / nbb;
    }
    if (la < -tol * (1.0 + std::abs(la)) || lb < -tol * (1.0 + std::abs(lb))) continue;
    Vector x = x0 - la * a.normal - lb * b.normal;
    if (ip(x - a.anchor, a.normal) > feas_tol || ip(x - b.anchor, b.normal) > feas_tol) continue;
    const double dist = ip(x - x0, x - x0);
    if (dist < best_dist) {
      best_dist = dist;
      best.x = std::move(x);
      best.multiplier_a = la;
      best.multiplier_b = lb;
      best.active = pattern;
    }
  }
  if (!std::isfinite(best_dist)) {
    throw AlgorithmError("qp_project_two_halfspaces: no feasible KKT candidate");
  }
  return best;
}

std::vector<Vector> restrict_to_subdomains(const Partition& partition, const Vector& global_dofs) {
  const Vector nodal = partition.global.to_nodal(global_dofs);
  std::vector<Vector> out;
  for (const Grid& g : partition.subdomains) {
    Vector local(g.n_nodes());
    for (int k = 0; k < g.n_nodes(); ++k) local[k] = nodal[g.global_node[static_cast<std::size_t>(k)]];
    out.push_back(g.to_dofs(local));
  }
  return out;
}

double energy_distance(const Partition& partition, const std::vector<Vector>& u,
                       const std::vector<Vector>& v) {
  double sum = 0.0;
  for (int i = 0; i < partition.size(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const SparseSpd k = assemble_stiffness(partition.subdomains[ui]);
    const Vector d = u.at(ui) - v.at(ui);
    sum += d.dot(k.matrix() * d);
  }
  return std::sqrt(std::max(0.0, sum));
}

PrimalDualPoint kt_reference(const Partition& partition, const std::vector<Vector>& primal,
                             const std::vector<std::shared_ptr<const SubdomainEnergy>>& energies) {
  PrimalDualPoint z;
  z.primal = primal;
  std::vector<Vector> residual;
  for (int i = 0; i < partition.size(); ++i) {
    residual.push_back(energies.at(static_cast<std::size_t>(i))->gradient(primal.at(static_cast<std::size_t>(i))));
  }
  for (const Interface& iface : partition.interfaces) {
    const Vector rl = iface.left_trace.apply(residual[static_cast<std::size_t>(iface.left)]);
    const Vector rr = iface.right_trace.apply(residual[static_cast<std::size_t>(iface.right)]);
    z.dual.push_back(0.5 * (rr - rl).cwiseQuotient(iface.weights));
  }
  return z;
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

struct InterfaceNode {
  int interface;
  int row;
  int left_dof;   // stacked index
  int right_dof;  // stacked index
  InterfaceCoupling coupling;
};

}  // namespace

TransmissionSolution transmission_reference(const Partition& partition, const Vector& f_nodal,
                                            const std::vector<InterfaceCoupling>& couplings) {
  const int m = partition.size();
  if (static_cast<int>(couplings.size()) != partition.n_interfaces()) {
    throw ConfigError("transmission_reference: one coupling per interface");
  }
  std::vector<int> offset(static_cast<std::size_t>(m) + 1, 0);
  std::vector<SparseSpd> stiff;
  std::vector<Vector> load;
  for (int i = 0; i < m; ++i) {
    const Grid& g = partition.subdomains[static_cast<std::size_t>(i)];
    stiff.push_back(assemble_stiffness(g));
    Vector local(g.n_nodes());
    for (int k = 0; k < g.n_nodes(); ++k) local[k] = f_nodal[g.global_node[static_cast<std::size_t>(k)]];
    load.push_back(assemble_load(g, local));
    offset[static_cast<std::size_t>(i) + 1] = offset[static_cast<std::size_t>(i)] + g.n_dofs();
  }
  const int total = offset.back();

  std::vector<InterfaceNode> nodes;
  std::vector<int> free_nodes;  // indices into nodes that may open or close
  for (int k = 0; k < partition.n_interfaces(); ++k) {
    const Interface& iface = partition.interfaces[static_cast<std::size_t>(k)];
    for (int r = 0; r < iface.size(); ++r) {
      const int dl = iface.left_trace.rows()[static_cast<std::size_t>(r)];
      const int dr = iface.right_trace.rows()[static_cast<std::size_t>(r)];
      if (dl < 0) continue;
      const InterfaceCoupling& c = couplings[static_cast<std::size_t>(k)];
      nodes.push_back({k, r, offset[static_cast<std::size_t>(iface.left)] + dl,
                       offset[static_cast<std::size_t>(iface.right)] + dr, c});
      if (c.kind != CouplingKind::equality && c.kind != CouplingKind::quadratic) {
        free_nodes.push_back(static_cast<int>(nodes.size()) - 1);
      }
    }
  }
  if (free_nodes.size() > 16) {
    throw ConfigError("transmission_reference: too many unilateral interface nodes");
  }

  TransmissionSolution out;
  for (long pattern = 0; pattern < (1L << free_nodes.size()); ++pattern) {
    ++out.patterns_tried;
    std::vector<char> closed(nodes.size(), 0);
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      closed[n] = nodes[n].coupling.kind == CouplingKind::equality;
    }
    for (std::size_t b = 0; b < free_nodes.size(); ++b) {
      closed[static_cast<std::size_t>(free_nodes[b])] = (pattern >> b) & 1;
    }
    std::vector<int> parent(static_cast<std::size_t>(total));
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      if (closed[n]) {
        parent[static_cast<std::size_t>(find_root(parent, nodes[n].right_dof))] =
            find_root(parent, nodes[n].left_dof);
      }
    }
    std::vector<int> merged(static_cast<std::size_t>(total), -1);
    int nm = 0;
    for (int d = 0; d < total; ++d) {
      const int r = find_root(parent, d);
      if (merged[static_cast<std::size_t>(r)] < 0) merged[static_cast<std::size_t>(r)] = nm++;
      merged[static_cast<std::size_t>(d)] = merged[static_cast<std::size_t>(r)];
    }
    std::vector<Triplet> t;
    Vector rhs = Vector::Zero(nm);
    for (int i = 0; i < m; ++i) {
      const SparseMatrix& km = stiff[static_cast<std::size_t>(i)].matrix();
      const int off = offset[static_cast<std::size_t>(i)];
      for (int col = 0; col < km.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(km, col); it; ++it) {
          t.emplace_back(merged[static_cast<std::size_t>(off + it.row())],
                         merged[static_cast<std::size_t>(off + it.col())], it.value());
        }
      }
      for (Eigen::Index d = 0; d < load[static_cast<std::size_t>(i)].size(); ++d) {
        rhs[merged[static_cast<std::size_t>(off + d)]] += load[static_cast<std::size_t>(i)][d];
      }
    }
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const double kappa = nodes[n].coupling.permeability;
      if (closed[n] || kappa == 0.0) continue;
      const double w = kappa * partition.interfaces[static_cast<std::size_t>(nodes[n].interface)]
                                   .weights[nodes[n].row];
      const int a = merged[static_cast<std::size_t>(nodes[n].left_dof)];
      const int b = merged[static_cast<std::size_t>(nodes[n].right_dof)];
      t.emplace_back(a, a, w);
      t.emplace_back(b, b, w);
      t.emplace_back(a, b, -w);
      t.emplace_back(b, a, -w);
    }
    Vector x;
    try {
      x = spd_solve(SparseSpd::from_triplets(nm, t), rhs);
    } catch (const SolverError&) {
      continue;  // singular pattern (a subdomain left without Dirichlet contact)
    }
    std::vector<Vector> primal;
    for (int i = 0; i < m; ++i) {
      Vector u(offset[static_cast<std::size_t>(i) + 1] - offset[static_cast<std::size_t>(i)]);
      for (Eigen::Index d = 0; d < u.size(); ++d) {
        u[d] = x[merged[static_cast<std::size_t>(offset[static_cast<std::size_t>(i)] + d)]];
      }
      primal.push_back(std::move(u));
    }
    std::vector<Vector> jumps;
    std::vector<Vector> duals;
    double scale = 1.0 + x.lpNorm<Eigen::Infinity>();
    for (const Interface& iface : partition.interfaces) {
      const auto li = static_cast<std::size_t>(iface.left);
      const auto ri = static_cast<std::size_t>(iface.right);
      jumps.push_back(iface.left_trace.apply(primal[li]) - iface.right_trace.apply(primal[ri]));
      const Vector rl = iface.left_trace.apply(stiff[li].apply(primal[li]) - load[li]);
      const Vector rr = iface.right_trace.apply(stiff[ri].apply(primal[ri]) - load[ri]);
      duals.push_back(0.5 * (rr - rl).cwiseQuotient(iface.weights));
      scale += duals.back().lpNorm<Eigen::Infinity>();
    }
    const double tol = 1e-9 * scale;
    bool ok = true;
    for (std::size_t n = 0; n < nodes.size() && ok; ++n) {
      const CouplingKind kind = nodes[n].coupling.kind;
      if (kind == CouplingKind::equality || kind == CouplingKind::quadratic) continue;
      const double sign =
          (kind == CouplingKind::cone_plus || kind == CouplingKind::membrane_plus) ? 1.0 : -1.0;
      const auto k = static_cast<std::size_t>(nodes[n].interface);
      const double jump = jumps[k][nodes[n].row];
      const double g = duals[k][nodes[n].row];
      ok = closed[n] ? sign * g <= tol : sign * jump >= -tol;
    }
    if (ok) {
      out.primal = std::move(primal);
      out.jumps = std::move(jumps);
      out.duals = std::move(duals);
      return out;
    }
  }
  throw AlgorithmError("transmission_reference: no admissible interface pattern");
}

}  // namespace ddsplit::oracle
