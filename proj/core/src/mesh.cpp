#include "ddsplit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ddsplit/error.hpp"

namespace ddsplit {

namespace {

std::string subdomain_label(int i) {
  return "subdomain " + std::to_string(i + 1);
}

void number_dofs(Grid& grid, const std::vector<bool>& dirichlet) {
  grid.dof_of_node.assign(grid.nodes.size(), -1);
  grid.node_of_dof.clear();
  for (int k = 0; k < grid.n_nodes(); ++k) {
    if (!dirichlet[static_cast<std::size_t>(k)]) {
      grid.dof_of_node[static_cast<std::size_t>(k)] = grid.n_dofs();
      grid.node_of_dof.push_back(k);
    }
  }
}

std::vector<int> dof_rows(const Grid& grid, const std::vector<int>& nodes) {
  std::vector<int> rows;
  rows.reserve(nodes.size());
  for (int node : nodes) {
    rows.push_back(grid.dof_of_node[static_cast<std::size_t>(node)]);
  }
  return rows;
}

Interface make_interface(const Partition& p, int left, int right,
                         std::vector<int> left_nodes,
                         std::vector<int> right_nodes, Vector weights) {
  Interface iface;
  iface.left = left;
  iface.right = right;
  const Grid& lg = p.subdomains[static_cast<std::size_t>(left)];
  const Grid& rg = p.subdomains[static_cast<std::size_t>(right)];
  for (int node : left_nodes) {
    iface.nodes.push_back(lg.nodes[static_cast<std::size_t>(node)]);
  }
  iface.left_trace = TraceMap(dof_rows(lg, left_nodes), lg.n_dofs());
  iface.right_trace = TraceMap(dof_rows(rg, right_nodes), rg.n_dofs());
  iface.left_nodes = std::move(left_nodes);
  iface.right_nodes = std::move(right_nodes);
  iface.mass = std::make_shared<const SparseSpd>(SparseSpd::diagonal(weights));
  iface.weights = std::move(weights);
  return iface;
}

void check_cuts(double extent, std::span<const double> cuts) {
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw GeometryError("domain extent must be positive");
  }
  double previous = 0.0;
  for (double c : cuts) {
    if (!(c > previous) || !(c < extent)) {
      throw GeometryError(
          "cuts must be strictly increasing and lie inside the domain");
    }
    previous = c;
  }
}

}  // namespace

Vector Grid::to_nodal(const Vector& dofs) const {
  if (dofs.size() != n_dofs()) {
    throw Error("Grid::to_nodal: dimension mismatch");
  }
  Vector nodal = Vector::Zero(n_nodes());
  for (int d = 0; d < n_dofs(); ++d) {
    nodal[node_of_dof[static_cast<std::size_t>(d)]] = dofs[d];
  }
  return nodal;
}

Vector Grid::to_dofs(const Vector& nodal) const {
  if (nodal.size() != n_nodes()) {
    throw Error("Grid::to_dofs: dimension mismatch");
  }
  Vector dofs(n_dofs());
  for (int d = 0; d < n_dofs(); ++d) {
    dofs[d] = nodal[node_of_dof[static_cast<std::size_t>(d)]];
  }
  return dofs;
}

Vector Grid::sample(const std::function<double(Point)>& f) const {
  Vector values(n_nodes());
  for (int k = 0; k < n_nodes(); ++k) {
    values[k] = f(nodes[static_cast<std::size_t>(k)]);
  }
  return values;
}

TraceMap::TraceMap(std::vector<int> rows, int n_dofs)
    : rows_(std::move(rows)), n_dofs_(n_dofs) {
  for (int r : rows_) {
    if (r < -1 || r >= n_dofs_) {
      throw GeometryError("TraceMap: row selects a dof out of range");
    }
  }
}

Vector TraceMap::apply(const Vector& u) const {
  if (u.size() != n_dofs_) {
    throw Error("TraceMap::apply: dimension mismatch");
  }
  Vector out(size());
  for (int r = 0; r < size(); ++r) {
    const int d = rows_[static_cast<std::size_t>(r)];
    out[r] = d >= 0 ? u[d] : 0.0;
  }
  return out;
}

Vector TraceMap::apply_transpose(const Vector& w) const {
  if (w.size() != size()) {
    throw Error("TraceMap::apply_transpose: dimension mismatch");
  }
  Vector out = Vector::Zero(n_dofs_);
  for (int r = 0; r < size(); ++r) {
    const int d = rows_[static_cast<std::size_t>(r)];
    if (d >= 0) out[d] += w[r];
  }
  return out;
}

Vector trace_apply(const TraceMap& map, const Vector& u) { return map.apply(u); }

std::vector<int> Partition::neighbors_plus(int i) const {
  std::vector<int> out;
  for (const auto& iface : interfaces) {
    if (iface.left == i) out.push_back(iface.right);
  }
  return out;
}

std::vector<int> Partition::neighbors_minus(int i) const {
  std::vector<int> out;
  for (const auto& iface : interfaces) {
    if (iface.right == i) out.push_back(iface.left);
  }
  return out;
}

int Partition::interface_index(int i, int j) const {
  for (int k = 0; k < n_interfaces(); ++k) {
    const auto& iface = interfaces[static_cast<std::size_t>(k)];
    if (iface.left == i && iface.right == j) return k;
  }
  return -1;
}

std::vector<std::pair<int, int>> Partition::index_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& iface : interfaces) out.emplace_back(iface.left, iface.right);
  return out;
}

void Partition::validate() const {
  if (subdomains.empty()) throw GeometryError("partition has no subdomains");
  for (std::size_t k = 0; k < interfaces.size(); ++k) {
    const Interface& iface = interfaces[k];
    if (iface.left < 0 || iface.right >= size() || iface.left >= iface.right) {
      throw GeometryError("interface indices must satisfy i < j");
    }
    if (k > 0) {
      const Interface& prev = interfaces[k - 1];
      if (std::pair(prev.left, prev.right) >= std::pair(iface.left, iface.right)) {
        throw GeometryError("interfaces must be unique and sorted by (i, j)");
      }
    }
    const Grid& lg = subdomains[static_cast<std::size_t>(iface.left)];
    const Grid& rg = subdomains[static_cast<std::size_t>(iface.right)];
    for (int r = 0; r < iface.size(); ++r) {
      const Point& a = lg.nodes[static_cast<std::size_t>(iface.left_nodes[static_cast<std::size_t>(r)])];
      const Point& b = rg.nodes[static_cast<std::size_t>(iface.right_nodes[static_cast<std::size_t>(r)])];
      if (!(a == b) || !(a == iface.nodes[static_cast<std::size_t>(r)])) {
        throw GeometryError("nonconforming interface: node coordinates differ");
      }
      const bool ld = iface.left_trace.rows()[static_cast<std::size_t>(r)] < 0;
      const bool rd = iface.right_trace.rows()[static_cast<std::size_t>(r)] < 0;
      if (ld != rd) {
        throw GeometryError("interface node is Dirichlet on one side only");
      }
    }
    if (!(iface.weights.array() > 0.0).all()) {
      throw GeometryError("interface mass weights must be positive");
    }
  }
  if (size() >= 2) {
    for (int i = 0; i < size(); ++i) {
      if (neighbors_plus(i).empty() && neighbors_minus(i).empty()) {
        throw GeometryError(subdomain_label(i) + " has no interface");
      }
    }
  }
}

std::vector<int> distribute_nodes_1d(double length, std::span<const double> cuts,
                                     int total_nodes) {
  check_cuts(length, cuts);
  const int m = static_cast<int>(cuts.size()) + 1;
  const int elements = total_nodes - 1;
  if (elements < 2 * m) {
    throw GeometryError("too few nodes for the requested subdomains");
  }
  std::vector<double> bounds{0.0};
  bounds.insert(bounds.end(), cuts.begin(), cuts.end());
  bounds.push_back(length);
  // Largest-remainder apportionment of the element count.
  std::vector<int> counts(static_cast<std::size_t>(m));
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (int i = 0; i < m; ++i) {
    const double share = elements * (bounds[static_cast<std::size_t>(i) + 1] - bounds[static_cast<std::size_t>(i)]) / length;
    counts[static_cast<std::size_t>(i)] = std::max(2, static_cast<int>(std::floor(share)));
    assigned += counts[static_cast<std::size_t>(i)];
    remainders.emplace_back(share - std::floor(share), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < elements; r = (r + 1) % remainders.size()) {
    ++counts[static_cast<std::size_t>(remainders[r].second)];
    ++assigned;
  }
  std::vector<int> nodes;
  for (int c : counts) nodes.push_back(c + 1);
  return nodes;
}

Partition build_partition_1d(double length, std::span<const double> cuts,
                             std::span<const int> nodes_per_subdomain,
                             const PartitionOptions& options) {
  check_cuts(length, cuts);
  const int m = static_cast<int>(cuts.size()) + 1;
  if (static_cast<int>(nodes_per_subdomain.size()) != m) {
    throw GeometryError("need one node count per subdomain");
  }
  std::vector<double> bounds{0.0};
  bounds.insert(bounds.end(), cuts.begin(), cuts.end());
  bounds.push_back(length);

  Partition p;
  p.floating_weight = options.floating_weight;
  Grid& global = p.global;
  global.dim = 1;

  for (int i = 0; i < m; ++i) {
    const int n = nodes_per_subdomain[static_cast<std::size_t>(i)];
    if (n < 3) {
      throw GeometryError(subdomain_label(i) + " needs at least 2 elements");
    }
    const double a = bounds[static_cast<std::size_t>(i)];
    const double b = bounds[static_cast<std::size_t>(i) + 1];
    Grid g;
    g.dim = 1;
    for (int k = 0; k < n; ++k) {
      const double x = k == n - 1 ? b : a + (b - a) * k / (n - 1);
      g.nodes.push_back({x, 0.0});
    }
    for (int k = 0; k + 1 < n; ++k) {
      g.cells.push_back(k);
      g.cells.push_back(k + 1);
    }
    std::vector<bool> dirichlet(static_cast<std::size_t>(n), false);
    if (i == 0) dirichlet.front() = true;
    if (i == m - 1) dirichlet.back() = true;
    if (i != 0 && i != m - 1) {
      if (!options.allow_floating) {
        throw GeometryError(subdomain_label(i) +
                            " has no Dirichlet boundary (set allow_floating)");
      }
      g.floating = true;
    }
    number_dofs(g, dirichlet);

    // Glue into the global grid; the first node of every subdomain after
    // the first coincides with the last global node.
    for (int k = 0; k < n; ++k) {
      if (i > 0 && k == 0) {
        g.global_node.push_back(global.n_nodes() - 1);
      } else {
        g.global_node.push_back(global.n_nodes());
        global.nodes.push_back(g.nodes[static_cast<std::size_t>(k)]);
      }
    }
    p.subdomains.push_back(std::move(g));
  }
  for (int k = 0; k + 1 < global.n_nodes(); ++k) {
    global.cells.push_back(k);
    global.cells.push_back(k + 1);
  }
  std::vector<bool> gdir(global.nodes.size(), false);
  gdir.front() = true;
  gdir.back() = true;
  number_dofs(global, gdir);

  for (int i = 0; i + 1 < m; ++i) {
    const int last = p.subdomains[static_cast<std::size_t>(i)].n_nodes() - 1;
    p.interfaces.push_back(make_interface(p, i, i + 1, {last}, {0},
                                          Vector::Ones(1)));
  }
  p.validate();
  return p;
}

Partition build_partition_2d_strips(double width, double height,
                                    std::span<const double> cuts,
                                    std::span<const StripResolution> resolution,
                                    const PartitionOptions& options) {
  check_cuts(width, cuts);
  if (!(height > 0.0)) throw GeometryError("height must be positive");
  const int m = static_cast<int>(cuts.size()) + 1;
  if (static_cast<int>(resolution.size()) != m) {
    throw GeometryError("need one resolution per strip");
  }
  const int ny = resolution[0].ny;
  for (int i = 0; i < m; ++i) {
    const auto& r = resolution[static_cast<std::size_t>(i)];
    if (r.nx < 1 || r.ny < 2) {
      throw GeometryError(subdomain_label(i) + ": resolution too small");
    }
    if (r.ny != ny) {
      throw GeometryError("nonconforming resolution across cut " +
                          std::to_string(i) + ": ny differs between strips");
    }
  }
  std::vector<double> bounds{0.0};
  bounds.insert(bounds.end(), cuts.begin(), cuts.end());
  bounds.push_back(width);

  auto y_of = [&](int iy) { return iy == ny ? height : height * iy / ny; };

  Partition p;
  p.floating_weight = options.floating_weight;
  int total_nx = 0;
  for (const auto& r : resolution) total_nx += r.nx;
  const int gcols = total_nx + 1;

  Grid& global = p.global;
  global.dim = 2;
  global.nodes.resize(static_cast<std::size_t>(gcols * (ny + 1)));

  int col_offset = 0;
  for (int i = 0; i < m; ++i) {
    const int nx = resolution[static_cast<std::size_t>(i)].nx;
    const double a = bounds[static_cast<std::size_t>(i)];
    const double b = bounds[static_cast<std::size_t>(i) + 1];
    const int cols = nx + 1;
    Grid g;
    g.dim = 2;
    std::vector<bool> dirichlet;
    for (int iy = 0; iy <= ny; ++iy) {
      for (int ix = 0; ix <= nx; ++ix) {
        const double x = ix == 0 ? a : (ix == nx ? b : a + (b - a) * ix / nx);
        g.nodes.push_back({x, y_of(iy)});
        dirichlet.push_back(iy == 0 || iy == ny || (i == 0 && ix == 0) ||
                            (i == m - 1 && ix == nx));
        const int gid = iy * gcols + col_offset + ix;
        g.global_node.push_back(gid);
        global.nodes[static_cast<std::size_t>(gid)] = g.nodes.back();
      }
    }
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const int n00 = iy * cols + ix;
        const int n10 = n00 + 1;
        const int n01 = n00 + cols;
        const int n11 = n01 + 1;
        g.cells.insert(g.cells.end(), {n00, n10, n11, n00, n11, n01});
      }
    }
    number_dofs(g, dirichlet);
    p.subdomains.push_back(std::move(g));
    col_offset += nx;
  }

  std::vector<bool> gdir;
  for (int iy = 0; iy <= ny; ++iy) {
    for (int ix = 0; ix < gcols; ++ix) {
      gdir.push_back(iy == 0 || iy == ny || ix == 0 || ix == gcols - 1);
    }
  }
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < total_nx; ++ix) {
      const int n00 = iy * gcols + ix;
      const int n10 = n00 + 1;
      const int n01 = n00 + gcols;
      const int n11 = n01 + 1;
      global.cells.insert(global.cells.end(), {n00, n10, n11, n00, n11, n01});
    }
  }
  number_dofs(global, gdir);

  for (int i = 0; i + 1 < m; ++i) {
    const int lnx = resolution[static_cast<std::size_t>(i)].nx;
    const int rnx = resolution[static_cast<std::size_t>(i) + 1].nx;
    std::vector<int> ln, rn;
    Vector w(ny + 1);
    for (int iy = 0; iy <= ny; ++iy) {
      ln.push_back(iy * (lnx + 1) + lnx);
      rn.push_back(iy * (rnx + 1));
      const double lo = iy == 0 ? y_of(0) : 0.5 * (y_of(iy - 1) + y_of(iy));
      const double hi = iy == ny ? y_of(ny) : 0.5 * (y_of(iy) + y_of(iy + 1));
      w[iy] = hi - lo;
    }
    p.interfaces.push_back(make_interface(p, i, i + 1, std::move(ln),
                                          std::move(rn), std::move(w)));
  }
  p.validate();
  return p;
}

std::vector<CellGradient> cell_gradients(const Grid& grid) {
  std::vector<CellGradient> out;
  out.reserve(static_cast<std::size_t>(grid.n_cells()));
  for (int c = 0; c < grid.n_cells(); ++c) {
    const auto cell = grid.cell(c);
    CellGradient cg;
    if (grid.dim == 1) {
      const Point& p0 = grid.nodes[static_cast<std::size_t>(cell[0])];
      const Point& p1 = grid.nodes[static_cast<std::size_t>(cell[1])];
      const double h = p1.x - p0.x;
      if (!(std::abs(h) > 0.0)) {
        throw GeometryError("degenerate element of zero length");
      }
      cg.measure = std::abs(h);
      cg.nodes = {cell[0], cell[1], -1};
      cg.dx = {-1.0 / h, 1.0 / h, 0.0};
    } else {
      const Point& p0 = grid.nodes[static_cast<std::size_t>(cell[0])];
      const Point& p1 = grid.nodes[static_cast<std::size_t>(cell[1])];
      const Point& p2 = grid.nodes[static_cast<std::size_t>(cell[2])];
      const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
      if (!(std::abs(det) > 0.0)) {
        throw GeometryError("degenerate triangle of zero area");
      }
      cg.measure = 0.5 * std::abs(det);
      cg.nodes = {cell[0], cell[1], cell[2]};
      const std::array<const Point*, 3> v{&p0, &p1, &p2};
      for (int k = 0; k < 3; ++k) {
        const Point& a = *v[static_cast<std::size_t>((k + 1) % 3)];
        const Point& b = *v[static_cast<std::size_t>((k + 2) % 3)];
        cg.dx[static_cast<std::size_t>(k)] = (a.y - b.y) / det;
        cg.dy[static_cast<std::size_t>(k)] = (b.x - a.x) / det;
      }
    }
    out.push_back(cg);
  }
  return out;
}

namespace {

// Local element matrices are computed for k <= l and mirrored so that the
// assembled matrix is bitwise symmetric.
template <typename LocalEntry>
SparseSpd assemble_free(const Grid& grid, LocalEntry&& entry) {
  const auto grads = cell_gradients(grid);
  std::vector<Triplet> triplets;
  const int npc = grid.nodes_per_cell();
  triplets.reserve(grads.size() * static_cast<std::size_t>(npc * npc));
  for (const CellGradient& cg : grads) {
    for (int k = 0; k < npc; ++k) {
      const int dk = grid.dof_of_node[static_cast<std::size_t>(cg.nodes[static_cast<std::size_t>(k)])];
      if (dk < 0) continue;
      for (int l = 0; l < npc; ++l) {
        const int dl = grid.dof_of_node[static_cast<std::size_t>(cg.nodes[static_cast<std::size_t>(l)])];
        if (dl < 0) continue;
        const double value = k <= l ? entry(cg, npc, k, l) : entry(cg, npc, l, k);
        triplets.emplace_back(dk, dl, value);
      }
    }
  }
  return SparseSpd::from_triplets(grid.n_dofs(), triplets);
}

double stiffness_entry(const CellGradient& cg, int, int k, int l) {
  const auto uk = static_cast<std::size_t>(k);
  const auto ul = static_cast<std::size_t>(l);
  return cg.measure * (cg.dx[uk] * cg.dx[ul] + cg.dy[uk] * cg.dy[ul]);
}

double mass_entry(const CellGradient& cg, int npc, int k, int l) {
  // 1D: h/6·[2 1; 1 2]; 2D: A/12·[2 1 1; 1 2 1; 1 1 2].
  const double scale = npc == 2 ? cg.measure / 6.0 : cg.measure / 12.0;
  return scale * (k == l ? 2.0 : 1.0);
}

}  // namespace

SparseSpd assemble_stiffness(const Grid& grid) {
  return assemble_free(grid, stiffness_entry);
}

SparseSpd assemble_mass(const Grid& grid) {
  return assemble_free(grid, mass_entry);
}

Vector assemble_load(const Grid& grid, const Vector& f_nodal) {
  if (f_nodal.size() != grid.n_nodes()) {
    throw Error("assemble_load: expected one source value per node");
  }
  const auto grads = cell_gradients(grid);
  const int npc = grid.nodes_per_cell();
  Vector load = Vector::Zero(grid.n_dofs());
  for (const CellGradient& cg : grads) {
    for (int k = 0; k < npc; ++k) {
      const int dk = grid.dof_of_node[static_cast<std::size_t>(cg.nodes[static_cast<std::size_t>(k)])];
      if (dk < 0) continue;
      double sum = 0.0;
      for (int l = 0; l < npc; ++l) {
        sum += mass_entry(cg, npc, std::min(k, l), std::max(k, l)) *
               f_nodal[cg.nodes[static_cast<std::size_t>(l)]];
      }
      load[dk] += sum;
    }
  }
  return load;
}

Vector assemble_load(const Grid& grid, const std::function<double(Point)>& f) {
  return assemble_load(grid, grid.sample(f));
}

SparseSpd assemble_energy_gram(const Partition& partition, int i) {
  const Grid& grid = partition.subdomains.at(static_cast<std::size_t>(i));
  SparseSpd stiffness = assemble_stiffness(grid);
  if (!grid.floating) return stiffness;

  std::vector<Triplet> extra;
  for (const Interface& iface : partition.interfaces) {
    const TraceMap* trace = nullptr;
    if (iface.left == i) trace = &iface.left_trace;
    if (iface.right == i) trace = &iface.right_trace;
    if (trace == nullptr) continue;
    for (int r = 0; r < trace->size(); ++r) {
      const int d = trace->rows()[static_cast<std::size_t>(r)];
      if (d >= 0) {
        extra.emplace_back(d, d, partition.floating_weight * iface.weights[r]);
      }
    }
  }
  SparseMatrix reg(grid.n_dofs(), grid.n_dofs());
  reg.setFromTriplets(extra.begin(), extra.end());
  return SparseSpd(SparseMatrix(stiffness.matrix() + reg));
}

}  // namespace ddsplit
