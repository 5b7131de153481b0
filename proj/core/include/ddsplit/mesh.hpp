#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "ddsplit/linalg.hpp"

namespace ddsplit {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) {
  return a.x == b.x && a.y == b.y;
}

/**
 * Conforming P1 grid: 1D segments or 2D triangles.
 *
 * Nodes on the Dirichlet part of the boundary carry no degree of freedom
 * (dof_of_node == -1); every other node owns exactly one dof. The same type
 * describes a subdomain of a partition and the glued global grid.
 */
struct Grid {
  int dim = 1;
  std::vector<Point> nodes;
  std::vector<int> cells;        ///< dim+1 node ids per cell
  std::vector<int> dof_of_node;  ///< -1 for Dirichlet-constrained nodes
  std::vector<int> node_of_dof;
  std::vector<int> global_node;  ///< node id in the glued grid; empty on it
  bool floating = false;         ///< no Dirichlet contact

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_dofs() const { return static_cast<int>(node_of_dof.size()); }
  int nodes_per_cell() const { return dim + 1; }
  int n_cells() const {
    return static_cast<int>(cells.size()) / nodes_per_cell();
  }
  std::span<const int> cell(int c) const {
    return {cells.data() + static_cast<std::size_t>(c) * nodes_per_cell(),
            static_cast<std::size_t>(nodes_per_cell())};
  }

  /// Nodal field (one value per node, zero on Dirichlet nodes) from dof values.
  Vector to_nodal(const Vector& dofs) const;
  /// Dof values of a nodal field; Dirichlet entries are dropped.
  Vector to_dofs(const Vector& nodal) const;
  /// Nodal samples of f.
  Vector sample(const std::function<double(Point)>& f) const;
};

using SubdomainGrid = Grid;

/**
 * Nodal trace from subdomain dofs onto the ordered nodes of an interface.
 *
 * Row r selects dof rows[r]; a row of -1 marks a Dirichlet node whose trace
 * is identically zero.
 */
class TraceMap {
 public:
  TraceMap() = default;
  TraceMap(std::vector<int> rows, int n_dofs);

  Vector apply(const Vector& u) const;
  /// Transpose of the selector: scatters interface values into dof space.
  Vector apply_transpose(const Vector& w) const;

  std::span<const int> rows() const { return rows_; }
  int size() const { return static_cast<int>(rows_.size()); }
  int n_dofs() const { return n_dofs_; }

 private:
  std::vector<int> rows_;
  int n_dofs_ = 0;
};

Vector trace_apply(const TraceMap& map, const Vector& u);

/// Shared boundary Υ_ij between subdomains left < right.
struct Interface {
  int left = 0;
  int right = 0;
  std::vector<Point> nodes;
  std::vector<int> left_nodes;   ///< local node ids in the left subdomain
  std::vector<int> right_nodes;  ///< local node ids in the right subdomain
  TraceMap left_trace;
  TraceMap right_trace;
  Vector weights;                      ///< diagonal of the L² Gram
  std::shared_ptr<const SparseSpd> mass;

  int size() const { return static_cast<int>(nodes.size()); }
  InnerProductSpace space() const { return InnerProductSpace(mass); }
};

struct PartitionOptions {
  /// Accept subdomains without Dirichlet contact.
  bool allow_floating = false;
  /// Weight w of the trace term added to the energy Gram of a floating
  /// subdomain: G = K + w·Σ TᵀMT.
  double floating_weight = 1.0;
};

/**
 * Non-overlapping partition of the domain.
 *
 * Indices are 0-based; interfaces are stored in lexicographic (i, j) order,
 * which is the ordering of the index set K.
 */
struct Partition {
  std::vector<SubdomainGrid> subdomains;
  std::vector<Interface> interfaces;
  Grid global;
  double floating_weight = 1.0;

  int size() const { return static_cast<int>(subdomains.size()); }
  int n_interfaces() const { return static_cast<int>(interfaces.size()); }

  /// J(i+): neighbors with larger index.
  std::vector<int> neighbors_plus(int i) const;
  /// J(i−): neighbors with smaller index.
  std::vector<int> neighbors_minus(int i) const;
  /// Position of (i, j), i < j, in K, or -1.
  int interface_index(int i, int j) const;
  std::vector<std::pair<int, int>> index_pairs() const;

  /// Throws GeometryError when a structural invariant is violated.
  void validate() const;
};

Partition build_partition_1d(double length, std::span<const double> cuts,
                             std::span<const int> nodes_per_subdomain,
                             const PartitionOptions& options = {});

/// Splits total_nodes distinct nodes over the subdomains in proportion to
/// their lengths (interface nodes are counted once).
std::vector<int> distribute_nodes_1d(double length, std::span<const double> cuts,
                                     int total_nodes);

struct StripResolution {
  int nx = 1;  ///< cells across the strip
  int ny = 1;  ///< cells along the strip (must agree between strips)
};

Partition build_partition_2d_strips(double width, double height,
                                    std::span<const double> cuts,
                                    std::span<const StripResolution> resolution,
                                    const PartitionOptions& options = {});

/// Gradient of the P1 basis on one cell; constant per cell.
struct CellGradient {
  double measure = 0.0;
  std::array<int, 3> nodes{-1, -1, -1};
  std::array<double, 3> dx{};
  std::array<double, 3> dy{};
};

/// Throws GeometryError on a cell of zero measure.
std::vector<CellGradient> cell_gradients(const Grid& grid);

/// Energy Gram ∫ Du·Dv on the free dofs.
SparseSpd assemble_stiffness(const Grid& grid);
/// Consistent L² mass on the free dofs.
SparseSpd assemble_mass(const Grid& grid);
/// Consistent load ∫ f φ_k for the P1 interpolant of f (one value per node).
Vector assemble_load(const Grid& grid, const Vector& f_nodal);
Vector assemble_load(const Grid& grid, const std::function<double(Point)>& f);

/**
 * Gram matrix of the energy inner product of subdomain i.
 *
 * Equals the stiffness matrix when the subdomain touches the Dirichlet
 * boundary; a floating subdomain adds w·Σ TᵀMT over its interfaces.
 */
SparseSpd assemble_energy_gram(const Partition& partition, int i);

}  // namespace ddsplit
