#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <memory>
#include <vector>

namespace ddsplit {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/**
 * Symmetric positive definite sparse matrix.
 *
 * Symmetry is checked exactly at construction (assembly produces bitwise
 * symmetric entries). Positive definiteness is not checked eagerly; it shows
 * up as a factorization or CG failure.
 */
class SparseSpd {
 public:
  SparseSpd() = default;
  explicit SparseSpd(SparseMatrix matrix);

  static SparseSpd from_triplets(Eigen::Index dim,
                                 const std::vector<Triplet>& entries);
  static SparseSpd identity(Eigen::Index dim);
  static SparseSpd diagonal(const Vector& d);

  Eigen::Index dim() const { return matrix_.rows(); }
  const SparseMatrix& matrix() const { return matrix_; }
  Vector apply(const Vector& x) const;
  Vector diagonal() const { return matrix_.diagonal(); }

 private:
  SparseMatrix matrix_;
};

struct SolveOptions {
  double tol = 1e-12;  ///< relative residual ‖Ax−b‖₂ ≤ tol·‖b‖₂
  int max_iters = 0;   ///< 0 selects 10·dim
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/**
 * Jacobi-preconditioned conjugate gradient.
 *
 * Throws SolverError carrying the final relative residual when the
 * iteration cap is reached.
 */
Vector spd_solve(const SparseSpd& a, const Vector& b,
                 const SolveOptions& options = {},
                 SolveStats* stats = nullptr);

/// Cached sparse LDLᵀ factorization; read-only and shareable after setup.
class SpdFactorization {
 public:
  SpdFactorization() = default;
  explicit SpdFactorization(const SparseSpd& a);

  Vector solve(const Vector& b) const;
  Eigen::Index dim() const { return dim_; }

 private:
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
  Eigen::Index dim_ = 0;
};

/// Real inner-product space ⟨u,v⟩ = uᵀGv defined by a Gram matrix G.
class InnerProductSpace {
 public:
  InnerProductSpace() = default;
  explicit InnerProductSpace(std::shared_ptr<const SparseSpd> gram);

  Eigen::Index dim() const { return gram_ ? gram_->dim() : 0; }
  const SparseSpd& gram() const { return *gram_; }
  const std::shared_ptr<const SparseSpd>& gram_ptr() const { return gram_; }

  double inner(const Vector& u, const Vector& v) const;
  double norm(const Vector& u) const;

 private:
  std::shared_ptr<const SparseSpd> gram_;
};

double inner(const InnerProductSpace& space, const Vector& u, const Vector& v);
double norm(const InnerProductSpace& space, const Vector& u);

/// True when every entry is finite.
bool all_finite(const Vector& v);

}  // namespace ddsplit
