#include "ddsplit/linalg.hpp"

#include <cmath>
#include <sstream>

#include "ddsplit/error.hpp"

namespace ddsplit {

namespace {

void require_symmetric(const SparseMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error("SparseSpd: matrix is not square");
  }
  const SparseMatrix diff = SparseMatrix(m.transpose()) - m;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      if (it.value() != 0.0) {
        std::ostringstream msg;
        msg << "SparseSpd: matrix not symmetric at (" << it.row() << ", "
            << it.col() << ")";
        throw Error(msg.str());
      }
    }
  }
}

}  // namespace

SparseSpd::SparseSpd(SparseMatrix matrix) : matrix_(std::move(matrix)) {
  matrix_.makeCompressed();
  require_symmetric(matrix_);
  for (int k = 0; k < matrix_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) {
      if (!std::isfinite(it.value())) {
        throw Error("SparseSpd: non-finite entry");
      }
    }
  }
}

SparseSpd SparseSpd::from_triplets(Eigen::Index dim,
                                   const std::vector<Triplet>& entries) {
  SparseMatrix m(dim, dim);
  m.setFromTriplets(entries.begin(), entries.end());
  return SparseSpd(std::move(m));
}

SparseSpd SparseSpd::identity(Eigen::Index dim) {
  SparseMatrix m(dim, dim);
  m.setIdentity();
  return SparseSpd(std::move(m));
}

SparseSpd SparseSpd::diagonal(const Vector& d) {
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(d.size()));
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    entries.emplace_back(k, k, d[k]);
  }
  return from_triplets(d.size(), entries);
}

Vector SparseSpd::apply(const Vector& x) const {
  if (x.size() != dim()) {
    throw Error("SparseSpd::apply: dimension mismatch");
  }
  return matrix_ * x;
}

Vector spd_solve(const SparseSpd& a, const Vector& b,
                 const SolveOptions& options, SolveStats* stats) {
  const Eigen::Index n = a.dim();
  if (b.size() != n) {
    throw Error("spd_solve: dimension mismatch");
  }
  if (!all_finite(b)) {
    throw Error("spd_solve: non-finite right-hand side");
  }
  const int cap = options.max_iters > 0 ? options.max_iters
                                        : static_cast<int>(10 * std::max<Eigen::Index>(n, 1));
  Vector x = Vector::Zero(n);
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }

  const Vector inv_diag = a.diagonal().cwiseInverse();
  Vector r = b;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  double rel = 1.0;
  for (int it = 1; it <= cap; ++it) {
    const Vector ap = a.matrix() * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      throw SolverError("spd_solve: matrix not positive definite", rel);
    }
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    rel = r.norm() / b_norm;
    if (rel <= options.tol) {
      // Recompute the true residual; the recursive one drifts.
      rel = (b - a.matrix() * x).norm() / b_norm;
      if (rel <= options.tol) {
        if (stats) *stats = {it, rel};
        return x;
      }
      r = b - a.matrix() * x;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  std::ostringstream msg;
  msg << "spd_solve: no convergence after " << cap
      << " iterations (relative residual " << rel << ")";
  throw SolverError(msg.str(), rel);
}

SpdFactorization::SpdFactorization(const SparseSpd& a) : dim_(a.dim()) {
  auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
  ldlt->compute(a.matrix());
  if (ldlt->info() != Eigen::Success) {
    throw SolverError("SpdFactorization: factorization failed", 0.0);
  }
  const Vector d = ldlt->vectorD();
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (!(d[k] > 0.0)) {
      throw SolverError("SpdFactorization: matrix not positive definite", d[k]);
    }
  }
  ldlt_ = std::move(ldlt);
}

Vector SpdFactorization::solve(const Vector& b) const {
  if (b.size() != dim_) {
    throw Error("SpdFactorization::solve: dimension mismatch");
  }
  if (dim_ == 0) return Vector();
  return ldlt_->solve(b);
}

InnerProductSpace::InnerProductSpace(std::shared_ptr<const SparseSpd> gram)
    : gram_(std::move(gram)) {
  if (!gram_) throw Error("InnerProductSpace: null Gram matrix");
}

double InnerProductSpace::inner(const Vector& u, const Vector& v) const {
  if (u.size() != dim() || v.size() != dim()) {
    throw Error("inner: dimension mismatch");
  }
  return u.dot(gram_->matrix() * v);
}

double InnerProductSpace::norm(const Vector& u) const {
  return std::sqrt(std::max(0.0, inner(u, u)));
}

double inner(const InnerProductSpace& space, const Vector& u, const Vector& v) {
  return space.inner(u, v);
}

double norm(const InnerProductSpace& space, const Vector& u) {
  return space.norm(u);
}

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace ddsplit
