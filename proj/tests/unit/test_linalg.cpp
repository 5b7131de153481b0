#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include <ddsplit/error.hpp>
#include <ddsplit/linalg.hpp>
#include <ddsplit/mesh.hpp>

using namespace ddsplit;

TEST_CASE("spd_solve on small systems") {
  const SparseSpd a = SparseSpd::diagonal(Vector::Constant(1, 2.0));
  CHECK(spd_solve(a, Vector::Constant(1, 4.0))[0] == doctest::Approx(2.0).epsilon(1e-12));

  const Vector b = Vector::LinSpaced(3, 1.0, 3.0);
  CHECK((spd_solve(SparseSpd::identity(3), b) - b).norm() < 1e-14);
}

TEST_CASE("spd_solve matches a dense Cholesky factorization") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd r(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) r(i, j) = normal(rng);
  const Eigen::MatrixXd dense = r * r.transpose() + 5.0 * Eigen::MatrixXd::Identity(5, 5);
  Vector b(5);
  for (auto& v : b) v = normal(rng);
  const SparseSpd a(dense.sparseView());
  const Vector expect = dense.llt().solve(b);
  CHECK((spd_solve(a, b) - expect).norm() <= 1e-10 * expect.norm());
  CHECK((SpdFactorization(a).solve(b) - expect).norm() <= 1e-10 * expect.norm());
}

TEST_CASE("spd_solve reports non-convergence with its residual") {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Identity(40, 40) * 2.0;
  for (int k = 0; k + 1 < 40; ++k) dense(k, k + 1) = dense(k + 1, k) = -1.0;
  const SparseSpd a(dense.sparseView());
  SolveOptions opt;
  opt.max_iters = 2;
  try {
    spd_solve(a, Vector::Ones(40), opt);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("SparseSpd rejects asymmetric and non-finite input") {
  SparseMatrix m(2, 2);
  m.insert(0, 1) = 1.0;
  m.insert(0, 0) = 1.0;
  m.insert(1, 1) = 1.0;
  CHECK_THROWS_AS(SparseSpd{m}, Error);
  CHECK_THROWS_AS(spd_solve(SparseSpd::identity(2), Vector::Constant(2, NAN)), Error);
}

TEST_CASE("inner product and norm") {
  const InnerProductSpace e(std::make_shared<const SparseSpd>(SparseSpd::identity(2)));
  CHECK(e.inner(Vector::Unit(2, 0), Vector::Unit(2, 1)) == 0.0);
  CHECK(e.norm(Vector::Zero(2)) == 0.0);
  CHECK(e.norm((Vector(2) << 3.0, 4.0).finished()) == doctest::Approx(5.0));
}

TEST_CASE("energy inner product of the identity function on (0,1)") {
  // Two elements, Dirichlet at 0 only: u = x has unit Dirichlet energy.
  Grid g;
  g.nodes = {{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
  g.cells = {0, 1, 1, 2};
  g.dof_of_node = {-1, 0, 1};
  g.node_of_dof = {1, 2};
  const InnerProductSpace e(std::make_shared<const SparseSpd>(assemble_stiffness(g)));
  const Vector u = (Vector(2) << 0.5, 1.0).finished();
  CHECK(e.inner(u, u) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 20; ++t) {
    const Vector v = (Vector(2) << normal(rng), normal(rng)).finished();
    CHECK(e.inner(v, v) >= 0.0);
  }
}
