#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include <ddsplit/error.hpp>
#include <ddsplit/oracle.hpp>
#include <ddsplit/problems.hpp>

using namespace ddsplit;

namespace {

PrimalDualPoint flat(const Vector& v) { return {{v}, {}}; }

ProductSpace euclidean(int dim) {
  return ProductSpace(
      {InnerProductSpace(std::make_shared<const SparseSpd>(SparseSpd::identity(dim)))}, {});
}

Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }

ProblemSpec halves_spec(int nodes_each, Vector source) {
  const std::vector<double> cuts{0.5};
  const std::vector<int> nodes{nodes_each, nodes_each};
  ProblemSpec s;
  s.partition = std::make_shared<const Partition>(build_partition_1d(1.0, cuts, nodes));
  s.kind = ProblemKind::poisson;
  s.source = std::move(source);
  return s;
}

}  // namespace

TEST_CASE("Haugazeau projection examples") {
  const ProductSpace e = euclidean(2);
  const HaugazeauResult h =
      haugazeau_project(e, flat(vec2(0, 0)), flat(vec2(1, 0)), flat(vec2(1, -1)));
  CHECK((h.point.primal[0] - vec2(1, -1)).norm() < 1e-15);

  const Vector a = vec2(0.3, -2.0);
  const HaugazeauResult same = haugazeau_project(e, flat(a), flat(a), flat(a));
  CHECK(same.point.primal[0] == a);

  // {z₁ ≥ 1} ∩ {z₁ ≤ 0.5} is empty.
  CHECK_THROWS_AS(haugazeau_project(e, flat(vec2(0, 0)), flat(vec2(1, 0)), flat(vec2(0.5, 0))),
                  AlgorithmError);
}

TEST_CASE("Haugazeau projection agrees with the QP oracle in a weighted metric") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  const Vector w = Vector::LinSpaced(6, 0.5, 3.0);
  const auto gram = std::make_shared<const SparseSpd>(SparseSpd::diagonal(w));
  const ProductSpace space({InnerProductSpace(gram)}, {});
  for (int t = 0; t < 50; ++t) {
    Vector x0(6), xn(6), xh(6);
    for (int k = 0; k < 6; ++k) {
      x0[k] = normal(rng);
      xn[k] = normal(rng);
      xh[k] = normal(rng);
    }
    const HaugazeauResult h = haugazeau_project(space, flat(x0), flat(xn), flat(xh));
    const oracle::QpProjection qp =
        oracle::qp_project_two_halfspaces(x0, {xn, x0 - xn}, {xh, xn - xh}, gram.get());
    CHECK((h.point.primal[0] - qp.x).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("one step matches a dense scalar transliteration") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int nodes = 6;  // per subdomain: five cells of width 0.1
  Vector f(2 * nodes - 1);
  for (auto& v : f) v = unif(rng);
  ProblemSpec spec = halves_spec(nodes, f);
  spec.params.gamma = 1.7;
  spec.params.mu = 0.6;
  spec.params.lambda = 0.8;
  const Problem prob = build(spec);
  const Partition& part = *spec.partition;
  REQUIRE(part.interfaces[0].left_trace.rows()[0] == 4);
  REQUIRE(part.interfaces[0].right_trace.rows()[0] == 0);

  // Dense data: subdomain 1 has dofs at x = .1 … .5, subdomain 2 at x = .5 … .9.
  const double h = 0.1;
  const int n = 5;
  Eigen::MatrixXd k1 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    k1(i, i) = 2.0 / h;
    if (i + 1 < n) k1(i, i + 1) = k1(i + 1, i) = -1.0 / h;
  }
  Eigen::MatrixXd k2 = k1;
  k1(n - 1, n - 1) = 1.0 / h;
  k2(0, 0) = 1.0 / h;
  auto load = [&](int offset, bool interface_last) {
    Vector b(n);
    for (int i = 0; i < n; ++i) {
      const int g = offset + i;  // global node
      const bool at_interface = interface_last ? i == n - 1 : i == 0;
      if (at_interface && interface_last) {
        b[i] = h / 6.0 * (2.0 * f[g] + f[g - 1]);
      } else if (at_interface) {
        b[i] = h / 6.0 * (2.0 * f[g] + f[g + 1]);
      } else {
        b[i] = h / 6.0 * (f[g - 1] + 4.0 * f[g] + f[g + 1]);
      }
    }
    return b;
  };
  const Vector b1 = load(1, true);
  const Vector b2 = load(5, false);
  const double gamma = 1.7, mu = 0.6, lambda = 0.8;

  struct State {
    Vector u1, u2;
    double g;
  };
  auto ip = [&](const State& a, const State& b) {
    return a.u1.dot(k1 * b.u1) + a.u2.dot(k2 * b.u2) + a.g * b.g;
  };
  auto axpy = [](const State& a, double s, const State& b) {
    return State{a.u1 + s * b.u1, a.u2 + s * b.u2, a.g + s * b.g};
  };
  auto reference_step = [&](const State& x, const State& x0) {
    const Vector e_last = Vector::Unit(n, n - 1);
    const Vector e_first = Vector::Unit(n, 0);
    const Vector adj1 = k1.ldlt().solve(e_last);     // Λ*₁ for unit dual
    const Vector adj2 = -k2.ldlt().solve(e_first);   // Λ*₂ for unit dual
    const Vector p1 = ((gamma + 1.0) * k1).ldlt().solve(gamma * b1 + k1 * (x.u1 - gamma * x.g * adj1));
    const Vector p2 = ((gamma + 1.0) * k2).ldlt().solve(gamma * b2 + k2 * (x.u2 - gamma * x.g * adj2));
    const double l = x.u1[n - 1] - x.u2[0];
    const double q = 0.0;
    const double t = q - p1[n - 1] + p2[0];
    const Vector s1 = (x.u1 - p1) / gamma + adj1 * (l - q) / mu;
    const Vector s2 = (x.u2 - p2) / gamma + adj2 * (l - q) / mu;
    const double num = (x.u1 - p1).dot(k1 * (x.u1 - p1)) / gamma +
                       (x.u2 - p2).dot(k2 * (x.u2 - p2)) / gamma + (l - q) * (l - q) / mu;
    const State step{s1, s2, t};
    const double theta = lambda * num / ip(step, step);
    const State half = axpy(x, -theta, step);
    const State d0 = axpy(x0, -1.0, x);
    const State dh = axpy(x, -1.0, half);
    const double chi = ip(d0, dh);
    const double alpha = ip(d0, d0);
    const double nu = ip(dh, dh);
    const double rho = alpha * nu - chi * chi;
    if (rho <= 1e-14 * alpha * nu) return half;
    if (chi * nu >= rho) return axpy(x0, -(1.0 + chi / nu), dh);
    return axpy(axpy(x, nu / rho * chi, d0), -nu / rho * alpha, dh);
  };
  auto pack = [](const State& s) {
    return PrimalDualPoint{{s.u1, s.u2}, {Vector::Constant(1, s.g)}};
  };

  const State zero{Vector::Zero(n), Vector::Zero(n), 0.0};
  const State one = reference_step(zero, zero);
  const StepResult first = iterate_once(prob.x0, prob.x0, prob.oracles, spec.params, 0);
  const ProductSpace space = prob.oracles.space();
  CHECK(space.norm(first.next - pack(one)) <= 1e-12 * space.norm(pack(one)));

  // A second step from a generic state exercises the two-half-space branches.
  const State x{Vector::Random(n), Vector::Random(n), 0.4};
  const State two = reference_step(x, zero);
  const StepResult second = iterate_once(pack(x), prob.x0, prob.oracles, spec.params, 1);
  CHECK(second.report.branch != Branch::fixpoint);
  CHECK(space.norm(second.next - pack(two)) <= 1e-12 * space.norm(pack(two)));
}

TEST_CASE("exact solution with zero dual is a fixed point") {
  ProblemSpec spec = halves_spec(17, Vector::Ones(33));
  const Problem prob = build(spec);
  const Partition& part = *spec.partition;
  const Vector u = oracle::monolithic_poisson(part.global, spec.source);
  const PrimalDualPoint z{oracle::restrict_to_subdomains(part, u), {Vector::Zero(1)}};
  const StepResult s = iterate_once(z, prob.x0, prob.oracles, spec.params, 0);
  CHECK(s.report.branch == Branch::fixpoint);
  CHECK(kt_residual(z, prob.oracles, spec.params, 0) <= 1e-12);

  const RunResult r = run(z, prob.oracles, spec.params);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
}

TEST_CASE("run is Fejér-anchored and converges") {
  ProblemSpec spec = halves_spec(9, Vector::Ones(17));
  spec.params.gamma = 1.0;
  spec.params.mu = 10.0;
  const Problem prob = build(spec);
  const ProductSpace space = prob.oracles.space();
  double last = 0.0;
  bool monotone = true;
  const RunResult r = run(prob.x0, prob.oracles, spec.params,
                          [&](const IterationReport&, const PrimalDualPoint&,
                              const PrimalDualPoint&, const PrimalDualPoint& next) {
                            const double d = space.norm(next - prob.x0);
                            monotone = monotone && d >= last - 1e-12;
                            last = d;
                          });
  CHECK(monotone);
  CHECK(r.converged);
  CHECK(r.final_residual <= 1e-8 * r.initial_residual);
  CHECK(r.reports.size() == static_cast<std::size_t>(r.iterations));
}

TEST_CASE("parameter schedules and validation") {
  const Schedule s(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(s.at(0) == 1.0);
  CHECK(s.at(2) == 3.0);
  CHECK(s.at(50) == 3.0);
  CHECK_THROWS_AS(Schedule(std::vector<double>{}), ConfigError);

  AlgorithmParams p;
  CHECK_NOTHROW(p.validate());
  p.lambda = 1.5;  // outside [ε, 1]
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.gamma = Schedule(std::vector<double>{1.0, 1000.0});
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.epsilon = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.epsilon = 0.6;
  p.gamma = 2.0;  // outside [ε, 1/ε]
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("branch names") {
  CHECK(to_string(Branch::fixpoint) == "fixpoint");
  CHECK(to_string(Branch::case_a) == "case-A");
  CHECK(to_string(Branch::case_b) == "case-B");
  CHECK(to_string(Branch::case_c) == "case-C");
}
