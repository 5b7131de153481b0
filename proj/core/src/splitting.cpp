#include "ddsplit/splitting.hpp"

#include <cmath>
#include <sstream>

#include "ddsplit/error.hpp"
#include "ddsplit/parallel.hpp"

namespace ddsplit {

namespace {

template <typename Op>
PrimalDualPoint combine(const PrimalDualPoint& a, const PrimalDualPoint& b, Op op) {
  if (a.primal.size() != b.primal.size() || a.dual.size() != b.dual.size()) {
    throw Error("PrimalDualPoint: block count mismatch");
  }
  PrimalDualPoint out;
  out.primal.reserve(a.primal.size());
  out.dual.reserve(a.dual.size());
  for (std::size_t i = 0; i < a.primal.size(); ++i) out.primal.push_back(op(a.primal[i], b.primal[i]));
  for (std::size_t k = 0; k < a.dual.size(); ++k) out.dual.push_back(op(a.dual[k], b.dual[k]));
  return out;
}

}  // namespace

PrimalDualPoint PrimalDualPoint::operator+(const PrimalDualPoint& o) const {
  return combine(*this, o, [](const Vector& a, const Vector& b) -> Vector { return a + b; });
}

PrimalDualPoint PrimalDualPoint::operator-(const PrimalDualPoint& o) const {
  return combine(*this, o, [](const Vector& a, const Vector& b) -> Vector { return a - b; });
}

PrimalDualPoint PrimalDualPoint::operator*(double s) const {
  PrimalDualPoint out = *this;
  for (auto& v : out.primal) v *= s;
  for (auto& v : out.dual) v *= s;
  return out;
}

PrimalDualPoint operator*(double s, const PrimalDualPoint& x) { return x * s; }

ProductSpace::ProductSpace(std::vector<InnerProductSpace> primal,
                           std::vector<InnerProductSpace> dual)
    : primal_(std::move(primal)), dual_(std::move(dual)) {}

void ProductSpace::check(const PrimalDualPoint& a) const {
  if (a.primal.size() != primal_.size() || a.dual.size() != dual_.size()) {
    throw Error("ProductSpace: block count mismatch");
  }
  for (std::size_t i = 0; i < primal_.size(); ++i) {
    if (a.primal[i].size() != primal_[i].dim()) throw Error("ProductSpace: primal block has wrong length");
  }
  for (std::size_t k = 0; k < dual_.size(); ++k) {
    if (a.dual[k].size() != dual_[k].dim()) throw Error("ProductSpace: dual block has wrong length");
  }
}

double ProductSpace::inner(const PrimalDualPoint& a, const PrimalDualPoint& b) const {
  check(a);
  check(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < primal_.size(); ++i) sum += primal_[i].inner(a.primal[i], b.primal[i]);
  for (std::size_t k = 0; k < dual_.size(); ++k) sum += dual_[k].inner(a.dual[k], b.dual[k]);
  return sum;
}

double ProductSpace::norm(const PrimalDualPoint& a) const {
  return std::sqrt(std::max(0.0, norm_sq(a)));
}

PrimalDualPoint ProductSpace::zeros() const {
  PrimalDualPoint z;
  for (const auto& s : primal_) z.primal.push_back(Vector::Zero(s.dim()));
  for (const auto& s : dual_) z.dual.push_back(Vector::Zero(s.dim()));
  return z;
}

Schedule::Schedule(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ConfigError("schedule must list at least one value");
}

double Schedule::at(int n) const {
  const auto k = static_cast<std::size_t>(std::max(n, 0));
  return k < values_.size() ? values_[k] : values_.back();
}

void Schedule::check_range(double lo, double hi, const std::string& name) const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const double v = values_[k];
    if (!(v >= lo && v <= hi)) {
      std::ostringstream msg;
      msg << name << "[" << k << "] = " << v << " lies outside [" << lo << ", " << hi << "]";
      throw ConfigError(msg.str());
    }
  }
}

void AlgorithmParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  gamma.check_range(epsilon, 1.0 / epsilon, "gamma");
  mu.check_range(epsilon, 1.0 / epsilon, "mu");
  lambda.check_range(epsilon, 1.0, "lambda");
  if (max_iters < 0) throw ConfigError("max_iters must be nonnegative");
  if (!(stop_tol >= 0.0)) throw ConfigError("stop_tol must be nonnegative");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (!(rho_guard >= 0.0)) throw ConfigError("rho_guard must be nonnegative");
}

ProductSpace ProblemOracles::space() const {
  std::vector<InnerProductSpace> primal;
  std::vector<InnerProductSpace> dual;
  for (const auto& lift : lifts) primal.push_back(lift.space());
  for (const auto& iface : partition->interfaces) dual.push_back(iface.space());
  return {std::move(primal), std::move(dual)};
}

void ProblemOracles::validate() const {
  if (!partition) throw ConfigError("oracles: missing partition");
  if (lifts.size() != partition->subdomains.size() ||
      energies.size() != partition->subdomains.size()) {
    throw ConfigError("oracles: need one lift and one energy per subdomain");
  }
  if (couplings.size() != partition->interfaces.size()) {
    throw ConfigError("oracles: need one coupling per interface");
  }
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (!energies[i] || energies[i]->dim() != lifts[i].grid().n_dofs()) {
      throw ConfigError("oracles: energy of subdomain " + std::to_string(i + 1) +
                        " does not match its grid");
    }
  }
  for (const auto& c : couplings) c.validate();
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::fixpoint: return "fixpoint";
    case Branch::case_a: return "case-A";
    case Branch::case_b: return "case-B";
    case Branch::case_c: return "case-C";
  }
  return "unknown";
}

double Sweep::residual() const { return std::sqrt(std::max(0.0, numerator)); }

Sweep sweep(const PrimalDualPoint& x, const ProblemOracles& oracles,
            const AlgorithmParams& params, int n) {
  const int m = oracles.n_subdomains();
  const int nk = oracles.n_interfaces();
  const double gamma = params.gamma.at(n);
  const double mu = params.mu.at(n);
  const Partition& part = *oracles.partition;

  Sweep sw;
  sw.p.resize(static_cast<std::size_t>(m));
  sw.l.resize(static_cast<std::size_t>(nk));
  sw.q.resize(static_cast<std::size_t>(nk));
  sw.step.primal.resize(static_cast<std::size_t>(m));
  sw.step.dual.resize(static_cast<std::size_t>(nk));

  parallel_for(m, params.threads, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    const HarmonicLift& lift = oracles.lifts[ui];
    const SubdomainEnergy& energy = *oracles.energies[ui];
    try {
      if (params.fused_update) {
        const Vector c = lift.gram().apply(x.primal[ui]) - gamma * lift.neumann_rhs(x.dual);
        sw.p[ui] = energy.prox_target(c, gamma);
      } else {
        const Vector v = x.primal[ui] - gamma * lift.adjoint(x.dual);
        sw.p[ui] = energy.prox(v, gamma);
      }
    } catch (const SolverError& e) {
      throw SolverError("subdomain " + std::to_string(i + 1) + ": " + e.what(), e.residual());
    }
  });

  parallel_for(nk, params.threads, [&](int k) {
    const auto uk = static_cast<std::size_t>(k);
    const Interface& iface = part.interfaces[uk];
    const auto li = static_cast<std::size_t>(iface.left);
    const auto ri = static_cast<std::size_t>(iface.right);
    sw.l[uk] = iface.left_trace.apply(x.primal[li]) - iface.right_trace.apply(x.primal[ri]);
    sw.q[uk] = prox_interface(oracles.couplings[uk], sw.l[uk] + mu * x.dual[uk], mu);
    sw.step.dual[uk] = sw.q[uk] - iface.left_trace.apply(sw.p[li]) +
                       iface.right_trace.apply(sw.p[ri]);
  });

  std::vector<Vector> gap(static_cast<std::size_t>(nk));
  for (int k = 0; k < nk; ++k) {
    gap[static_cast<std::size_t>(k)] = sw.l[static_cast<std::size_t>(k)] - sw.q[static_cast<std::size_t>(k)];
  }
  parallel_for(m, params.threads, [&](int i) {
    const auto ui = static_cast<std::size_t>(i);
    sw.step.primal[ui] = (x.primal[ui] - sw.p[ui]) / gamma +
                         oracles.lifts[ui].adjoint(gap) / mu;
  });

  double primal_sq = 0.0;
  double step_sq = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const InnerProductSpace& s = oracles.lifts[ui].space();
    const Vector d = x.primal[ui] - sw.p[ui];
    primal_sq += s.inner(d, d);
    step_sq += s.inner(sw.step.primal[ui], sw.step.primal[ui]);
  }
  double dual_sq = 0.0;
  for (int k = 0; k < nk; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const Vector& w = part.interfaces[uk].weights;
    dual_sq += gap[uk].dot(w.cwiseProduct(gap[uk]));
    step_sq += sw.step.dual[uk].dot(w.cwiseProduct(sw.step.dual[uk]));
  }
  sw.numerator = primal_sq / gamma + dual_sq / mu;
  sw.tau = step_sq;
  return sw;
}

HaugazeauResult haugazeau_project(const ProductSpace& space, const PrimalDualPoint& x0,
                                  const PrimalDualPoint& xn, const PrimalDualPoint& xh,
                                  double rho_guard) {
  const PrimalDualPoint a = x0 - xn;
  const PrimalDualPoint b = xn - xh;
  HaugazeauResult r;
  r.chi = space.inner(a, b);
  r.dist0_sq = space.norm_sq(a);
  r.halfstep_sq = space.norm_sq(b);
  r.rho = r.dist0_sq * r.halfstep_sq - r.chi * r.chi;
  const double chi = r.chi;
  const double alpha = r.dist0_sq;
  const double nu = r.halfstep_sq;
  const double rho = r.rho;

  if (rho <= rho_guard * alpha * nu) {
    if (chi < 0.0) {
      std::ostringstream msg;
      msg << "haugazeau_project: empty half-space intersection (chi = " << chi
          << ", rho = " << rho << ")";
      throw AlgorithmError(msg.str());
    }
    r.branch = Branch::case_a;
    r.point = xh;
  } else if (chi * nu >= rho) {
    r.branch = Branch::case_b;
    r.point = x0 - (1.0 + chi / nu) * b;
  } else {
    r.branch = Branch::case_c;
    r.point = xn + (nu / rho) * (chi * a - alpha * b);
  }
  return r;
}

namespace {

// A step at roundoff level means the state already solves the KT system.
bool at_fixpoint(const Sweep& sw, const ProductSpace& space, const PrimalDualPoint& state) {
  return std::sqrt(sw.tau) <= 1e-14 * (1.0 + space.norm(state));
}

StepResult finish_step(const Sweep& sw, const PrimalDualPoint& state,
                       const PrimalDualPoint& x0, const ProductSpace& space,
                       const AlgorithmParams& params, int n) {
  StepResult out;
  IterationReport& rep = out.report;
  rep.n = n;
  rep.gamma = params.gamma.at(n);
  rep.mu = params.mu.at(n);
  rep.lambda = params.lambda.at(n);
  rep.tau = sw.tau;
  rep.kt_residual = sw.residual();
  if (at_fixpoint(sw, space, state)) {
    rep.branch = Branch::fixpoint;
    rep.dist0_sq = space.norm_sq(x0 - state);
    out.half = state;
    out.next = state;
    return out;
  }
  rep.theta = rep.lambda * sw.numerator / sw.tau;
  out.half = state - rep.theta * sw.step;
  HaugazeauResult h = haugazeau_project(space, x0, state, out.half, params.rho_guard);
  rep.branch = h.branch;
  rep.chi = h.chi;
  rep.dist0_sq = h.dist0_sq;
  rep.halfstep_sq = h.halfstep_sq;
  rep.rho = h.rho;
  out.next = std::move(h.point);
  return out;
}

}  // namespace

StepResult iterate_once(const PrimalDualPoint& state, const PrimalDualPoint& x0,
                        const ProblemOracles& oracles, const AlgorithmParams& params,
                        int n) {
  return finish_step(sweep(state, oracles, params, n), state, x0, oracles.space(),
                     params, n);
}

double kt_residual(const PrimalDualPoint& state, const ProblemOracles& oracles,
                   const AlgorithmParams& params, int n) {
  return sweep(state, oracles, params, n).residual();
}

RunResult run(const PrimalDualPoint& x0, const ProblemOracles& oracles,
              const AlgorithmParams& params, const IterationCallback& callback) {
  params.validate();
  oracles.validate();
  const ProductSpace space = oracles.space();
  space.check(x0);

  RunResult result;
  result.point = x0;
  for (int n = 0;; ++n) {
    const Sweep sw = sweep(result.point, oracles, params, n);
    const double res = sw.residual();
    if (n == 0) result.initial_residual = res;
    result.final_residual = res;
    const double threshold =
        params.relative_stop ? params.stop_tol * result.initial_residual : params.stop_tol;
    if (res <= threshold || at_fixpoint(sw, space, result.point)) {
      result.converged = true;
      break;
    }
    if (n >= params.max_iters) break;

    StepResult step = finish_step(sw, result.point, x0, space, params, n);
    if (callback) callback(step.report, result.point, step.half, step.next);
    result.reports.push_back(step.report);
    result.point = std::move(step.next);
    result.iterations = n + 1;
  }
  return result;
}

}  // namespace ddsplit
