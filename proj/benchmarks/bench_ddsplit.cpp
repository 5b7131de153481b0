#include <benchmark/benchmark.h>

#include <random>

#include <ddsplit/problems.hpp>

using namespace ddsplit;

namespace {

ProblemSpec line_spec(ProblemKind kind, int nodes) {
  const std::vector<double> cuts{0.35, 0.7};
  PartitionOptions opt;
  opt.allow_floating = true;
  ProblemSpec s;
  s.partition = std::make_shared<const Partition>(
      build_partition_1d(1.0, cuts, distribute_nodes_1d(1.0, cuts, nodes), opt));
  s.kind = kind;
  s.source = Vector::Ones(s.partition->global.n_nodes());
  return s;
}

ProblemSpec strip_spec(int n) {
  const std::vector<double> cuts{0.5};
  const std::vector<StripResolution> res{{n / 2, n}, {n / 2, n}};
  ProblemSpec s;
  s.partition = std::make_shared<const Partition>(build_partition_2d_strips(1.0, 1.0, cuts, res));
  s.kind = ProblemKind::poisson;
  s.source = Vector::Ones(s.partition->global.n_nodes());
  return s;
}

void run_steps(benchmark::State& state, const ProblemSpec& spec) {
  const Problem p = build(spec);
  PrimalDualPoint x = p.x0;
  int n = 0;
  for (auto _ : state) {
    StepResult s = iterate_once(x, p.x0, p.oracles, spec.params, n++);
    x = std::move(s.next);
    benchmark::DoNotOptimize(x);
  }
}

}  // namespace

static void BM_Step1D(benchmark::State& state) {
  run_steps(state, line_spec(ProblemKind::poisson, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Step1D)->Arg(128)->Arg(1024)->Arg(8192);

static void BM_Step2D(benchmark::State& state) {
  run_steps(state, strip_spec(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Step2D)->Arg(16)->Arg(32)->Arg(64);

static void BM_Step2DThreads(benchmark::State& state) {
  ProblemSpec s = strip_spec(64);
  s.params.threads = static_cast<int>(state.range(0));
  run_steps(state, s);
}
BENCHMARK(BM_Step2DThreads)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

static void BM_StepObstacle(benchmark::State& state) {
  ProblemSpec s = line_spec(ProblemKind::obstacle, 128);
  s.source = Vector::Constant(128, -8.0);
  s.obstacle = Vector::Constant(128, -0.1);
  run_steps(state, s);
}
BENCHMARK(BM_StepObstacle);

static void BM_StepPLaplacian(benchmark::State& state) {
  ProblemSpec s = line_spec(ProblemKind::plaplacian, 256);
  s.p = static_cast<double>(state.range(0)) / 2.0;
  run_steps(state, s);
}
BENCHMARK(BM_StepPLaplacian)->Arg(3)->Arg(6);

static void BM_Haugazeau(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  auto random_point = [&] {
    Vector v(dim);
    for (auto& x : v) x = normal(rng);
    return PrimalDualPoint{{v}, {}};
  };
  const ProductSpace space(
      {InnerProductSpace(std::make_shared<const SparseSpd>(SparseSpd::identity(dim)))}, {});
  const PrimalDualPoint x0 = random_point();
  const PrimalDualPoint xn = random_point();
  const PrimalDualPoint xh = random_point();
  for (auto _ : state) benchmark::DoNotOptimize(haugazeau_project(space, x0, xn, xh));
}
BENCHMARK(BM_Haugazeau)->Arg(10)->Arg(10000);

static void BM_SolvePoisson1D(benchmark::State& state) {
  ProblemSpec s = line_spec(ProblemKind::poisson, 128);
  s.params.gamma = 5.0;
  s.params.max_iters = 5000;
  const Problem p = build(s);
  for (auto _ : state) benchmark::DoNotOptimize(run(p.x0, p.oracles, s.params));
}
BENCHMARK(BM_SolvePoisson1D)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
