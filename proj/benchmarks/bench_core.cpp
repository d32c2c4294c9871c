#include <benchmark/benchmark.h>

#include <random>

#include "explab/analysis.hpp"
#include "explab/generator.hpp"
#include "explab/protocol.hpp"
#include "explab/stats.hpp"

using namespace explab;

namespace {

void BM_Step(benchmark::State& state) {
    const MazeSpec m = generate_maze(21, 21, MazeStyle::braided, 7);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> pick(0, kActions.size() - 1);
    AvatarState s = start_state(m);
    for (auto _ : state) {
        s = step(m, s, kActions[pick(rng)]);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_Step);

void BM_DfsConsistency(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const MazeSpec m = generate_maze(side, side, MazeStyle::braided, 3);
    AgentConfig c;
    c.kind = AgentKind::random;
    c.seed = 5;
    ExperimentPlan plan;
    plan.condition = "exp1";
    plan.mazes.push_back(m);
    plan.phases.push_back({"A", 0, PhaseRole::explore, false, {}, 20 * reachable_cells(m).size()});
    const SessionLog s = run_session(c, plan);
    const CellTrajectory traj = discretize(s.phases[0].records, m.with_goal(std::nullopt));
    for (auto _ : state) benchmark::DoNotOptimize(dfs_consistency(traj, m));
    state.counters["cells"] = static_cast<double>(traj.cells.size());
}
BENCHMARK(BM_DfsConsistency)->Arg(9)->Arg(21)->Arg(41);

void BM_KMeans(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> values(static_cast<std::size_t>(state.range(0)));
    for (double& v : values) v = unit(rng);
    for (auto _ : state) benchmark::DoNotOptimize(cluster_explorers(values, 3, 1));
}
BENCHMARK(BM_KMeans)->Arg(9)->Arg(60)->Arg(1000);

void BM_QLearningSession(benchmark::State& state) {
    AgentConfig c;
    c.kind = AgentKind::qlearn;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_experiment2(c, "dense", *builtin_maze("exp2a"), *builtin_maze("exp2b")));
        ++c.seed;
    }
}
BENCHMARK(BM_QLearningSession);

}  // namespace

BENCHMARK_MAIN();
