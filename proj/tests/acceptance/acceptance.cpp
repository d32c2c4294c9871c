// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   explab_acceptance [--unit-tests <path to explab_unit_tests>]
//
// With --unit-tests the unit suite is run as part of the whole-suite timing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "explab/analysis.hpp"
#include "explab/generator.hpp"
#include "explab/protocol.hpp"
#include "explab/report.hpp"
#include "explab/session_service.hpp"
#include "explab/stats.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace explab;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(bool ok, const char* name, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

AgentConfig agent(AgentKind kind, std::uint64_t seed) {
    AgentConfig c;
    c.kind = kind;
    c.seed = seed;
    return c;
}

/// Single explore phase on `maze` with the given transition budget.
ExperimentPlan explore_only(const MazeSpec& maze, std::size_t budget) {
    ExperimentPlan plan;
    plan.condition = "exp1";
    plan.mazes.push_back(maze);
    plan.phases.push_back({"A", 0, PhaseRole::explore, false, {}, budget});
    return plan;
}

// Random action sequences through the avatar, scored by the metric and by the
// stateless oracle.
void oracle_equivalence() {
    const auto start = Clock::now();
    std::size_t mazes = 0;
    std::size_t walks = 0;
    std::size_t decisions = 0;
    std::size_t disagreements = 0;
    std::mt19937_64 rng(2024);
    for (std::uint64_t seed = 1; seed <= 120; ++seed) {
        const int w = 5 + 2 * static_cast<int>(seed % 3);
        const int h = 5 + 2 * static_cast<int>((seed / 3) % 3);
        const MazeSpec m = generate_maze(w, h, seed % 2 ? MazeStyle::perfect : MazeStyle::braided, seed);
        ++mazes;
        for (int k = 0; k < 10; ++k) {
            std::uniform_int_distribution<std::size_t> pick(0, kActions.size() - 1);
            std::uniform_int_distribution<std::size_t> length(20, 400);
            TrajectoryLog log;
            AvatarState s = start_state(m);
            log.push_back({0, std::nullopt, s});
            const std::size_t n = length(rng);
            for (std::size_t i = 0; i < n; ++i) {
                const Action a = kActions[pick(rng)];
                s = step(m, s, a);
                log.push_back({static_cast<std::int64_t>(i + 1) * 100, a, s});
            }
            const CellTrajectory traj = discretize(log, m);
            const auto got = dfs_consistency(traj, m);
            const auto expected = oracle::consistency(traj.cells, m);
            ++walks;
            decisions += expected.size();
            if (got.decisions.size() != expected.size()) {
                ++disagreements;
                continue;
            }
            for (std::size_t i = 0; i < expected.size(); ++i) {
                if (got.decisions[i].index != expected[i].index || got.decisions[i].consistent != expected[i].consistent) {
                    ++disagreements;
                }
            }
        }
    }
    const double secs = seconds_since(start);
    verdict(walks >= 1000 && mazes >= 100 && disagreements == 0 && secs < 60.0, "dfs_consistency_oracle_equivalence",
            fmt("%zu walks over %zu mazes (<=9x9), %zu decisions, %zu disagreements, %.2fs (limit 60s)", walks, mazes,
                decisions, disagreements, secs));
}

void dfs_self_consistency() {
    std::size_t mazes = 0;
    std::size_t ok = 0;
    double worst_fraction = 1.0;
    double worst_coverage = 1.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const int w = 5 + 2 * static_cast<int>(seed % 4);
        const int h = 5 + 2 * static_cast<int>((seed / 4) % 4);
        const MazeSpec m = generate_maze(w, h, seed % 2 ? MazeStyle::perfect : MazeStyle::braided, seed);
        const std::size_t bound = 2 * passable_edge_count(m);
        const SessionLog s = run_session(agent(AgentKind::dfs, seed), explore_only(m, bound));
        const PhaseLog& p = s.phases.front();
        const MazeSpec pm = phase_maze(s, p);
        const CellTrajectory traj = discretize(p.records, pm);
        const double fraction = dfs_consistency(traj, pm).fraction;
        const double cov = coverage(traj, pm);
        const std::size_t transitions = traj.cells.size() - 1;
        worst_fraction = std::min(worst_fraction, fraction);
        worst_coverage = std::min(worst_coverage, cov);
        ++mazes;
        if (fraction == 1.0 && cov == 1.0 && transitions <= bound) ++ok;
    }
    verdict(mazes == 100 && ok == mazes, "dfs_agent_self_consistency",
            fmt("%zu/%zu mazes with fraction 1.0 and coverage 1.0 within 2x|edges| (min fraction %.4f, min coverage "
                "%.4f)",
                ok, mazes, worst_fraction, worst_coverage));
}

void metric_pipeline() {
    std::vector<PhaseMetrics> rows;
    for (std::size_t i = 0; i < synthetic::three_band_coverages().size(); ++i) {
        const std::string tag = "s" + std::to_string(i + 1);
        const SessionLog s = synthetic::corridor_session(tag, "human:" + tag, synthetic::three_band_coverages()[i]);
        const auto m = analyze_session(s);
        rows.insert(rows.end(), m.begin(), m.end());
    }
    // Centroids as reported by the cohort summary.
    const auto cohort = cohort_summary(rows);
    std::vector<double> centroids;
    for (const char* name : {"low", "medium", "high"}) {
        for (const auto& r : cohort) {
            if (r.section == "cluster" && r.group == name && r.metric == "centroid") centroids.push_back(std::stod(r.value));
        }
    }
    const std::vector<double> target{0.22, 0.44, 0.71};
    bool centroids_ok = centroids.size() == 3;
    for (std::size_t i = 0; centroids_ok && i < 3; ++i) centroids_ok = std::abs(centroids[i] - target[i]) <= 0.02;
    centroids.resize(3, std::nan(""));
    const std::string cohort_text = cohort_csv(cohort);
    const std::string sessions_text = phase_metrics_csv(rows);
    bool columns_ok = true;
    std::string missing;
    for (const char* metric : {"coverage", "cells_crossed", "re_exploration", "steps_to_goal", "duration_ms"}) {
        const std::string needle = std::string(",") + metric + ",";
        if (cohort_text.find(needle) == std::string::npos || sessions_text.find(metric) == std::string::npos) {
            columns_ok = false;
            missing += std::string(" ") + metric;
        }
    }
    verdict(centroids_ok && columns_ok, "metric_pipeline_reproduction",
            fmt("explore coverages -> centroids {%.4f, %.4f, %.4f} (target {0.22, 0.44, 0.71} +/-0.02); cohort "
                "metrics %s%s",
                centroids[0], centroids[1], centroids[2],
                columns_ok ? "complete" : "missing:", missing.c_str()));
}

void exact_permutation() {
    const std::vector<double> zeros{0, 0, 0};
    const std::vector<double> ones{1, 1, 1};
    const auto split = permutation_test(zeros, ones);
    const auto same = permutation_test(zeros, zeros);
    verdict(split.exact && split.p_value == 0.1 && same.exact && same.p_value == 1.0 && split.assignments == 20,
            "exact_permutation_case",
            fmt("{0,0,0} vs {1,1,1}: p=%.17g over %llu assignments (exact=%d); identical groups: p=%.17g",
                split.p_value, static_cast<unsigned long long>(split.assignments), split.exact ? 1 : 0,
                same.p_value));
}

void qlearning_sanity() {
    const auto start = Clock::now();
    const MazeSpec m = parse_maze("######\n#S...#\n#....#\n#....#\n#...G#\n######\n", "open4x4");
    const int shortest = oracle::bfs(m, m.start_cell()).at(*m.goal());
    int hits = 0;
    std::string lengths;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Agent trained = train_qlearning(m, agent(AgentKind::qlearn, seed), 500, 200);
        const auto len = greedy_path_length(trained, m, 100);
        if (len && static_cast<int>(*len) == shortest) ++hits;
        lengths += len ? std::to_string(*len) + " " : "- ";
    }
    const double secs = seconds_since(start);
    verdict(hits >= 18 && secs < 30.0, "qlearning_sanity",
            fmt("%d/20 seeds reach the BFS length %d (need >=18), %.2fs (limit 30s); greedy lengths: %s", hits,
                shortest, secs, lengths.c_str()));
}

struct PhaseStat {
    std::vector<double> steps;  // DNF counted as budget + 1
    std::size_t dnf = 0;
};

void dense_vs_sparse() {
    constexpr std::uint64_t kSeeds = 30;
    const MazeSpec first = *builtin_maze("exp2a");
    const MazeSpec second = *builtin_maze("exp2b");
    std::map<std::string, std::map<std::string, PhaseStat>> stats;  // condition -> phase -> stat
    std::printf("  dense-vs-sparse, Q-learning, %llu seeds per condition (steps_to_goal; '-' = DNF)\n",
                static_cast<unsigned long long>(kSeeds));
    for (const char* condition : {"dense", "sparse"}) {
        for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
            const SessionLog s = run_experiment2(agent(AgentKind::qlearn, seed), condition, first, second);
            std::string line = fmt("  %-6s seed %2llu:", condition, static_cast<unsigned long long>(seed));
            for (const auto& m : analyze_session(s)) {
                if (m.role == PhaseRole::explore) {
                    line += fmt(" %s=explore", m.phase.c_str());
                    continue;
                }
                PhaseStat& st = stats[condition][m.phase];
                const PhaseLog& p = *std::find_if(s.phases.begin(), s.phases.end(),
                                                  [&](const PhaseLog& pl) { return pl.label == m.phase; });
                if (m.steps_to_goal) {
                    st.steps.push_back(static_cast<double>(*m.steps_to_goal));
                    line += fmt(" %s=%zu", m.phase.c_str(), *m.steps_to_goal);
                } else {
                    st.steps.push_back(static_cast<double>(p.budget + 1));
                    ++st.dnf;
                    line += fmt(" %s=-", m.phase.c_str());
                }
            }
            std::printf("%s\n", line.c_str());
        }
    }
    std::printf("  phase  median_dense  median_sparse  dnf_dense  dnf_sparse\n");
    for (const char* phase : {"1", "2", "3", "5", "6"}) {
        auto& d = stats["dense"][phase];
        auto& sp = stats["sparse"][phase];
        if (d.steps.empty() || sp.steps.empty()) continue;
        std::printf("  %-5s  %12.1f  %13.1f  %9zu  %10zu\n", phase, median(d.steps), median(sp.steps), d.dnf, sp.dnf);
    }
    const auto& d2 = stats["dense"]["2"];
    const auto& s2 = stats["sparse"]["2"];
    const auto& d3 = stats["dense"]["3"];
    const auto& s3 = stats["sparse"]["3"];
    const bool second_phase = median(d2.steps) <= median(s2.steps);
    const bool third_phase = median(d3.steps) >= median(s3.steps) || d3.dnf >= s3.dnf;
    verdict(second_phase && third_phase, "dense_vs_sparse_direction",
            fmt("%llu seeds; phase 2 median dense %.1f <= sparse %.1f: %s; phase 3 median dense %.1f vs sparse %.1f, "
                "DNF dense %zu vs sparse %zu: %s",
                static_cast<unsigned long long>(kSeeds), median(d2.steps), median(s2.steps),
                second_phase ? "yes" : "no", median(d3.steps), median(s3.steps), d3.dnf, s3.dnf,
                third_phase ? "yes" : "no"));
}

std::size_t check_replay(const SessionLog& s, std::string& first_bad) {
    std::size_t phases = 0;
    for (const auto& p : s.phases) {
        if (p.records.empty()) continue;
        const MazeSpec m = phase_maze(s, p);
        const TrajectoryLog replayed = replay(m, p.records);
        const CellTrajectory original = discretize(p.records, m);
        const CellTrajectory again = discretize(replayed, m);
        std::string lhs;
        std::string rhs;
        for (const Cell& c : original.cells) lhs += to_string(c);
        for (const Cell& c : again.cells) rhs += to_string(c);
        if (lhs != rhs || log_to_jsonl(replayed) != log_to_jsonl(p.records)) {
            if (first_bad.empty()) first_bad = s.session_id + "/" + p.label;
        }
        ++phases;
    }
    return phases;
}

void replay_determinism() {
    std::size_t sessions = 0;
    std::size_t phases = 0;
    std::string bad;
    for (auto kind : {AgentKind::dfs, AgentKind::random, AgentKind::qlearn, AgentKind::countbonus}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            phases += check_replay(run_experiment1(agent(kind, seed), *builtin_maze("exp1")), bad);
            for (const char* c : {"dense", "sparse"}) {
                phases += check_replay(
                    run_experiment2(agent(kind, seed), c, *builtin_maze("exp2a"), *builtin_maze("exp2b")), bad);
            }
            sessions += 3;
        }
    }
    // Human-style logs: the checked-in corpus and a live service session.
    const auto logs = load_log_dir(std::filesystem::path(EXPLAB_TEST_DATA_DIR) / "corpus");
    for (const auto& s : logs.sessions) {
        phases += check_replay(s, bad);
        ++sessions;
    }
    const auto dir = std::filesystem::temp_directory_path() / "explab-acceptance-replay";
    std::filesystem::remove_all(dir);
    {
        ServiceOptions o;
        o.data_dir = dir;
        o.id_seed = 1;
        SessionService svc(o);
        const std::string id = svc.create_session({2, "dense", "r1", std::nullopt}).session_id;
        std::mt19937_64 rng(9);
        std::uniform_int_distribution<std::size_t> pick(0, kActions.size() - 1);
        for (int i = 0; i < 400 && svc.get_session(id).status == SessionStatus::active; ++i) {
            svc.submit_action(id, to_string(kActions[pick(rng)]));
        }
        phases += check_replay(read_session_dir(dir / id), bad);
        ++sessions;
    }
    std::filesystem::remove_all(dir);
    verdict(bad.empty(), "replay_determinism",
            fmt("%zu sessions, %zu phases replayed; discretized trajectories and record lines byte-identical%s%s",
                sessions, phases, bad.empty() ? "" : "; first mismatch ", bad.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
    const auto start = Clock::now();
    std::string unit_tests;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--unit-tests") unit_tests = argv[i + 1];
    }

    oracle_equivalence();
    dfs_self_consistency();
    metric_pipeline();
    exact_permutation();
    qlearning_sanity();
    dense_vs_sparse();
    replay_determinism();

    double unit_secs = 0.0;
    bool unit_ok = true;
    if (!unit_tests.empty()) {
        const auto t = Clock::now();
        const std::string cmd = "\"" + unit_tests + "\" --gtest_brief=1 > /dev/null 2>&1";
        unit_ok = std::system(cmd.c_str()) == 0;
        unit_secs = seconds_since(t);
    }
    const double total = seconds_since(start);
    verdict(total < 300.0 && unit_ok, "suite_runtime",
            fmt("acceptance %.2fs%s, total %.2fs (limit 300s), no network, web UI not built",
                total - unit_secs,
                unit_tests.empty() ? " (unit suite not included)"
                                   : fmt(" + unit suite %.2fs (%s)", unit_secs, unit_ok ? "passed" : "FAILED").c_str(),
                total));

    std::printf("acceptance summary: %d criteria failed\n", failures);
    return failures ? 1 : 0;
}
