#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "explab/agents.hpp"
#include "explab/avatar.hpp"
#include "explab/maze.hpp"
#include "explab/session_log.hpp"

namespace explab {

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RewardSchedule {
    double goal = 1.0;
    double apple = 0.1;
    double step_cost = -0.001;
};

/// Simulated time per primitive action in agent sessions.
inline constexpr std::int64_t kAgentActionMs = 100;
/// Budget multiplier applied to the reachable-cell count when none is given.
inline constexpr std::size_t kDefaultBudgetFactor = 10;

struct PhasePlan {
    std::string label;
    std::size_t maze_index = 0;
    PhaseRole role = PhaseRole::explore;
    bool apples_active = false;
    std::set<Edge> blocked;
    std::size_t budget = 0;
};

struct ExperimentPlan {
    int experiment = 1;
    /// "exp1", "dense" or "sparse".
    std::string condition;
    /// Open layouts (goal and apples present, no blocked edges).
    std::vector<MazeSpec> mazes;
    std::vector<PhasePlan> phases;
    RewardSchedule rewards;

    const MazeSpec& maze_for(const PhasePlan& phase) const { return mazes.at(phase.maze_index); }
    /// The maze in force during `phase`.
    MazeSpec phase_maze(const PhasePlan& phase) const;
};

/// Edits that seal the main route: among the edges of the start-to-goal
/// shortest path whose removal keeps the goal reachable, the one forcing the
/// longest detour (earliest on the path on ties). Throws ProtocolError when
/// every path edge is a bridge.
std::set<Edge> default_block_edits(const MazeSpec& open_maze);

/// `B`-cell edges carried by a parsed maze when present, else default_block_edits.
std::set<Edge> block_edits_for(const MazeSpec& maze);

/// Phases A (explore, goal hidden), B (goal), C (goal, blocked) on one layout.
ExperimentPlan make_experiment1_plan(const MazeSpec& maze, std::optional<std::size_t> budget = std::nullopt);

/// Three phases on each maze (labels 1-3 then 4-6). Dense: apple trail plus
/// goal in the first phase of each maze; sparse: goal hidden in that phase.
/// The second phase has the goal without apples, the third is blocked.
ExperimentPlan make_experiment2_plan(std::string_view condition, const MazeSpec& first, const MazeSpec& second,
                                     std::optional<std::size_t> budget = std::nullopt);

/// Throws ProtocolError unless the apples form a path from start to goal.
void validate_apple_trail(const MazeSpec& maze);

/// Applies primitive actions within one phase: logs poses, consumes apples,
/// accrues rewards, and ends the phase on goal entry, full exploration
/// (explore phases), or budget exhaustion. Used by agent runs and live
/// human sessions alike.
class PhaseEngine {
public:
    struct StepResult {
        bool moved_cell = false;
        double reward = 0.0;
        std::optional<Cell> apple;
        bool finished = false;
    };

    PhaseEngine(MazeSpec maze, PhasePlan plan, RewardSchedule rewards, std::int64_t start_ms);

    StepResult apply(Action action, std::int64_t t_ms);
    /// Ends the phase early (agent "done").
    void finish(PhaseOutcome outcome);

    const MazeSpec& maze() const { return maze_; }
    const PhasePlan& plan() const { return plan_; }
    const AvatarState& state() const { return state_; }
    const PhaseLog& log() const { return log_; }
    PhaseLog& log() { return log_; }
    bool finished() const { return log_.outcome != PhaseOutcome::incomplete; }
    std::size_t transitions() const { return transitions_; }
    Observation observation() const { return observe(maze_, state_); }

private:
    void check_end();

    MazeSpec maze_;
    PhasePlan plan_;
    RewardSchedule rewards_;
    AvatarState state_;
    PhaseLog log_;
    std::set<Cell> reachable_;
    std::set<Cell> visited_;
    std::set<Cell> eaten_;
    std::size_t transitions_ = 0;
};

/// Runs every phase of `plan` with a fresh agent.
SessionLog run_session(const AgentConfig& config, const ExperimentPlan& plan, std::string session_id = {});

SessionLog run_experiment1(const AgentConfig& config, const MazeSpec& maze,
                           std::optional<std::size_t> budget = std::nullopt, std::string session_id = {});
SessionLog run_experiment2(const AgentConfig& config, std::string_view condition, const MazeSpec& first,
                           const MazeSpec& second, std::optional<std::size_t> budget = std::nullopt,
                           std::string session_id = {});

std::string default_session_id(const AgentConfig& config, const ExperimentPlan& plan);

/// Fresh agent trained for `episodes` start-to-goal episodes with online
/// one-step updates; each episode stops at the goal or after `max_steps` moves.
Agent train_qlearning(const MazeSpec& maze, const AgentConfig& config, int episodes, std::size_t max_steps,
                      const RewardSchedule& rewards = {});

/// Cell transitions taken by the greedy (epsilon = 0) policy to reach the goal,
/// or nullopt if it does not arrive within `max_steps`.
std::optional<std::size_t> greedy_path_length(const Agent& agent, const MazeSpec& maze, std::size_t max_steps);

// ---------------------------------------------------------------------------
// Batch

/// One manifest line: whitespace-separated key=value pairs.
struct ManifestEntry {
    std::size_t line = 0;
    std::string session_id;
    AgentConfig agent;
    int experiment = 1;
    std::string condition;
    /// Built-in maze ids or file paths.
    std::vector<std::string> mazes;
    std::optional<std::size_t> budget;
    /// Parse problem for this line; the entry is reported, not run.
    std::string error;
};

/// Parses a manifest; blank lines and `#` comments are skipped. Malformed
/// lines produce entries with `error` set.
std::vector<ManifestEntry> parse_manifest(std::string_view text);

/// Loads a built-in maze by id, else parses the file at `ref`.
MazeSpec load_maze_ref(std::string_view ref);

struct BatchRow {
    std::string session_id;
    bool ok = false;
    std::string message;
    std::filesystem::path path;
};

/// Runs each entry into `out_dir/<session_id>/` across `jobs` workers and
/// writes `out_dir/batch.csv`. Failures are isolated to their row.
std::vector<BatchRow> batch_run(const std::vector<ManifestEntry>& manifest, const std::filesystem::path& out_dir,
                                unsigned jobs = 1);

}  // namespace explab
