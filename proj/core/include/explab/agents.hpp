#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "explab/avatar.hpp"
#include "explab/maze.hpp"

namespace explab {

enum class AgentKind { dfs, random, qlearn, countbonus };

std::string_view to_string(AgentKind kind);
std::optional<AgentKind> agent_kind_from_string(std::string_view name);

struct AgentConfig {
    AgentKind kind = AgentKind::dfs;
    std::uint64_t seed = 0;
    double epsilon = 0.1;
    double alpha = 0.5;
    double gamma = 0.95;
    double beta = 1.0;
    double optimistic_init = 0.0;

    /// Throws std::invalid_argument on out-of-range parameters.
    void validate() const;

    /// Flat `key=value` lines, one per field, in declaration order.
    std::string to_kv() const;
    /// Accepts `key=value` lines (blank lines and `#` comments skipped). Missing
    /// keys keep their defaults; unknown keys throw std::invalid_argument.
    static AgentConfig from_kv(std::string_view text);

    friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

/// Tabular Q key: pose (cell, heading) plus the chosen move direction.
struct QKey {
    Cell cell;
    Heading heading = Heading::N;
    Heading move = Heading::N;

    friend auto operator<=>(const QKey&, const QKey&) = default;
};

struct Transition {
    Cell cell;
    Heading heading = Heading::N;
    Heading move = Heading::N;
    double reward = 0.0;
    Cell next_cell;
    Heading next_heading = Heading::N;
    std::array<bool, 4> next_open{};
    bool terminal = false;
};

struct AgentMemory {
    std::set<Cell> visited;
    /// Visited cells in first-visit order.
    std::vector<Cell> visit_order;
    /// Passable directions seen at each visited cell.
    std::map<Cell, std::array<bool, 4>> known_open;
    /// Visited cells with a known-unvisited passable neighbor, oldest first visit at the front.
    std::vector<Cell> branch_stack;
    std::map<QKey, double> q_table;
    std::map<Cell, int> visit_counts;
    std::mt19937_64 rng;

    /// Records arrival at the observed cell.
    void note(const Observation& obs);
    /// Forgets the per-phase search state (visited, branch stack), keeping learned values.
    void clear_search();
};

/// A cell-level choice: the direction to move in, or nullopt for "done".
using Decision = std::optional<Heading>;

Decision dfs_act(const Observation& obs, AgentMemory& mem);
Decision random_act(const Observation& obs, AgentMemory& mem);
Decision qlearn_act(const Observation& obs, AgentMemory& mem, const AgentConfig& config);
void qlearn_update(AgentMemory& mem, const Transition& t, const AgentConfig& config);
/// Greedy choice over the count bonus beta / sqrt(count + 1) of each passable neighbor.
Decision countbonus_act(const Observation& obs, AgentMemory& mem, const AgentConfig& config);

double q_value(const AgentMemory& mem, const QKey& key, const AgentConfig& config);

class Agent {
public:
    explicit Agent(AgentConfig config);

    Decision act(const Observation& obs);
    void learn(const Transition& t);
    /// Replays a finished phase's transitions newest-first through the one-step update.
    void replay_backward(const std::vector<Transition>& transitions);

    /// Called at the start of each phase on the same maze.
    void begin_phase();
    /// Called when the subject moves to a new maze design; learned values survive.
    void begin_maze();

    bool learns() const { return config_.kind == AgentKind::qlearn; }
    const AgentConfig& config() const { return config_; }
    const AgentMemory& memory() const { return memory_; }
    AgentMemory& memory() { return memory_; }

private:
    AgentConfig config_;
    AgentMemory memory_;
};

}  // namespace explab
