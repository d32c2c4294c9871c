#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "explab/maze.hpp"
#include "explab/session_log.hpp"

namespace explab {

class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cell-level trajectory: no two consecutive cells equal.
struct CellTrajectory {
    std::vector<Cell> cells;
    std::string maze_id;

    friend bool operator==(const CellTrajectory&, const CellTrajectory&) = default;
};

/// Maps poses to cells and collapses consecutive repeats. Throws
/// AnalysisError naming the first record whose pose is off the floor.
CellTrajectory discretize(const TrajectoryLog& log, const MazeSpec& maze);

/// Throws AnalysisError unless each step joins passable adjacent cells.
void validate_trajectory(const CellTrajectory& traj, const MazeSpec& maze);

/// Distinct visited cells over reachable cells.
double coverage(const CellTrajectory& traj, const MazeSpec& maze);

/// Reachable cells whose passable-neighbor count is not 2.
std::set<Cell> decision_points(const MazeSpec& maze);

enum class ConsistencyRule { none = 0, unvisited = 1, backtrack = 2 };

struct DecisionRecord {
    std::size_t index = 0;
    Cell cell;
    Cell chosen_next;
    bool consistent = false;
    ConsistencyRule rule_applied = ConsistencyRule::none;

    friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

struct ConsistencyResult {
    std::vector<DecisionRecord> decisions;
    /// Consistent decisions over total; 1.0 when there are none.
    double fraction = 1.0;

    std::size_t consistent_count() const;
};

/// Scores each departure from a decision point against depth-first search:
/// a move is consistent if it enters an unvisited cell, or, when every
/// neighbor is already visited, if it lies on a shortest visited-cell path
/// toward the most recently first-visited cell that still has an unvisited
/// neighbor (any move counts when no such cell exists).
ConsistencyResult dfs_consistency(const CellTrajectory& traj, const MazeSpec& maze);

/// Transitions before first entry into the goal; nullopt when never entered.
/// Throws AnalysisError if the maze has no goal.
std::optional<std::size_t> steps_to_goal(const CellTrajectory& traj, const MazeSpec& maze);

/// Cells entered more than once over distinct cells visited.
double re_exploration(const CellTrajectory& traj);

/// Trajectory length minus one, floored at zero.
std::size_t cells_crossed(const CellTrajectory& traj);

}  // namespace explab
