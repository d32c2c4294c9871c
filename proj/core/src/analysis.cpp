#include "explab/analysis.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace explab {

CellTrajectory discretize(const TrajectoryLog& log, const MazeSpec& maze) {
    CellTrajectory traj;
    traj.maze_id = maze.id();
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& pose = log[i].pose;
        if (!valid_state(maze, pose)) {
            throw AnalysisError("record " + std::to_string(i) + ": pose " + to_string(pose.cell) + " offset " +
                                std::to_string(pose.sub_offset) + " is not valid in maze '" + maze.id() + "'");
        }
        if (traj.cells.empty() || traj.cells.back() != pose.cell) traj.cells.push_back(pose.cell);
    }
    return traj;
}

void validate_trajectory(const CellTrajectory& traj, const MazeSpec& maze) {
    for (std::size_t i = 0; i < traj.cells.size(); ++i) {
        if (!maze.is_floor(traj.cells[i])) {
            throw AnalysisError("trajectory cell " + std::to_string(i) + " " + to_string(traj.cells[i]) +
                                " is not floor");
        }
        if (i == 0) continue;
        const auto dir = direction_between(traj.cells[i - 1], traj.cells[i]);
        if (!dir || !maze.passable(traj.cells[i - 1], *dir)) {
            throw AnalysisError("trajectory step " + std::to_string(i - 1) + " " + to_string(traj.cells[i - 1]) +
                                " -> " + to_string(traj.cells[i]) + " is not a passable move");
        }
    }
}

double coverage(const CellTrajectory& traj, const MazeSpec& maze) {
    if (traj.cells.empty()) return 0.0;
    const auto reachable = reachable_cells(maze);
    std::set<Cell> seen;
    for (const Cell& c : traj.cells) {
        if (reachable.contains(c)) seen.insert(c);
    }
    return static_cast<double>(seen.size()) / static_cast<double>(reachable.size());
}

std::set<Cell> decision_points(const MazeSpec& maze) {
    std::set<Cell> out;
    for (const Cell& c : reachable_cells(maze)) {
        if (maze.passable_neighbors(c).size() != 2) out.insert(c);
    }
    return out;
}

std::size_t ConsistencyResult::consistent_count() const {
    return static_cast<std::size_t>(
        std::count_if(decisions.begin(), decisions.end(), [](const DecisionRecord& d) { return d.consistent; }));
}

namespace {

/// Tracks the visited set and the first-visit order of a trajectory prefix.
class VisitTracker {
public:
    explicit VisitTracker(const MazeSpec& maze) : maze_(maze) {}

    void visit(Cell c) {
        if (visited_.insert(c).second) order_.push_back(c);
    }

    bool visited(Cell c) const { return visited_.contains(c); }

    bool has_unvisited_neighbor(Cell c) const {
        for (const Cell& n : maze_.passable_neighbors(c)) {
            if (!visited_.contains(n)) return true;
        }
        return false;
    }

    /// Most recently first-visited cell with an unvisited passable neighbor.
    std::optional<Cell> latest_branch() const {
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            if (has_unvisited_neighbor(*it)) return *it;
        }
        return std::nullopt;
    }

    /// Distances to `target` within the visited subgraph.
    std::unordered_map<Cell, int> distances_to(Cell target) const {
        std::unordered_map<Cell, int> dist{{target, 0}};
        std::deque<Cell> queue{target};
        while (!queue.empty()) {
            const Cell c = queue.front();
            queue.pop_front();
            for (const Cell& n : maze_.passable_neighbors(c)) {
                if (!visited_.contains(n) || dist.contains(n)) continue;
                dist[n] = dist[c] + 1;
                queue.push_back(n);
            }
        }
        return dist;
    }

private:
    const MazeSpec& maze_;
    std::unordered_set<Cell> visited_;
    std::vector<Cell> order_;
};

}  // namespace

ConsistencyResult dfs_consistency(const CellTrajectory& traj, const MazeSpec& maze) {
    validate_trajectory(traj, maze);
    ConsistencyResult result;
    const auto decisions = decision_points(maze);
    VisitTracker tracker(maze);

    for (std::size_t i = 0; i + 1 < traj.cells.size(); ++i) {
        const Cell cur = traj.cells[i];
        tracker.visit(cur);
        if (!decisions.contains(cur)) continue;

        const Cell next = traj.cells[i + 1];
        DecisionRecord d{i, cur, next, false, ConsistencyRule::none};
        if (!tracker.visited(next)) {
            d.consistent = true;
            d.rule_applied = ConsistencyRule::unvisited;
        } else if (!tracker.has_unvisited_neighbor(cur)) {
            d.rule_applied = ConsistencyRule::backtrack;
            if (const auto branch = tracker.latest_branch()) {
                const auto dist = tracker.distances_to(*branch);
                const auto here = dist.find(cur);
                const auto there = dist.find(next);
                d.consistent = here != dist.end() && there != dist.end() && there->second == here->second - 1;
            } else {
                d.consistent = true;
            }
        }
        result.decisions.push_back(d);
    }
    result.fraction = result.decisions.empty()
                          ? 1.0
                          : static_cast<double>(result.consistent_count()) / static_cast<double>(result.decisions.size());
    return result;
}

std::optional<std::size_t> steps_to_goal(const CellTrajectory& traj, const MazeSpec& maze) {
    if (!maze.goal()) throw AnalysisError("maze '" + maze.id() + "' has no goal");
    const auto it = std::find(traj.cells.begin(), traj.cells.end(), *maze.goal());
    if (it == traj.cells.end()) return std::nullopt;
    return static_cast<std::size_t>(it - traj.cells.begin());
}

double re_exploration(const CellTrajectory& traj) {
    if (traj.cells.empty()) return 0.0;
    std::map<Cell, int> entries;
    for (const Cell& c : traj.cells) ++entries[c];
    const auto revisited = std::count_if(entries.begin(), entries.end(), [](const auto& kv) { return kv.second > 1; });
    return static_cast<double>(revisited) / static_cast<double>(entries.size());
}

std::size_t cells_crossed(const CellTrajectory& traj) { return traj.cells.empty() ? 0 : traj.cells.size() - 1; }

}  // namespace explab
