#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "explab/maze.hpp"

namespace explab {

enum class Action { forward, back, strafe_left, turn_right };

inline constexpr std::array<Action, 4> kActions{Action::forward, Action::back, Action::strafe_left,
                                                Action::turn_right};

std::string_view to_string(Action a);
std::optional<Action> action_from_string(std::string_view name);

/// Pose with sub-cell resolution along the heading axis.
/// sub_offset 0 is the rear edge of the cell, kSubSteps - 1 the front edge.
struct AvatarState {
    Cell cell;
    int sub_offset = 0;
    Heading heading = Heading::N;

    friend bool operator==(const AvatarState&, const AvatarState&) = default;
};

AvatarState start_state(const MazeSpec& maze);
bool valid_state(const MazeSpec& maze, const AvatarState& state);

/// Applies one primitive action. Moves into walls or sealed edges leave the
/// state unchanged; there is no error path.
AvatarState step(const MazeSpec& maze, const AvatarState& state, Action action);

struct Observation {
    Cell current_cell;
    Heading heading = Heading::N;
    /// Indexed by Heading; true when the neighbor in that direction is reachable.
    std::array<bool, 4> open{};
    /// Sorted by Cell ordering; always contains current_cell.
    std::vector<Cell> visible_cells;
    bool on_goal = false;
    std::vector<Cell> apples_visible;

    bool passable(Heading h) const { return open[static_cast<int>(h)]; }
};

Observation observe(const MazeSpec& maze, const AvatarState& state);

/// Primitive actions moving an avatar from `state` into the adjacent cell in
/// direction `dir`: right turns until facing `dir`, then forward steps.
std::vector<Action> motor_plan(const AvatarState& state, Heading dir);

}  // namespace explab
