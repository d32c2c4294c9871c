#include "explab/avatar.hpp"

#include <algorithm>

namespace explab {

std::string_view to_string(Action a) {
    switch (a) {
        case Action::forward: return "forward";
        case Action::back: return "back";
        case Action::strafe_left: return "strafe_left";
        case Action::turn_right: return "turn_right";
    }
    return "forward";
}

std::optional<Action> action_from_string(std::string_view name) {
    for (Action a : kActions) {
        if (to_string(a) == name) return a;
    }
    return std::nullopt;
}

AvatarState start_state(const MazeSpec& maze) { return {maze.start_cell(), 0, maze.start_heading()}; }

bool valid_state(const MazeSpec& maze, const AvatarState& state) {
    return maze.is_floor(state.cell) && state.sub_offset >= 0 && state.sub_offset < kSubSteps;
}

AvatarState step(const MazeSpec& maze, const AvatarState& state, Action action) {
    AvatarState next = state;
    switch (action) {
        case Action::turn_right:
            next.heading = rotate_right(state.heading);
            break;
        case Action::forward:
            if (state.sub_offset < kSubSteps - 1) {
                ++next.sub_offset;
            } else if (maze.passable(state.cell, state.heading)) {
                next.cell = neighbor(state.cell, state.heading);
                next.sub_offset = 0;
            }
            break;
        case Action::back:
            if (state.sub_offset > 0) {
                --next.sub_offset;
            } else if (const Heading behind = opposite(state.heading); maze.passable(state.cell, behind)) {
                next.cell = neighbor(state.cell, behind);
                next.sub_offset = kSubSteps - 1;
            }
            break;
        case Action::strafe_left:
            // Lateral position is not tracked, so a strafe is a whole-cell shift.
            if (const Heading left = rotate_left(state.heading); maze.passable(state.cell, left)) {
                next.cell = neighbor(state.cell, left);
            }
            break;
    }
    return next;
}

Observation observe(const MazeSpec& maze, const AvatarState& state) {
    Observation obs;
    obs.current_cell = state.cell;
    obs.heading = state.heading;
    obs.visible_cells.push_back(state.cell);
    for (Heading h : kHeadings) {
        obs.open[static_cast<int>(h)] = maze.passable(state.cell, h);
        Cell cur = state.cell;
        while (maze.passable(cur, h)) {
            cur = neighbor(cur, h);
            obs.visible_cells.push_back(cur);
        }
    }
    std::sort(obs.visible_cells.begin(), obs.visible_cells.end());
    obs.visible_cells.erase(std::unique(obs.visible_cells.begin(), obs.visible_cells.end()),
                            obs.visible_cells.end());
    obs.on_goal = maze.goal() == state.cell;
    for (const Cell& c : obs.visible_cells) {
        if (maze.apples().contains(c)) obs.apples_visible.push_back(c);
    }
    return obs;
}

std::vector<Action> motor_plan(const AvatarState& state, Heading dir) {
    std::vector<Action> plan;
    const int turns = (static_cast<int>(dir) - static_cast<int>(state.heading) + 4) % 4;
    plan.insert(plan.end(), static_cast<std::size_t>(turns), Action::turn_right);
    plan.insert(plan.end(), static_cast<std::size_t>(kSubSteps - state.sub_offset), Action::forward);
    return plan;
}

}  // namespace explab
