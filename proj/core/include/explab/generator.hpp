#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "explab/maze.hpp"

namespace explab {

enum class MazeStyle { perfect, braided };

std::string_view to_string(MazeStyle style);
std::optional<MazeStyle> maze_style_from_string(std::string_view name);

/// Seeded room-and-wall maze. Rooms sit on odd coordinates; `perfect` carves a
/// spanning tree with a randomized depth-first walk, `braided` then knocks out
/// extra walls at dead-ends so the passage graph has cycles. Start and goal are
/// the two ends of a longest shortest path.
/// Throws std::invalid_argument unless width and height are odd and >= 5.
MazeSpec generate_maze(int width, int height, MazeStyle style, std::uint64_t seed);

/// Hand-authored layouts used by the experiment protocols.
struct BuiltinMaze {
    std::string_view id;
    std::string_view text;
};

const std::vector<BuiltinMaze>& builtin_mazes();
std::optional<MazeSpec> builtin_maze(std::string_view id);

}  // namespace explab
