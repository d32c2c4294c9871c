#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace explab {

/// Sub-steps needed to cross one cell with forward/back.
inline constexpr int kSubSteps = 5;

struct Cell {
    int x = 0;
    int y = 0;

    friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

std::string to_string(Cell c);

enum class Heading : std::uint8_t { N = 0, E = 1, S = 2, W = 3 };

inline constexpr std::array<Heading, 4> kHeadings{Heading::N, Heading::E, Heading::S, Heading::W};

char heading_char(Heading h);
std::optional<Heading> heading_from_char(char c);
Heading rotate_right(Heading h);
Heading rotate_left(Heading h);
Heading opposite(Heading h);
Cell neighbor(Cell c, Heading h);
/// Direction from `from` to an adjacent cell `to`, if they are 4-adjacent.
std::optional<Heading> direction_between(Cell from, Cell to);
bool adjacent(Cell a, Cell b);

/// Unordered pair of adjacent cells; stored with first < second.
class Edge {
public:
    Edge(Cell a, Cell b);

    Cell first() const { return first_; }
    Cell second() const { return second_; }

    friend auto operator<=>(const Edge&, const Edge&) = default;

private:
    Cell first_;
    Cell second_;
};

std::string to_string(const Edge& e);

enum class MazeErrc {
    malformed_grid,
    bad_character,
    missing_start,
    multiple_starts,
    multiple_goals,
    floor_on_border,
    cell_not_floor,
    bad_blocked_edge,
    goal_unreachable,
};

std::string_view to_string(MazeErrc code);

class MazeError : public std::runtime_error {
public:
    MazeError(MazeErrc code, const std::string& what);
    MazeErrc code() const noexcept { return code_; }

private:
    MazeErrc code_;
};

/// Immutable maze layout. Build with `MazeSpec::Builder` or `parse_maze`;
/// every constructed instance has passed validation.
class MazeSpec {
public:
    class Builder;

    int width() const { return width_; }
    int height() const { return height_; }
    const std::string& id() const { return id_; }
    Cell start_cell() const { return start_; }
    Heading start_heading() const { return start_heading_; }
    const std::optional<Cell>& goal() const { return goal_; }
    const std::set<Cell>& apples() const { return apples_; }
    const std::set<Edge>& blocked_edges() const { return blocked_; }

    bool in_bounds(Cell c) const;
    bool is_floor(Cell c) const;
    /// Floor cells in row-major order.
    std::vector<Cell> floor_cells() const;
    std::size_t floor_count() const;
    bool is_blocked(Cell a, Cell b) const;
    /// True iff stepping from `c` toward `h` lands on floor without crossing a blocked edge.
    bool passable(Cell c, Heading h) const;
    /// Passable neighbors in N, E, S, W order.
    std::vector<Cell> passable_neighbors(Cell c) const;

    /// Copies with single fields replaced; the result is re-validated.
    MazeSpec with_goal(std::optional<Cell> goal) const;
    MazeSpec with_apples(std::set<Cell> apples) const;
    MazeSpec with_start(Cell start, Heading heading) const;
    MazeSpec with_id(std::string id) const;
    MazeSpec without_blocks() const;

    friend bool operator==(const MazeSpec&, const MazeSpec&) = default;

private:
    MazeSpec() = default;
    void validate() const;

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> floor_;
    Cell start_;
    Heading start_heading_ = Heading::N;
    std::optional<Cell> goal_;
    std::set<Cell> apples_;
    std::set<Edge> blocked_;
    std::string id_;
};

class MazeSpec::Builder {
public:
    Builder(int width, int height);

    Builder& floor(Cell c, bool is_floor = true);
    Builder& start(Cell c, Heading h = Heading::N);
    Builder& goal(std::optional<Cell> c);
    Builder& apple(Cell c);
    Builder& block(Cell a, Cell b);
    Builder& id(std::string label);

    /// Validates and returns the maze; throws MazeError.
    MazeSpec build() const;

private:
    MazeSpec spec_;
    bool has_start_ = false;
};

/// Parses the ASCII maze format. `#` wall, `.` floor, `S` start (heading N),
/// `G` goal, `a` apple, `B` floor cell with every incident edge sealed.
MazeSpec parse_maze(std::string_view text, std::string id = {});

/// Inverse of parse_maze for mazes whose blocked edges are all induced by `B` cells.
std::string render_maze(const MazeSpec& maze);

/// Flood fill from the start cell respecting blocked edges.
std::set<Cell> reachable_cells(const MazeSpec& maze);
std::set<Cell> reachable_from(const MazeSpec& maze, Cell origin);

/// Breadth-first distances (in cell transitions) from `origin`; -1 for unreachable.
std::vector<int> distance_field(const MazeSpec& maze, Cell origin);

/// Shortest path (inclusive of both ends) in N,E,S,W expansion order; empty if unreachable.
std::vector<Cell> shortest_path(const MazeSpec& maze, Cell from, Cell to);

/// Number of unordered passable adjacencies between floor cells.
std::size_t passable_edge_count(const MazeSpec& maze);

MazeSpec apply_blocked_variant(const MazeSpec& maze, const std::set<Edge>& edits);

}  // namespace explab

template <>
struct std::hash<explab::Cell> {
    std::size_t operator()(const explab::Cell& c) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
                                          static_cast<std::uint32_t>(c.y));
    }
};
