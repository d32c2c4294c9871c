#include "explab/generator.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace explab {

std::string_view to_string(MazeStyle style) { return style == MazeStyle::perfect ? "perfect" : "braided"; }

std::optional<MazeStyle> maze_style_from_string(std::string_view name) {
    if (name == "perfect") return MazeStyle::perfect;
    if (name == "braided") return MazeStyle::braided;
    return std::nullopt;
}

namespace {

Cell wall_between(Cell a, Cell b) { return {(a.x + b.x) / 2, (a.y + b.y) / 2}; }

Cell room_step(Cell c, Heading h) { return neighbor(neighbor(c, h), h); }

}  // namespace

MazeSpec generate_maze(int width, int height, MazeStyle style, std::uint64_t seed) {
    if (width < 5 || height < 5 || width % 2 == 0 || height % 2 == 0) {
        throw std::invalid_argument("maze dimensions must be odd and >= 5, got " + std::to_string(width) + "x" +
                                    std::to_string(height));
    }
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> open(static_cast<std::size_t>(width) * height, 0);
    auto at = [&](Cell c) -> std::uint8_t& { return open[static_cast<std::size_t>(c.y) * width + c.x]; };
    auto is_room = [&](Cell c) { return c.x > 0 && c.y > 0 && c.x < width - 1 && c.y < height - 1; };

    const int rooms_x = (width - 1) / 2;
    const int rooms_y = (height - 1) / 2;
    std::uniform_int_distribution<int> pick_x(0, rooms_x - 1);
    std::uniform_int_distribution<int> pick_y(0, rooms_y - 1);
    const Cell origin{2 * pick_x(rng) + 1, 2 * pick_y(rng) + 1};

    std::vector<Cell> stack{origin};
    at(origin) = 1;
    while (!stack.empty()) {
        const Cell cur = stack.back();
        std::vector<Cell> fresh;
        for (Heading h : kHeadings) {
            const Cell next = room_step(cur, h);
            if (is_room(next) && at(next) == 0) fresh.push_back(next);
        }
        if (fresh.empty()) {
            stack.pop_back();
            continue;
        }
        std::uniform_int_distribution<std::size_t> pick(0, fresh.size() - 1);
        const Cell next = fresh[pick(rng)];
        at(wall_between(cur, next)) = 1;
        at(next) = 1;
        stack.push_back(next);
    }

    if (style == MazeStyle::braided) {
        auto room_degree = [&](Cell c) {
            int degree = 0;
            for (Heading h : kHeadings) {
                if (at(neighbor(c, h)) != 0) ++degree;
            }
            return degree;
        };
        std::bernoulli_distribution coin(0.5);
        bool added = false;
        std::vector<Cell> candidates_for_fallback;
        for (int y = 1; y < height - 1; y += 2) {
            for (int x = 1; x < width - 1; x += 2) {
                const Cell c{x, y};
                std::vector<Cell> closed;
                for (Heading h : kHeadings) {
                    const Cell next = room_step(c, h);
                    if (is_room(next) && at(wall_between(c, next)) == 0) closed.push_back(next);
                }
                if (closed.empty()) continue;
                candidates_for_fallback.push_back(c);
                if (room_degree(c) != 1 || !coin(rng)) continue;
                std::uniform_int_distribution<std::size_t> pick(0, closed.size() - 1);
                at(wall_between(c, closed[pick(rng)])) = 1;
                added = true;
            }
        }
        if (!added && !candidates_for_fallback.empty()) {
            const Cell c = candidates_for_fallback.front();
            for (Heading h : kHeadings) {
                const Cell next = room_step(c, h);
                if (is_room(next) && at(wall_between(c, next)) == 0) {
                    at(wall_between(c, next)) = 1;
                    break;
                }
            }
        }
    }

    MazeSpec::Builder builder(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (at({x, y}) != 0) builder.floor({x, y});
        }
    }
    builder.start(origin).id(std::string(to_string(style)) + "-" + std::to_string(width) + "x" +
                             std::to_string(height) + "-" + std::to_string(seed));
    const MazeSpec draft = builder.build();

    // Exact diameter by BFS from every cell; the first pair found wins ties.
    const auto cells = draft.floor_cells();
    Cell start = origin;
    Cell goal = origin;
    int best = -1;
    for (const Cell& from : cells) {
        const auto dist = distance_field(draft, from);
        for (const Cell& c : cells) {
            const int d = dist[static_cast<std::size_t>(c.y) * width + c.x];
            if (d > best) {
                best = d;
                start = from;
                goal = c;
            }
        }
    }
    return draft.with_start(start, Heading::N).with_goal(goal);
}

const std::vector<BuiltinMaze>& builtin_mazes() {
    static const std::vector<BuiltinMaze> kMazes{
        {"exp1",
         "###########\n"
         "#.....#...#\n"
         "#.###.#.#.#\n"
         "#.#...#.#G#\n"
         "#.#.###.#.#\n"
         "#...#.....#\n"
         "###.#.###.#\n"
         "#S....#...#\n"
         "###########\n"},
        {"exp2a",
         "#############\n"
         "#S....#.....#\n"
         "#a###.#.###.#\n"
         "#a#...#...#.#\n"
         "#a#.#####.#.#\n"
         "#aaa#aaa#...#\n"
         "###a#a#a#.#.#\n"
         "#..aaa#aaaaG#\n"
         "#############\n"},
        {"exp2b",
         "#############\n"
         "#G....#.....#\n"
         "#a###.#.#.#.#\n"
         "#a#...#.#...#\n"
         "#a#.###.#.###\n"
         "#a#.....#...#\n"
         "#a###.#####.#\n"
         "#aaaaaaaaaaS#\n"
         "#############\n"},
    };
    return kMazes;
}

std::optional<MazeSpec> builtin_maze(std::string_view id) {
    for (const auto& m : builtin_mazes()) {
        if (m.id == id) return parse_maze(m.text, std::string(m.id));
    }
    return std::nullopt;
}

}  // namespace explab
