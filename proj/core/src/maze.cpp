#include "explab/maze.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace explab {

std::string to_string(Cell c) {
    return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

char heading_char(Heading h) {
    static constexpr char kChars[] = {'N', 'E', 'S', 'W'};
    return kChars[static_cast<int>(h)];
}

std::optional<Heading> heading_from_char(char c) {
    switch (c) {
        case 'N': return Heading::N;
        case 'E': return Heading::E;
        case 'S': return Heading::S;
        case 'W': return Heading::W;
        default: return std::nullopt;
    }
}

Heading rotate_right(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }
Heading rotate_left(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }
Heading opposite(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 2) % 4); }

Cell neighbor(Cell c, Heading h) {
    switch (h) {
        case Heading::N: return {c.x, c.y - 1};
        case Heading::E: return {c.x + 1, c.y};
        case Heading::S: return {c.x, c.y + 1};
        case Heading::W: return {c.x - 1, c.y};
    }
    return c;
}

std::optional<Heading> direction_between(Cell from, Cell to) {
    for (Heading h : kHeadings) {
        if (neighbor(from, h) == to) return h;
    }
    return std::nullopt;
}

bool adjacent(Cell a, Cell b) { return direction_between(a, b).has_value(); }

Edge::Edge(Cell a, Cell b) : first_(std::min(a, b)), second_(std::max(a, b)) {}

std::string to_string(const Edge& e) { return to_string(e.first()) + "-" + to_string(e.second()); }

std::string_view to_string(MazeErrc code) {
    switch (code) {
        case MazeErrc::malformed_grid: return "malformed grid";
        case MazeErrc::bad_character: return "bad character";
        case MazeErrc::missing_start: return "missing start";
        case MazeErrc::multiple_starts: return "multiple starts";
        case MazeErrc::multiple_goals: return "multiple goals";
        case MazeErrc::floor_on_border: return "floor on border";
        case MazeErrc::cell_not_floor: return "cell not floor";
        case MazeErrc::bad_blocked_edge: return "bad blocked edge";
        case MazeErrc::goal_unreachable: return "goal unreachable";
    }
    return "unknown";
}

MazeError::MazeError(MazeErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

// ---------------------------------------------------------------------------
// MazeSpec

bool MazeSpec::in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }

bool MazeSpec::is_floor(Cell c) const {
    return in_bounds(c) && floor_[static_cast<std::size_t>(c.y) * width_ + c.x] != 0;
}

std::vector<Cell> MazeSpec::floor_cells() const {
    std::vector<Cell> out;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            if (is_floor({x, y})) out.push_back({x, y});
        }
    }
    return out;
}

std::size_t MazeSpec::floor_count() const {
    return static_cast<std::size_t>(std::count(floor_.begin(), floor_.end(), std::uint8_t{1}));
}

bool MazeSpec::is_blocked(Cell a, Cell b) const { return blocked_.contains(Edge(a, b)); }

bool MazeSpec::passable(Cell c, Heading h) const {
    const Cell n = neighbor(c, h);
    return is_floor(c) && is_floor(n) && !is_blocked(c, n);
}

std::vector<Cell> MazeSpec::passable_neighbors(Cell c) const {
    std::vector<Cell> out;
    for (Heading h : kHeadings) {
        if (passable(c, h)) out.push_back(neighbor(c, h));
    }
    return out;
}

MazeSpec MazeSpec::with_goal(std::optional<Cell> goal) const {
    MazeSpec copy = *this;
    copy.goal_ = goal;
    copy.validate();
    return copy;
}

MazeSpec MazeSpec::with_apples(std::set<Cell> apples) const {
    MazeSpec copy = *this;
    copy.apples_ = std::move(apples);
    copy.validate();
    return copy;
}

MazeSpec MazeSpec::with_start(Cell start, Heading heading) const {
    MazeSpec copy = *this;
    copy.start_ = start;
    copy.start_heading_ = heading;
    copy.validate();
    return copy;
}

MazeSpec MazeSpec::with_id(std::string id) const {
    MazeSpec copy = *this;
    copy.id_ = std::move(id);
    return copy;
}

MazeSpec MazeSpec::without_blocks() const {
    MazeSpec copy = *this;
    copy.blocked_.clear();
    return copy;
}

void MazeSpec::validate() const {
    if (width_ <= 0 || height_ <= 0) {
        throw MazeError(MazeErrc::malformed_grid, "empty grid");
    }
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const bool border = x == 0 || y == 0 || x == width_ - 1 || y == height_ - 1;
            if (border && is_floor({x, y})) {
                throw MazeError(MazeErrc::floor_on_border, "cell " + to_string(Cell{x, y}));
            }
        }
    }
    if (!is_floor(start_)) throw MazeError(MazeErrc::cell_not_floor, "start " + to_string(start_));
    if (goal_ && !is_floor(*goal_)) throw MazeError(MazeErrc::cell_not_floor, "goal " + to_string(*goal_));
    for (const Cell& a : apples_) {
        if (!is_floor(a)) throw MazeError(MazeErrc::cell_not_floor, "apple " + to_string(a));
    }
    for (const Edge& e : blocked_) {
        if (!adjacent(e.first(), e.second()) || !is_floor(e.first()) || !is_floor(e.second())) {
            throw MazeError(MazeErrc::bad_blocked_edge, to_string(e));
        }
    }
    if (goal_ && !reachable_cells(*this).contains(*goal_)) {
        throw MazeError(MazeErrc::goal_unreachable, "goal " + to_string(*goal_) + " from " + to_string(start_));
    }
}

MazeSpec::Builder::Builder(int width, int height) {
    if (width <= 0 || height <= 0) throw MazeError(MazeErrc::malformed_grid, "non-positive dimensions");
    spec_.width_ = width;
    spec_.height_ = height;
    spec_.floor_.assign(static_cast<std::size_t>(width) * height, 0);
}

MazeSpec::Builder& MazeSpec::Builder::floor(Cell c, bool is_floor) {
    if (!spec_.in_bounds(c)) throw MazeError(MazeErrc::malformed_grid, "cell out of bounds " + to_string(c));
    spec_.floor_[static_cast<std::size_t>(c.y) * spec_.width_ + c.x] = is_floor ? 1 : 0;
    return *this;
}

MazeSpec::Builder& MazeSpec::Builder::start(Cell c, Heading h) {
    spec_.start_ = c;
    spec_.start_heading_ = h;
    has_start_ = true;
    return *this;
}

MazeSpec::Builder& MazeSpec::Builder::goal(std::optional<Cell> c) {
    spec_.goal_ = c;
    return *this;
}

MazeSpec::Builder& MazeSpec::Builder::apple(Cell c) {
    spec_.apples_.insert(c);
    return *this;
}

MazeSpec::Builder& MazeSpec::Builder::block(Cell a, Cell b) {
    if (!adjacent(a, b)) throw MazeError(MazeErrc::bad_blocked_edge, to_string(a) + "-" + to_string(b));
    spec_.blocked_.insert(Edge(a, b));
    return *this;
}

MazeSpec::Builder& MazeSpec::Builder::id(std::string label) {
    spec_.id_ = std::move(label);
    return *this;
}

MazeSpec MazeSpec::Builder::build() const {
    if (!has_start_) throw MazeError(MazeErrc::missing_start, "no start cell");
    spec_.validate();
    return spec_;
}

// ---------------------------------------------------------------------------
// ASCII format

MazeSpec parse_maze(std::string_view text, std::string id) {
    std::vector<std::string> rows;
    std::string line;
    std::istringstream in{std::string(text)};
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        rows.push_back(line);
    }
    if (rows.empty() || rows.front().empty()) throw MazeError(MazeErrc::malformed_grid, "empty maze text");
    const std::size_t width = rows.front().size();
    for (std::size_t y = 0; y < rows.size(); ++y) {
        if (rows[y].size() != width) {
            throw MazeError(MazeErrc::malformed_grid, "row " + std::to_string(y) + " has length " +
                                                          std::to_string(rows[y].size()) + ", expected " +
                                                          std::to_string(width));
        }
    }

    MazeSpec::Builder builder(static_cast<int>(width), static_cast<int>(rows.size()));
    builder.id(std::move(id));
    int starts = 0;
    int goals = 0;
    std::vector<Cell> sealed;
    for (int y = 0; y < static_cast<int>(rows.size()); ++y) {
        for (int x = 0; x < static_cast<int>(width); ++x) {
            const Cell c{x, y};
            const char ch = rows[y][x];
            switch (ch) {
                case '#': break;
                case '.': builder.floor(c); break;
                case 'S':
                    ++starts;
                    builder.floor(c).start(c, Heading::N);
                    break;
                case 'G':
                    ++goals;
                    builder.floor(c).goal(c);
                    break;
                case 'a': builder.floor(c).apple(c); break;
                case 'B':
                    builder.floor(c);
                    sealed.push_back(c);
                    break;
                default:
                    throw MazeError(MazeErrc::bad_character,
                                    std::string("'") + ch + "' at " + to_string(c));
            }
        }
    }
    if (starts == 0) throw MazeError(MazeErrc::missing_start, "no 'S' in maze");
    if (starts > 1) throw MazeError(MazeErrc::multiple_starts, std::to_string(starts) + " 'S' cells");
    if (goals > 1) throw MazeError(MazeErrc::multiple_goals, std::to_string(goals) + " 'G' cells");

    for (const Cell& c : sealed) {
        for (Heading h : kHeadings) {
            const Cell n = neighbor(c, h);
            const int nx = n.x;
            const int ny = n.y;
            if (nx >= 0 && ny >= 0 && ny < static_cast<int>(rows.size()) && nx < static_cast<int>(width) &&
                rows[ny][nx] != '#') {
                builder.block(c, n);
            }
        }
    }
    return builder.build();
}

namespace {

bool is_sealed(const MazeSpec& maze, Cell c) {
    int floor_neighbors = 0;
    for (Heading h : kHeadings) {
        const Cell n = neighbor(c, h);
        if (!maze.is_floor(n)) continue;
        ++floor_neighbors;
        if (!maze.is_blocked(c, n)) return false;
    }
    return floor_neighbors > 0;
}

}  // namespace

std::string render_maze(const MazeSpec& maze) {
    std::string out;
    out.reserve(static_cast<std::size_t>(maze.width() + 1) * maze.height());
    for (int y = 0; y < maze.height(); ++y) {
        for (int x = 0; x < maze.width(); ++x) {
            const Cell c{x, y};
            char ch = '#';
            if (maze.is_floor(c)) {
                if (c == maze.start_cell()) {
                    ch = 'S';
                } else if (maze.goal() == c) {
                    ch = 'G';
                } else if (maze.apples().contains(c)) {
                    ch = 'a';
                } else if (is_sealed(maze, c)) {
                    ch = 'B';
                } else {
                    ch = '.';
                }
            }
            out.push_back(ch);
        }
        out.push_back('\n');
    }
    return out;
}

// ---------------------------------------------------------------------------
// Graph queries

std::vector<int> distance_field(const MazeSpec& maze, Cell origin) {
    std::vector<int> dist(static_cast<std::size_t>(maze.width()) * maze.height(), -1);
    if (!maze.is_floor(origin)) return dist;
    auto index = [&](Cell c) { return static_cast<std::size_t>(c.y) * maze.width() + c.x; };
    std::deque<Cell> queue{origin};
    dist[index(origin)] = 0;
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (Heading h : kHeadings) {
            if (!maze.passable(c, h)) continue;
            const Cell n = neighbor(c, h);
            if (dist[index(n)] >= 0) continue;
            dist[index(n)] = dist[index(c)] + 1;
            queue.push_back(n);
        }
    }
    return dist;
}

std::set<Cell> reachable_from(const MazeSpec& maze, Cell origin) {
    const auto dist = distance_field(maze, origin);
    std::set<Cell> out;
    for (int y = 0; y < maze.height(); ++y) {
        for (int x = 0; x < maze.width(); ++x) {
            if (dist[static_cast<std::size_t>(y) * maze.width() + x] >= 0) out.insert({x, y});
        }
    }
    return out;
}

std::set<Cell> reachable_cells(const MazeSpec& maze) { return reachable_from(maze, maze.start_cell()); }

std::vector<Cell> shortest_path(const MazeSpec& maze, Cell from, Cell to) {
    // Distances from the target let us walk forward greedily in N,E,S,W order.
    const auto dist = distance_field(maze, to);
    auto at = [&](Cell c) { return dist[static_cast<std::size_t>(c.y) * maze.width() + c.x]; };
    if (!maze.is_floor(from) || at(from) < 0) return {};
    std::vector<Cell> path{from};
    Cell cur = from;
    while (cur != to) {
        for (Heading h : kHeadings) {
            if (maze.passable(cur, h) && at(neighbor(cur, h)) == at(cur) - 1) {
                cur = neighbor(cur, h);
                break;
            }
        }
        path.push_back(cur);
    }
    return path;
}

std::size_t passable_edge_count(const MazeSpec& maze) {
    std::size_t count = 0;
    for (const Cell& c : maze.floor_cells()) {
        if (maze.passable(c, Heading::E)) ++count;
        if (maze.passable(c, Heading::S)) ++count;
    }
    return count;
}

MazeSpec apply_blocked_variant(const MazeSpec& maze, const std::set<Edge>& edits) {
    MazeSpec::Builder builder(maze.width(), maze.height());
    for (const Cell& c : maze.floor_cells()) builder.floor(c);
    builder.start(maze.start_cell(), maze.start_heading()).goal(maze.goal()).id(maze.id());
    for (const Cell& a : maze.apples()) builder.apple(a);
    for (const Edge& e : maze.blocked_edges()) builder.block(e.first(), e.second());
    for (const Edge& e : edits) builder.block(e.first(), e.second());
    return builder.build();
}

}  // namespace explab
