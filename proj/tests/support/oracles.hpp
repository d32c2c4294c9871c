#pragma once

// Independent reference implementations used to check the library. They
// only touch MazeSpec's raw accessors (is_floor, is_blocked) and recompute
// everything from scratch, trading speed for obviousness.

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "explab/analysis.hpp"
#include "explab/maze.hpp"

namespace oracle {

using explab::Cell;
using explab::MazeSpec;

inline std::string grid(std::string_view slashed) {
    std::string text(slashed);
    for (char& c : text) {
        if (c == '/') c = '\n';
    }
    return text;
}

inline MazeSpec maze(std::string_view slashed, std::string id = "t") {
    return explab::parse_maze(grid(slashed), std::move(id));
}

inline std::vector<Cell> open_neighbors(const MazeSpec& m, Cell c) {
    std::vector<Cell> out;
    const Cell cand[4] = {{c.x, c.y - 1}, {c.x + 1, c.y}, {c.x, c.y + 1}, {c.x - 1, c.y}};
    for (const Cell& n : cand) {
        if (m.is_floor(n) && !m.is_blocked(c, n)) out.push_back(n);
    }
    return out;
}

/// Breadth-first distances from `from`, optionally restricted to `allowed`.
inline std::map<Cell, int> bfs(const MazeSpec& m, Cell from, const std::set<Cell>* allowed = nullptr) {
    std::map<Cell, int> dist{{from, 0}};
    std::deque<Cell> queue{from};
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (const Cell& n : open_neighbors(m, c)) {
            if (allowed && !allowed->contains(n)) continue;
            if (dist.emplace(n, dist[c] + 1).second) queue.push_back(n);
        }
    }
    return dist;
}

inline std::set<Cell> reachable(const MazeSpec& m) {
    std::set<Cell> out;
    for (const auto& [c, d] : bfs(m, m.start_cell())) out.insert(c);
    return out;
}

inline std::set<Cell> decision_points(const MazeSpec& m) {
    std::set<Cell> out;
    for (const Cell& c : reachable(m)) {
        if (open_neighbors(m, c).size() != 2) out.insert(c);
    }
    return out;
}

struct Verdict {
    std::size_t index;
    bool consistent;
};

/// Stateless DFS-consistency: every decision is judged from the prefix
/// cells[0..i] alone, enumerating the permitted next cells directly.
inline std::vector<Verdict> consistency(const std::vector<Cell>& cells, const MazeSpec& m) {
    const auto points = oracle::decision_points(m);
    std::vector<Verdict> out;
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
        if (!points.contains(cells[i])) continue;
        const std::set<Cell> visited(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        const auto nbrs = open_neighbors(m, cells[i]);
        std::set<Cell> permitted;
        bool all_visited = true;
        for (const Cell& n : nbrs) {
            if (!visited.contains(n)) {
                permitted.insert(n);
                all_visited = false;
            }
        }
        if (all_visited) {
            // First-visit order over the prefix.
            std::vector<Cell> order;
            std::set<Cell> seen;
            for (std::size_t j = 0; j <= i; ++j) {
                if (seen.insert(cells[j]).second) order.push_back(cells[j]);
            }
            std::optional<Cell> branch;
            for (auto it = order.rbegin(); it != order.rend() && !branch; ++it) {
                for (const Cell& n : open_neighbors(m, *it)) {
                    if (!visited.contains(n)) {
                        branch = *it;
                        break;
                    }
                }
            }
            if (!branch) {
                permitted.insert(nbrs.begin(), nbrs.end());
            } else {
                const auto to_branch = bfs(m, *branch, &visited);
                const int here = to_branch.at(cells[i]);
                for (const Cell& n : nbrs) {
                    const auto it = to_branch.find(n);
                    if (it != to_branch.end() && it->second == here - 1) permitted.insert(n);
                }
            }
        }
        out.push_back({i, permitted.contains(cells[i + 1])});
    }
    return out;
}

/// Uniform random walk of `moves` cell transitions from the start cell.
inline std::vector<Cell> random_walk(const MazeSpec& m, std::mt19937_64& rng, std::size_t moves) {
    std::vector<Cell> cells{m.start_cell()};
    for (std::size_t k = 0; k < moves; ++k) {
        const auto nbrs = open_neighbors(m, cells.back());
        if (nbrs.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
        cells.push_back(nbrs[pick(rng)]);
    }
    return cells;
}

/// Exact one-dimensional k-means optimum by enumerating every split of the
/// sorted values into k contiguous groups. Returns ascending centroids.
inline std::vector<double> kmeans_1d_exact(std::vector<double> values, std::size_t k) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    double best = 1e300;
    std::vector<double> best_centroids;
    std::vector<std::size_t> cuts(k + 1);
    cuts[0] = 0;
    cuts[k] = n;
    auto cost = [&](std::vector<double>& centroids) {
        double total = 0.0;
        centroids.clear();
        for (std::size_t g = 0; g < k; ++g) {
            double sum = 0.0;
            for (std::size_t i = cuts[g]; i < cuts[g + 1]; ++i) sum += values[i];
            const double mu = sum / static_cast<double>(cuts[g + 1] - cuts[g]);
            centroids.push_back(mu);
            for (std::size_t i = cuts[g]; i < cuts[g + 1]; ++i) total += (values[i] - mu) * (values[i] - mu);
        }
        return total;
    };
    // Recursive enumeration of strictly increasing interior cut points.
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t g, std::size_t lo) {
        if (g == k) {
            std::vector<double> centroids;
            const double c = cost(centroids);
            if (c < best) {
                best = c;
                best_centroids = centroids;
            }
            return;
        }
        for (std::size_t cut = lo; cut + (k - g) <= n; ++cut) {
            cuts[g] = cut;
            rec(g + 1, cut + 1);
        }
    };
    if (k == 1) {
        std::vector<double> centroids;
        cost(centroids);
        return centroids;
    }
    rec(1, 1);
    return best_centroids;
}

}  // namespace oracle

#include <ostream>

namespace explab {
inline void PrintTo(const Cell& c, std::ostream* os) { *os << to_string(c); }
}  // namespace explab
