#include <gtest/gtest.h>

#include "explab/generator.hpp"
#include "explab/protocol.hpp"
#include "oracles.hpp"

using namespace explab;

namespace {

std::size_t oracle_edges(const MazeSpec& m) {
    std::size_t twice = 0;
    for (const Cell& c : m.floor_cells()) twice += oracle::open_neighbors(m, c).size();
    return twice / 2;
}

}  // namespace

TEST(Generator, PerfectMazeIsSpanningTree) {
    const MazeSpec m = generate_maze(9, 9, MazeStyle::perfect, 1);
    EXPECT_EQ(oracle_edges(m), m.floor_count() - 1);
    EXPECT_EQ(passable_edge_count(m), m.floor_count() - 1);
    EXPECT_EQ(oracle::reachable(m).size(), m.floor_count());
}

TEST(Generator, BraidedMazeHasLoops) {
    const MazeSpec m = generate_maze(9, 9, MazeStyle::braided, 1);
    EXPECT_GT(oracle_edges(m), m.floor_count() - 1);
    EXPECT_EQ(oracle::reachable(m).size(), m.floor_count());
}

TEST(Generator, SameSeedSameText) {
    for (auto style : {MazeStyle::perfect, MazeStyle::braided}) {
        EXPECT_EQ(render_maze(generate_maze(11, 9, style, 42)), render_maze(generate_maze(11, 9, style, 42)));
    }
    EXPECT_NE(render_maze(generate_maze(11, 9, MazeStyle::perfect, 1)),
              render_maze(generate_maze(11, 9, MazeStyle::perfect, 2)));
}

TEST(Generator, StartAndGoalAreMaximallyDistant) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const MazeSpec m = generate_maze(9, 9, seed % 2 ? MazeStyle::perfect : MazeStyle::braided, seed);
        ASSERT_TRUE(m.goal().has_value());
        int diameter = 0;
        for (const Cell& c : m.floor_cells()) {
            for (const auto& [other, d] : oracle::bfs(m, c)) diameter = std::max(diameter, d);
        }
        EXPECT_EQ(oracle::bfs(m, m.start_cell()).at(*m.goal()), diameter) << "seed " << seed;
    }
}

TEST(Generator, PropertiesOverManySeeds) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        for (int w : {5, 7, 9, 13}) {
            const MazeSpec p = generate_maze(w, 7, MazeStyle::perfect, seed);
            EXPECT_EQ(oracle_edges(p), p.floor_count() - 1);
            const MazeSpec b = generate_maze(w, 7, MazeStyle::braided, seed);
            EXPECT_GT(oracle_edges(b), b.floor_count() - 1);
        }
    }
}

TEST(Generator, RejectsBadDimensions) {
    EXPECT_THROW(generate_maze(8, 9, MazeStyle::perfect, 1), std::invalid_argument);
    EXPECT_THROW(generate_maze(9, 3, MazeStyle::perfect, 1), std::invalid_argument);
    EXPECT_THROW(generate_maze(-5, 9, MazeStyle::braided, 1), std::invalid_argument);
}

TEST(Builtins, LayoutsSuitTheProtocols) {
    for (const char* id : {"exp1", "exp2a", "exp2b"}) {
        const auto m = builtin_maze(id);
        ASSERT_TRUE(m.has_value()) << id;
        ASSERT_TRUE(m->goal().has_value());
        EXPECT_GE(oracle::decision_points(*m).size(), 3u) << id;
        EXPECT_GT(oracle_edges(*m), m->floor_count() - 1) << id << " needs a loop for the detour";
        EXPECT_NO_THROW(default_block_edits(*m)) << id;
    }
    EXPECT_NO_THROW(validate_apple_trail(*builtin_maze("exp2a")));
    EXPECT_NO_THROW(validate_apple_trail(*builtin_maze("exp2b")));
    EXPECT_FALSE(builtin_maze("nope").has_value());
}
