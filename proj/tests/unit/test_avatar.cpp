#include <gtest/gtest.h>

#include <random>

#include "explab/avatar.hpp"
#include "explab/generator.hpp"
#include "oracles.hpp"

using namespace explab;

namespace {

constexpr const char* kRing = "#####/#S..#/#.#.#/#..G#/#####";
constexpr const char* kTMaze = "#####/#...#/##S##/#####";

}  // namespace

TEST(Step, ForwardIntoWallAtBoundaryIsNoOp) {
    const MazeSpec m = oracle::maze(kRing);
    const AvatarState s{{1, 1}, kSubSteps - 1, Heading::N};
    EXPECT_EQ(step(m, s, Action::forward), s);
}

TEST(Step, TurnRightRotatesInPlace) {
    const MazeSpec m = oracle::maze(kRing);
    const AvatarState s{{1, 1}, 2, Heading::N};
    const AvatarState t = step(m, s, Action::turn_right);
    EXPECT_EQ(t.heading, Heading::E);
    EXPECT_EQ(t.cell, s.cell);
    EXPECT_EQ(t.sub_offset, s.sub_offset);
}

TEST(Step, SubStepArithmetic) {
    ASSERT_EQ(kSubSteps, 5);
    const MazeSpec m = oracle::maze(kRing);
    AvatarState s{{1, 1}, 0, Heading::E};
    for (int k = 1; k < kSubSteps; ++k) {
        s = step(m, s, Action::forward);
        EXPECT_EQ(s.cell, (Cell{1, 1}));
        EXPECT_EQ(s.sub_offset, k);
    }
    s = step(m, s, Action::forward);
    EXPECT_EQ(s, (AvatarState{{2, 1}, 0, Heading::E}));
    s = step(m, s, Action::back);
    EXPECT_EQ(s, (AvatarState{{1, 1}, kSubSteps - 1, Heading::E}));
}

TEST(Step, BackIntoWallIsNoOp) {
    const MazeSpec m = oracle::maze(kRing);
    const AvatarState s{{1, 1}, 0, Heading::E};
    EXPECT_EQ(step(m, s, Action::back), s);
}

TEST(Step, StrafeLeftShiftsToLeftNeighbour) {
    const MazeSpec m = oracle::maze(kRing);
    // Facing S at (1,1): left is E.
    const AvatarState s{{1, 1}, 3, Heading::S};
    EXPECT_EQ(step(m, s, Action::strafe_left), (AvatarState{{2, 1}, 3, Heading::S}));
    // Facing N: left is W, a wall.
    const AvatarState n{{1, 1}, 3, Heading::N};
    EXPECT_EQ(step(m, n, Action::strafe_left), n);
}

TEST(Step, BlockedEdgeActsLikeWall) {
    const MazeSpec m = apply_blocked_variant(oracle::maze(kRing), {Edge({1, 1}, {2, 1})});
    const AvatarState s{{1, 1}, kSubSteps - 1, Heading::E};
    EXPECT_EQ(step(m, s, Action::forward), s);
    EXPECT_EQ(step(m, AvatarState{{1, 1}, 0, Heading::S}, Action::strafe_left),
              (AvatarState{{1, 1}, 0, Heading::S}));
}

TEST(Step, FourRightTurnsRestoreState) {
    const MazeSpec m = oracle::maze(kRing);
    AvatarState s{{3, 2}, 3, Heading::W};
    const AvatarState original = s;
    for (int i = 0; i < 4; ++i) s = step(m, s, Action::turn_right);
    EXPECT_EQ(s, original);
}

TEST(StepFuzz, NeverLeavesFloorOrCrossesSeal) {
    std::mt19937_64 rng(11);
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        MazeSpec m = generate_maze(9, 9, seed % 2 ? MazeStyle::perfect : MazeStyle::braided, seed);
        const auto floor = m.floor_cells();
        std::uniform_int_distribution<std::size_t> pick_cell(0, floor.size() - 1);
        std::uniform_int_distribution<int> pick_offset(0, kSubSteps - 1);
        std::uniform_int_distribution<int> pick4(0, 3);
        for (int walk = 0; walk < 5; ++walk) {
            AvatarState s{floor[pick_cell(rng)], pick_offset(rng), static_cast<Heading>(pick4(rng))};
            for (int k = 0; k < 200; ++k) {
                const Action a = kActions[static_cast<std::size_t>(pick4(rng))];
                const AvatarState t = step(m, s, a);
                ASSERT_EQ(step(m, s, a), t);
                ASSERT_TRUE(valid_state(m, t));
                ASSERT_TRUE(m.is_floor(t.cell));
                if (t.cell != s.cell) {
                    ASSERT_TRUE(adjacent(s.cell, t.cell));
                    ASSERT_FALSE(m.is_blocked(s.cell, t.cell));
                }
                s = t;
            }
        }
    }
}

TEST(Observe, DeadEndOfTMazeSeesUpTheStem) {
    const MazeSpec m = oracle::maze(kTMaze);
    const Observation obs = observe(m, {{2, 2}, 0, Heading::N});
    EXPECT_EQ(obs.visible_cells, (std::vector<Cell>{{2, 1}, {2, 2}}));
    EXPECT_TRUE(obs.passable(Heading::N));
    EXPECT_FALSE(obs.passable(Heading::E));
    EXPECT_FALSE(obs.passable(Heading::S));
    EXPECT_FALSE(obs.passable(Heading::W));
    EXPECT_FALSE(obs.on_goal);
}

TEST(Observe, OnGoal) {
    const MazeSpec m = oracle::maze(kRing);
    EXPECT_TRUE(observe(m, {{3, 3}, 0, Heading::N}).on_goal);
    EXPECT_FALSE(observe(m, {{3, 2}, 0, Heading::N}).on_goal);
}

TEST(Observe, SingleCellRoom) {
    const MazeSpec m = oracle::maze("###/#S#/###");
    EXPECT_EQ(observe(m, start_state(m)).visible_cells, (std::vector<Cell>{{1, 1}}));
}

TEST(Observe, RaysStopAtSealAndShowApples) {
    const MazeSpec m = apply_blocked_variant(oracle::maze("#######/#S.a..#/#######"), {Edge({4, 1}, {5, 1})});
    const Observation obs = observe(m, start_state(m));
    EXPECT_EQ(obs.visible_cells, (std::vector<Cell>{{1, 1}, {2, 1}, {3, 1}, {4, 1}}));
    EXPECT_EQ(obs.apples_visible, (std::vector<Cell>{{3, 1}}));
}

TEST(Observe, LocalWallsAgreeWithAdjacency) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const MazeSpec m = generate_maze(7, 7, MazeStyle::braided, seed);
        for (const Cell& c : m.floor_cells()) {
            const Observation obs = observe(m, {c, 0, Heading::N});
            const auto nbrs = oracle::open_neighbors(m, c);
            for (Heading h : kHeadings) {
                const bool open = std::find(nbrs.begin(), nbrs.end(), neighbor(c, h)) != nbrs.end();
                EXPECT_EQ(obs.passable(h), open);
            }
            EXPECT_TRUE(std::binary_search(obs.visible_cells.begin(), obs.visible_cells.end(), c));
            for (const Cell& v : obs.visible_cells) EXPECT_TRUE(m.is_floor(v));
        }
    }
}

TEST(MotorPlan, TurnsThenCrossesOneCell) {
    const MazeSpec m = oracle::maze(kRing);
    AvatarState s{{1, 1}, 2, Heading::N};
    const auto plan = motor_plan(s, Heading::E);
    ASSERT_FALSE(plan.empty());
    EXPECT_EQ(plan.front(), Action::turn_right);
    for (Action a : plan) s = step(m, s, a);
    EXPECT_EQ(s.cell, (Cell{2, 1}));
    EXPECT_EQ(s.heading, Heading::E);
    EXPECT_EQ(s.sub_offset, 0);
}

TEST(Actions, NamesRoundTrip) {
    for (Action a : kActions) EXPECT_EQ(action_from_string(to_string(a)), a);
    EXPECT_FALSE(action_from_string("jump").has_value());
}
