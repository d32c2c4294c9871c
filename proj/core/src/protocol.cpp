#include "explab/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "explab/generator.hpp"

namespace explab {

MazeSpec ExperimentPlan::phase_maze(const PhasePlan& phase) const {
    MazeSpec maze = maze_for(phase).without_blocks();
    if (phase.role == PhaseRole::explore) maze = maze.with_goal(std::nullopt);
    if (!phase.apples_active) maze = maze.with_apples({});
    return apply_blocked_variant(maze, phase.blocked);
}

// ---------------------------------------------------------------------------
// Plans

std::set<Edge> default_block_edits(const MazeSpec& open_maze) {
    if (!open_maze.goal()) throw ProtocolError("maze '" + open_maze.id() + "' has no goal to block");
    const auto path = shortest_path(open_maze, open_maze.start_cell(), *open_maze.goal());
    std::optional<Edge> best;
    int best_detour = -1;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const Edge e(path[i], path[i + 1]);
        const MazeSpec probe = open_maze.without_blocks().with_goal(std::nullopt);
        const auto dist = distance_field(apply_blocked_variant(probe, {e}), open_maze.start_cell());
        const Cell goal = *open_maze.goal();
        const int d = dist[static_cast<std::size_t>(goal.y) * open_maze.width() + goal.x];
        if (d > best_detour) {
            best_detour = d;
            best = e;
        }
    }
    if (!best) {
        throw ProtocolError("maze '" + open_maze.id() + "' has no alternate route to the goal; cannot build a "
                            "blocked variant");
    }
    return {*best};
}

std::set<Edge> block_edits_for(const MazeSpec& maze) {
    if (!maze.blocked_edges().empty()) return maze.blocked_edges();
    return default_block_edits(maze.without_blocks());
}

namespace {

std::size_t budget_for(const MazeSpec& maze, std::optional<std::size_t> budget) {
    if (budget) {
        if (*budget == 0) throw ProtocolError("phase budget must be positive");
        return *budget;
    }
    return kDefaultBudgetFactor * reachable_cells(maze).size();
}

void check_blocked_variant(const MazeSpec& open, const std::set<Edge>& edits) {
    try {
        apply_blocked_variant(open, edits);
    } catch (const MazeError& e) {
        throw ProtocolError("invalid blocked variant for maze '" + open.id() + "': " + e.what());
    }
}

}  // namespace

ExperimentPlan make_experiment1_plan(const MazeSpec& maze, std::optional<std::size_t> budget) {
    if (!maze.goal()) throw ProtocolError("experiment 1 needs a maze with a goal");
    const MazeSpec open = maze.without_blocks().with_apples({});
    const auto edits = block_edits_for(maze);
    check_blocked_variant(open, edits);

    ExperimentPlan plan;
    plan.experiment = 1;
    plan.condition = "exp1";
    plan.mazes.push_back(open);
    plan.phases.push_back({"A", 0, PhaseRole::explore, false, {}, 0});
    plan.phases.push_back({"B", 0, PhaseRole::goal, false, {}, 0});
    plan.phases.push_back({"C", 0, PhaseRole::blocked, false, edits, 0});
    for (auto& p : plan.phases) p.budget = budget_for(plan.phase_maze(p), budget);
    return plan;
}

void validate_apple_trail(const MazeSpec& maze) {
    if (maze.apples().empty()) throw ProtocolError("maze '" + maze.id() + "' has no apples for the dense condition");
    if (!maze.goal()) throw ProtocolError("maze '" + maze.id() + "' has no goal");
    std::set<Cell> seen{maze.start_cell()};
    std::deque<Cell> queue{maze.start_cell()};
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        if (c == *maze.goal()) return;
        for (const Cell& n : maze.passable_neighbors(c)) {
            if (seen.contains(n) || !(maze.apples().contains(n) || n == *maze.goal())) continue;
            seen.insert(n);
            queue.push_back(n);
        }
    }
    throw ProtocolError("apples in maze '" + maze.id() + "' do not form a trail from start to goal");
}

ExperimentPlan make_experiment2_plan(std::string_view condition, const MazeSpec& first, const MazeSpec& second,
                                     std::optional<std::size_t> budget) {
    const bool dense = condition == "dense";
    if (!dense && condition != "sparse") {
        throw ProtocolError("unknown experiment 2 condition '" + std::string(condition) + "' (dense|sparse)");
    }
    ExperimentPlan plan;
    plan.experiment = 2;
    plan.condition = std::string(condition);
    int label = 1;
    for (const MazeSpec* maze : {&first, &second}) {
        if (!maze->goal()) throw ProtocolError("experiment 2 maze '" + maze->id() + "' has no goal");
        if (dense) validate_apple_trail(maze->without_blocks());
        MazeSpec open = maze->without_blocks();
        if (!plan.mazes.empty() && plan.mazes.front().id() == open.id() &&
            render_maze(plan.mazes.front()) != render_maze(open)) {
            open = open.with_id(open.id() + "-2");
        }
        const auto edits = block_edits_for(*maze);
        check_blocked_variant(open, edits);
        const std::size_t index = plan.mazes.size();
        plan.mazes.push_back(open);
        plan.phases.push_back({std::to_string(label++), index, dense ? PhaseRole::goal : PhaseRole::explore, dense,
                               {}, 0});
        plan.phases.push_back({std::to_string(label++), index, PhaseRole::goal, false, {}, 0});
        plan.phases.push_back({std::to_string(label++), index, PhaseRole::blocked, false, edits, 0});
    }
    for (auto& p : plan.phases) p.budget = budget_for(plan.phase_maze(p), budget);
    return plan;
}

// ---------------------------------------------------------------------------
// PhaseEngine

PhaseEngine::PhaseEngine(MazeSpec maze, PhasePlan plan, RewardSchedule rewards, std::int64_t start_ms)
    : maze_(std::move(maze)), plan_(std::move(plan)), rewards_(rewards), state_(start_state(maze_)) {
    log_.label = plan_.label;
    log_.maze_id = maze_.id();
    log_.role = plan_.role;
    log_.apples_active = plan_.apples_active;
    log_.blocked = plan_.blocked;
    log_.budget = plan_.budget;
    log_.records.push_back({start_ms, std::nullopt, state_});
    reachable_ = reachable_cells(maze_);
    visited_.insert(state_.cell);
    check_end();
}

PhaseEngine::StepResult PhaseEngine::apply(Action action, std::int64_t t_ms) {
    if (finished()) throw ProtocolError("phase " + plan_.label + " is already finished");
    StepResult result;
    const AvatarState next = step(maze_, state_, action);
    result.moved_cell = next.cell != state_.cell;
    state_ = next;
    log_.records.push_back({t_ms, action, state_});
    if (result.moved_cell) {
        ++transitions_;
        visited_.insert(state_.cell);
        result.reward += rewards_.step_cost;
        if (plan_.apples_active && maze_.apples().contains(state_.cell) && eaten_.insert(state_.cell).second) {
            result.apple = state_.cell;
            result.reward += rewards_.apple;
            log_.apple_events.push_back({log_.records.size() - 1, state_.cell});
        }
        if (plan_.role != PhaseRole::explore && maze_.goal() == state_.cell) result.reward += rewards_.goal;
        log_.reward_sum += result.reward;
        check_end();
    }
    result.finished = finished();
    return result;
}

void PhaseEngine::finish(PhaseOutcome outcome) {
    if (!finished()) log_.outcome = outcome;
}

void PhaseEngine::check_end() {
    if (finished()) return;
    if (plan_.role != PhaseRole::explore && maze_.goal() == state_.cell) {
        log_.outcome = PhaseOutcome::goal_reached;
    } else if (plan_.role == PhaseRole::explore && visited_.size() >= reachable_.size()) {
        log_.outcome = PhaseOutcome::done;
    } else if (transitions_ >= plan_.budget) {
        log_.outcome = PhaseOutcome::budget_exhausted;
    }
}

// ---------------------------------------------------------------------------
// Runners

std::string default_session_id(const AgentConfig& config, const ExperimentPlan& plan) {
    std::string id = std::string(to_string(config.kind)) + "-exp" + std::to_string(plan.experiment);
    if (plan.experiment == 2) id += "-" + plan.condition;
    return id + "-s" + std::to_string(config.seed);
}

SessionLog run_session(const AgentConfig& config, const ExperimentPlan& plan, std::string session_id) {
    Agent agent(config);
    SessionLog log;
    log.session_id = session_id.empty() ? default_session_id(config, plan) : std::move(session_id);
    log.subject = std::string(to_string(config.kind));
    log.agent = config;
    log.experiment = plan.experiment;
    log.condition = plan.condition;
    for (const auto& m : plan.mazes) store_maze(log, m);

    std::int64_t clock = 0;
    std::optional<std::size_t> current_maze;
    for (const auto& phase : plan.phases) {
        if (current_maze != phase.maze_index) {
            agent.begin_maze();
            current_maze = phase.maze_index;
        }
        agent.begin_phase();
        clock += kAgentActionMs;
        PhaseEngine engine(plan.phase_maze(phase), phase, plan.rewards, clock);
        std::vector<Transition> transitions;
        while (!engine.finished()) {
            const Observation obs = engine.observation();
            const Decision decision = agent.act(obs);
            if (!decision) {
                engine.finish(PhaseOutcome::done);
                break;
            }
            Transition t;
            t.cell = obs.current_cell;
            t.heading = obs.heading;
            t.move = *decision;
            for (Action a : motor_plan(engine.state(), *decision)) {
                clock += kAgentActionMs;
                t.reward += engine.apply(a, clock).reward;
            }
            const Observation after = engine.observation();
            t.next_cell = after.current_cell;
            t.next_heading = after.heading;
            t.next_open = after.open;
            t.terminal = engine.log().outcome == PhaseOutcome::goal_reached;
            agent.learn(t);
            transitions.push_back(t);
        }
        agent.replay_backward(transitions);
        log.phases.push_back(engine.log());
    }
    log.finished = true;
    return log;
}

SessionLog run_experiment1(const AgentConfig& config, const MazeSpec& maze, std::optional<std::size_t> budget,
                           std::string session_id) {
    return run_session(config, make_experiment1_plan(maze, budget), std::move(session_id));
}

SessionLog run_experiment2(const AgentConfig& config, std::string_view condition, const MazeSpec& first,
                           const MazeSpec& second, std::optional<std::size_t> budget, std::string session_id) {
    return run_session(config, make_experiment2_plan(condition, first, second, budget), std::move(session_id));
}

Agent train_qlearning(const MazeSpec& maze, const AgentConfig& config, int episodes, std::size_t max_steps,
                      const RewardSchedule& rewards) {
    if (config.kind != AgentKind::qlearn) throw ProtocolError("train_qlearning needs a qlearn agent");
    if (!maze.goal()) throw ProtocolError("training maze '" + maze.id() + "' has no goal");
    Agent agent(config);
    for (int ep = 0; ep < episodes; ++ep) {
        AvatarState state = start_state(maze);
        for (std::size_t moves = 0; moves < max_steps && state.cell != *maze.goal(); ++moves) {
            const Observation obs = observe(maze, state);
            const Decision decision = agent.act(obs);
            if (!decision) break;
            for (Action a : motor_plan(state, *decision)) state = step(maze, state, a);
            const Observation after = observe(maze, state);
            const bool terminal = state.cell == *maze.goal();
            agent.learn({obs.current_cell, obs.heading, *decision,
                         rewards.step_cost + (terminal ? rewards.goal : 0.0), after.current_cell, after.heading,
                         after.open, terminal});
        }
    }
    return agent;
}

std::optional<std::size_t> greedy_path_length(const Agent& agent, const MazeSpec& maze, std::size_t max_steps) {
    if (!maze.goal()) throw ProtocolError("maze '" + maze.id() + "' has no goal");
    AgentConfig greedy = agent.config();
    greedy.epsilon = 0.0;
    AgentMemory mem = agent.memory();
    AvatarState state = start_state(maze);
    for (std::size_t moves = 0; moves <= max_steps; ++moves) {
        if (state.cell == *maze.goal()) return moves;
        const Decision decision = qlearn_act(observe(maze, state), mem, greedy);
        if (!decision) return std::nullopt;
        for (Action a : motor_plan(state, *decision)) state = step(maze, state, a);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Batch

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ProtocolError("cannot read maze file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename T>
bool parse_int(const std::string& text, T& out) {
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

}  // namespace

MazeSpec load_maze_ref(std::string_view ref) {
    if (auto builtin = builtin_maze(ref)) return *builtin;
    const std::filesystem::path path{std::string(ref)};
    try {
        return parse_maze(read_text(path), path.stem().string());
    } catch (const MazeError& e) {
        throw ProtocolError("maze '" + path.string() + "': " + e.what());
    }
}

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
    std::vector<ManifestEntry> entries;
    std::set<std::string> ids;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;

        ManifestEntry e;
        e.line = line_no;
        std::string agent_kv;
        std::istringstream fields(line);
        std::string token;
        while (fields >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) {
                e.error = "expected key=value, got '" + token + "'";
                break;
            }
            const std::string key = token.substr(0, eq);
            const std::string value = token.substr(eq + 1);
            if (key == "session") {
                e.session_id = value;
            } else if (key == "experiment") {
                if (!parse_int(value, e.experiment) || (e.experiment != 1 && e.experiment != 2)) {
                    e.error = "experiment must be 1 or 2";
                }
            } else if (key == "condition") {
                e.condition = value;
            } else if (key == "maze") {
                std::string item;
                std::istringstream parts(value);
                while (std::getline(parts, item, ',')) e.mazes.push_back(item);
            } else if (key == "budget") {
                std::size_t b = 0;
                if (!parse_int(value, b) || b == 0) {
                    e.error = "budget must be a positive integer";
                } else {
                    e.budget = b;
                }
            } else if (key == "kind" || key == "seed" || key == "epsilon" || key == "alpha" || key == "gamma" ||
                       key == "beta" || key == "optimistic_init") {
                agent_kv += key + "=" + value + "\n";
            } else {
                e.error = "unknown manifest key '" + key + "'";
            }
        }
        if (e.error.empty()) {
            try {
                e.agent = AgentConfig::from_kv(agent_kv);
            } catch (const std::invalid_argument& ex) {
                e.error = ex.what();
            }
        }
        if (e.error.empty() && e.mazes.empty()) e.mazes = e.experiment == 1 ? std::vector<std::string>{"exp1"}
                                                                           : std::vector<std::string>{"exp2a", "exp2b"};
        if (e.experiment == 2 && e.condition.empty() && e.error.empty()) e.error = "experiment 2 needs condition=";
        if (e.experiment == 1 && e.condition.empty()) e.condition = "exp1";
        if (e.session_id.empty() && !e.error.empty()) {
            e.session_id = "line-" + std::to_string(line_no);
        } else if (e.session_id.empty()) {
            e.session_id = std::string(to_string(e.agent.kind)) + "-exp" + std::to_string(e.experiment) +
                           (e.experiment == 2 ? "-" + e.condition : std::string()) + "-s" +
                           std::to_string(e.agent.seed);
        }
        const bool safe_id = !e.session_id.empty() && e.session_id.front() != '.' &&
                             std::all_of(e.session_id.begin(), e.session_id.end(), [](char c) {
                                 return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
                             });
        if (!safe_id && e.error.empty()) e.error = "session id may only use letters, digits, '-', '_' and '.'";
        if (!ids.insert(e.session_id).second && e.error.empty()) {
            e.error = "duplicate session id '" + e.session_id + "'";
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<BatchRow> batch_run(const std::vector<ManifestEntry>& manifest, const std::filesystem::path& out_dir,
                                unsigned jobs) {
    if (manifest.empty()) throw ProtocolError("batch manifest is empty");
    std::filesystem::create_directories(out_dir);
    std::vector<BatchRow> rows(manifest.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < manifest.size(); i = next++) {
            const ManifestEntry& e = manifest[i];
            BatchRow& row = rows[i];
            row.session_id = e.session_id;
            if (!e.error.empty()) {
                row.message = "line " + std::to_string(e.line) + ": " + e.error;
                continue;
            }
            try {
                SessionLog log;
                if (e.experiment == 1) {
                    if (e.mazes.size() != 1) throw ProtocolError("experiment 1 takes exactly one maze");
                    log = run_experiment1(e.agent, load_maze_ref(e.mazes[0]), e.budget, e.session_id);
                } else {
                    if (e.mazes.size() != 2) throw ProtocolError("experiment 2 takes exactly two mazes");
                    log = run_experiment2(e.agent, e.condition, load_maze_ref(e.mazes[0]),
                                          load_maze_ref(e.mazes[1]), e.budget, e.session_id);
                }
                row.path = out_dir / e.session_id;
                write_session_dir(log, row.path);
                row.ok = true;
            } catch (const std::exception& ex) {
                row.message = ex.what();
            }
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(manifest.size())));
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    pool.clear();

    std::ofstream summary(out_dir / "batch.csv", std::ios::trunc);
    summary << csv::row({"session_id", "status", "message", "path"});
    for (const auto& row : rows) {
        summary << csv::row({row.session_id, row.ok ? "ok" : "error", row.message, row.path.string()});
    }
    return rows;
}

}  // namespace explab
