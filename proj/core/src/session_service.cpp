#include "explab/session_service.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "explab/generator.hpp"

namespace explab {

std::string_view to_string(ServiceErrc code) {
    switch (code) {
        case ServiceErrc::bad_request: return "bad_request";
        case ServiceErrc::not_found: return "not_found";
        case ServiceErrc::conflict: return "conflict";
        case ServiceErrc::internal: return "internal";
    }
    return "internal";
}

std::string_view to_string(SessionStatus status) {
    switch (status) {
        case SessionStatus::active: return "active";
        case SessionStatus::phase_complete: return "phase_complete";
        case SessionStatus::finished: return "finished";
    }
    return "active";
}

std::string_view phase_instruction(PhaseRole role) {
    return role == PhaseRole::explore ? "explore freely" : "find the gummy";
}

struct SessionService::Live {
    mutable std::mutex mutex;
    std::filesystem::path dir;
    ExperimentPlan plan;
    /// Header plus declared phases; records of the running phase live in `engine`.
    SessionLog log;
    std::size_t phase_index = 0;
    std::optional<PhaseEngine> engine;
    std::set<Cell> revealed;
    /// Sealed passages the participant has bumped into this phase.
    std::set<Edge> contacted;
    SessionStatus status = SessionStatus::active;
    /// Clock reading at t_ms = 0.
    std::int64_t epoch = 0;
    std::int64_t last_t = 0;

    std::int64_t stamp(std::int64_t clock_ms) {
        last_t = std::max(last_t, clock_ms - epoch);
        return last_t;
    }

    /// The layout as the participant knows it: sealed passages look open until touched.
    MazeSpec apparent() const {
        if (contacted.empty() || engine->maze().blocked_edges().empty()) return engine->maze().without_blocks();
        return apply_blocked_variant(engine->maze().without_blocks(), contacted);
    }

    void reveal() {
        const Observation obs = observe(apparent(), engine->state());
        revealed.insert(obs.visible_cells.begin(), obs.visible_cells.end());
    }

    void start_phase() {
        revealed.clear();
        contacted.clear();
        reveal();
    }

    /// The sealed edge `action` ran into from `before`, if any.
    std::optional<Edge> contact(const AvatarState& before, Action action) const {
        if (engine->state() != before || engine->plan().blocked.empty()) return std::nullopt;
        std::optional<Heading> toward;
        if (action == Action::forward && before.sub_offset == kSubSteps - 1) toward = before.heading;
        if (action == Action::back && before.sub_offset == 0) toward = opposite(before.heading);
        if (action == Action::strafe_left) toward = rotate_left(before.heading);
        if (!toward) return std::nullopt;
        const Edge e(before.cell, neighbor(before.cell, *toward));
        if (!engine->plan().blocked.contains(e)) return std::nullopt;
        return e;
    }

    void apply(Action action, std::int64_t t_ms, bool* bumped = nullptr) {
        const AvatarState before = engine->state();
        engine->apply(action, t_ms);
        const auto edge = contact(before, action);
        if (edge) contacted.insert(*edge);
        if (bumped) *bumped = edge.has_value();
    }

    void sync_phase() { log.phases[phase_index] = engine->log(); }

    SessionLog snapshot() const {
        SessionLog copy = log;
        if (engine) copy.phases[phase_index] = engine->log();
        return copy;
    }

    SessionView view() const;
};

SessionView SessionService::Live::view() const {
    SessionView v;
    v.session_id = log.session_id;
    v.status = status;
    v.experiment = log.experiment;
    v.condition = log.condition;
    v.subject = log.subject;
    v.phase_count = plan.phases.size();
    v.phase_index = phase_index;
    const PhasePlan& phase = plan.phases[phase_index];
    v.phase = phase.label;
    v.role = phase.role;
    v.instruction = std::string(phase_instruction(phase.role));
    const MazeSpec maze = apparent();
    v.maze_id = maze.id();
    v.width = maze.width();
    v.height = maze.height();
    v.pose = engine->state();
    const Observation obs = observe(maze, engine->state());
    v.visible = obs.visible_cells;
    for (const Cell& c : revealed) {
        RevealedCell rc{c, {}};
        for (int h = 0; h < 4; ++h) rc.open[h] = maze.passable(c, static_cast<Heading>(h));
        v.revealed.push_back(rc);
    }
    v.on_goal = obs.on_goal;
    if (maze.goal() && revealed.contains(*maze.goal())) {
        v.goal_visible = std::binary_search(obs.visible_cells.begin(), obs.visible_cells.end(), *maze.goal());
        v.goal = maze.goal();
    }
    v.apples_visible = obs.apples_visible;
    const PhaseLog& plog = engine->log();
    v.apples_eaten = plog.apple_events.size();
    v.transitions = engine->transitions();
    v.budget = phase.budget;
    v.outcome = plog.outcome;
    v.reward_sum = plog.reward_sum;
    return v;
}

namespace {

void append_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out << text;
    out.flush();
    if (!out) throw ServiceError(ServiceErrc::internal, "cannot append to " + path.string());
}

std::string phase_end_lines(const PhaseLog& p) {
    const std::string prefix = "phase." + p.label + ".";
    return prefix + "outcome=" + std::string(to_string(p.outcome)) + "\n" + prefix +
           "reward_sum=" + format_number(p.reward_sum) + "\n";
}

bool valid_tag(std::string_view tag) {
    if (tag.empty() || tag.size() > 64) return false;
    return std::all_of(tag.begin(), tag.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    });
}

MazeSpec service_maze(const std::string& id) {
    if (auto m = builtin_maze(id)) return *m;
    try {
        return load_maze_ref(id);
    } catch (const std::exception& e) {
        throw ServiceError(ServiceErrc::internal, "cannot load maze '" + id + "': " + e.what());
    }
}

/// Rebuilds the plan a session was created with from its declared phases.
ExperimentPlan plan_from_log(const SessionLog& log) {
    ExperimentPlan plan;
    plan.experiment = log.experiment;
    plan.condition = log.condition;
    std::map<std::string, std::size_t> index;
    for (const auto& [id, text] : log.mazes) {
        index[id] = plan.mazes.size();
        plan.mazes.push_back(stored_maze(log, id));
    }
    for (const auto& p : log.phases) {
        const auto it = index.find(p.maze_id);
        if (it == index.end()) throw LogFormatError("phase " + p.label + " names unknown maze '" + p.maze_id + "'");
        plan.phases.push_back({p.label, it->second, p.role, p.apples_active, p.blocked, p.budget});
    }
    if (plan.phases.empty()) throw LogFormatError("session declares no phases");
    return plan;
}

}  // namespace

SessionService::SessionService(ServiceOptions options) : options_(std::move(options)) {
    if (options_.data_dir.empty()) throw std::invalid_argument("session service needs a data directory");
    std::filesystem::create_directories(options_.data_dir);
    id_state_ = options_.id_seed != 0 ? options_.id_seed : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
    load_existing();
}

SessionService::~SessionService() = default;

std::int64_t SessionService::now() const {
    if (options_.clock) return options_.clock();
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string SessionService::new_session_id() {
    std::mt19937_64 rng(id_state_);
    for (;;) {
        const std::uint64_t v = rng();
        id_state_ = rng();
        std::ostringstream out;
        out << std::hex;
        out.width(16);
        out.fill('0');
        out << v;
        std::string id = "h" + out.str();
        if (!sessions_.contains(id) && !std::filesystem::exists(options_.data_dir / id)) return id;
    }
}

std::shared_ptr<SessionService::Live> SessionService::find(const std::string& session_id) const {
    std::shared_lock lock(map_mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw ServiceError(ServiceErrc::not_found, "unknown session '" + session_id + "'");
    return it->second;
}

std::vector<std::string> SessionService::session_ids() const {
    std::shared_lock lock(map_mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, live] : sessions_) ids.push_back(id);
    return ids;
}

SessionView SessionService::create_session(const PlanSelector& selector) {
    if (!valid_tag(selector.subject_tag)) {
        throw ServiceError(ServiceErrc::bad_request, "subject tag must be 1-64 characters of [A-Za-z0-9_-]");
    }
    if (selector.budget && *selector.budget == 0) throw ServiceError(ServiceErrc::bad_request, "budget must be positive");

    auto live = std::make_shared<Live>();
    try {
        if (selector.experiment == 1) {
            if (!selector.condition.empty() && selector.condition != "exp1") {
                throw ServiceError(ServiceErrc::bad_request,
                                   "experiment 1 has no condition '" + selector.condition + "'");
            }
            live->plan = make_experiment1_plan(service_maze(options_.exp1_maze), selector.budget);
        } else if (selector.experiment == 2) {
            if (selector.condition != "dense" && selector.condition != "sparse") {
                throw ServiceError(ServiceErrc::bad_request,
                                   "experiment 2 condition must be dense or sparse, got '" + selector.condition + "'");
            }
            live->plan = make_experiment2_plan(selector.condition, service_maze(options_.exp2_mazes[0]),
                                               service_maze(options_.exp2_mazes[1]), selector.budget);
        } else {
            throw ServiceError(ServiceErrc::bad_request,
                               "unknown experiment " + std::to_string(selector.experiment) + " (1|2)");
        }
    } catch (const ProtocolError& e) {
        throw ServiceError(ServiceErrc::internal, e.what());
    }

    SessionLog& log = live->log;
    log.subject = "human:" + selector.subject_tag;
    log.experiment = live->plan.experiment;
    log.condition = live->plan.condition;
    for (const auto& m : live->plan.mazes) store_maze(log, m);
    for (const auto& p : live->plan.phases) {
        PhaseLog pl;
        pl.label = p.label;
        pl.maze_id = live->plan.maze_for(p).id();
        pl.role = p.role;
        pl.apples_active = p.apples_active;
        pl.blocked = p.blocked;
        pl.budget = p.budget;
        log.phases.push_back(std::move(pl));
    }

    std::unique_lock map_lock(map_mutex_);
    log.session_id = new_session_id();
    live->dir = options_.data_dir / log.session_id;
    std::filesystem::create_directories(live->dir);
    append_text(live->dir / "meta", session_meta_text(log));

    live->epoch = now();
    const std::int64_t t = live->stamp(live->epoch);
    const PhasePlan& first = live->plan.phases.front();
    live->engine.emplace(live->plan.phase_maze(first), first, live->plan.rewards, t);
    append_text(live->dir / phase_file_name(first.label), record_to_json_line(live->engine->log().records.front()) + "\n");
    live->reveal();
    if (live->engine->finished()) {
        live->status = SessionStatus::phase_complete;
        append_text(live->dir / "meta", phase_end_lines(live->engine->log()));
    }
    live->sync_phase();
    sessions_.emplace(log.session_id, live);
    return live->view();
}

SessionView SessionService::submit_action(const std::string& session_id, std::string_view action_name) {
    const auto live = find(session_id);
    const auto action = action_from_string(action_name);
    if (!action) {
        throw ServiceError(ServiceErrc::bad_request, "unknown action '" + std::string(action_name) +
                                                         "'; legal actions: forward, back, strafe_left, turn_right");
    }
    std::lock_guard lock(live->mutex);
    if (live->status == SessionStatus::finished) throw ServiceError(ServiceErrc::conflict, "session is finished");
    if (live->status == SessionStatus::phase_complete) {
        throw ServiceError(ServiceErrc::conflict, "phase " + live->plan.phases[live->phase_index].label +
                                                      " is complete; advance to continue");
    }

    PhaseEngine& engine = *live->engine;
    const std::int64_t t = live->stamp(now());
    const std::size_t apples_before = engine.log().apple_events.size();
    bool bumped = false;
    live->apply(*action, t, &bumped);
    const bool finished_now = engine.finished();
    const PhaseLog& plog = engine.log();
    const bool ate = plog.apple_events.size() > apples_before;

    std::string meta_lines;
    if (ate) {
        const auto& ev = plog.apple_events.back();
        meta_lines += "apple." + plog.label + "=" + std::to_string(ev.record_index) + "," + std::to_string(ev.cell.x) +
                      "," + std::to_string(ev.cell.y) + "\n";
    }
    if (finished_now) {
        live->status = SessionStatus::phase_complete;
        meta_lines += phase_end_lines(plog);
    }
    append_text(live->dir / phase_file_name(plog.label), record_to_json_line(plog.records.back()) + "\n");
    if (!meta_lines.empty()) append_text(live->dir / "meta", meta_lines);

    live->reveal();
    SessionView v = live->view();
    if (ate) v.apples_consumed.push_back(plog.apple_events.back().cell);
    v.blocked_contact = bumped;
    return v;
}

SessionView SessionService::advance_phase(const std::string& session_id) {
    const auto live = find(session_id);
    std::lock_guard lock(live->mutex);
    if (live->status == SessionStatus::finished) throw ServiceError(ServiceErrc::conflict, "session is finished");
    if (live->status == SessionStatus::active) {
        throw ServiceError(ServiceErrc::conflict,
                           "phase " + live->plan.phases[live->phase_index].label + " is still running");
    }
    live->sync_phase();
    if (live->phase_index + 1 >= live->plan.phases.size()) {
        append_text(live->dir / "meta", "finished=1\n");
        live->log.finished = true;
        live->status = SessionStatus::finished;
        return live->view();
    }
    ++live->phase_index;
    const PhasePlan& next = live->plan.phases[live->phase_index];
    const std::int64_t t = live->stamp(now());
    live->engine.emplace(live->plan.phase_maze(next), next, live->plan.rewards, t);
    append_text(live->dir / phase_file_name(next.label), record_to_json_line(live->engine->log().records.front()) + "\n");
    live->start_phase();
    live->status = SessionStatus::active;
    if (live->engine->finished()) {
        live->status = SessionStatus::phase_complete;
        append_text(live->dir / "meta", phase_end_lines(live->engine->log()));
    }
    live->sync_phase();
    return live->view();
}

SessionView SessionService::get_session(const std::string& session_id) const {
    const auto live = find(session_id);
    std::lock_guard lock(live->mutex);
    return live->view();
}

SessionLog SessionService::export_session(const std::string& session_id) const {
    const auto live = find(session_id);
    std::lock_guard lock(live->mutex);
    return live->snapshot();
}

void SessionService::load_existing() {
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(options_.data_dir)) {
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "meta")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        try {
            SessionLog stored = read_session_dir(dir);
            if (!stored.is_human()) continue;
            auto live = std::make_shared<Live>();
            live->dir = dir;
            live->plan = plan_from_log(stored);

            std::size_t current = 0;
            for (std::size_t i = 0; i < stored.phases.size(); ++i) {
                if (!stored.phases[i].records.empty()) current = i;
            }
            live->log = stored;
            for (auto& p : live->log.phases) {
                p.records.clear();
                p.apple_events.clear();
                p.outcome = PhaseOutcome::incomplete;
                p.reward_sum = 0.0;
            }
            for (std::size_t i = 0; i <= current; ++i) {
                const PhasePlan& plan = live->plan.phases[i];
                const TrajectoryLog& records = stored.phases[i].records;
                if (records.empty()) throw LogFormatError("phase " + plan.label + " has no records");
                live->phase_index = i;
                live->engine.emplace(live->plan.phase_maze(plan), plan, live->plan.rewards, records.front().t_ms);
                live->start_phase();
                if (live->engine->state() != records.front().pose) {
                    throw LogFormatError("phase " + plan.label + " does not open at the start pose");
                }
                for (std::size_t r = 1; r < records.size(); ++r) {
                    const auto& rec = records[r];
                    if (!rec.action) throw LogFormatError("phase " + plan.label + " has a second start record");
                    if (live->engine->finished()) throw LogFormatError("phase " + plan.label + " continues after its end");
                    live->apply(*rec.action, rec.t_ms);
                    if (live->engine->state() != rec.pose) {
                        throw LogFormatError("phase " + plan.label + " record " + std::to_string(r) +
                                             " disagrees with replay");
                    }
                    live->reveal();
                }
                live->sync_phase();
                live->last_t = std::max(live->last_t, records.back().t_ms);
            }
            // Time spent offline is not counted.
            live->epoch = now() - live->last_t;
            live->log.finished = stored.finished;
            if (stored.finished) {
                live->status = SessionStatus::finished;
            } else {
                live->status =
                    live->engine->finished() ? SessionStatus::phase_complete : SessionStatus::active;
            }
            sessions_.emplace(live->log.session_id, live);
        } catch (const std::exception& e) {
            load_errors_.emplace_back(dir, e.what());
        }
    }
}

}  // namespace explab
