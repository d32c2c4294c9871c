#include "explab/session_log.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace explab {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Records

std::string record_to_json_line(const TrajectoryRecord& record) {
    ordered_json j;
    j["t_ms"] = record.t_ms;
    j["action"] = record.action ? std::string(to_string(*record.action)) : std::string("start");
    j["cell_x"] = record.pose.cell.x;
    j["cell_y"] = record.pose.cell.y;
    j["heading"] = std::string(1, heading_char(record.pose.heading));
    j["sub_offset"] = record.pose.sub_offset;
    return j.dump();
}

namespace {

TrajectoryRecord record_from_json(const ordered_json& j) {
    TrajectoryRecord r;
    try {
        r.t_ms = j.at("t_ms").get<std::int64_t>();
        const auto action = j.at("action").get<std::string>();
        if (action != "start") {
            r.action = action_from_string(action);
            if (!r.action) throw LogFormatError("unknown action '" + action + "'");
        }
        r.pose.cell = {j.at("cell_x").get<int>(), j.at("cell_y").get<int>()};
        const auto heading = j.at("heading").get<std::string>();
        const auto h = heading.size() == 1 ? heading_from_char(heading[0]) : std::nullopt;
        if (!h) throw LogFormatError("bad heading '" + heading + "'");
        r.pose.heading = *h;
        r.pose.sub_offset = j.at("sub_offset").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw LogFormatError(std::string("bad trajectory record: ") + e.what());
    }
    return r;
}

ordered_json record_to_json(const TrajectoryRecord& r) { return ordered_json::parse(record_to_json_line(r)); }

}  // namespace

TrajectoryRecord record_from_json_line(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw LogFormatError(std::string("bad JSON line: ") + e.what());
    }
    return record_from_json(j);
}

std::string log_to_jsonl(const TrajectoryLog& log) {
    std::string out;
    for (const auto& r : log) {
        out += record_to_json_line(r);
        out += '\n';
    }
    return out;
}

TrajectoryLog log_from_jsonl(std::string_view text) {
    TrajectoryLog log;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            log.push_back(record_from_json_line(line));
        } catch (const LogFormatError& e) {
            throw LogFormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return log;
}

TrajectoryLog replay(const MazeSpec& maze, const TrajectoryLog& log) {
    TrajectoryLog out;
    out.reserve(log.size());
    AvatarState state{};
    for (const auto& r : log) {
        if (!r.action) {
            state = r.pose;
        } else {
            state = step(maze, state, *r.action);
        }
        out.push_back({r.t_ms, r.action, state});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Enums

std::string_view to_string(PhaseRole role) {
    switch (role) {
        case PhaseRole::explore: return "explore";
        case PhaseRole::goal: return "goal";
        case PhaseRole::blocked: return "blocked";
    }
    return "explore";
}

std::optional<PhaseRole> phase_role_from_string(std::string_view name) {
    for (PhaseRole r : {PhaseRole::explore, PhaseRole::goal, PhaseRole::blocked}) {
        if (to_string(r) == name) return r;
    }
    return std::nullopt;
}

std::string_view to_string(PhaseOutcome outcome) {
    switch (outcome) {
        case PhaseOutcome::goal_reached: return "goal_reached";
        case PhaseOutcome::budget_exhausted: return "budget_exhausted";
        case PhaseOutcome::done: return "done";
        case PhaseOutcome::incomplete: return "incomplete";
    }
    return "incomplete";
}

std::optional<PhaseOutcome> phase_outcome_from_string(std::string_view name) {
    for (PhaseOutcome o : {PhaseOutcome::goal_reached, PhaseOutcome::budget_exhausted, PhaseOutcome::done,
                           PhaseOutcome::incomplete}) {
        if (to_string(o) == name) return o;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Helpers

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_number(std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw LogFormatError("bad number '" + std::string(text) + "'");
    }
    return v;
}

long long parse_integer(std::string_view text) {
    long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw LogFormatError("bad integer '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (true) {
        const auto pos = text.find(sep, begin);
        out.emplace_back(text.substr(begin, pos == std::string_view::npos ? std::string_view::npos : pos - begin));
        if (pos == std::string_view::npos) break;
        begin = pos + 1;
    }
    return out;
}

Cell parse_cell(std::string_view text) {
    // "(x,y)"
    if (text.size() < 5 || text.front() != '(' || text.back() != ')') {
        throw LogFormatError("bad cell '" + std::string(text) + "'");
    }
    const auto parts = split(text.substr(1, text.size() - 2), ',');
    if (parts.size() != 2) throw LogFormatError("bad cell '" + std::string(text) + "'");
    return {static_cast<int>(parse_integer(parts[0])), static_cast<int>(parse_integer(parts[1]))};
}

}  // namespace

std::string format_edges(const std::set<Edge>& edges) {
    std::string out;
    for (const Edge& e : edges) {
        if (!out.empty()) out += ';';
        out += to_string(e);
    }
    return out;
}

std::set<Edge> parse_edges(std::string_view text) {
    std::set<Edge> out;
    if (text.empty()) return out;
    for (const auto& item : split(text, ';')) {
        const auto dash = item.find(")-(");
        if (dash == std::string::npos) throw LogFormatError("bad edge '" + item + "'");
        const Cell a = parse_cell(std::string_view(item).substr(0, dash + 1));
        const Cell b = parse_cell(std::string_view(item).substr(dash + 2));
        if (!adjacent(a, b)) throw LogFormatError("edge joins non-adjacent cells '" + item + "'");
        out.insert(Edge(a, b));
    }
    return out;
}

std::string flatten_maze_text(std::string_view text) {
    std::string out(text);
    while (!out.empty() && out.back() == '\n') out.pop_back();
    std::replace(out.begin(), out.end(), '\n', '/');
    return out;
}

std::string unflatten_maze_text(std::string_view text) {
    std::string out(text);
    std::replace(out.begin(), out.end(), '/', '\n');
    out += '\n';
    return out;
}

void store_maze(SessionLog& session, const MazeSpec& maze) {
    session.mazes[maze.id()] = render_maze(maze);
    if (maze.goal() == maze.start_cell()) {
        session.start_goals[maze.id()] = maze.start_cell();
    } else {
        session.start_goals.erase(maze.id());
    }
}

MazeSpec stored_maze(const SessionLog& session, const std::string& id) {
    const auto it = session.mazes.find(id);
    if (it == session.mazes.end()) throw LogFormatError("session has no maze '" + id + "'");
    MazeSpec maze = parse_maze(it->second, id);
    if (const auto g = session.start_goals.find(id); g != session.start_goals.end()) {
        if (g->second != maze.start_cell()) throw LogFormatError("maze '" + id + "' start goal is not the start cell");
        maze = maze.with_goal(g->second);
    }
    return maze;
}

MazeSpec phase_maze(const SessionLog& session, const PhaseLog& phase) {
    MazeSpec maze = stored_maze(session, phase.maze_id).without_blocks();
    if (!phase.goal_active()) maze = maze.with_goal(std::nullopt);
    if (!phase.apples_active) maze = maze.with_apples({});
    return apply_blocked_variant(maze, phase.blocked);
}

std::string phase_file_name(std::string_view label) { return "phase-" + std::string(label) + ".jsonl"; }

// ---------------------------------------------------------------------------
// Metadata

std::string session_meta_text(const SessionLog& session) {
    std::ostringstream out;
    out << "session_id=" << session.session_id << '\n'
        << "subject=" << session.subject << '\n'
        << "experiment=" << session.experiment << '\n'
        << "condition=" << session.condition << '\n';
    if (session.finished) out << "finished=1\n";
    if (session.agent) {
        std::istringstream kv(session.agent->to_kv());
        std::string line;
        while (std::getline(kv, line)) out << "agent." << line << '\n';
    }
    for (const auto& [id, text] : session.mazes) out << "maze." << id << '=' << flatten_maze_text(text) << '\n';
    for (const auto& [id, c] : session.start_goals) out << "start_goal." << id << '=' << c.x << ',' << c.y << '\n';
    for (const auto& p : session.phases) {
        const std::string prefix = "phase." + p.label + ".";
        out << "phase=" << p.label << '\n'
            << prefix << "maze=" << p.maze_id << '\n'
            << prefix << "role=" << to_string(p.role) << '\n'
            << prefix << "apples=" << (p.apples_active ? 1 : 0) << '\n'
            << prefix << "budget=" << p.budget << '\n'
            << prefix << "blocked=" << format_edges(p.blocked) << '\n'
            << prefix << "outcome=" << to_string(p.outcome) << '\n'
            << prefix << "reward_sum=" << format_number(p.reward_sum) << '\n';
        for (const auto& ev : p.apple_events) {
            out << "apple." << p.label << '=' << ev.record_index << ',' << ev.cell.x << ',' << ev.cell.y << '\n';
        }
    }
    return out.str();
}

SessionLog session_from_meta(std::string_view text) {
    SessionLog s;
    std::string agent_kv;
    std::map<std::string, std::size_t> phase_index;
    auto phase_for = [&](const std::string& label) -> PhaseLog& {
        const auto it = phase_index.find(label);
        if (it == phase_index.end()) throw LogFormatError("phase '" + label + "' used before declaration");
        return s.phases[it->second];
    };

    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw LogFormatError("meta line without '=': '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);

        if (key == "session_id") {
            s.session_id = value;
        } else if (key == "subject") {
            s.subject = value;
        } else if (key == "experiment") {
            s.experiment = static_cast<int>(parse_integer(value));
        } else if (key == "condition") {
            s.condition = value;
        } else if (key == "finished") {
            s.finished = value == "1";
        } else if (key.starts_with("agent.")) {
            agent_kv += key.substr(6) + "=" + value + "\n";
        } else if (key.starts_with("maze.")) {
            s.mazes[key.substr(5)] = unflatten_maze_text(value);
        } else if (key.starts_with("start_goal.")) {
            const auto comma = value.find(',');
            if (comma == std::string::npos) throw LogFormatError("bad start_goal '" + value + "'");
            s.start_goals[key.substr(11)] = Cell{static_cast<int>(parse_integer(value.substr(0, comma))),
                                                 static_cast<int>(parse_integer(value.substr(comma + 1)))};
        } else if (key == "phase") {
            if (!phase_index.contains(value)) {
                phase_index[value] = s.phases.size();
                PhaseLog phase;
                phase.label = value;
                s.phases.push_back(std::move(phase));
            }
        } else if (key.starts_with("phase.")) {
            const auto dot = key.find('.', 6);
            if (dot == std::string::npos) throw LogFormatError("bad phase key '" + key + "'");
            PhaseLog& p = phase_for(key.substr(6, dot - 6));
            const std::string field = key.substr(dot + 1);
            if (field == "maze") {
                p.maze_id = value;
            } else if (field == "role") {
                const auto role = phase_role_from_string(value);
                if (!role) throw LogFormatError("bad phase role '" + value + "'");
                p.role = *role;
            } else if (field == "apples") {
                p.apples_active = value == "1";
            } else if (field == "budget") {
                p.budget = static_cast<std::size_t>(parse_integer(value));
            } else if (field == "blocked") {
                p.blocked = parse_edges(value);
            } else if (field == "outcome") {
                const auto outcome = phase_outcome_from_string(value);
                if (!outcome) throw LogFormatError("bad phase outcome '" + value + "'");
                p.outcome = *outcome;
            } else if (field == "reward_sum") {
                p.reward_sum = parse_number(value);
            } else {
                throw LogFormatError("unknown phase field '" + field + "'");
            }
        } else if (key.starts_with("apple.")) {
            PhaseLog& p = phase_for(key.substr(6));
            const auto parts = split(value, ',');
            if (parts.size() != 3) throw LogFormatError("bad apple event '" + value + "'");
            p.apple_events.push_back({static_cast<std::size_t>(parse_integer(parts[0])),
                                      {static_cast<int>(parse_integer(parts[1])),
                                       static_cast<int>(parse_integer(parts[2]))}});
        } else {
            throw LogFormatError("unknown meta key '" + key + "'");
        }
    }
    if (s.session_id.empty()) throw LogFormatError("meta lacks session_id");
    if (!agent_kv.empty()) {
        try {
            s.agent = AgentConfig::from_kv(agent_kv);
        } catch (const std::invalid_argument& e) {
            throw LogFormatError(std::string("bad agent config: ") + e.what());
        }
    }
    return s;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LogFormatError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

void write_session_dir(const SessionLog& session, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "meta", session_meta_text(session));
    for (const auto& p : session.phases) write_file(dir / phase_file_name(p.label), log_to_jsonl(p.records));
}

SessionLog read_session_dir(const std::filesystem::path& dir) {
    SessionLog s = session_from_meta(read_file(dir / "meta"));
    for (auto& p : s.phases) {
        const auto file = dir / phase_file_name(p.label);
        if (!std::filesystem::exists(file)) continue;
        try {
            p.records = log_from_jsonl(read_file(file));
        } catch (const LogFormatError& e) {
            throw LogFormatError(file.filename().string() + ": " + e.what());
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// JSON document

std::string session_to_json(const SessionLog& session) {
    ordered_json j;
    j["session_id"] = session.session_id;
    j["subject"] = session.subject;
    j["experiment"] = session.experiment;
    j["condition"] = session.condition;
    j["finished"] = session.finished;
    if (session.agent) {
        ordered_json a;
        a["kind"] = std::string(to_string(session.agent->kind));
        a["seed"] = session.agent->seed;
        a["epsilon"] = session.agent->epsilon;
        a["alpha"] = session.agent->alpha;
        a["gamma"] = session.agent->gamma;
        a["beta"] = session.agent->beta;
        a["optimistic_init"] = session.agent->optimistic_init;
        j["agent"] = a;
    } else {
        j["agent"] = nullptr;
    }
    j["mazes"] = ordered_json::object();
    for (const auto& [id, text] : session.mazes) j["mazes"][id] = text;
    if (!session.start_goals.empty()) {
        j["start_goals"] = ordered_json::object();
        for (const auto& [id, c] : session.start_goals) j["start_goals"][id] = {{"x", c.x}, {"y", c.y}};
    }
    j["phases"] = ordered_json::array();
    for (const auto& p : session.phases) {
        ordered_json pj;
        pj["label"] = p.label;
        pj["maze"] = p.maze_id;
        pj["role"] = std::string(to_string(p.role));
        pj["apples_active"] = p.apples_active;
        pj["blocked"] = format_edges(p.blocked);
        pj["budget"] = p.budget;
        pj["outcome"] = std::string(to_string(p.outcome));
        pj["reward_sum"] = p.reward_sum;
        pj["apple_events"] = ordered_json::array();
        for (const auto& ev : p.apple_events) {
            pj["apple_events"].push_back({{"record_index", ev.record_index}, {"cell_x", ev.cell.x}, {"cell_y", ev.cell.y}});
        }
        pj["records"] = ordered_json::array();
        for (const auto& r : p.records) pj["records"].push_back(record_to_json(r));
        j["phases"].push_back(std::move(pj));
    }
    return j.dump();
}

SessionLog session_from_json(std::string_view text) {
    SessionLog s;
    try {
        const auto j = ordered_json::parse(text);
        s.session_id = j.at("session_id").get<std::string>();
        s.subject = j.at("subject").get<std::string>();
        s.experiment = j.at("experiment").get<int>();
        s.condition = j.at("condition").get<std::string>();
        s.finished = j.value("finished", false);
        if (!j.at("agent").is_null()) {
            const auto& a = j.at("agent");
            AgentConfig config;
            const auto kind = agent_kind_from_string(a.at("kind").get<std::string>());
            if (!kind) throw LogFormatError("bad agent kind");
            config.kind = *kind;
            config.seed = a.at("seed").get<std::uint64_t>();
            config.epsilon = a.at("epsilon").get<double>();
            config.alpha = a.at("alpha").get<double>();
            config.gamma = a.at("gamma").get<double>();
            config.beta = a.at("beta").get<double>();
            config.optimistic_init = a.at("optimistic_init").get<double>();
            s.agent = config;
        }
        for (const auto& [id, text] : j.at("mazes").items()) s.mazes[id] = text.get<std::string>();
        if (j.contains("start_goals")) {
            for (const auto& [id, c] : j.at("start_goals").items()) {
                s.start_goals[id] = Cell{c.at("x").get<int>(), c.at("y").get<int>()};
            }
        }
        for (const auto& pj : j.at("phases")) {
            PhaseLog p;
            p.label = pj.at("label").get<std::string>();
            p.maze_id = pj.at("maze").get<std::string>();
            const auto role = phase_role_from_string(pj.at("role").get<std::string>());
            const auto outcome = phase_outcome_from_string(pj.at("outcome").get<std::string>());
            if (!role || !outcome) throw LogFormatError("bad phase role or outcome");
            p.role = *role;
            p.outcome = *outcome;
            p.apples_active = pj.at("apples_active").get<bool>();
            p.blocked = parse_edges(pj.at("blocked").get<std::string>());
            p.budget = pj.at("budget").get<std::size_t>();
            p.reward_sum = pj.at("reward_sum").get<double>();
            for (const auto& ev : pj.at("apple_events")) {
                p.apple_events.push_back({ev.at("record_index").get<std::size_t>(),
                                          {ev.at("cell_x").get<int>(), ev.at("cell_y").get<int>()}});
            }
            for (const auto& r : pj.at("records")) p.records.push_back(record_from_json(r));
            s.phases.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw LogFormatError(std::string("bad session document: ") + e.what());
    }
    return s;
}

}  // namespace explab
