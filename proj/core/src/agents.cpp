#include "explab/agents.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace explab {

std::string_view to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::dfs: return "dfs";
        case AgentKind::random: return "random";
        case AgentKind::qlearn: return "qlearn";
        case AgentKind::countbonus: return "countbonus";
    }
    return "dfs";
}

std::optional<AgentKind> agent_kind_from_string(std::string_view name) {
    for (AgentKind k : {AgentKind::dfs, AgentKind::random, AgentKind::qlearn, AgentKind::countbonus}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// AgentConfig

void AgentConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must be in [0, 1]");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in [0, 1)");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    if (!std::isfinite(optimistic_init)) throw std::invalid_argument("optimistic_init must be finite");
}

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("bad value for " + std::string(key) + ": '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

std::string AgentConfig::to_kv() const {
    std::ostringstream out;
    out << "kind=" << to_string(kind) << '\n'
        << "seed=" << seed << '\n'
        << "epsilon=" << format_double(epsilon) << '\n'
        << "alpha=" << format_double(alpha) << '\n'
        << "gamma=" << format_double(gamma) << '\n'
        << "beta=" << format_double(beta) << '\n'
        << "optimistic_init=" << format_double(optimistic_init) << '\n';
    return out.str();
}

AgentConfig AgentConfig::from_kv(std::string_view text) {
    AgentConfig config;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "kind") {
            const auto kind = agent_kind_from_string(value);
            if (!kind) throw std::invalid_argument("unknown agent kind '" + value + "'");
            config.kind = *kind;
        } else if (key == "seed") {
            std::uint64_t seed = 0;
            const auto res = std::from_chars(value.data(), value.data() + value.size(), seed);
            if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
                throw std::invalid_argument("bad seed '" + value + "'");
            }
            config.seed = seed;
        } else if (key == "epsilon") {
            config.epsilon = parse_double(key, value);
        } else if (key == "alpha") {
            config.alpha = parse_double(key, value);
        } else if (key == "gamma") {
            config.gamma = parse_double(key, value);
        } else if (key == "beta") {
            config.beta = parse_double(key, value);
        } else if (key == "optimistic_init") {
            config.optimistic_init = parse_double(key, value);
        } else {
            throw std::invalid_argument("unknown agent config key '" + key + "'");
        }
    }
    config.validate();
    return config;
}

// ---------------------------------------------------------------------------
// Memory

void AgentMemory::note(const Observation& obs) {
    const Cell c = obs.current_cell;
    ++visit_counts[c];
    known_open[c] = obs.open;
    if (visited.insert(c).second) visit_order.push_back(c);
}

void AgentMemory::clear_search() {
    visited.clear();
    visit_order.clear();
    branch_stack.clear();
}

namespace {

std::vector<Heading> open_directions(const Observation& obs) {
    std::vector<Heading> out;
    for (Heading h : kHeadings) {
        if (obs.passable(h)) out.push_back(h);
    }
    return out;
}

bool has_unvisited_neighbor(const AgentMemory& mem, Cell c) {
    const auto it = mem.known_open.find(c);
    if (it == mem.known_open.end()) return false;
    for (Heading h : kHeadings) {
        if (it->second[static_cast<int>(h)] && !mem.visited.contains(neighbor(c, h))) return true;
    }
    return false;
}

bool known_passable(const AgentMemory& mem, Cell c, Heading h) {
    const auto it = mem.known_open.find(c);
    return it != mem.known_open.end() && it->second[static_cast<int>(h)];
}

/// First step from `from` along a shortest path to `to` using only visited cells.
std::optional<Heading> step_toward(const AgentMemory& mem, Cell from, Cell to) {
    std::map<Cell, int> dist{{to, 0}};
    std::deque<Cell> queue{to};
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        if (c == from) break;
        for (Heading h : kHeadings) {
            const Cell n = neighbor(c, h);
            if (!mem.visited.contains(n) || dist.contains(n)) continue;
            if (!known_passable(mem, c, h) && !known_passable(mem, n, opposite(h))) continue;
            dist[n] = dist[c] + 1;
            queue.push_back(n);
        }
    }
    const auto here = dist.find(from);
    if (here == dist.end()) return std::nullopt;
    for (Heading h : kHeadings) {
        if (!known_passable(mem, from, h)) continue;
        const auto it = dist.find(neighbor(from, h));
        if (it != dist.end() && it->second == here->second - 1) return h;
    }
    return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Policies

Decision dfs_act(const Observation& obs, AgentMemory& mem) {
    mem.note(obs);
    for (Heading h : kHeadings) {
        if (obs.passable(h) && !mem.visited.contains(neighbor(obs.current_cell, h))) return h;
    }
    mem.branch_stack.clear();
    for (const Cell& c : mem.visit_order) {
        if (has_unvisited_neighbor(mem, c)) mem.branch_stack.push_back(c);
    }
    if (mem.branch_stack.empty()) return std::nullopt;
    return step_toward(mem, obs.current_cell, mem.branch_stack.back());
}

Decision random_act(const Observation& obs, AgentMemory& mem) {
    mem.note(obs);
    const auto dirs = open_directions(obs);
    if (dirs.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, dirs.size() - 1);
    return dirs[pick(mem.rng)];
}

double q_value(const AgentMemory& mem, const QKey& key, const AgentConfig& config) {
    const auto it = mem.q_table.find(key);
    return it == mem.q_table.end() ? config.optimistic_init : it->second;
}

Decision qlearn_act(const Observation& obs, AgentMemory& mem, const AgentConfig& config) {
    mem.note(obs);
    const auto dirs = open_directions(obs);
    if (dirs.empty()) return std::nullopt;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (config.epsilon > 0.0 && unit(mem.rng) < config.epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, dirs.size() - 1);
        return dirs[pick(mem.rng)];
    }
    double best = -std::numeric_limits<double>::infinity();
    std::vector<Heading> argmax;
    for (Heading h : dirs) {
        const double q = q_value(mem, {obs.current_cell, obs.heading, h}, config);
        if (q > best) {
            best = q;
            argmax.assign(1, h);
        } else if (q == best) {
            argmax.push_back(h);
        }
    }
    if (argmax.size() == 1) return argmax.front();
    std::uniform_int_distribution<std::size_t> pick(0, argmax.size() - 1);
    return argmax[pick(mem.rng)];
}

void qlearn_update(AgentMemory& mem, const Transition& t, const AgentConfig& config) {
    double bootstrap = 0.0;
    if (!t.terminal) {
        bool any = false;
        double best = -std::numeric_limits<double>::infinity();
        for (Heading h : kHeadings) {
            if (!t.next_open[static_cast<int>(h)]) continue;
            best = std::max(best, q_value(mem, {t.next_cell, t.next_heading, h}, config));
            any = true;
        }
        bootstrap = any ? best : 0.0;
    }
    const QKey key{t.cell, t.heading, t.move};
    const double current = q_value(mem, key, config);
    const double target = t.reward + config.gamma * bootstrap;
    mem.q_table[key] = current + config.alpha * (target - current);
}

Decision countbonus_act(const Observation& obs, AgentMemory& mem, const AgentConfig& config) {
    mem.note(obs);
    std::optional<Heading> choice;
    double best = -std::numeric_limits<double>::infinity();
    for (Heading h : open_directions(obs)) {
        const auto it = mem.visit_counts.find(neighbor(obs.current_cell, h));
        const int count = it == mem.visit_counts.end() ? 0 : it->second;
        const double bonus = config.beta / std::sqrt(static_cast<double>(count) + 1.0);
        if (bonus > best) {
            best = bonus;
            choice = h;
        }
    }
    return choice;
}

// ---------------------------------------------------------------------------
// Agent

Agent::Agent(AgentConfig config) : config_(config) {
    config_.validate();
    memory_.rng.seed(config_.seed);
}

Decision Agent::act(const Observation& obs) {
    switch (config_.kind) {
        case AgentKind::dfs: return dfs_act(obs, memory_);
        case AgentKind::random: return random_act(obs, memory_);
        case AgentKind::qlearn: return qlearn_act(obs, memory_, config_);
        case AgentKind::countbonus: return countbonus_act(obs, memory_, config_);
    }
    return std::nullopt;
}

void Agent::learn(const Transition& t) {
    if (learns()) qlearn_update(memory_, t, config_);
}

void Agent::replay_backward(const std::vector<Transition>& transitions) {
    if (!learns()) return;
    for (auto it = transitions.rbegin(); it != transitions.rend(); ++it) qlearn_update(memory_, *it, config_);
}

void Agent::begin_phase() {
    if (config_.kind == AgentKind::dfs) memory_.clear_search();
}

void Agent::begin_maze() {
    memory_.clear_search();
    memory_.known_open.clear();
    memory_.visit_counts.clear();
}

}  // namespace explab
