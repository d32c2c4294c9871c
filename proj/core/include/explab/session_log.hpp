#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "explab/agents.hpp"
#include "explab/avatar.hpp"
#include "explab/maze.hpp"

namespace explab {

/// One logged pose. `action` is empty for the phase's opening record, which
/// carries the start pose and serializes as "start".
struct TrajectoryRecord {
    std::int64_t t_ms = 0;
    std::optional<Action> action;
    AvatarState pose;

    friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

using TrajectoryLog = std::vector<TrajectoryRecord>;

class LogFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// {"t_ms":…,"action":…,"cell_x":…,"cell_y":…,"heading":…,"sub_offset":…}
std::string record_to_json_line(const TrajectoryRecord& record);
TrajectoryRecord record_from_json_line(std::string_view line);

std::string log_to_jsonl(const TrajectoryLog& log);
TrajectoryLog log_from_jsonl(std::string_view text);

/// Re-simulates the actions of `log` from its opening pose. Returned records
/// keep the original timestamps and actions with recomputed poses.
TrajectoryLog replay(const MazeSpec& maze, const TrajectoryLog& log);

enum class PhaseRole { explore, goal, blocked };
enum class PhaseOutcome { goal_reached, budget_exhausted, done, incomplete };

std::string_view to_string(PhaseRole role);
std::optional<PhaseRole> phase_role_from_string(std::string_view name);
std::string_view to_string(PhaseOutcome outcome);
std::optional<PhaseOutcome> phase_outcome_from_string(std::string_view name);

struct AppleEvent {
    std::size_t record_index = 0;
    Cell cell;

    friend bool operator==(const AppleEvent&, const AppleEvent&) = default;
};

struct PhaseLog {
    std::string label;
    std::string maze_id;
    PhaseRole role = PhaseRole::explore;
    bool apples_active = false;
    /// Edits sealed for this phase on top of the open layout.
    std::set<Edge> blocked;
    std::size_t budget = 0;
    PhaseOutcome outcome = PhaseOutcome::incomplete;
    double reward_sum = 0.0;
    std::vector<AppleEvent> apple_events;
    TrajectoryLog records;

    bool goal_active() const { return role != PhaseRole::explore; }

    friend bool operator==(const PhaseLog&, const PhaseLog&) = default;
};

struct SessionLog {
    std::string session_id;
    /// Agent kind name, or "human:<tag>".
    std::string subject;
    std::optional<AgentConfig> agent;
    int experiment = 1;
    std::string condition;
    /// Open layouts (no blocked edges) by maze id, in ASCII maze format.
    std::map<std::string, std::string> mazes;
    /// Goal cells the ASCII text cannot show because the start marker covers them.
    std::map<std::string, Cell> start_goals;
    std::vector<PhaseLog> phases;
    bool finished = false;

    bool is_human() const { return subject.starts_with("human"); }

    friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

/// Records `maze` under its id, keeping a goal that shares the start cell.
void store_maze(SessionLog& session, const MazeSpec& maze);
/// Inverse of store_maze. Throws LogFormatError for unknown ids.
MazeSpec stored_maze(const SessionLog& session, const std::string& id);

/// The maze in force during `phase`: open layout, goal hidden in explore
/// phases, apples only when active, plus the phase's blocked edges.
MazeSpec phase_maze(const SessionLog& session, const PhaseLog& phase);

std::string phase_file_name(std::string_view label);

/// Append-only `key=value` metadata; later keys override earlier ones.
std::string session_meta_text(const SessionLog& session);
/// Parses the metadata of a session directory (without records).
SessionLog session_from_meta(std::string_view text);

/// Writes `meta` and one `phase-<label>.jsonl` per phase into `dir`.
void write_session_dir(const SessionLog& session, const std::filesystem::path& dir);
SessionLog read_session_dir(const std::filesystem::path& dir);

/// Single-document form used by the HTTP export endpoint.
std::string session_to_json(const SessionLog& session);
SessionLog session_from_json(std::string_view text);

/// Serialization helpers shared with the metadata writer.
std::string format_edges(const std::set<Edge>& edges);
std::set<Edge> parse_edges(std::string_view text);
std::string flatten_maze_text(std::string_view text);
std::string unflatten_maze_text(std::string_view text);
std::string format_number(double v);

}  // namespace explab
