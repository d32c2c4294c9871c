#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "explab/avatar.hpp"
#include "explab/maze.hpp"
#include "explab/protocol.hpp"
#include "explab/session_log.hpp"

namespace explab {

enum class ServiceErrc { bad_request, not_found, conflict, internal };

std::string_view to_string(ServiceErrc code);

class ServiceError : public std::runtime_error {
public:
    ServiceError(ServiceErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ServiceErrc code() const noexcept { return code_; }

private:
    ServiceErrc code_;
};

enum class SessionStatus { active, phase_complete, finished };

std::string_view to_string(SessionStatus status);

struct PlanSelector {
    int experiment = 1;
    /// Empty or "exp1" for experiment 1; "dense" or "sparse" for experiment 2.
    std::string condition;
    /// Participant tag, stored as subject "human:<tag>".
    std::string subject_tag;
    std::optional<std::size_t> budget;
};

struct RevealedCell {
    Cell cell;
    /// Indexed by Heading.
    std::array<bool, 4> open{};
};

/// What the participant is allowed to see: cells that have entered line of
/// sight during the current phase, plus the current pose.
struct SessionView {
    std::string session_id;
    SessionStatus status = SessionStatus::active;
    int experiment = 1;
    std::string condition;
    std::string subject;
    std::string phase;
    std::size_t phase_index = 0;
    std::size_t phase_count = 0;
    PhaseRole role = PhaseRole::explore;
    std::string instruction;
    std::string maze_id;
    int width = 0;
    int height = 0;
    AvatarState pose;
    std::vector<Cell> visible;
    std::vector<RevealedCell> revealed;
    bool on_goal = false;
    bool goal_visible = false;
    std::optional<Cell> goal;
    std::vector<Cell> apples_visible;
    /// Apples eaten by the action that produced this view.
    std::vector<Cell> apples_consumed;
    std::size_t apples_eaten = 0;
    std::size_t transitions = 0;
    std::size_t budget = 0;
    PhaseOutcome outcome = PhaseOutcome::incomplete;
    double reward_sum = 0.0;
    /// Set on action responses when the move was stopped by a sealed passage.
    bool blocked_contact = false;
};

struct ServiceOptions {
    std::filesystem::path data_dir;
    /// Milliseconds used to timestamp records; defaults to the system clock.
    std::function<std::int64_t()> clock;
    std::string exp1_maze = "exp1";
    std::array<std::string, 2> exp2_mazes{"exp2a", "exp2b"};
    /// Seed for session id generation; 0 draws from std::random_device.
    std::uint64_t id_seed = 0;
};

/// Live sessions for human play. Every record is appended to the session's
/// directory under `data_dir` as it happens; constructing a service over an
/// existing directory reloads its sessions by replaying their records.
class SessionService {
public:
    explicit SessionService(ServiceOptions options);
    ~SessionService();
    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    SessionView create_session(const PlanSelector& selector);
    SessionView submit_action(const std::string& session_id, std::string_view action);
    SessionView advance_phase(const std::string& session_id);
    SessionView get_session(const std::string& session_id) const;
    /// Snapshot of everything logged so far; the running phase stays incomplete.
    SessionLog export_session(const std::string& session_id) const;

    std::vector<std::string> session_ids() const;
    /// Directories that could not be reloaded, with the reason.
    const std::vector<std::pair<std::filesystem::path, std::string>>& load_errors() const { return load_errors_; }
    const std::filesystem::path& data_dir() const { return options_.data_dir; }

private:
    struct Live;

    std::shared_ptr<Live> find(const std::string& session_id) const;
    std::string new_session_id();
    void load_existing();
    std::int64_t now() const;

    ServiceOptions options_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Live>> sessions_;
    std::vector<std::pair<std::filesystem::path, std::string>> load_errors_;
    std::uint64_t id_state_ = 0;
};

/// "explore freely" for explore phases, "find the gummy" otherwise.
std::string_view phase_instruction(PhaseRole role);

}  // namespace explab
