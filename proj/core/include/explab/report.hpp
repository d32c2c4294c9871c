#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "explab/session_log.hpp"

namespace explab {

/// Metrics for one (session, phase) row.
struct PhaseMetrics {
    std::string session_id;
    std::string subject;
    std::string condition;
    int experiment = 1;
    std::string phase;
    PhaseRole role = PhaseRole::explore;
    bool human = false;
    double coverage = 0.0;
    /// Present when the goal was entered.
    std::optional<std::size_t> steps_to_goal;
    /// Absent in explore phases (no goal).
    std::optional<bool> dnf;
    double consistency_fraction = 1.0;
    std::size_t decision_count = 0;
    std::size_t consistent_count = 0;
    double re_exploration = 0.0;
    std::size_t cells_crossed = 0;
    /// From phase start to goal entry, or to the last record.
    std::int64_t duration_ms = 0;
};

PhaseMetrics analyze_phase(const SessionLog& session, const PhaseLog& phase);
std::vector<PhaseMetrics> analyze_session(const SessionLog& session);

/// Fixed per-session column set, in order.
const std::vector<std::string>& phase_csv_columns();
std::string phase_metrics_csv(const std::vector<PhaseMetrics>& rows);

struct CohortRow {
    std::string section;
    std::string group;
    std::string phase;
    std::string metric;
    std::size_t n = 0;
    std::string value;
};

inline constexpr const char* kInsufficientData = "insufficient data";

struct CohortOptions {
    std::size_t clusters = 3;
    std::uint64_t seed = 0;
    std::uint64_t permutation_iterations = 10000;
};

/// Group means per (condition/subject, phase), explorer clusters over
/// free-exploration coverage, and significance tests (no-goal vs goal
/// consistency; dense vs sparse per phase).
std::vector<CohortRow> cohort_summary(const std::vector<PhaseMetrics>& rows, const CohortOptions& options = {});
std::string cohort_csv(const std::vector<CohortRow>& rows);

struct LoadedLogs {
    std::vector<SessionLog> sessions;
    /// (path, message) for directories that failed to load.
    std::vector<std::pair<std::filesystem::path, std::string>> errors;
};

/// Loads `dir` itself if it holds a `meta` file, else each immediate
/// subdirectory that does. Sessions are sorted by id.
LoadedLogs load_log_dir(const std::filesystem::path& dir);

struct AnalysisReport {
    std::vector<PhaseMetrics> phases;
    std::vector<CohortRow> cohort;
};

/// Runs the per-phase metrics over every loaded session; sessions whose
/// analysis fails become `error` rows in the cohort table.
AnalysisReport analyze_logs(const LoadedLogs& logs, const CohortOptions& options = {});

}  // namespace explab
