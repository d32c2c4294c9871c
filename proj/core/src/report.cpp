#include "explab/report.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "csv.hpp"
#include "explab/analysis.hpp"
#include "explab/stats.hpp"

namespace explab {

PhaseMetrics analyze_phase(const SessionLog& session, const PhaseLog& phase) {
    const MazeSpec maze = phase_maze(session, phase);
    const CellTrajectory traj = discretize(phase.records, maze);

    PhaseMetrics m;
    m.session_id = session.session_id;
    m.subject = session.subject;
    m.condition = session.condition;
    m.experiment = session.experiment;
    m.phase = phase.label;
    m.role = phase.role;
    m.human = session.is_human();
    m.coverage = coverage(traj, maze);
    m.re_exploration = re_exploration(traj);
    m.cells_crossed = cells_crossed(traj);

    const auto consistency = dfs_consistency(traj, maze);
    m.consistency_fraction = consistency.fraction;
    m.decision_count = consistency.decisions.size();
    m.consistent_count = consistency.consistent_count();

    std::int64_t end_ms = phase.records.empty() ? 0 : phase.records.back().t_ms;
    if (maze.goal()) {
        m.steps_to_goal = steps_to_goal(traj, maze);
        m.dnf = !m.steps_to_goal.has_value();
        if (m.steps_to_goal) {
            const auto it = std::find_if(phase.records.begin(), phase.records.end(),
                                         [&](const TrajectoryRecord& r) { return r.pose.cell == *maze.goal(); });
            end_ms = it->t_ms;
        }
    }
    m.duration_ms = phase.records.empty() ? 0 : end_ms - phase.records.front().t_ms;
    return m;
}

std::vector<PhaseMetrics> analyze_session(const SessionLog& session) {
    std::vector<PhaseMetrics> out;
    for (const auto& phase : session.phases) {
        if (!phase.records.empty()) out.push_back(analyze_phase(session, phase));
    }
    return out;
}

const std::vector<std::string>& phase_csv_columns() {
    static const std::vector<std::string> kColumns{
        "session_id", "agent_kind_or_human", "condition",   "phase",           "coverage",       "steps_to_goal",
        "dnf",        "consistency_fraction", "decision_count", "re_exploration", "cells_crossed", "duration_ms"};
    return kColumns;
}

std::string phase_metrics_csv(const std::vector<PhaseMetrics>& rows) {
    std::string out = csv::row(phase_csv_columns());
    for (const auto& m : rows) {
        out += csv::row({m.session_id, m.subject, m.condition, m.phase, format_number(m.coverage),
                         m.steps_to_goal ? std::to_string(*m.steps_to_goal) : std::string(),
                         m.dnf ? (*m.dnf ? "1" : "0") : std::string(), format_number(m.consistency_fraction),
                         std::to_string(m.decision_count), format_number(m.re_exploration),
                         std::to_string(m.cells_crossed), std::to_string(m.duration_ms)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cohort

namespace {

std::string subject_class(const PhaseMetrics& m) { return m.human ? "human" : m.subject; }

void add(std::vector<CohortRow>& out, std::string section, std::string group, std::string phase, std::string metric,
         std::size_t n, std::string value) {
    out.push_back({std::move(section), std::move(group), std::move(phase), std::move(metric), n, std::move(value)});
}

void add_mean(std::vector<CohortRow>& out, const std::string& group, const std::string& phase,
              const std::string& metric, const std::vector<double>& values) {
    add(out, "phase_mean", group, phase, metric, values.size(),
        values.empty() ? std::string(kInsufficientData) : format_number(mean(values)));
}

/// Phase labels in first-appearance order, with a stable fallback sort.
std::vector<std::string> phase_order(const std::vector<PhaseMetrics>& rows) {
    std::vector<std::string> order;
    for (const auto& m : rows) {
        if (std::find(order.begin(), order.end(), m.phase) == order.end()) order.push_back(m.phase);
    }
    return order;
}

void group_means(const std::vector<PhaseMetrics>& rows, std::vector<CohortRow>& out) {
    std::map<std::string, std::vector<const PhaseMetrics*>> groups;
    for (const auto& m : rows) groups[m.condition + "/" + subject_class(m)].push_back(&m);
    for (const auto& [group, members] : groups) {
        std::vector<PhaseMetrics> flat;
        for (const auto* m : members) flat.push_back(*m);
        for (const auto& phase : phase_order(flat)) {
            std::vector<double> cov, crossed, goal_steps, time_to_goal, reexp, duration, consistency, dnf;
            std::size_t decisions = 0;
            std::size_t consistent = 0;
            for (const auto* m : members) {
                if (m->phase != phase) continue;
                cov.push_back(m->coverage);
                crossed.push_back(static_cast<double>(m->cells_crossed));
                reexp.push_back(m->re_exploration);
                duration.push_back(static_cast<double>(m->duration_ms));
                consistency.push_back(m->consistency_fraction);
                decisions += m->decision_count;
                consistent += m->consistent_count;
                if (m->dnf) dnf.push_back(*m->dnf ? 1.0 : 0.0);
                if (m->steps_to_goal) {
                    goal_steps.push_back(static_cast<double>(*m->steps_to_goal));
                    time_to_goal.push_back(static_cast<double>(m->duration_ms));
                }
            }
            add_mean(out, group, phase, "coverage", cov);
            add_mean(out, group, phase, "steps_taken", crossed);
            add_mean(out, group, phase, "cells_crossed", crossed);
            add_mean(out, group, phase, "re_exploration", reexp);
            add_mean(out, group, phase, "duration_ms", duration);
            if (!dnf.empty()) {
                add_mean(out, group, phase, "steps_to_goal", goal_steps);
                add_mean(out, group, phase, "time_to_goal_ms", time_to_goal);
                add_mean(out, group, phase, "dnf_rate", dnf);
            }
            add_mean(out, group, phase, "consistency_mean", consistency);
            add(out, "phase_mean", group, phase, "consistency_pooled", decisions,
                format_number(decisions == 0 ? 1.0
                                             : static_cast<double>(consistent) / static_cast<double>(decisions)));
        }
    }
}

void explorer_clusters(const std::vector<PhaseMetrics>& rows, const CohortOptions& options,
                       std::vector<CohortRow>& out) {
    // First explore phase of each session, and the goal phase right after it.
    std::vector<std::string> sessions;
    std::map<std::string, const PhaseMetrics*> explore;
    std::map<std::string, const PhaseMetrics*> followup;
    for (const auto& m : rows) {
        if (m.role == PhaseRole::explore && !explore.contains(m.session_id)) {
            explore[m.session_id] = &m;
            sessions.push_back(m.session_id);
        } else if (m.role == PhaseRole::goal && explore.contains(m.session_id) && !followup.contains(m.session_id)) {
            followup[m.session_id] = &m;
        }
    }
    if (sessions.size() < options.clusters) {
        add(out, "cluster", "-", "explore", "centroid", sessions.size(), kInsufficientData);
        return;
    }
    std::vector<double> values;
    for (const auto& id : sessions) values.push_back(explore[id]->coverage);
    const ClusterResult clusters = cluster_explorers(values, options.clusters, options.seed);
    for (std::size_t c = 0; c < clusters.centroids.size(); ++c) {
        add(out, "cluster", clusters.names[c], "explore", "centroid", clusters.sizes[c],
            format_number(clusters.centroids[c]));
        std::vector<double> steps;
        std::size_t finished = 0;
        for (std::size_t i = 0; i < sessions.size(); ++i) {
            if (clusters.labels[i] != c) continue;
            const auto it = followup.find(sessions[i]);
            if (it != followup.end() && it->second->steps_to_goal) {
                steps.push_back(static_cast<double>(*it->second->steps_to_goal));
                ++finished;
            }
        }
        add(out, "cluster", clusters.names[c], "goal", "steps_to_goal_mean", finished,
            steps.empty() ? std::string(kInsufficientData) : format_number(mean(steps)));
    }
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        add(out, "cluster_member", clusters.names[clusters.labels[i]], explore[sessions[i]]->phase, sessions[i], 1,
            format_number(values[i]));
    }
}

void compare(std::vector<CohortRow>& out, const std::string& group, const std::string& phase,
             const std::string& metric, const std::vector<double>& a, const std::vector<double>& b,
             const CohortOptions& options) {
    const std::size_t n = a.size() + b.size();
    if (a.empty() || b.empty()) {
        add(out, "test", group, phase, metric + "_permutation_p", n, kInsufficientData);
        return;
    }
    const auto perm = permutation_test(a, b, options.permutation_iterations, options.seed);
    add(out, "test", group, phase, metric + "_mean_a", a.size(), format_number(mean(a)));
    add(out, "test", group, phase, metric + "_mean_b", b.size(), format_number(mean(b)));
    add(out, "test", group, phase, metric + "_median_a", a.size(), format_number(median(a)));
    add(out, "test", group, phase, metric + "_median_b", b.size(), format_number(median(b)));
    add(out, "test", group, phase, metric + "_permutation_p", n, format_number(perm.p_value));
    const auto t = welch_t(a, b);
    add(out, "test", group, phase, metric + "_welch_t", n, t ? format_number(*t) : std::string(kInsufficientData));
}

void significance_tests(const std::vector<PhaseMetrics>& rows, const CohortOptions& options,
                        std::vector<CohortRow>& out) {
    // Consistency in free exploration (a) versus the goal phase that follows it (b).
    std::map<std::string, const PhaseMetrics*> explore;
    std::set<std::string> paired;
    std::vector<double> no_goal;
    std::vector<double> goal;
    for (const auto& m : rows) {
        if (m.role == PhaseRole::explore && !explore.contains(m.session_id)) {
            explore[m.session_id] = &m;
            no_goal.push_back(m.consistency_fraction);
        } else if (m.role == PhaseRole::goal && explore.contains(m.session_id) && paired.insert(m.session_id).second) {
            goal.push_back(m.consistency_fraction);
        }
    }
    compare(out, "no_goal_vs_goal", "-", "consistency", no_goal, goal, options);

    // Dense (a) versus sparse (b), phase by phase.
    std::vector<PhaseMetrics> exp2;
    for (const auto& m : rows) {
        if (m.condition == "dense" || m.condition == "sparse") exp2.push_back(m);
    }
    if (exp2.empty()) {
        add(out, "test", "dense_vs_sparse", "-", "coverage_permutation_p", 0, kInsufficientData);
        return;
    }
    for (const auto& phase : phase_order(exp2)) {
        std::vector<double> cov_d, cov_s, steps_d, steps_s, dnf_d, dnf_s;
        for (const auto& m : exp2) {
            if (m.phase != phase) continue;
            const bool dense = m.condition == "dense";
            (dense ? cov_d : cov_s).push_back(m.coverage);
            if (m.steps_to_goal) (dense ? steps_d : steps_s).push_back(static_cast<double>(*m.steps_to_goal));
            if (m.dnf) (dense ? dnf_d : dnf_s).push_back(*m.dnf ? 1.0 : 0.0);
        }
        compare(out, "dense_vs_sparse", phase, "coverage", cov_d, cov_s, options);
        if (!dnf_d.empty() || !dnf_s.empty()) {
            compare(out, "dense_vs_sparse", phase, "steps_to_goal", steps_d, steps_s, options);
            add(out, "test", "dense_vs_sparse", phase, "dnf_rate_a", dnf_d.size(),
                dnf_d.empty() ? std::string(kInsufficientData) : format_number(mean(dnf_d)));
            add(out, "test", "dense_vs_sparse", phase, "dnf_rate_b", dnf_s.size(),
                dnf_s.empty() ? std::string(kInsufficientData) : format_number(mean(dnf_s)));
        }
    }
}

}  // namespace

std::vector<CohortRow> cohort_summary(const std::vector<PhaseMetrics>& rows, const CohortOptions& options) {
    std::vector<CohortRow> out;
    group_means(rows, out);
    explorer_clusters(rows, options, out);
    significance_tests(rows, options, out);
    return out;
}

std::string cohort_csv(const std::vector<CohortRow>& rows) {
    std::string out = csv::row({"section", "group", "phase", "metric", "n", "value"});
    for (const auto& r : rows) out += csv::row({r.section, r.group, r.phase, r.metric, std::to_string(r.n), r.value});
    return out;
}

LoadedLogs load_log_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw LogFormatError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> candidates;
    if (std::filesystem::exists(dir / "meta")) {
        candidates.push_back(dir);
    } else {
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.is_directory() && std::filesystem::exists(entry.path() / "meta")) {
                candidates.push_back(entry.path());
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());
    LoadedLogs logs;
    for (const auto& path : candidates) {
        try {
            logs.sessions.push_back(read_session_dir(path));
        } catch (const std::exception& e) {
            logs.errors.emplace_back(path, e.what());
        }
    }
    std::sort(logs.sessions.begin(), logs.sessions.end(),
              [](const SessionLog& a, const SessionLog& b) { return a.session_id < b.session_id; });
    return logs;
}

AnalysisReport analyze_logs(const LoadedLogs& logs, const CohortOptions& options) {
    AnalysisReport report;
    std::vector<CohortRow> errors;
    for (const auto& [path, message] : logs.errors) {
        errors.push_back({"error", path.filename().string(), "-", "load", 0, message});
    }
    for (const auto& session : logs.sessions) {
        try {
            auto rows = analyze_session(session);
            report.phases.insert(report.phases.end(), rows.begin(), rows.end());
        } catch (const std::exception& e) {
            errors.push_back({"error", session.session_id, "-", "analyze", 0, e.what()});
        }
    }
    report.cohort = cohort_summary(report.phases, options);
    report.cohort.insert(report.cohort.end(), errors.begin(), errors.end());
    return report;
}

}  // namespace explab
