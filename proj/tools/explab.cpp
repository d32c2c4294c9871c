// explab command-line entry point.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "explab/agents.hpp"
#include "explab/generator.hpp"
#include "explab/http_api.hpp"
#include "explab/maze.hpp"
#include "explab/protocol.hpp"
#include "explab/report.hpp"
#include "explab/session_log.hpp"
#include "explab/session_service.hpp"

namespace fs = std::filesystem;
using namespace explab;

namespace {

constexpr int kUsageError = 2;

struct CommonFlags {
    std::uint64_t seed = 0;
    std::string out;
    std::string data_dir;
};

std::string default_data_dir() {
    const char* env = std::getenv("EXPLAB_DATA_DIR");
    return env && *env ? env : "explab-data";
}

fs::path output_dir(const CommonFlags& common) {
    if (!common.out.empty()) return common.out;
    if (!common.data_dir.empty()) return common.data_dir;
    return default_data_dir();
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string metric_line(const PhaseMetrics& m) {
    std::ostringstream out;
    out << "phase " << m.phase << " role=" << to_string(m.role) << " coverage=" << format_number(m.coverage)
        << " steps_to_goal=" << (m.steps_to_goal ? std::to_string(*m.steps_to_goal) : "-")
        << " dnf=" << (m.dnf ? (*m.dnf ? "1" : "0") : "-")
        << " consistency=" << format_number(m.consistency_fraction) << " decisions=" << m.decision_count
        << " re_exploration=" << format_number(m.re_exploration) << " cells_crossed=" << m.cells_crossed
        << " duration_ms=" << m.duration_ms;
    return out.str();
}

struct RunAgentFlags {
    std::string kind;
    int experiment = 1;
    std::vector<std::string> mazes;
    std::string condition;
    std::size_t budget = 0;
    AgentConfig agent;
    std::string session_id;
};

int cmd_run_agent(const RunAgentFlags& f, const CommonFlags& common, const std::string& usage) {
    const auto kind = agent_kind_from_string(f.kind);
    if (!kind) {
        std::cerr << "error: unknown agent kind '" << f.kind << "' (dfs|random|qlearn|countbonus)\n\n" << usage;
        return kUsageError;
    }
    AgentConfig config = f.agent;
    config.kind = *kind;
    config.seed = common.seed;
    config.validate();
    const std::optional<std::size_t> budget = f.budget > 0 ? std::optional(f.budget) : std::nullopt;

    SessionLog log;
    if (f.experiment == 1) {
        if (f.mazes.size() > 1) throw std::invalid_argument("experiment 1 takes one --maze");
        const MazeSpec maze = load_maze_ref(f.mazes.empty() ? "exp1" : f.mazes.front());
        log = run_experiment1(config, maze, budget, f.session_id);
    } else if (f.experiment == 2) {
        if (f.condition.empty()) throw std::invalid_argument("experiment 2 needs --condition dense|sparse");
        std::vector<std::string> refs = f.mazes;
        if (refs.empty()) refs = {"exp2a", "exp2b"};
        if (refs.size() != 2) throw std::invalid_argument("experiment 2 takes two --maze values");
        log = run_experiment2(config, f.condition, load_maze_ref(refs[0]), load_maze_ref(refs[1]), budget,
                              f.session_id);
    } else {
        std::cerr << "error: --experiment must be 1 or 2\n\n" << usage;
        return kUsageError;
    }

    const fs::path dir = output_dir(common) / log.session_id;
    write_session_dir(log, dir);
    std::cout << "session " << log.session_id << " -> " << dir.string() << '\n';
    for (const auto& m : analyze_session(log)) std::cout << metric_line(m) << '\n';
    return 0;
}

int cmd_batch(const std::string& manifest_path, unsigned jobs, const CommonFlags& common) {
    const auto manifest = parse_manifest(read_text(manifest_path));
    const fs::path out = output_dir(common);
    const auto rows = batch_run(manifest, out, jobs);
    std::size_t failed = 0;
    for (const auto& r : rows) {
        if (!r.ok) {
            ++failed;
            std::cerr << "failed " << r.session_id << ": " << r.message << '\n';
        }
    }
    std::cout << rows.size() - failed << " of " << rows.size() << " sessions ok; summary in "
              << (out / "batch.csv").string() << '\n';
    return failed == 0 ? 0 : 1;
}

HttpApi* g_api = nullptr;

extern "C" void handle_stop(int) {
    if (g_api) g_api->stop();
}

int cmd_serve(const std::string& listen, const CommonFlags& common) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("--listen expects host:port");
    const std::string host = listen.substr(0, colon);
    const int port = std::stoi(listen.substr(colon + 1));

    ServiceOptions options;
    options.data_dir = common.data_dir.empty() ? fs::path(default_data_dir()) : fs::path(common.data_dir);
    options.id_seed = common.seed;
    SessionService service(options);
    for (const auto& [path, message] : service.load_errors()) {
        std::cerr << "warning: skipped " << path.string() << ": " << message << '\n';
    }
    HttpApi api(service);
    g_api = &api;
    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);
    std::cout << "serving " << service.session_ids().size() << " stored sessions from "
              << options.data_dir.string() << " on " << host << ':' << port << std::endl;
    const bool ok = api.listen(host, port);
    g_api = nullptr;
    if (!ok) {
        std::cerr << "error: cannot listen on " << listen << '\n';
        return 1;
    }
    return 0;
}

int cmd_analyze(const std::string& logs_dir, const std::string& cohort_path, std::size_t clusters,
                std::uint64_t permutations, const CommonFlags& common) {
    const fs::path dir = !logs_dir.empty() ? fs::path(logs_dir)
                         : !common.data_dir.empty() ? fs::path(common.data_dir)
                                                    : fs::path(default_data_dir());
    const LoadedLogs logs = load_log_dir(dir);
    if (logs.sessions.empty() && logs.errors.empty()) {
        std::cerr << "error: no session logs under " << dir.string() << '\n';
        return 1;
    }
    for (const auto& [path, message] : logs.errors) std::cerr << "error row: " << path.string() << ": " << message << '\n';

    CohortOptions options;
    options.clusters = clusters;
    options.seed = common.seed;
    options.permutation_iterations = permutations;
    const AnalysisReport report = analyze_logs(logs, options);

    const fs::path out = common.out.empty() ? fs::path("report") : fs::path(common.out);
    const fs::path sessions_csv = out / "sessions.csv";
    const fs::path cohort_csv_path = cohort_path.empty() ? out / "cohort.csv" : fs::path(cohort_path);
    write_text(sessions_csv, phase_metrics_csv(report.phases));
    write_text(cohort_csv_path, cohort_csv(report.cohort));
    std::cout << logs.sessions.size() << " sessions, " << report.phases.size() << " phase rows -> "
              << sessions_csv.string() << ", " << cohort_csv_path.string() << '\n';
    return 0;
}

int cmd_validate_maze(const std::vector<std::string>& files) {
    int status = 0;
    for (const auto& file : files) {
        try {
            const MazeSpec maze = parse_maze(read_text(file), fs::path(file).stem().string());
            std::cout << file << ": ok " << maze.width() << "x" << maze.height() << ", " << maze.floor_count()
                      << " floor cells, " << reachable_cells(maze).size() << " reachable, "
                      << passable_edge_count(maze) << " passages"
                      << (maze.goal() ? "" : ", no goal") << '\n';
        } catch (const MazeError& e) {
            std::cout << file << ": invalid (" << to_string(e.code()) << "): " << e.what() << '\n';
            status = 1;
        }
    }
    return status;
}

int cmd_gen_maze(int width, int height, const std::string& style_name, const CommonFlags& common) {
    MazeStyle style;
    if (style_name == "perfect") {
        style = MazeStyle::perfect;
    } else if (style_name == "braided") {
        style = MazeStyle::braided;
    } else {
        throw std::invalid_argument("--style must be perfect or braided");
    }
    const MazeSpec maze = generate_maze(width, height, style, common.seed);
    const std::string text = render_maze(maze);
    if (common.out.empty()) {
        std::cout << text;
    } else {
        write_text(common.out, text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"explab: maze exploration experiments, agents and analysis"};
    app.require_subcommand(1);
    CommonFlags common;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", common.seed, "RNG seed");
        cmd->add_option("--out", common.out, "Output path");
        cmd->add_option("--data-dir", common.data_dir, "Data directory (default $EXPLAB_DATA_DIR)");
    };

    RunAgentFlags run;
    auto* run_cmd = app.add_subcommand("run-agent", "Run an agent through an experiment protocol");
    run_cmd->add_option("--kind", run.kind, "dfs|random|qlearn|countbonus")->required();
    run_cmd->add_option("--experiment", run.experiment, "1 or 2")->capture_default_str();
    run_cmd->add_option("--maze", run.mazes, "Built-in maze id or maze file (repeat for experiment 2)");
    run_cmd->add_option("--condition", run.condition, "dense|sparse (experiment 2)");
    run_cmd->add_option("--budget", run.budget, "Cell transitions per phase (default 10x reachable cells)");
    run_cmd->add_option("--session-id", run.session_id, "Session id (default derived from kind and seed)");
    run_cmd->add_option("--epsilon", run.agent.epsilon)->capture_default_str();
    run_cmd->add_option("--alpha", run.agent.alpha)->capture_default_str();
    run_cmd->add_option("--gamma", run.agent.gamma)->capture_default_str();
    run_cmd->add_option("--beta", run.agent.beta)->capture_default_str();
    run_cmd->add_option("--optimistic-init", run.agent.optimistic_init)->capture_default_str();
    add_common(run_cmd);

    std::string manifest;
    unsigned jobs = 1;
    auto* batch_cmd = app.add_subcommand("batch", "Run every session of a manifest");
    batch_cmd->add_option("--manifest", manifest, "Manifest file")->required();
    batch_cmd->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    add_common(batch_cmd);

    std::string listen = "127.0.0.1:8080";
    auto* serve_cmd = app.add_subcommand("serve", "Serve live sessions over HTTP");
    serve_cmd->add_option("--listen", listen, "host:port")->capture_default_str();
    add_common(serve_cmd);

    std::string logs_dir;
    std::string cohort_path;
    std::size_t clusters = 3;
    std::uint64_t permutations = 10000;
    auto* analyze_cmd = app.add_subcommand("analyze", "Per-phase metrics and cohort statistics");
    analyze_cmd->add_option("--logs", logs_dir, "Directory of session logs (default --data-dir)");
    analyze_cmd->add_option("--cohort", cohort_path, "Cohort CSV path (default <out>/cohort.csv)");
    analyze_cmd->add_option("--clusters", clusters, "Explorer clusters")->capture_default_str();
    analyze_cmd->add_option("--permutations", permutations, "Monte Carlo permutations")->capture_default_str();
    add_common(analyze_cmd);

    std::vector<std::string> maze_files;
    auto* validate_cmd = app.add_subcommand("validate-maze", "Check maze files");
    validate_cmd->add_option("files", maze_files, "Maze files")->required();

    int width = 9;
    int height = 9;
    std::string style = "perfect";
    auto* gen_cmd = app.add_subcommand("gen-maze", "Generate a maze");
    gen_cmd->add_option("--width", width)->capture_default_str();
    gen_cmd->add_option("--height", height)->capture_default_str();
    gen_cmd->add_option("--style", style, "perfect|braided")->capture_default_str();
    add_common(gen_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (*run_cmd) return cmd_run_agent(run, common, run_cmd->help());
        if (*batch_cmd) return cmd_batch(manifest, jobs, common);
        if (*serve_cmd) return cmd_serve(listen, common);
        if (*analyze_cmd) return cmd_analyze(logs_dir, cohort_path, clusters, permutations, common);
        if (*validate_cmd) return cmd_validate_maze(maze_files);
        if (*gen_cmd) return cmd_gen_maze(width, height, style, common);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kUsageError;
}
