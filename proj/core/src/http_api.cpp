#include "explab/http_api.hpp"

#include <httplib.h>

#include <json.hpp>

#include "explab/generator.hpp"

namespace explab {

using nlohmann::ordered_json;

namespace {

ordered_json cell_json(Cell c) { return ordered_json{{"x", c.x}, {"y", c.y}}; }

ordered_json cells_json(const std::vector<Cell>& cells) {
    ordered_json arr = ordered_json::array();
    for (const Cell& c : cells) arr.push_back(cell_json(c));
    return arr;
}

int http_status(ServiceErrc code) {
    switch (code) {
        case ServiceErrc::bad_request: return 400;
        case ServiceErrc::not_found: return 404;
        case ServiceErrc::conflict: return 409;
        case ServiceErrc::internal: return 500;
    }
    return 500;
}

void send_json(httplib::Response& res, int status, const std::string& body) {
    res.status = status;
    res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, ServiceErrc code, const std::string& message) {
    ordered_json j{{"error", {{"code", to_string(code)}, {"message", message}}}};
    send_json(res, http_status(code), j.dump());
}

ordered_json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return ordered_json::object();
    try {
        ordered_json j = ordered_json::parse(req.body);
        if (!j.is_object()) throw ServiceError(ServiceErrc::bad_request, "request body must be a JSON object");
        return j;
    } catch (const ordered_json::parse_error& e) {
        throw ServiceError(ServiceErrc::bad_request, std::string("malformed JSON body: ") + e.what());
    }
}

template <typename T>
T field(const ordered_json& body, const char* key, T fallback) {
    const auto it = body.find(key);
    if (it == body.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const ordered_json::exception&) {
        throw ServiceError(ServiceErrc::bad_request, std::string("field '") + key + "' has the wrong type");
    }
}

template <typename F>
httplib::Server::Handler guarded(F handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const ServiceError& e) {
            send_error(res, e.code(), e.what());
        } catch (const std::exception& e) {
            send_error(res, ServiceErrc::internal, e.what());
        }
    };
}

}  // namespace

std::string view_to_json(const SessionView& v) {
    ordered_json revealed = ordered_json::array();
    for (const auto& rc : v.revealed) {
        ordered_json open = ordered_json::array();
        for (bool o : rc.open) open.push_back(o);
        revealed.push_back({{"x", rc.cell.x}, {"y", rc.cell.y}, {"open", open}});
    }
    ordered_json j;
    j["session_id"] = v.session_id;
    j["status"] = to_string(v.status);
    j["experiment"] = v.experiment;
    j["condition"] = v.condition;
    j["subject"] = v.subject;
    j["phase"] = v.phase;
    j["phase_index"] = v.phase_index;
    j["phase_count"] = v.phase_count;
    j["role"] = to_string(v.role);
    j["instruction"] = v.instruction;
    j["maze"] = {{"id", v.maze_id}, {"width", v.width}, {"height", v.height}};
    j["pose"] = {{"cell_x", v.pose.cell.x},
                 {"cell_y", v.pose.cell.y},
                 {"heading", std::string(1, heading_char(v.pose.heading))},
                 {"sub_offset", v.pose.sub_offset}};
    j["visible"] = cells_json(v.visible);
    j["revealed"] = revealed;
    j["on_goal"] = v.on_goal;
    j["goal_visible"] = v.goal_visible;
    j["goal"] = v.goal ? cell_json(*v.goal) : ordered_json(nullptr);
    j["apples_visible"] = cells_json(v.apples_visible);
    j["apples_consumed"] = cells_json(v.apples_consumed);
    j["apples_eaten"] = v.apples_eaten;
    j["transitions"] = v.transitions;
    j["budget"] = v.budget;
    j["outcome"] = to_string(v.outcome);
    j["reward_sum"] = v.reward_sum;
    j["blocked_contact"] = v.blocked_contact;
    return j.dump();
}

struct HttpApi::Impl {
    SessionService& service;
    httplib::Server server;

    explicit Impl(SessionService& s) : service(s) { routes(); }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const ordered_json body = parse_body(req);
            PlanSelector sel;
            sel.experiment = field<int>(body, "experiment", 1);
            sel.condition = field<std::string>(body, "condition", "");
            sel.subject_tag = field<std::string>(body, "subject", "");
            const long long budget = field<long long>(body, "budget", 0);
            if (budget < 0) throw ServiceError(ServiceErrc::bad_request, "budget must be positive");
            if (budget > 0) sel.budget = static_cast<std::size_t>(budget);
            send_json(res, 201, view_to_json(service.create_session(sel)));
        }));

        server.Post(R"(/sessions/([^/]+)/actions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const ordered_json body = parse_body(req);
            const auto action = field<std::string>(body, "action", "");
            send_json(res, 200, view_to_json(service.submit_action(req.matches[1], action)));
        }));

        server.Post(R"(/sessions/([^/]+)/advance)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, view_to_json(service.advance_phase(req.matches[1])));
        }));

        server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, view_to_json(service.get_session(req.matches[1])));
        }));

        server.Get(R"(/sessions/([^/]+)/export)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, session_to_json(service.export_session(req.matches[1])));
        }));

        server.Get(R"(/mazes/([^/]+))", guarded([](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto maze = builtin_maze(id);
            if (!maze) throw ServiceError(ServiceErrc::not_found, "unknown maze '" + id + "'");
            ordered_json j{{"id", maze->id()},
                           {"width", maze->width()},
                           {"height", maze->height()},
                           {"floor_cells", maze->floor_count()}};
            if (req.get_param_value("layout") == "1") j["layout"] = render_maze(*maze);
            send_json(res, 200, j.dump());
        }));
    }
};

HttpApi::HttpApi(SessionService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpApi::~HttpApi() = default;

bool HttpApi::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int HttpApi::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool HttpApi::serve_bound() { return impl_->server.listen_after_bind(); }
void HttpApi::stop() { impl_->server.stop(); }
void HttpApi::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace explab
