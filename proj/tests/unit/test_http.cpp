#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <json.hpp>
#include <thread>

#include "explab/http_api.hpp"
#include "explab/session_log.hpp"

using namespace explab;
using nlohmann::json;

namespace {

class HttpTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = std::filesystem::temp_directory_path() / "explab-http-test";
        std::filesystem::remove_all(dir_);
        ServiceOptions o;
        o.data_dir = dir_;
        o.id_seed = 5;
        service_ = std::make_unique<SessionService>(o);
        api_ = std::make_unique<HttpApi>(*service_);
        port_ = api_->bind_any_port("127.0.0.1");
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { api_->serve_bound(); });
        api_->wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }
    void TearDown() override {
        api_->stop();
        thread_.join();
        std::filesystem::remove_all(dir_);
    }

    httplib::Result post(const std::string& path, const json& body) {
        return client_->Post(path, body.dump(), "application/json");
    }

    std::filesystem::path dir_;
    std::unique_ptr<SessionService> service_;
    std::unique_ptr<HttpApi> api_;
    std::unique_ptr<httplib::Client> client_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace

TEST_F(HttpTest, SessionLifecycle) {
    auto res = post("/sessions", {{"experiment", 1}, {"subject", "p01"}, {"budget", 3}});
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 201) << res->body;
    EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
    const json created = json::parse(res->body);
    const std::string id = created["session_id"];
    EXPECT_EQ(created["status"], "active");
    EXPECT_EQ(created["phase"], "A");
    EXPECT_EQ(created["instruction"], "explore freely");
    EXPECT_EQ(created["pose"]["heading"], "N");
    EXPECT_TRUE(created["goal"].is_null());
    EXPECT_FALSE(created["visible"].empty());

    res = post("/sessions/" + id + "/actions", {{"action", "turn_right"}});
    ASSERT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body)["pose"]["heading"], "E");

    res = post("/sessions/" + id + "/actions", {{"action", "jump"}});
    ASSERT_EQ(res->status, 400);
    const json err = json::parse(res->body);
    EXPECT_EQ(err["error"]["code"], "bad_request");
    EXPECT_NE(err["error"]["message"].get<std::string>().find("strafe_left"), std::string::npos);

    res = client_->Post("/sessions/" + id + "/advance", "", "application/json");
    EXPECT_EQ(res->status, 409);

    res = client_->Get("/sessions/" + id);
    ASSERT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body)["session_id"], id);

    res = client_->Get("/sessions/" + id + "/export");
    ASSERT_EQ(res->status, 200);
    const SessionLog log = session_from_json(res->body);
    EXPECT_EQ(log.session_id, id);
    EXPECT_EQ(log.phases[0].records.size(), 2u);
    const json exported = json::parse(res->body);
    const json& first = exported["phases"][0]["records"][0];
    for (const char* key : {"t_ms", "action", "cell_x", "cell_y", "heading", "sub_offset"}) {
        EXPECT_TRUE(first.contains(key)) << key;
    }
}

TEST_F(HttpTest, ErrorsAndMazes) {
    EXPECT_EQ(post("/sessions", {{"experiment", 9}, {"subject", "p"}})->status, 400);
    EXPECT_EQ(post("/sessions", {{"experiment", "one"}, {"subject", "p"}})->status, 400);
    EXPECT_EQ(client_->Post("/sessions", "{broken", "application/json")->status, 400);
    EXPECT_EQ(client_->Get("/sessions/unknown")->status, 404);
    EXPECT_EQ(client_->Get("/sessions/unknown/export")->status, 404);
    EXPECT_EQ(post("/sessions/unknown/actions", {{"action", "forward"}})->status, 404);

    auto res = client_->Get("/mazes/exp1");
    ASSERT_EQ(res->status, 200);
    json maze = json::parse(res->body);
    EXPECT_EQ(maze["width"], 11);
    EXPECT_FALSE(maze.contains("layout"));
    res = client_->Get("/mazes/exp1?layout=1");
    maze = json::parse(res->body);
    EXPECT_TRUE(maze.contains("layout"));
    EXPECT_EQ(client_->Get("/mazes/nope")->status, 404);

    res = client_->Options("/sessions");
    EXPECT_EQ(res->status, 204);
}

TEST_F(HttpTest, DenseSessionReportsApples) {
    auto res = post("/sessions", {{"experiment", 2}, {"condition", "dense"}, {"subject", "p02"}});
    ASSERT_EQ(res->status, 201);
    const json v = json::parse(res->body);
    EXPECT_EQ(v["phase_count"], 6);
    EXPECT_FALSE(v["apples_visible"].empty());
    EXPECT_EQ(v["apples_eaten"], 0);
}
