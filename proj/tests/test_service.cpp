#include <doctest.h>

#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "casa/server.hpp"
#include "casa/service.hpp"

using namespace casa;

namespace {

std::vector<Json> send(SessionCore& core, const Json& msg) {
    return core.handle_message(msg.dump());
}

std::vector<Json> ticks(SessionCore& core, int n) {
    std::vector<Json> out;
    for (int i = 0; i < n; ++i)
        for (auto& m : core.tick()) out.push_back(std::move(m));
    return out;
}

const Json* first_of(const std::vector<Json>& msgs, std::string_view type) {
    for (const auto& m : msgs)
        if (m["type"] == type) return &m;
    return nullptr;
}

// Records one demonstration driving diagonally.
void record_demo(SessionCore& core, int length) {
    send(core, {{"type", "start"}, {"scenario", "unknown_goal"}, {"mode", "demo_recording"}});
    send(core, {{"type", "input"}, {"a", {1.0, 1.0}}});
    ticks(core, length);
    send(core, {{"type", "finish_demo"}});
}

}  // namespace

TEST_CASE("input then tick advances the state under direct control") {
    SessionCore core;
    const auto started = send(core, {{"type", "start"}, {"scenario", "known_goal"}, {"method", "none"}});
    REQUIRE(started.size() == 1);
    CHECK(started[0]["type"] == "started");
    CHECK(started[0]["config"]["method"] == "none");
    CHECK(started[0]["config"].contains("world"));
    CHECK(started[0]["config"].contains("intents"));

    const Vec x0 = core.episode()->state().x;
    CHECK(send(core, {{"type", "input"}, {"a", {1.0, 0.0}}}).empty());
    const auto out = core.tick();
    const Json* state = first_of(out, "state");
    REQUIRE(state != nullptr);
    const WorldConfig w;
    CHECK((*state)["x"][0].get<double>() == doctest::Approx(x0[0] + w.max_speed / w.tick_rate));
    CHECK((*state)["x"][1].get<double>() == x0[1]);
    CHECK((*state)["tick"] == 1);
}

TEST_CASE("inference messages appear on inference ticks only") {
    SessionCore core;
    send(core, {{"type", "start"}, {"scenario", "known_goal"}, {"method", "casa"}});
    send(core, {{"type", "input"}, {"a", {1.0, 0.5}}});
    const WorldConfig w;
    int inference = 0;
    for (int i = 0; i < 3 * w.inference_period_ticks; ++i) {
        const auto out = core.tick();
        if (i % w.inference_period_ticks == 0) {
            REQUIRE(out.size() == 2);
            CHECK(out[0]["type"] == "inference");
            CHECK(out[0]["tick"] == i);
            ++inference;
        } else {
            REQUIRE(out.size() == 1);
        }
        CHECK(out.back()["type"] == "state");
    }
    CHECK(inference == 3);
}

TEST_CASE("last writer wins between ticks") {
    SessionCore core;
    send(core, {{"type", "start"}, {"scenario", "known_goal"}, {"method", "none"}});
    const Vec x0 = core.episode()->state().x;
    send(core, {{"type", "input"}, {"a", {1.0, 0.0}}});
    send(core, {{"type", "input"}, {"a", {0.0, 1.0}}});
    core.tick();
    CHECK(core.episode()->state().x[0] == x0[0]);
    CHECK(core.episode()->state().x[1] > x0[1]);
}

TEST_CASE("malformed messages yield errors and keep the session") {
    SessionCore core;
    send(core, {{"type", "start"}, {"scenario", "known_goal"}});
    auto out = core.handle_message("{not json");
    REQUIRE(out.size() == 1);
    CHECK(out[0]["type"] == "error");
    CHECK(out[0]["code"] == "parse");
    CHECK(core.active());

    out = send(core, {{"type", "input"}, {"a", {1.0, 0.0, 0.0}}});
    CHECK(out[0]["code"] == "dimension");
    out = send(core, {{"type", "input"}, {"a", {2.0, 0.0}}});
    CHECK(out[0]["code"] == "invalid_input");
    out = send(core, {{"type", "dance"}});
    CHECK(out[0]["type"] == "error");
    out = send(core, {{"type", "start"}, {"scenario", "known_goal"}});
    CHECK(out[0]["code"] == "invalid_state");
    out = send(core, {{"type", "finish_demo"}});
    CHECK(out[0]["code"] == "invalid_state");
    CHECK(core.active());

    out = send(core, {{"type", "stop"}});
    CHECK(out[0]["type"] == "stopped");
    out = send(core, {{"type", "start"}, {"scenario", "no_such_scenario"}});
    CHECK(out[0]["code"] == "unknown_id");
    CHECK_FALSE(core.active());
}

TEST_CASE("demonstration recording") {
    SessionCore core;
    const auto started = send(core, {{"type", "start"}, {"scenario", "unknown_goal"}, {"mode", "demo_recording"}});
    CHECK(started[0]["mode"] == "demo_recording");
    send(core, {{"type", "input"}, {"a", {1.0, 1.0}}});
    const auto out = ticks(core, 20);
    CHECK(first_of(out, "inference") != nullptr);
    const auto saved = send(core, {{"type", "finish_demo"}});
    REQUIRE(saved.size() == 1);
    CHECK(saved[0]["type"] == "demo_saved");
    CHECK(saved[0]["length"] == 20);
    CHECK_FALSE(core.active());
    REQUIRE(core.demos().size() == 1);
    CHECK(core.demos().begin()->second.size() == 21);
}

TEST_CASE("irl job lifecycle") {
    SessionCore core;
    auto out = send(core, {{"type", "start_irl"}});
    CHECK(out[0]["code"] == "invalid_input");

    record_demo(core, 30);
    record_demo(core, 25);
    out = send(core, {{"type", "start_irl"}, {"demo_ids", {"demo_7"}}});
    CHECK(out[0]["code"] == "unknown_id");

    out = send(core, {{"type", "start_irl"}, {"cfg", {{"max_iters", 100000}}}});
    REQUIRE(out[0]["type"] == "irl_started");
    CHECK(send(core, {{"type", "start_irl"}})[0]["code"] == "busy");
    send(core, {{"type", "cancel_irl"}});
    core.wait_for_job();

    out = send(core, {{"type", "start_irl"}, {"cfg", {{"max_iters", 4}}}, {"name", "diag"}});
    REQUIRE(out[0]["type"] == "irl_started");
    const std::string intent_id = out[0]["intent_id"];

    const auto done = core.wait_for_job();
    int progress = 0;
    for (const auto& m : done) progress += m["type"] == "irl_progress";
    CHECK(progress == 4);
    REQUIRE(done.back()["type"] == "irl_done");
    CHECK(done.back()["intent_id"] == intent_id);
    CHECK(core.learned_intents().contains(intent_id));

    // The learned intent is part of the next episode.
    const auto started = send(core, {{"type", "start"}, {"scenario", "unknown_goal"}});
    bool listed = false;
    for (const auto& intent : started[0]["config"]["intents"]) listed = listed || intent["id"] == intent_id;
    CHECK(listed);
}

TEST_CASE("cancelling an irl job leaves the intents unchanged") {
    SessionCore core;
    record_demo(core, 30);
    const auto out = send(core, {{"type", "start_irl"}, {"cfg", {{"max_iters", 100000}}}});
    REQUIRE(out[0]["type"] == "irl_started");
    CHECK(send(core, {{"type", "cancel_irl"}}).empty());
    const auto done = core.wait_for_job();
    REQUIRE_FALSE(done.empty());
    CHECK(done.back()["type"] == "irl_cancelled");
    CHECK(core.learned_intents().empty());
    CHECK(send(core, {{"type", "cancel_irl"}})[0]["code"] == "invalid_state");
}

TEST_CASE("intent ids stay fixed within an episode") {
    SessionCore core;
    record_demo(core, 30);
    send(core, {{"type", "start"}, {"scenario", "unknown_goal"}, {"method", "casa"}});
    send(core, {{"type", "input"}, {"a", {1.0, 1.0}}});
    send(core, {{"type", "start_irl"}, {"cfg", {{"max_iters", 3}}}});

    std::set<std::set<std::string>> seen;
    auto collect = [&](const std::vector<Json>& msgs) {
        for (const auto& m : msgs) {
            if (m["type"] != "inference") continue;
            std::set<std::string> ids;
            for (const auto& [id, b] : m["betas"].items()) ids.insert(id);
            seen.insert(ids);
        }
    };
    collect(ticks(core, 10));
    core.wait_for_job();
    CHECK(core.learned_intents().empty());  // held back while the episode runs
    collect(ticks(core, 10));
    CHECK(seen.size() == 1);

    send(core, {{"type", "stop"}});
    CHECK(core.learned_intents().size() == 1);
}

TEST_CASE("a recorded message log replays to identical output") {
    const std::vector<Json> script{
        {{"type", "start"}, {"scenario", "unknown_goal"}, {"method", "pba"}, {"seed", 3}},
        {{"type", "input"}, {"a", {1.0, 0.2}}},
        {{"type", "tick"}},
        {{"type", "tick"}},
        {{"type", "input"}, {"a", {0.3, 1.0}}},
        {{"type", "tick"}},
        {{"type", "input"}, {"a", {-0.5, 1.0}}},
        {{"type", "input"}, {"a", {0.0, 1.0}}},
        {{"type", "tick"}},
        {{"type", "tick"}},
        {{"type", "tick"}},
        {{"type", "stop"}},
    };
    auto run = [&] {
        SessionCore core;
        std::vector<std::string> out;
        for (const auto& msg : script) {
            const auto replies = msg["type"] == "tick" ? core.tick() : send(core, msg);
            for (const auto& r : replies) out.push_back(r.dump());
        }
        return out;
    };
    const auto a = run();
    CHECK(a == run());
    int inference = 0;
    for (const auto& line : a) inference += line.find("\"type\":\"inference\"") != std::string::npos;
    CHECK(inference >= 1);
}

TEST_CASE("outbound queue drops only state messages") {
    OutboundQueue q(6);
    for (int i = 0; i < 10; ++i) {
        q.push({{"type", "state"}, {"tick", i}});
        if (i % 3 == 0) q.push({{"type", "inference"}, {"tick", i}});
    }
    std::vector<Json> kept;
    while (auto s = q.pop()) kept.push_back(Json::parse(*s));
    int inference = 0;
    int last_state = -1;
    for (const auto& m : kept) {
        if (m["type"] == "inference") ++inference;
        else last_state = m["tick"];
    }
    CHECK(inference == 4);
    CHECK(last_state == 9);  // the newest state survives
    CHECK(q.dropped() == 14 - kept.size());

    // Nothing droppable: the queue grows past capacity.
    OutboundQueue full(2);
    for (int i = 0; i < 5; ++i) full.push({{"type", "inference"}, {"tick", i}});
    CHECK(full.size() == 5);
    CHECK(full.dropped() == 0);
}

TEST_CASE("websocket round trip") {
    namespace net = boost::asio;
    namespace websocket = boost::beast::websocket;
    using tcp = net::ip::tcp;

    ServerOptions opts;
    opts.port = 0;
    WebSocketServer server(opts);
    std::thread loop([&] { server.run(); });

    net::io_context ioc;
    websocket::stream<tcp::socket> ws(ioc);
    tcp::resolver resolver(ioc);
    net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
    ws.handshake("127.0.0.1", "/");

    auto read = [&] {
        boost::beast::flat_buffer buf;
        ws.read(buf);
        return Json::parse(boost::beast::buffers_to_string(buf.data()));
    };

    ws.write(net::buffer(Json{{"type", "start"}, {"scenario", "known_goal"}, {"method", "none"}}.dump()));
    const Json started = read();
    CHECK(started["type"] == "started");
    ws.write(net::buffer(Json{{"type", "input"}, {"a", {1.0, 0.0}}}.dump()));

    // The server ticks on its own clock; wait for a state that shows motion.
    double x = 0.0;
    for (int i = 0; i < 50 && x <= 1.0; ++i) {
        const Json m = read();
        if (m["type"] == "state") x = m["x"][0].get<double>();
    }
    CHECK(x > 1.0);

    ws.write(net::buffer(std::string("{oops")));
    Json err;
    for (int i = 0; i < 50; ++i) {
        err = read();
        if (err["type"] == "error") break;
    }
    CHECK(err["code"] == "parse");

    boost::beast::error_code ec;
    ws.close(websocket::close_code::normal, ec);
    server.stop();
    loop.join();
}
