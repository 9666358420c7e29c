#include <doctest.h>

#include <bit>
#include <random>
#include <sstream>
#include <string>

#include "casa/serialization.hpp"

using namespace casa;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// Through text and back, so number formatting is exercised.
Json through_text(const Json& j) {
    return parse_json(j.dump());
}

bool same_bits(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
    return true;
}

std::string error_text(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    FAIL("expected an error");
    return {};
}

}  // namespace

TEST_CASE("vectors round-trip bit for bit") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 500; ++i) {
        Vec v(3);
        v << u(rng), u(rng) * 1e-200, u(rng) / 3.0;
        CHECK(same_bits(vec_from_json(through_text(vec_to_json(v))), v));
    }
    CHECK_THROWS_AS(vec_from_json(Json::array({1, "x"})), Error);
}

TEST_CASE("configs round-trip") {
    WorldConfig w;
    w.max_speed = 0.7;
    w.tick_rate = 20.0;
    w.inference_period_ticks = 4;
    w.planning_horizon = 80;
    CHECK(to_json(world_from_json(through_text(to_json(w)))) == to_json(w));

    AssistConfig a;
    a.estimator.kind = EstimatorKind::mle;
    a.estimator.lambda = 0.3;
    a.epsilon = 1.5;
    a.pba_threshold = 2.5;
    const AssistConfig a2 = assist_from_json(through_text(to_json(a)));
    CHECK(a2.estimator.kind == EstimatorKind::mle);
    CHECK(a2.estimator.lambda == 0.3);
    CHECK(to_json(a2) == to_json(a));

    IrlConfig c;
    c.learning_rate = 0.0123;
    c.max_iters = 17;
    c.seed = 99;
    CHECK(to_json(irl_config_from_json(through_text(to_json(c)))) == to_json(c));

    // Missing optional fields take the struct defaults.
    CHECK(to_json(world_from_json(Json::object())) == to_json(WorldConfig{}));
}

TEST_CASE("trajectories and intents round-trip") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<TrajectoryStep> steps;
    for (int i = 0; i < 20; ++i) steps.push_back({i + 5, State{v2(u(rng), u(rng))}, HumanInput{v2(u(rng) / 10, -u(rng) / 10)}});
    const Trajectory traj(steps);
    CHECK(trajectory_from_json(through_text(to_json(traj))) == traj);

    const Json tj = to_json(traj);
    REQUIRE(tj.is_array());
    CHECK(tj[0].contains("tick"));
    CHECK(tj[0].contains("x"));
    CHECK(tj[0].contains("a"));

    const Intent goal = Intent::make_goal("g", v2(1.25, 3.5));
    CHECK(same_bits(intent_from_json(through_text(to_json(goal))).goal()->goal, goal.goal()->goal));

    const Intent pour = scenarios::hidden_intent(scenarios::unknown_skill());
    const Intent back = intent_from_json(through_text(to_json(pour)));
    CHECK(back.id == pour.id);
    CHECK(same_bits(back.features()->phi, pour.features()->phi));
    for (int i = 0; i < 50; ++i) {
        const Vec x = v2(u(rng), u(rng));
        CHECK(state_cost(back, x) == state_cost(pour, x));
    }

    const IntentSet set({goal, pour});
    CHECK(intent_set_from_json(through_text(to_json(set))).ids() == set.ids());

    DemoSet demos{{traj, traj}, std::string("pour")};
    const DemoSet demos2 = demo_set_from_json(through_text(to_json(demos)));
    CHECK(demos2.demos == demos.demos);
    CHECK(demos2.intent_hint == demos.intent_hint);
}

TEST_CASE("scenarios round-trip and the shipped files match the built-ins") {
    for (const auto& name : scenarios::names()) {
        const Scenario s = scenarios::by_name(name);
        const Json j = to_json(s);
        CHECK(to_json(scenario_from_json(through_text(j))) == j);

        const Scenario from_file = load_scenario(std::string(CASA_SCENARIO_DIR) + "/" + name + ".json");
        CHECK(to_json(from_file) == j);
        CHECK(to_json(load_scenario(name)) == j);
    }
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), Error);
}

TEST_CASE("parse errors carry line and column") {
    try {
        parse_json("{\n  \"a\": 1,\n  \"b\": ]\n}", "cfg.json");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse);
        CHECK(std::string(e.what()).rfind("cfg.json:3:", 0) == 0);
    }
}

TEST_CASE("decoding errors name the offending field") {
    Json j = to_json(scenarios::known_goal());
    j["world"]["max_speed"] = "fast";
    CHECK(error_text([&] { scenario_from_json(j); }).find("world.max_speed") != std::string::npos);

    j = to_json(scenarios::known_goal());
    j.erase("start");
    CHECK(error_text([&] { scenario_from_json(j); }).find("start") != std::string::npos);

    j = to_json(scenarios::known_goal());
    j["intents"][1].erase("goal");
    CHECK(error_text([&] { scenario_from_json(j); }).find("goal") != std::string::npos);

    j = to_json(scenarios::known_goal());
    j["method"] = "telepathy";
    try {
        scenario_from_json(j);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_config);
        CHECK(std::string(e.what()).find("method") != std::string::npos);
    }
}

TEST_CASE("wire messages carry the documented fields") {
    const Json s = state_message(3, State{v2(1, 2)}, 0.5, Action{v2(0.1, 0)});
    CHECK(s["type"] == "state");
    CHECK(s["tick"] == 3);
    CHECK(s["alpha"] == 0.5);
    CHECK(s["x"] == Json::array({1.0, 2.0}));

    const Episode ep = run_scenario(scenarios::known_goal());
    const Json inf = inference_message(0, ep.assist_log().front());
    for (const char* key : {"tick", "betas", "posterior", "theta_star", "alphas"}) CHECK(inf.contains(key));
    CHECK(inf["betas"].contains("green"));
    CHECK(inf["alphas"].contains("belief"));

    const Json err = error_message("parse", "oops");
    CHECK(err["code"] == "parse");
    CHECK(err["detail"] == "oops");
}

TEST_CASE("episode logs replay identically and detect tampering") {
    for (const auto& name : scenarios::names()) {
        Scenario s = scenarios::by_name(name);
        s.op.kind = OperatorKind::noisy_tracker;
        s.op.noise_std = 0.2;
        s.seed = 5;
        const Episode ep = run_scenario(s);
        std::stringstream log;
        write_episode_log(log, s, ep);
        const std::string text = log.str();

        std::istringstream in(text);
        const ReplayReport r = replay_episode_log(in);
        CHECK(r.ticks == s.n_ticks);
        CHECK(r.inference_messages == static_cast<std::int64_t>(ep.assist_log().size()));
        CHECK(r.mismatches == 0);
        CHECK(r.first_mismatch.empty());

        // Change a digit of one logged state position.
        std::string tampered = text;
        const auto state_line = tampered.find("\"type\":\"state\"", text.size() / 2);
        REQUIRE(state_line != std::string::npos);
        const auto digit = tampered.find_first_of("0123456789", tampered.find("\"x\":[", state_line));
        tampered[digit] = tampered[digit] == '9' ? '8' : '9';
        std::istringstream bad(tampered);
        const ReplayReport r2 = replay_episode_log(bad);
        CHECK(r2.mismatches > 0);
        CHECK_FALSE(r2.first_mismatch.empty());
    }

    std::istringstream empty("");
    CHECK_THROWS_AS(replay_episode_log(empty), Error);
}
