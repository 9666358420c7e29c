#include <doctest.h>

#include <cmath>
#include <random>

#include "casa/inference.hpp"
#include "casa/irl.hpp"
#include "casa/planner.hpp"
#include "casa/scenario.hpp"
#include "oracles.hpp"

using namespace casa;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

RbfBasis single_center(const Vec& c) {
    return RbfBasis({1, 1}, 1.0, Bounds{c - Vec::Ones(2), c + Vec::Ones(2)}, true);
}

Trajectory random_traj(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<Vec> xs;
    for (int i = 0; i < n; ++i) xs.push_back(v2(u(rng), u(rng)));
    return Trajectory::from_states(xs);
}

double mean_cost(const Intent& intent, const std::vector<Trajectory>& trajs) {
    double total = 0.0;
    for (const auto& t : trajs) total += cost(intent, t);
    return total / static_cast<double>(trajs.size());
}

// Five exact optimal plans of the skill fixture's hidden feature cost.
struct SkillFixture {
    Scenario scenario = scenarios::unknown_skill();
    Intent truth = scenarios::hidden_intent(scenario);
    DemoSet demos;

    SkillFixture() {
        for (const auto& s : {v2(0.5, 3.0), v2(3.0, 0.5), v2(2.0, 2.0), v2(0.5, 0.5), v2(3.5, 2.0)})
            demos.demos.push_back(planner::plan({s}, truth, scenario.n_ticks, scenario.world).trajectory);
    }
};

double mean_plan_distance(const Intent& learned, const DemoSet& demos, const WorldConfig& world) {
    double total = 0.0;
    int n = 0;
    for (const auto& d : demos.demos) {
        const Plan p = planner::plan(d.front().state, learned, static_cast<int>(d.size()) - 1, world);
        for (std::size_t i = 0; i < d.size(); ++i, ++n) total += (d[i].state.x - p.trajectory[i].state.x).norm();
    }
    return total / n;
}

}  // namespace

TEST_CASE("irl gradient examples") {
    const Vec c = v2(5, 5);
    const Intent f = Intent::make_learned("f", v2(0.3, -0.2), single_center(c));
    const std::vector<Vec> three{c, c, c}, one{c};
    DemoSet demos{{Trajectory::from_states(three)}, std::nullopt};
    const std::vector<Trajectory> samples{Trajectory::from_states(one)};
    const Vec g = irl_gradient(demos, samples, f);
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(2.0));

    CHECK(irl_gradient(demos, demos.demos, f).norm() == 0.0);

    CHECK_THROWS_AS(irl_gradient(demos, std::vector<Trajectory>{}, f), Error);
    CHECK_THROWS_AS(irl_gradient(DemoSet{}, samples, f), Error);
}

TEST_CASE("irl gradient matches finite differences of the two-term objective") {
    std::mt19937_64 rng(19);
    const RbfBasis basis = RbfBasis::for_workspace({Vec::Zero(2), Vec::Constant(2, 10.0)});
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        DemoSet demos;
        for (int j = 0; j < 1 + i % 4; ++j) demos.demos.push_back(random_traj(rng, 5 + j));
        std::vector<Trajectory> samples;
        for (int j = 0; j < 1 + i % 6; ++j) samples.push_back(random_traj(rng, 3 + j));
        Vec phi(basis.size());
        for (int j = 0; j < phi.size(); ++j) phi[j] = n(rng);

        auto objective = [&](const Vec& p) {
            return irl_objective(demos, samples, Intent::make_learned("f", p, basis));
        };
        const Vec fd = oracle::finite_difference(objective, phi, 1e-3);
        const Vec g = irl_gradient(demos, samples, Intent::make_learned("f", phi, basis));
        CHECK(oracle::relative_error(g, fd) < 1e-6);
    }
}

TEST_CASE("one descent step lowers the objective") {
    std::mt19937_64 rng(37);
    const RbfBasis basis = RbfBasis::for_workspace({Vec::Zero(2), Vec::Constant(2, 10.0)});
    DemoSet demos{{random_traj(rng, 8), random_traj(rng, 8)}, std::nullopt};
    const std::vector<Trajectory> samples{random_traj(rng, 8), random_traj(rng, 6)};
    const Intent zero = Intent::make_learned("f", Vec::Zero(basis.size()), basis);
    const Vec g = irl_gradient(demos, samples, zero);
    REQUIRE(g.norm() > 0.0);
    const Intent stepped = Intent::make_learned("f", -0.1 * g, basis);
    CHECK(irl_objective(demos, samples, stepped) < irl_objective(demos, samples, zero));
}

TEST_CASE("sample_near_optimal contracts") {
    const Scenario s = scenarios::unknown_skill();
    const Intent truth = scenarios::hidden_intent(s);
    WorldConfig world = s.world;
    world.planning_horizon = 40;
    const std::vector<State> starts{{v2(1, 1)}, {v2(4, 1)}, {v2(1, 4)}, {v2(3, 3)}};
    IrlConfig cfg;
    cfg.seed = 5;

    const auto samples = sample_near_optimal(truth, starts, cfg, world);
    REQUIRE(samples.size() == 16);
    for (std::size_t i = 0; i < samples.size(); ++i) CHECK(samples[i].front().state.x == starts[i % 4].x);
    CHECK(sample_near_optimal(truth, starts, cfg, world) == samples);

    cfg.noise_scale = 0.0;
    const auto exact = sample_near_optimal(truth, starts, cfg, world);
    for (std::size_t i = 0; i < exact.size(); ++i)
        CHECK(exact[i] == planner::plan(starts[i % 4], truth, 40, world).trajectory);

    for (const auto& t : samples) {
        for (std::size_t i = 1; i < t.size(); ++i)
            CHECK((t[i].state.x - t[i - 1].state.x).norm() <= world.step_length() * (1 + 1e-9));
    }
}

TEST_CASE("a single stationary demo makes its center the cheapest") {
    WorldConfig world;
    const RbfBasis basis = RbfBasis::for_workspace(world.workspace);
    const Vec c = basis.centers()[17];
    DemoSet demos{{Trajectory::from_states(std::vector<Vec>(30, c))}, std::nullopt};
    IrlConfig cfg;
    cfg.max_iters = 100;
    const LearnResult r = learn_intent(demos, cfg, world);
    CHECK(r.intent.features()->min_center() == c);
}

TEST_CASE("learned intent reproduces the demonstrating cost's plans") {
    const SkillFixture fx;
    const LearnResult r = learn_intent(fx.demos, IrlConfig{}, fx.scenario.world);
    CHECK(mean_plan_distance(r.intent, fx.demos, fx.scenario.world) < 0.1);

    // Demonstrations become cheap relative to the all-zero starting weights.
    CHECK(mean_cost(r.intent, fx.demos.demos) <= 0.0);

    // A demonstration from a start not used for learning is explained with
    // confidence above the misspecification threshold.
    const Trajectory held_out =
        planner::plan({v2(1.5, 4.5)}, fx.truth, fx.scenario.n_ticks, fx.scenario.world).trajectory;
    const Trajectory prefix = trajectory_prefix(held_out, 9 * fx.scenario.world.inference_period_ticks);
    const auto s = suboptimality(prefix, r.intent, fx.scenario.world);
    CHECK(beta_map(s, 1.0).beta > fx.scenario.assist.epsilon);
}

TEST_CASE("learning is deterministic and robust to the step schedule") {
    const SkillFixture fx;
    IrlConfig cfg;
    cfg.max_iters = 150;
    const LearnResult a = learn_intent(fx.demos, cfg, fx.scenario.world);
    const LearnResult b = learn_intent(fx.demos, cfg, fx.scenario.world);
    CHECK(a.intent.features()->phi == b.intent.features()->phi);
    CHECK(a.gradient_norms == b.gradient_norms);

    IrlConfig slow = cfg;
    slow.learning_rate *= 0.5;
    slow.max_iters *= 2;
    const LearnResult c = learn_intent(fx.demos, slow, fx.scenario.world);
    const double ca = mean_cost(a.intent, fx.demos.demos);
    const double cc = mean_cost(c.intent, fx.demos.demos);
    CHECK(std::abs(ca - cc) < 0.05 * std::abs(ca));
}

TEST_CASE("learning reports progress and honours cancellation") {
    const SkillFixture fx;
    std::stop_source stop;
    int reports = 0;
    LearnOptions opts;
    opts.id = "pour";
    opts.stop = stop.get_token();
    opts.on_progress = [&](const LearnProgress& p) {
        ++reports;
        CHECK(p.iteration == reports - 1);
        if (reports == 3) stop.request_stop();
    };
    IrlConfig cfg;
    cfg.max_iters = 50;
    const LearnResult r = learn_intent(fx.demos, cfg, fx.scenario.world, opts);
    CHECK(r.cancelled);
    CHECK(reports == 3);
    CHECK(r.intent.id == "pour");
}

TEST_CASE("irl config validation") {
    IrlConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.n_samples = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.learning_rate = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK_THROWS_AS(DemoSet{}.validate(), Error);
}
