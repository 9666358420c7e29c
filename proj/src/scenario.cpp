#include "casa/scenario.hpp"

#include "casa/planner.hpp"

namespace casa {

void Scenario::validate() const {
    world.validate();
    assist.validate();
    op.validate();
    if (n_ticks < 1) throw Error(ErrorCode::invalid_config, "n_ticks must be >= 1");
    if (start.x.size() != world.k) throw Error(ErrorCode::dimension, "start dimension mismatch");
    if (!world.workspace.contains(start.x)) throw Error(ErrorCode::invalid_config, "start outside workspace");
    for (const auto& intent : intents) {
        if (const auto* g = intent.goal()) {
            if (g->goal.size() != world.k) throw Error(ErrorCode::dimension, "goal dimension mismatch: " + intent.id);
            if (!world.workspace.contains(g->goal)) throw Error(ErrorCode::invalid_config, "goal outside workspace: " + intent.id);
        } else if (intent.features()->basis.dim() != world.k) {
            throw Error(ErrorCode::dimension, "feature basis dimension mismatch: " + intent.id);
        }
    }
}

Trajectory Scenario::intended_trajectory() const {
    if (reference) return *reference;
    if (op.target) return planner::plan(start, *op.target, n_ticks, world).trajectory;
    if (op.replay) return *op.replay;
    return Trajectory::from_states(std::vector<Vec>{start.x});
}

namespace scenarios {
namespace {

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

Scenario base(std::string name) {
    Scenario s;
    s.name = std::move(name);
    s.world = WorldConfig{};
    s.assist = AssistConfig{};
    s.assist.pba_threshold = 3.0;
    s.intents = IntentSet({Intent::make_goal("green", v2(5.0, 2.5)), Intent::make_goal("purple", v2(2.0, 8.0))});
    s.method = Method::casa;
    s.start = State{v2(1.0, 1.0)};
    s.n_ticks = 100;
    s.seed = 1;
    s.op.kind = OperatorKind::optimal_tracker;
    return s;
}

// Pour-like skill: a low-cost corridor up the diagonal that bends towards
// the pouring spot above the middle of the workspace.
Intent pouring_skill(const WorldConfig& world) {
    const RbfBasis basis = RbfBasis::for_workspace(world.workspace);
    Vec phi = Vec::Zero(basis.size());
    auto weight = [&](double x, double y, double w) {
        const auto& centers = basis.centers();
        for (std::size_t j = 0; j < centers.size(); ++j)
            if ((centers[j] - v2(x, y)).norm() < 1e-9) phi[static_cast<Eigen::Index>(j)] = w;
    };
    weight(5.0, 5.0, -1.5);
    weight(5.0, 7.5, -3.0);
    weight(2.5, 5.0, 1.0);
    weight(7.5, 2.5, 1.0);
    phi[basis.size() - 1] = 3.0;
    return Intent::make_learned("pour", phi, basis);
}

}  // namespace

Scenario known_goal() {
    Scenario s = base("known_goal");
    s.op.target = s.intents.at("green");
    return s;
}

Scenario unknown_goal() {
    Scenario s = base("unknown_goal");
    s.op.target = Intent::make_goal("red", v2(8.0, 8.0));
    return s;
}

Scenario unknown_skill() {
    Scenario s = base("unknown_skill");
    s.op.target = pouring_skill(s.world);
    return s;
}

Intent hidden_intent(const Scenario& s) {
    if (!s.op.target) throw Error(ErrorCode::invalid_config, "scenario has no tracking target");
    return *s.op.target;
}

Scenario by_name(const std::string& name) {
    if (name == "known_goal") return known_goal();
    if (name == "unknown_goal") return unknown_goal();
    if (name == "unknown_skill") return unknown_skill();
    throw Error(ErrorCode::unknown_id, "unknown scenario: " + name);
}

std::vector<std::string> names() {
    return {"known_goal", "unknown_goal", "unknown_skill"};
}

DemoSet demonstrations(const Scenario& s, int count) {
    static const double starts[][2] = {{0.5, 3.0}, {3.0, 0.5}, {2.0, 2.0}, {0.5, 0.5}, {3.5, 2.0},
                                       {1.5, 4.5}, {4.5, 1.0}, {1.0, 2.0}};
    if (count < 1 || count > static_cast<int>(std::size(starts)))
        throw Error(ErrorCode::invalid_input, "unsupported number of demonstrations");
    DemoSet demos;
    demos.intent_hint = hidden_intent(s).id;
    for (int i = 0; i < count; ++i) {
        Scenario demo = s;
        demo.method = Method::none;
        demo.start = State{v2(starts[i][0], starts[i][1])};
        demo.op.kind = OperatorKind::optimal_tracker;
        demo.op.release_below_alpha.reset();
        demos.demos.push_back(run_scenario(demo).history());
    }
    return demos;
}

}  // namespace scenarios

Episode make_episode(const Scenario& s) {
    s.validate();
    return Episode(s.world, s.assist, s.intents, s.method, s.start, s.intended_trajectory());
}

ScriptedOperator make_operator(const Scenario& s) {
    ScriptedOperatorSpec spec = s.op;
    spec.seed = s.seed;
    return ScriptedOperator(std::move(spec));
}

Episode run_scenario(const Scenario& s, RunOutcome* outcome) {
    Episode ep = make_episode(s);
    ScriptedOperator op = make_operator(s);
    RunOutcome o = run_scripted(ep, op, s.n_ticks);
    if (outcome) *outcome = o;
    return ep;
}

}  // namespace casa
