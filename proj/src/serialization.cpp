#include "casa/serialization.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace casa {
namespace {

[[noreturn]] void bad(std::string_view path, std::string_view what) {
    throw Error(ErrorCode::invalid_config, std::string(path) + ": " + std::string(what));
}

std::string join(std::string_view path, std::string_view key) {
    if (path.empty()) return std::string(key);
    return std::string(path) + "." + std::string(key);
}

const Json& require(const Json& j, std::string_view key, std::string_view path) {
    if (!j.is_object()) bad(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(join(path, key), "missing field");
    return *it;
}

double number(const Json& j, std::string_view path) {
    if (!j.is_number()) bad(path, "expected a number");
    return j.get<double>();
}

std::int64_t integer(const Json& j, std::string_view path) {
    if (!j.is_number_integer()) bad(path, "expected an integer");
    return j.get<std::int64_t>();
}

std::string text(const Json& j, std::string_view path) {
    if (!j.is_string()) bad(path, "expected a string");
    return j.get<std::string>();
}

template <class T, class F>
void optional_field(const Json& j, std::string_view key, std::string_view path, T& out, F decode) {
    if (!j.is_object()) bad(path, "expected an object");
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = decode(*it, join(path, key));
}

void set_double(const Json& j, std::string_view key, std::string_view path, double& out) {
    optional_field(j, key, path, out, number);
}

void set_int(const Json& j, std::string_view key, std::string_view path, int& out) {
    optional_field(j, key, path, out, [](const Json& v, std::string_view p) { return static_cast<int>(integer(v, p)); });
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

Json bounds_to_json(const Bounds& b) {
    return {{"lo", vec_to_json(b.lo)}, {"hi", vec_to_json(b.hi)}};
}

Bounds bounds_from_json(const Json& j, std::string_view path) {
    return {vec_from_json(require(j, "lo", path), join(path, "lo")), vec_from_json(require(j, "hi", path), join(path, "hi"))};
}

}  // namespace

Json parse_json(std::string_view text, std::string_view source) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        // nlohmann reports the 1-based byte just past the failure point.
        const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string what = e.what();
        if (auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
        throw Error(ErrorCode::parse, std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
    }
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::invalid_input, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_json(buf.str(), path.string());
}

Json vec_to_json(const Vec& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vec vec_from_json(const Json& j, std::string_view path) {
    if (!j.is_array()) bad(path, "expected an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], std::string(path) + "[" + std::to_string(i) + "]");
    return v;
}

Json to_json(const WorldConfig& w) {
    return {{"k", w.k},
            {"workspace", bounds_to_json(w.workspace)},
            {"max_speed", w.max_speed},
            {"tick_rate", w.tick_rate},
            {"inference_period_ticks", w.inference_period_ticks},
            {"planning_horizon", w.planning_horizon}};
}

WorldConfig world_from_json(const Json& j) {
    const std::string path = "world";
    WorldConfig w;
    set_int(j, "k", path, w.k);
    if (j.contains("workspace")) {
        w.workspace = bounds_from_json(j["workspace"], "world.workspace");
    } else if (w.k != 2) {
        w.workspace = {Vec::Zero(w.k), Vec::Constant(w.k, 10.0)};
    }
    set_double(j, "max_speed", path, w.max_speed);
    set_double(j, "tick_rate", path, w.tick_rate);
    set_int(j, "inference_period_ticks", path, w.inference_period_ticks);
    set_int(j, "planning_horizon", path, w.planning_horizon);
    w.validate();
    return w;
}

Json to_json(const AssistConfig& a) {
    return {{"estimator", a.estimator.kind == EstimatorKind::mle ? "mle" : "map"},
            {"lambda", a.estimator.lambda},
            {"beta_cap", a.estimator.beta_cap},
            {"s_floor", a.estimator.s_floor},
            {"epsilon", a.epsilon},
            {"pba_threshold", a.pba_threshold}};
}

AssistConfig assist_from_json(const Json& j) {
    const std::string path = "assist";
    AssistConfig a;
    if (!j.is_object()) bad(path, "expected an object");
    if (j.contains("estimator")) {
        const std::string kind = text(j["estimator"], "assist.estimator");
        if (kind == "mle") {
            a.estimator.kind = EstimatorKind::mle;
        } else if (kind == "map") {
            a.estimator.kind = EstimatorKind::map;
        } else {
            bad("assist.estimator", "expected \"mle\" or \"map\"");
        }
    }
    set_double(j, "lambda", path, a.estimator.lambda);
    set_double(j, "beta_cap", path, a.estimator.beta_cap);
    set_double(j, "s_floor", path, a.estimator.s_floor);
    set_double(j, "epsilon", path, a.epsilon);
    set_double(j, "pba_threshold", path, a.pba_threshold);
    a.validate();
    return a;
}

Json to_json(const IrlConfig& c) {
    return {{"n_samples", c.n_samples}, {"noise_scale", c.noise_scale}, {"learning_rate", c.learning_rate},
            {"max_iters", c.max_iters}, {"grad_tol", c.grad_tol},       {"l2", c.l2},
            {"seed", c.seed},           {"rbf_per_axis", c.rbf_per_axis}};
}

IrlConfig irl_config_from_json(const Json& j) {
    const std::string path = "irl";
    IrlConfig c;
    set_int(j, "n_samples", path, c.n_samples);
    set_double(j, "noise_scale", path, c.noise_scale);
    set_double(j, "learning_rate", path, c.learning_rate);
    set_int(j, "max_iters", path, c.max_iters);
    set_double(j, "grad_tol", path, c.grad_tol);
    set_double(j, "l2", path, c.l2);
    optional_field(j, "seed", path, c.seed,
                   [](const Json& v, std::string_view p) { return static_cast<std::uint64_t>(integer(v, p)); });
    set_int(j, "rbf_per_axis", path, c.rbf_per_axis);
    c.validate();
    return c;
}

Json to_json(const Trajectory& traj) {
    Json out = Json::array();
    for (const auto& s : traj) out.push_back({{"tick", s.tick}, {"x", vec_to_json(s.state.x)}, {"a", vec_to_json(s.input.a)}});
    return out;
}

Trajectory trajectory_from_json(const Json& j, std::string_view path) {
    if (!j.is_array()) bad(path, "expected an array of steps");
    std::vector<TrajectoryStep> steps;
    steps.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = std::string(path) + "[" + std::to_string(i) + "]";
        TrajectoryStep s;
        s.tick = j[i].contains("tick") ? integer(j[i]["tick"], p + ".tick") : static_cast<std::int64_t>(i);
        s.state.x = vec_from_json(require(j[i], "x", p), p + ".x");
        s.input.a = j[i].contains("a") ? vec_from_json(j[i]["a"], p + ".a") : Vec::Zero(s.state.x.size());
        if (s.input.a.size() != s.state.x.size()) bad(p + ".a", "input and state dimensions differ");
        steps.push_back(std::move(s));
    }
    try {
        return Trajectory(std::move(steps));
    } catch (const Error& e) {
        bad(path, e.what());
    }
}

Json to_json(const Intent& intent) {
    if (const auto* g = intent.goal()) return {{"id", intent.id}, {"kind", "goal"}, {"goal", vec_to_json(g->goal)}};
    const auto& fc = *intent.features();
    return {{"id", intent.id},
            {"kind", "learned"},
            {"phi", vec_to_json(fc.phi)},
            {"basis",
             {{"grid_dims", fc.basis.grid_dims()},
              {"bandwidth", fc.basis.bandwidth()},
              {"bounds", bounds_to_json(fc.basis.bounds())},
              {"bias", fc.basis.bias()}}}};
}

Intent intent_from_json(const Json& j, std::string_view path) {
    const std::string id = text(require(j, "id", path), join(path, "id"));
    const std::string p = std::string(path) + "(" + id + ")";
    const std::string kind = text(require(j, "kind", p), join(p, "kind"));
    if (kind == "goal") return Intent::make_goal(id, vec_from_json(require(j, "goal", p), join(p, "goal")));
    if (kind != "learned") bad(join(p, "kind"), "expected \"goal\" or \"learned\"");

    const Json& b = require(j, "basis", p);
    const std::string bp = join(p, "basis");
    const Json& dims_json = require(b, "grid_dims", bp);
    if (!dims_json.is_array()) bad(join(bp, "grid_dims"), "expected an array of integers");
    std::vector<int> dims;
    for (const auto& d : dims_json) dims.push_back(static_cast<int>(integer(d, join(bp, "grid_dims"))));
    const double bandwidth = number(require(b, "bandwidth", bp), join(bp, "bandwidth"));
    const Bounds bounds = bounds_from_json(require(b, "bounds", bp), join(bp, "bounds"));
    bool bias = true;
    if (b.contains("bias")) {
        if (!b["bias"].is_boolean()) bad(join(bp, "bias"), "expected a boolean");
        bias = b["bias"].get<bool>();
    }
    try {
        RbfBasis basis(std::move(dims), bandwidth, bounds, bias);
        Vec phi = vec_from_json(require(j, "phi", p), join(p, "phi"));
        if (phi.size() != basis.size())
            bad(join(p, "phi"), "expected " + std::to_string(basis.size()) + " weights, got " + std::to_string(phi.size()));
        return Intent::make_learned(id, std::move(phi), std::move(basis));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::invalid_config) throw;
        bad(bp, e.what());
    }
}

Json to_json(const IntentSet& intents) {
    Json out = Json::array();
    for (const auto& i : intents) out.push_back(to_json(i));
    return out;
}

IntentSet intent_set_from_json(const Json& j) {
    if (!j.is_array()) bad("intents", "expected an array");
    IntentSet set;
    for (std::size_t i = 0; i < j.size(); ++i) {
        Intent intent = intent_from_json(j[i], "intents[" + std::to_string(i) + "]");
        if (set.contains(intent.id)) bad("intents[" + std::to_string(i) + "]", "duplicate intent id " + intent.id);
        set.add(std::move(intent));
    }
    return set;
}

Json to_json(const ScriptedOperatorSpec& op) {
    Json out = {{"kind", to_string(op.kind)}, {"noise_std", op.noise_std}};
    if (op.target) out["target"] = to_json(*op.target);
    if (op.replay) out["replay"] = to_json(*op.replay);
    if (op.release_below_alpha) out["release_below_alpha"] = *op.release_below_alpha;
    return out;
}

ScriptedOperatorSpec operator_from_json(const Json& j) {
    const std::string path = "operator";
    ScriptedOperatorSpec op;
    if (!j.is_object()) bad(path, "expected an object");
    if (j.contains("kind")) {
        try {
            op.kind = operator_kind_from_string(text(j["kind"], "operator.kind"));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::invalid_config) throw;
            bad("operator.kind", e.what());
        }
    }
    if (j.contains("target")) op.target = intent_from_json(j["target"], "operator.target");
    if (j.contains("replay")) op.replay = trajectory_from_json(j["replay"], "operator.replay");
    set_double(j, "noise_std", path, op.noise_std);
    if (j.contains("release_below_alpha") && !j["release_below_alpha"].is_null())
        op.release_below_alpha = number(j["release_below_alpha"], "operator.release_below_alpha");
    return op;
}

Json to_json(const Scenario& s) {
    Json out = {{"name", s.name},
                {"world", to_json(s.world)},
                {"assist", to_json(s.assist)},
                {"intents", to_json(s.intents)},
                {"method", to_string(s.method)},
                {"start", vec_to_json(s.start.x)},
                {"operator", to_json(s.op)},
                {"n_ticks", s.n_ticks},
                {"seed", s.seed}};
    if (s.reference) out["reference"] = to_json(*s.reference);
    return out;
}

Scenario scenario_from_json(const Json& j) {
    if (!j.is_object()) bad("scenario", "expected an object");
    Scenario s;
    if (j.contains("name")) s.name = text(j["name"], "name");
    s.world = j.contains("world") ? world_from_json(j["world"]) : WorldConfig{};
    if (j.contains("assist")) s.assist = assist_from_json(j["assist"]);
    s.intents = intent_set_from_json(require(j, "intents", ""));
    if (j.contains("method")) {
        try {
            s.method = method_from_string(text(j["method"], "method"));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::invalid_config) throw;
            bad("method", e.what());
        }
    }
    s.start.x = vec_from_json(require(j, "start", ""), "start");
    s.op = operator_from_json(require(j, "operator", ""));
    if (j.contains("n_ticks")) s.n_ticks = static_cast<int>(integer(j["n_ticks"], "n_ticks"));
    if (j.contains("seed")) s.seed = static_cast<std::uint64_t>(integer(j["seed"], "seed"));
    if (j.contains("reference")) s.reference = trajectory_from_json(j["reference"], "reference");
    try {
        s.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::invalid_config) throw;
        bad(s.name.empty() ? "scenario" : s.name, e.what());
    }
    return s;
}

Scenario load_scenario(const std::string& path_or_name) {
    const auto built_in = scenarios::names();
    if (std::find(built_in.begin(), built_in.end(), path_or_name) != built_in.end())
        return scenarios::by_name(path_or_name);
    const Json j = read_json_file(path_or_name);
    try {
        return scenario_from_json(j);
    } catch (const Error& e) {
        throw Error(e.code(), path_or_name + ": " + e.what());
    }
}

Json to_json(const DemoSet& demos) {
    Json out = {{"demos", Json::array()}};
    for (const auto& d : demos.demos) out["demos"].push_back(to_json(d));
    if (demos.intent_hint) out["intent_hint"] = *demos.intent_hint;
    return out;
}

DemoSet demo_set_from_json(const Json& j) {
    DemoSet out;
    const Json& list = require(j, "demos", "");
    if (!list.is_array()) bad("demos", "expected an array of trajectories");
    for (std::size_t i = 0; i < list.size(); ++i)
        out.demos.push_back(trajectory_from_json(list[i], "demos[" + std::to_string(i) + "]"));
    if (j.contains("intent_hint")) out.intent_hint = text(j["intent_hint"], "intent_hint");
    try {
        out.validate();
    } catch (const Error& e) {
        bad("demos", e.what());
    }
    return out;
}

Json to_json(const MetricsReport& r) {
    Json out = {{"scenario", r.scenario},
                {"method", to_string(r.method)},
                {"seed", r.seed},
                {"error", r.error},
                {"efficiency_cost", r.efficiency_cost},
                {"effort", r.effort}};
    out["relative_effort"] = r.relative_effort ? Json(*r.relative_effort) : Json(nullptr);
    return out;
}

Json state_message(std::int64_t tick, const State& x, double alpha, const Action& u) {
    return {{"type", "state"}, {"tick", tick}, {"x", vec_to_json(x.x)}, {"alpha", alpha}, {"u", vec_to_json(u.u)}};
}

Json inference_message(std::int64_t tick, const ArbitrationResult& r) {
    Json betas = Json::object();
    for (const auto& [id, est] : r.betas) betas[id] = est.beta;
    Json posterior = Json::object();
    for (std::size_t i = 0; i < r.posterior.ids.size(); ++i) posterior[r.posterior.ids[i]] = r.posterior.probabilities[i];
    Json alphas = {{"casa", r.alphas.casa}, {"pba", r.alphas.pba}};
    alphas["belief"] = r.alphas.belief ? Json(*r.alphas.belief) : Json(nullptr);
    return {{"type", "inference"}, {"tick", tick},         {"t", r.t},
            {"method", to_string(r.method)}, {"alpha", r.alpha}, {"betas", std::move(betas)},
            {"posterior", std::move(posterior)}, {"theta_star", r.theta_star}, {"alphas", std::move(alphas)},
            {"misspecified", r.misspecified}};
}

Json input_message(std::int64_t tick, const HumanInput& a) {
    return {{"type", "input"}, {"tick", tick}, {"a", vec_to_json(a.a)}};
}

Json error_message(std::string_view code, std::string_view detail) {
    return {{"type", "error"}, {"code", code}, {"detail", detail}};
}

void write_episode_log(std::ostream& out, const Scenario& scenario, const Episode& episode) {
    Scenario header = scenario;
    header.method = episode.method();
    out << Json{{"type", "header"}, {"version", 1}, {"scenario", to_json(header)}}.dump() << '\n';

    const auto& hist = episode.history();
    const auto& log = episode.assist_log();
    std::size_t next_inference = 0;
    for (std::size_t i = 0; i + 1 < hist.size(); ++i) {
        const std::int64_t tick = hist[i].tick;
        out << input_message(tick, hist[i].input).dump() << '\n';
        if (next_inference < log.size() && tick % episode.world().inference_period_ticks == 0)
            out << inference_message(tick, log[next_inference++]).dump() << '\n';
        out << state_message(hist[i + 1].tick, hist[i + 1].state, episode.applied_alphas()[i], episode.executed_actions()[i]).dump() << '\n';
    }
}

ReplayReport replay_episode_log(std::istream& in, std::string_view source) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&](Json& j) {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            j = parse_json(line, std::string(source) + ":" + std::to_string(lineno));
            return true;
        }
        return false;
    };

    Json header;
    if (!next(header) || header.value("type", "") != "header")
        throw Error(ErrorCode::parse, std::string(source) + ":1: expected a header line");
    const Scenario scenario = scenario_from_json(require(header, "scenario", "header"));
    Episode ep = make_episode(scenario);

    ReplayReport report;
    auto mismatch = [&](const std::string& what) {
        if (report.mismatches++ == 0) report.first_mismatch = std::string(source) + ":" + std::to_string(lineno) + ": " + what;
    };

    std::optional<ArbitrationResult> pending;
    std::int64_t pending_tick = 0;
    Json msg;
    while (next(msg)) {
        const std::string type = msg.value("type", "");
        if (type == "input") {
            const std::int64_t tick = integer(require(msg, "tick", "input"), "input.tick");
            if (tick != ep.tick()) mismatch("input for tick " + std::to_string(tick) + " while the episode is at tick " + std::to_string(ep.tick()));
            pending_tick = ep.tick();
            pending = ep.step(HumanInput{vec_from_json(require(msg, "a", "input"), "input.a")});
            ++report.ticks;
        } else if (type == "inference") {
            ++report.inference_messages;
            if (!pending) {
                mismatch("inference message on a tick without inference");
                continue;
            }
            const std::string expected = inference_message(pending_tick, *pending).dump();
            if (msg.dump() != expected) mismatch("inference differs: expected " + expected);
            pending.reset();
        } else if (type == "state") {
            if (ep.executed_actions().empty()) {
                mismatch("state message before any input");
                continue;
            }
            const std::size_t i = ep.executed_actions().size() - 1;
            const std::string expected =
                state_message(ep.tick(), ep.state(), ep.applied_alphas()[i], ep.executed_actions()[i]).dump();
            if (msg.dump() != expected) mismatch("state differs: expected " + expected);
        } else {
            mismatch("unknown message type '" + type + "'");
        }
    }
    if (pending) mismatch("missing inference message for tick " + std::to_string(pending_tick));
    return report;
}

}  // namespace casa
