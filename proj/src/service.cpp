#include "casa/service.hpp"

#include <cmath>
#include <condition_variable>

namespace casa {

void OutboundQueue::push(const Json& msg) {
    const bool droppable = msg.value("type", "") == "state";
    if (items_.size() >= capacity_) {
        for (auto it = items_.begin(); it != items_.end(); ++it) {
            if (it->droppable) {
                items_.erase(it);
                ++dropped_;
                break;
            }
        }
    }
    if (droppable && items_.size() >= capacity_) {
        ++dropped_;
        return;
    }
    items_.push_back({droppable, msg.dump()});
}

std::optional<std::string> OutboundQueue::pop() {
    if (items_.empty()) return std::nullopt;
    std::string text = std::move(items_.front().text);
    items_.pop_front();
    return text;
}

std::string_view to_string(SessionMode m) noexcept {
    return m == SessionMode::assist ? "assist" : "demo_recording";
}

struct SessionCore::Job {
    int id = 0;
    std::string intent_id;
    std::mutex mutex;
    std::condition_variable cv;
    std::vector<Json> outbox;
    bool finished = false;
    std::optional<LearnResult> result;
    std::jthread thread;  // last member: joined before the rest is destroyed
};

namespace {

std::vector<Json> one(Json msg) {
    std::vector<Json> out;
    out.push_back(std::move(msg));
    return out;
}

std::vector<Json> fail(ErrorCode code, std::string_view detail) {
    return one(error_message(to_string(code), detail));
}

}  // namespace

SessionCore::SessionCore(std::string id, SessionOptions options) : id_(std::move(id)), options_(std::move(options)) {
    if (!options_.scenario_loader) options_.scenario_loader = [](const std::string& name) { return scenarios::by_name(name); };
}

SessionCore::~SessionCore() {
    if (job_) job_->thread.request_stop();
}

double SessionCore::tick_rate() const {
    return scenario_ ? scenario_->world.tick_rate : WorldConfig{}.tick_rate;
}

std::vector<Json> SessionCore::handle_message(std::string_view text) {
    Json msg;
    try {
        msg = parse_json(text, "message");
    } catch (const Error& e) {
        return fail(e.code(), e.what());
    }
    return handle_json(msg);
}

std::vector<Json> SessionCore::handle_json(const Json& msg) {
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
        return fail(ErrorCode::parse, "message must be an object with a string \"type\"");
    const std::string type = msg["type"].get<std::string>();
    try {
        if (type == "start") return on_start(msg);
        if (type == "input") return on_input(msg);
        if (type == "finish_demo") return on_finish_demo();
        if (type == "start_irl") return on_start_irl(msg);
        if (type == "stop") return on_stop();
        if (type == "cancel_irl") return on_cancel_irl();
        return fail(ErrorCode::parse, "unknown message type '" + type + "'");
    } catch (const Error& e) {
        return fail(e.code(), e.what());
    } catch (const Json::exception& e) {
        return fail(ErrorCode::parse, e.what());
    }
}

std::vector<Json> SessionCore::on_start(const Json& msg) {
    if (episode_) return fail(ErrorCode::invalid_state, "an episode is already running; send stop first");

    Scenario s;
    if (!msg.contains("scenario")) return fail(ErrorCode::invalid_input, "start needs a scenario");
    if (msg["scenario"].is_string()) {
        s = options_.scenario_loader(msg["scenario"].get<std::string>());
    } else {
        s = scenario_from_json(msg["scenario"]);
    }

    SessionMode mode = SessionMode::assist;
    if (msg.contains("mode")) {
        const std::string m = msg["mode"].get<std::string>();
        if (m == "demo_recording" || m == "demo") {
            mode = SessionMode::demo_recording;
        } else if (m != "assist") {
            return fail(ErrorCode::invalid_input, "mode must be \"assist\" or \"demo_recording\"");
        }
    }
    if (msg.contains("method")) s.method = method_from_string(msg["method"].get<std::string>());
    if (mode == SessionMode::demo_recording) s.method = Method::none;
    if (msg.contains("seed")) {
        if (!msg["seed"].is_number_integer()) return fail(ErrorCode::invalid_input, "seed must be an integer");
        s.seed = msg["seed"].get<std::uint64_t>();
    }

    apply_pending_intent();
    for (const auto& intent : learned_)
        if (!s.intents.contains(intent.id)) s.intents.add(intent);

    episode_.emplace(make_episode(s));
    scenario_ = s;
    mode_ = mode;
    held_ = HumanInput::zero(s.world.k);

    Json config = to_json(s);
    config.erase("operator");
    return one({{"type", "started"}, {"session", id_}, {"mode", to_string(mode)}, {"config", std::move(config)}});
}

std::vector<Json> SessionCore::on_input(const Json& msg) {
    if (!episode_) return fail(ErrorCode::invalid_state, "no active episode");
    if (!msg.contains("a")) return fail(ErrorCode::invalid_input, "input needs \"a\"");
    HumanInput a{vec_from_json(msg["a"], "a")};
    teleop_map(a, episode_->world());  // validates dimension and range
    held_ = std::move(a);
    return {};
}

std::vector<Json> SessionCore::tick() {
    if (!episode_) return {};
    const std::int64_t tick = episode_->tick();
    std::vector<Json> out;
    if (auto r = episode_->step(held_)) out.push_back(inference_message(tick, *r));
    const std::size_t i = episode_->executed_actions().size() - 1;
    out.push_back(state_message(episode_->tick(), episode_->state(), episode_->applied_alphas()[i],
                                episode_->executed_actions()[i]));
    return out;
}

std::vector<Json> SessionCore::on_finish_demo() {
    if (!episode_ || mode_ != SessionMode::demo_recording)
        return fail(ErrorCode::invalid_state, "no demonstration is being recorded");
    Trajectory demo = episode_->history();
    const std::int64_t ticks = episode_->tick();
    end_episode();
    if (ticks < 1) return fail(ErrorCode::invalid_input, "demonstration has no ticks");
    const std::string id = "demo_" + std::to_string(next_demo_++);
    demos_.emplace(id, std::move(demo));
    return one({{"type", "demo_saved"}, {"id", id}, {"length", ticks}});
}

std::vector<Json> SessionCore::on_stop() {
    if (!episode_) return fail(ErrorCode::invalid_state, "no active episode");
    const std::int64_t ticks = episode_->tick();
    end_episode();
    return one({{"type", "stopped"}, {"tick", ticks}});
}

void SessionCore::end_episode() {
    episode_.reset();
    apply_pending_intent();
}

void SessionCore::apply_pending_intent() {
    if (pending_intent_ && !episode_) {
        learned_.add(std::move(*pending_intent_));
        pending_intent_.reset();
    }
}

std::vector<Json> SessionCore::on_start_irl(const Json& msg) {
    if (job_ && !job_->finished) return fail(ErrorCode::busy, "an IRL job is already running");
    if (job_) job_.reset();

    DemoSet demos;
    if (msg.contains("demo_ids")) {
        if (!msg["demo_ids"].is_array()) return fail(ErrorCode::invalid_input, "demo_ids must be an array");
        for (const auto& id : msg["demo_ids"]) {
            auto it = demos_.find(id.get<std::string>());
            if (it == demos_.end()) return fail(ErrorCode::unknown_id, "unknown demonstration " + id.get<std::string>());
            demos.demos.push_back(it->second);
        }
    } else {
        for (const auto& [id, d] : demos_) demos.demos.push_back(d);
    }
    if (demos.demos.empty()) return fail(ErrorCode::invalid_input, "at least one saved demonstration is required");

    Json cfg_json = to_json(options_.irl);
    if (msg.contains("cfg") && msg["cfg"].is_object()) cfg_json.update(msg["cfg"]);
    const IrlConfig cfg = irl_config_from_json(cfg_json);
    const WorldConfig world = scenario_ ? scenario_->world : WorldConfig{};

    IntentSet known = learned_;
    if (scenario_)
        for (const auto& intent : scenario_->intents)
            if (!known.contains(intent.id)) known.add(intent);
    if (pending_intent_) known.add(*pending_intent_);
    const std::string name = msg.contains("name") ? msg["name"].get<std::string>() : "learned";

    job_ = std::make_unique<Job>();
    Job* job = job_.get();
    job->id = next_job_++;
    job->intent_id = known.fresh_id(name + "_");
    job->thread = std::jthread([job, demos = std::move(demos), cfg, world](std::stop_token stop) {
        LearnOptions opts;
        opts.id = job->intent_id;
        opts.stop = stop;
        opts.on_progress = [job](const LearnProgress& p) {
            std::lock_guard lock(job->mutex);
            job->outbox.push_back({{"type", "irl_progress"}, {"job_id", job->id}, {"iteration", p.iteration},
                                   {"gradient_norm", p.gradient_norm}});
        };
        Json terminal;
        std::optional<LearnResult> result;
        try {
            result = learn_intent(demos, cfg, world, opts);
            if (result->cancelled) {
                terminal = {{"type", "irl_cancelled"}, {"job_id", job->id}};
                result.reset();
            } else {
                terminal = {{"type", "irl_done"},        {"job_id", job->id},
                            {"intent_id", job->intent_id}, {"converged", result->converged},
                            {"iterations", result->iterations}, {"gradient_norm", result->gradient_norm}};
            }
        } catch (const Error& e) {
            terminal = error_message(to_string(e.code()), e.what());
        }
        std::lock_guard lock(job->mutex);
        job->outbox.push_back(std::move(terminal));
        job->result = std::move(result);
        job->finished = true;
        job->cv.notify_all();
    });
    return one({{"type", "irl_started"}, {"job_id", job->id}, {"intent_id", job->intent_id},
                {"demos", demos_.size()}});
}

std::vector<Json> SessionCore::on_cancel_irl() {
    if (!job_ || job_->finished) return fail(ErrorCode::invalid_state, "no IRL job is running");
    job_->thread.request_stop();
    return {};
}

std::vector<Json> SessionCore::poll_jobs() {
    if (!job_) return {};
    std::vector<Json> out;
    bool done = false;
    {
        std::lock_guard lock(job_->mutex);
        out.swap(job_->outbox);
        done = job_->finished;
        if (done && job_->result) {
            pending_intent_ = job_->result->intent;
            job_->result.reset();
        }
    }
    if (done) {
        job_.reset();
        apply_pending_intent();
    }
    return out;
}

std::vector<Json> SessionCore::wait_for_job() {
    if (!job_) return {};
    {
        std::unique_lock lock(job_->mutex);
        job_->cv.wait(lock, [&] { return job_->finished; });
    }
    return poll_jobs();
}

}  // namespace casa
