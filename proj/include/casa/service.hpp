#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "casa/serialization.hpp"

namespace casa {

/// Outbound message buffer for one client. When full, the oldest `state`
/// message is dropped to make room; other messages are never dropped, so the
/// queue may exceed its capacity when it holds nothing droppable.
class OutboundQueue {
public:
    explicit OutboundQueue(std::size_t capacity = 256) : capacity_(capacity) {}

    void push(const Json& msg);
    std::optional<std::string> pop();

    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    std::size_t dropped() const { return dropped_; }

private:
    struct Item {
        bool droppable;
        std::string text;
    };
    std::size_t capacity_;
    std::deque<Item> items_;
    std::size_t dropped_ = 0;
};

enum class SessionMode { assist, demo_recording };

std::string_view to_string(SessionMode m) noexcept;

struct SessionOptions {
    IrlConfig irl;
    /// Loads a scenario by name; defaults to the built-in fixtures.
    std::function<Scenario(const std::string&)> scenario_loader;
};

/// Protocol state machine of one teleoperation session, free of I/O and
/// timers. The owner calls handle_message() for each client message and
/// tick() at the world's tick rate, and forwards every returned message.
/// All calls must come from one thread; IRL jobs run on their own thread and
/// report through poll_jobs().
class SessionCore {
public:
    explicit SessionCore(std::string id = "session-0", SessionOptions options = {});
    ~SessionCore();

    SessionCore(const SessionCore&) = delete;
    SessionCore& operator=(const SessionCore&) = delete;

    std::vector<Json> handle_message(std::string_view text);
    std::vector<Json> handle_json(const Json& msg);

    /// Advances the active episode by one tick with the held input. Returns
    /// the inference message (on inference ticks) followed by the state.
    std::vector<Json> tick();

    /// Progress and completion messages of the background IRL job. A finished
    /// job's intent joins the intent set now if no episode is active, else
    /// when the current episode ends.
    std::vector<Json> poll_jobs();

    /// Blocks until a running IRL job finishes and returns its messages.
    std::vector<Json> wait_for_job();

    const std::string& id() const { return id_; }
    bool active() const { return episode_.has_value(); }
    SessionMode mode() const { return mode_; }
    const std::optional<Episode>& episode() const { return episode_; }
    const IntentSet& learned_intents() const { return learned_; }
    const std::map<std::string, Trajectory>& demos() const { return demos_; }
    double tick_rate() const;

private:
    struct Job;

    std::vector<Json> on_start(const Json& msg);
    std::vector<Json> on_input(const Json& msg);
    std::vector<Json> on_finish_demo();
    std::vector<Json> on_start_irl(const Json& msg);
    std::vector<Json> on_stop();
    std::vector<Json> on_cancel_irl();
    void end_episode();
    void apply_pending_intent();

    std::string id_;
    SessionOptions options_;

    std::optional<Scenario> scenario_;
    std::optional<Episode> episode_;
    SessionMode mode_ = SessionMode::assist;
    HumanInput held_;

    IntentSet learned_;
    std::optional<Intent> pending_intent_;
    std::map<std::string, Trajectory> demos_;
    int next_demo_ = 0;
    int next_job_ = 0;

    std::unique_ptr<Job> job_;
};

}  // namespace casa
