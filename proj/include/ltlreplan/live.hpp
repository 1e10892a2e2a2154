#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltlreplan/sim.hpp"

namespace ltlreplan::live {

inline constexpr std::size_t kMaxTreeEdges = 2000;
inline constexpr std::size_t kRecentEvents = 20;

/// One interactive run. Operator commands mutate the ground truth; the planner
/// learns of them through sensing, except labels set with broadcast (an external observer).
class LiveSession {
public:
    LiveSession(sim::Scenario scenario, std::uint64_t seed);

    /// Advances one tick unless paused or done; returns the tick's events.
    std::vector<Event> step();

    /// Applies a wire command ({"type":"cmd","cmd":...}). Returns the ack or error event message.
    nlohmann::json apply(const nlohmann::json& msg);

    /// Self-contained snapshot message ({"type":"snapshot", ...}).
    nlohmann::json snapshot() const;

    bool paused() const { return paused_; }
    double speed() const { return speed_; }
    double dt() const { return scenario_.dt; }
    const PlannerBase& planner() const { return *planner_; }
    const Workspace& truth() const { return truth_; }

private:
    nlohmann::json error(const std::string& cmd, const std::string& detail);
    nlohmann::json ack(const std::string& cmd, const std::string& detail);

    sim::Scenario scenario_;
    std::unique_ptr<PlannerBase> planner_;
    Workspace truth_;
    bool paused_ = false;
    double speed_ = 1.0;
    int added_ = 0;
    std::deque<Event> recent_;
};

nlohmann::json event_message(const Event& e);

/// HTTP + WebSocket bridge: static assets at "/", the session at "/ws".
/// The first client to connect controls the run; later clients are read-only.
class LiveServer {
public:
    /// port 0 picks an ephemeral port.
    LiveServer(LiveSession& session, std::uint16_t port, std::filesystem::path static_root);
    ~LiveServer();
    LiveServer(const LiveServer&) = delete;
    LiveServer& operator=(const LiveServer&) = delete;

    std::uint16_t port() const;
    /// Serves and ticks until stop(); safe to call from another thread.
    void run();
    void stop();

    struct Impl;  // opaque; public so connection handlers can reach it

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace ltlreplan::live
