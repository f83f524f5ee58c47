#pragma once

#include "graphstage/pipeline.hpp"
#include "graphstage/wire.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace graphstage {

inline constexpr Millis kHeartbeatInterval = 1000;

/// The deterministic core of a replay session, on the replay clock.
///
/// advance(c) feeds every event with timestamp <= c, closes input once the
/// file is exhausted, emits the stages that trigger by c and one heartbeat
/// per 1000 ms of clock, in time order. Output depends only on the events,
/// the options and the (clock, command) sequence, never on how finely the
/// clock is stepped. Once the input is drained the driver reports
/// "replay complete" and stops emitting stages and heartbeats.
class ReplayDriver {
public:
    ReplayDriver(std::vector<GraphEvent> events, PipelineOptions options);

    std::vector<std::string> advance(Millis clock);
    /// Advances to `clock`, then applies the command; returns every line produced.
    std::vector<std::string> apply(const wire::ControlCommand& cmd, Millis clock);

    bool complete() const { return complete_; }
    Millis clock() const { return clock_; }
    bool paused() const { return paused_; }
    double speed() const { return speed_; }
    void set_initial_speed(double speed) { speed_ = speed; }
    /// Earliest clock value at which advance would produce output.
    std::optional<Millis> next_wakeup() const;
    const StagePipeline& pipeline() const { return pipeline_; }
    std::uint64_t stages_emitted() const { return stages_; }

private:
    void process_until(Millis t, std::vector<std::string>& out);

    std::vector<GraphEvent> events_;
    std::size_t next_event_ = 0;
    StagePipeline pipeline_;
    Millis clock_;
    Millis next_heartbeat_;
    bool complete_ = false;
    bool paused_ = false;
    double speed_ = 1.0;
    std::uint64_t stages_ = 0;
};

struct SessionConfig {
    std::string events_path;
    InputFormat format = InputFormat::NativeCsv;
    Millis min_lifetime = 0;  // flow-csv only
    PipelineOptions pipeline;
    double speed_multiplier = 1.0;
    std::string listen = "127.0.0.1:7878";  // host:port; port 0 picks a free port
    std::string session_log_path;           // empty: no log
    std::size_t await_clients = 0;          // replay clock starts once this many clients connected
    bool exit_when_complete = false;

    void validate() const;  // throws ConfigError
};

/// TCP replay server. One thread runs the pipeline and all socket I/O;
/// slow clients are dropped rather than allowed to stall it.
class ReplayServer {
public:
    /// Loads the events and binds the listener; throws on failure.
    explicit ReplayServer(SessionConfig config);
    ~ReplayServer();
    ReplayServer(const ReplayServer&) = delete;
    ReplayServer& operator=(const ReplayServer&) = delete;

    std::uint16_t port() const;
    /// Serves until stop() or, with exit_when_complete, the end of the replay.
    void run();
    /// Safe from any thread or a signal handler.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace graphstage
