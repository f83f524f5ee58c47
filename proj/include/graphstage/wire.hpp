#pragma once

#include "graphstage/pipeline.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

/// Newline-delimited JSON messages exchanged with clients. Every message is a
/// single-line object carrying a "type" field.
namespace graphstage::wire {

inline constexpr int kProtocolVersion = 1;

struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string hello();
/// Field order and number formatting are fixed, so equal stages give equal bytes.
std::string stage(const StageOutput& out);
std::string heartbeat(std::size_t backlog, std::size_t pending);
std::string notice(std::string_view text);

/// Value of the "type" field; throws WireError on malformed input.
std::string message_type(std::string_view line);

struct ControlCommand {
    enum class Kind : std::uint8_t { SetStrategy, SetThresholds, Pause, Resume, SetSpeed, Snapshot };

    Kind kind = Kind::Snapshot;
    std::optional<Strategy> strategy;
    std::optional<Millis> t_i;
    std::optional<std::uint32_t> n_events;
    std::optional<double> speed;

    bool operator==(const ControlCommand&) const = default;
};

std::string_view to_token(ControlCommand::Kind k);  // set_strategy, set_thresholds, pause, resume, set_speed, snapshot

/// `{"type":"control","command":...,"args":{...}}`
std::string control(const ControlCommand& cmd);
/// Throws WireError naming the problem (unknown command, bad argument).
ControlCommand parse_control(std::string_view line);

}  // namespace graphstage::wire
