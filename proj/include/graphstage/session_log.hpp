#pragma once

#include "graphstage/pipeline.hpp"
#include "graphstage/wire.hpp"

#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace graphstage {

/// Session logs are NDJSON. Line 1 is a header with the format version, the
/// pipeline options and the full event list; then one record per control
/// command (with its replay-clock time) and per broadcast line, and finally
/// an end record carrying the final clock.
inline constexpr int kSessionLogVersion = 1;

struct SessionLogError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class SessionRecorder {
public:
    /// Throws SessionLogError when the file cannot be created.
    SessionRecorder(const std::string& path, const std::vector<GraphEvent>& events, const PipelineOptions& options);

    void control(const wire::ControlCommand& cmd, Millis clock);
    void output(const std::string& line);
    void finish(Millis final_clock);

private:
    void write(const std::string& record);

    std::ofstream out_;
    std::string path_;
    bool finished_ = false;
};

struct SessionLog {
    struct Control {
        Millis clock;
        wire::ControlCommand command;
    };
    struct Output {
        std::string line;
    };

    PipelineOptions options;
    std::vector<GraphEvent> events;
    std::vector<std::variant<Control, Output>> records;
    Millis final_clock = 0;

    std::vector<std::string> outputs() const;
};

/// Throws SessionLogError on version mismatch, malformed records or
/// truncation (naming the last valid record).
SessionLog read_session_log(const std::string& path);
SessionLog parse_session_log(std::string_view text);

/// Recomputes the broadcast sequence from the logged events, options and
/// timed controls.
std::vector<std::string> replay_session(const SessionLog& log);

/// replay_session plus a byte comparison with the recorded lines; throws
/// SessionLogError at the first difference.
std::vector<std::string> verify_session(const SessionLog& log);

}  // namespace graphstage
