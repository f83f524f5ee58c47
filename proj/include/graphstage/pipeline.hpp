#pragma once

#include "graphstage/animation.hpp"
#include "graphstage/layout.hpp"
#include "graphstage/staging.hpp"

#include <optional>
#include <vector>

namespace graphstage {

struct PipelineOptions {
    StagingConfig staging = StagingConfig::defaults(Strategy::Hybrid);
    LayoutParams layout;
    std::uint64_t seed = 42;
    Easing easing = Easing::SlowInSlowOut;
    Millis origin = 0;  // stream epoch; time-based windows are aligned to it

    void validate() const;
};

/// Everything produced for one triggered stage.
struct StageOutput {
    Stage stage;
    StageScript script;
    std::vector<LagRecord> lag;
};

/// Staging engine plus incremental layout and script construction.
class StagePipeline {
public:
    explicit StagePipeline(PipelineOptions options);

    void feed(GraphEvent event) { engine_.feed(std::move(event)); }
    void close_input() { engine_.close_input(); }

    /// Emits at most one stage with trigger <= now; nothing once drained.
    std::optional<StageOutput> poll(Millis now);
    std::optional<Millis> next_trigger() const;
    bool drained() const { return engine_.drained(); }

    StagingEngine& engine() { return engine_; }
    const StagingEngine& engine() const { return engine_; }
    const LayoutState& layout() const { return layout_; }
    const PipelineOptions& options() const { return options_; }

private:
    PipelineOptions options_;
    StagingEngine engine_;
    LayoutState layout_;
};

/// Offline composition: feeds the whole stream, closes input, and polls until drained.
std::vector<StageOutput> compose_all(const std::vector<GraphEvent>& events, const PipelineOptions& options);

}  // namespace graphstage
