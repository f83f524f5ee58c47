#include "graphstage/pipeline.hpp"

namespace graphstage {

void PipelineOptions::validate() const {
    staging.validate();
    layout.validate();
}

StagePipeline::StagePipeline(PipelineOptions options)
    : options_(options), engine_(options.staging, options.origin) {
    options_.layout.validate();
    layout_.rng_seed = options_.seed;
}

std::optional<Millis> StagePipeline::next_trigger() const {
    if (engine_.drained()) return std::nullopt;
    return engine_.next_trigger();
}

std::optional<StageOutput> StagePipeline::poll(Millis now) {
    if (engine_.drained()) return std::nullopt;
    std::optional<Stage> stage = engine_.poll(now);
    if (!stage) return std::nullopt;

    const GraphState& post = engine_.graph();
    const StageDiff& diff = stage->diff;
    LayoutState after = prepare_stage_layout(layout_, post, diff.node_deletions, diff.node_additions, options_.layout);

    std::set<NodeId> survivors;
    for (const NodeId& n : post.nodes())
        if (!diff.node_additions.count(n)) survivors.insert(n);

    StageOutput out;
    out.script = build_script(diff, movements(layout_, after, survivors), stage->timing, stage->bin.trigger_time, post,
                              layout_, after, options_.easing);
    out.stage = std::move(*stage);
    out.lag = stage_lag(out.stage, out.script);
    layout_ = std::move(after);
    return out;
}

std::vector<StageOutput> compose_all(const std::vector<GraphEvent>& events, const PipelineOptions& options) {
    StagePipeline pipeline(options);
    for (const GraphEvent& ev : events) pipeline.feed(ev);
    pipeline.close_input();
    std::vector<StageOutput> out;
    while (auto t = pipeline.next_trigger()) out.push_back(std::move(*pipeline.poll(*t)));
    return out;
}

}  // namespace graphstage
