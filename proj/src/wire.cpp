#include "graphstage/wire.hpp"

#include <json.hpp>

namespace graphstage::wire {

using Json = nlohmann::ordered_json;

namespace {

Json point(Vec2 p) { return Json::array({p.x, p.y}); }

Json node_entry(const NodeId& n, const std::map<NodeId, std::string>& labels) {
    Json j{{"node", n}};
    if (auto it = labels.find(n); it != labels.end()) j["label"] = it->second;
    return j;
}

Json edge_entry(const EdgeKey& e) { return Json{{"edge", Json::array({e.a, e.b})}}; }

Json entity_entry(const Entity& e) {
    return e.is_node() ? Json{{"node", e.a}} : edge_entry(e.edge_key());
}

std::string dump(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::strict); }

Json parse_object(std::string_view line) {
    Json j;
    try {
        j = Json::parse(line);
    } catch (const Json::parse_error& e) {
        throw WireError(std::string("malformed message: ") + e.what());
    }
    if (!j.is_object()) throw WireError("message is not a JSON object");
    if (!j.contains("type") || !j["type"].is_string()) throw WireError("message has no string \"type\" field");
    return j;
}

}  // namespace

std::string hello() { return dump(Json{{"type", "hello"}, {"version", kProtocolVersion}}); }

std::string stage(const StageOutput& out) {
    const StageDiff& diff = out.stage.diff;
    const StageTiming& timing = out.stage.timing;
    const Scene& scene = out.script.scene;

    Json deletions = Json::array();
    for (const NodeId& n : diff.node_deletions) deletions.push_back(node_entry(n, diff.deleted_labels));
    for (const EdgeKey& e : diff.edge_deletions) deletions.push_back(edge_entry(e));

    Json additions = Json::array();
    for (const NodeId& n : diff.node_additions) {
        Json j = node_entry(n, diff.added_labels);
        j["at"] = point(scene.node_positions.at(n));
        additions.push_back(std::move(j));
    }
    for (const EdgeKey& e : diff.edge_additions) additions.push_back(edge_entry(e));

    Json moves = Json::array();
    for (const Move& m : out.script.movement().moves)
        moves.push_back(Json{{"id", m.id}, {"from", point(m.from)}, {"to", point(m.to)}});

    Json ephemeral = Json::array();
    for (const EphemeralPair& p : out.script.ephemeral) {
        Json j = entity_entry(p.entity);
        j["first_seq"] = p.first.seq;
        j["second_seq"] = p.second.seq;
        ephemeral.push_back(std::move(j));
    }

    Json lag = Json::array();
    for (const LagRecord& r : out.lag) {
        if (r.excluded) continue;
        lag.push_back(Json{{"seq", r.seq}, {"event_ms", r.timestamp}, {"depicted_ms", r.depiction_start}});
    }

    Json j;
    j["type"] = "stage";
    j["stage_id"] = out.stage.bin.stage_id;
    j["cause"] = to_token(out.stage.bin.cause);
    j["timing"] = Json{{"t_d", timing.deletion.value_or(0)},
                       {"t_m", timing.movement},
                       {"t_a", timing.addition.value_or(0)},
                       {"t_p", timing.pause},
                       {"T_an", timing.total}};
    j["deletions"] = std::move(deletions);
    j["additions"] = std::move(additions);
    j["moves"] = std::move(moves);
    j["ephemeral"] = std::move(ephemeral);
    j["lag"] = std::move(lag);
    return dump(j);
}

std::string heartbeat(std::size_t backlog, std::size_t pending) {
    return dump(Json{{"type", "heartbeat"}, {"backlog", backlog}, {"pending", pending}});
}

std::string notice(std::string_view text) { return dump(Json{{"type", "notice"}, {"text", text}}); }

std::string message_type(std::string_view line) { return parse_object(line)["type"].get<std::string>(); }

std::string_view to_token(ControlCommand::Kind k) {
    using K = ControlCommand::Kind;
    switch (k) {
    case K::SetStrategy: return "set_strategy";
    case K::SetThresholds: return "set_thresholds";
    case K::Pause: return "pause";
    case K::Resume: return "resume";
    case K::SetSpeed: return "set_speed";
    case K::Snapshot: return "snapshot";
    }
    return "?";
}

std::string control(const ControlCommand& cmd) {
    Json args = Json::object();
    if (cmd.strategy) args["strategy"] = to_token(*cmd.strategy);
    if (cmd.t_i) args["t_i"] = *cmd.t_i;
    if (cmd.n_events) args["n_events"] = *cmd.n_events;
    if (cmd.speed) args["multiplier"] = *cmd.speed;
    return dump(Json{{"type", "control"}, {"command", to_token(cmd.kind)}, {"args", std::move(args)}});
}

ControlCommand parse_control(std::string_view line) {
    using K = ControlCommand::Kind;
    const Json j = parse_object(line);
    if (j["type"] != "control") throw WireError("expected a control message, got \"" + j["type"].get<std::string>() + "\"");
    if (!j.contains("command") || !j["command"].is_string()) throw WireError("control message has no command");
    const std::string name = j["command"].get<std::string>();
    const Json args = j.value("args", Json::object());
    if (!args.is_object()) throw WireError("control args must be an object");

    ControlCommand cmd;
    std::optional<K> kind;
    for (K k : {K::SetStrategy, K::SetThresholds, K::Pause, K::Resume, K::SetSpeed, K::Snapshot})
        if (to_token(k) == name) kind = k;
    if (!kind) throw WireError("unknown control command \"" + name + "\"");
    cmd.kind = *kind;

    auto integer = [&](const char* key) -> std::optional<std::int64_t> {
        if (!args.contains(key)) return std::nullopt;
        if (!args[key].is_number_integer()) throw WireError(std::string(key) + " must be an integer");
        return args[key].get<std::int64_t>();
    };

    switch (cmd.kind) {
    case K::SetStrategy: {
        if (!args.contains("strategy") || !args["strategy"].is_string()) throw WireError("set_strategy needs args.strategy");
        cmd.strategy = strategy_from_token(args["strategy"].get<std::string>());
        if (!cmd.strategy) throw WireError("unknown strategy \"" + args["strategy"].get<std::string>() + "\"");
        break;
    }
    case K::SetThresholds: {
        cmd.t_i = integer("t_i");
        if (auto n = integer("n_events")) {
            if (*n < 1 || *n > std::numeric_limits<std::uint32_t>::max()) throw WireError("n_events must be >= 1");
            cmd.n_events = static_cast<std::uint32_t>(*n);
        }
        if (!cmd.t_i && !cmd.n_events) throw WireError("set_thresholds needs t_i and/or n_events");
        break;
    }
    case K::SetSpeed: {
        if (!args.contains("multiplier") || !args["multiplier"].is_number()) throw WireError("set_speed needs args.multiplier");
        cmd.speed = args["multiplier"].get<double>();
        if (!(*cmd.speed > 0.0) || !std::isfinite(*cmd.speed)) throw WireError("speed multiplier must be > 0");
        break;
    }
    case K::Pause:
    case K::Resume:
    case K::Snapshot: break;
    }
    return cmd;
}

}  // namespace graphstage::wire
