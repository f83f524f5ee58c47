#include "graphstage/event_model.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <map>

namespace graphstage {

namespace {

struct Line {
    std::size_t number;
    std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> out;
    std::size_t number = 0;
    while (!text.empty()) {
        ++number;
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") != std::string_view::npos) out.push_back({number, line});
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return out;
}

std::vector<std::string> split_csv_row(const Line& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    const std::string_view s = line.text;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < s.size() && s[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty() && !was_quoted) {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw ParseError(line.number, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::int64_t parse_int(std::size_t line, const std::string& field, const char* what) {
    std::int64_t v = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || field.empty())
        throw ParseError(line, std::string("malformed ") + what + " '" + field + "'");
    return v;
}

/// Column name -> index; throws if any required column is missing.
std::map<std::string, std::size_t> header_index(const Line& header, std::initializer_list<const char*> required) {
    std::map<std::string, std::size_t> index;
    const auto cols = split_csv_row(header);
    for (std::size_t i = 0; i < cols.size(); ++i) index.emplace(trim(cols[i]), i);
    for (const char* name : required)
        if (!index.count(name)) throw ParseError(header.number, std::string("missing column '") + name + "'");
    return index;
}

GraphEvent make_event(std::size_t line, Millis ts, std::string_view kind_token, std::string a, std::string b,
                      std::string label) {
    const auto kind = event_kind_from_token(kind_token);
    if (!kind) throw ParseError(line, "unknown kind '" + std::string(kind_token) + "'");
    if (ts < 0) throw ParseError(line, "negative timestamp " + std::to_string(ts));
    if (a.empty()) throw ParseError(line, "missing subject_a");
    GraphEvent ev;
    ev.timestamp = ts;
    ev.kind = *kind;
    if (ev.is_node_event()) {
        if (!b.empty()) throw ParseError(line, "subject_b must be empty for " + std::string(kind_token));
        ev.a = std::move(a);
        if (!label.empty()) ev.label = std::move(label);
    } else {
        if (b.empty()) throw ParseError(line, "missing subject_b for " + std::string(kind_token));
        if (a == b) throw ParseError(line, "self-loop edge on node " + a);
        ev.a = std::move(a);
        ev.b = std::move(b);
    }
    return ev;
}

std::vector<GraphEvent> parse_native_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) return {};
    const auto cols = header_index(lines.front(), {"seq", "timestamp_ms", "kind", "subject_a", "subject_b"});
    const auto label_col = cols.count("label") ? std::optional<std::size_t>(cols.at("label")) : std::nullopt;
    std::size_t width = 0;
    for (const auto& [_, i] : cols) width = std::max(width, i + 1);

    std::vector<GraphEvent> events;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const Line& line = lines[r];
        auto f = split_csv_row(line);
        if (f.size() < width && !(label_col && f.size() + 1 == width && *label_col + 1 == width))
            throw ParseError(line.number, "expected " + std::to_string(width) + " fields, found " + std::to_string(f.size()));
        f.resize(std::max(f.size(), width));
        const std::string seq = trim(f[cols.at("seq")]);
        if (!seq.empty()) parse_int(line.number, seq, "seq");
        const Millis ts = parse_int(line.number, trim(f[cols.at("timestamp_ms")]), "timestamp_ms");
        events.push_back(make_event(line.number, ts, trim(f[cols.at("kind")]), trim(f[cols.at("subject_a")]),
                                    trim(f[cols.at("subject_b")]), label_col ? f[*label_col] : std::string{}));
    }
    return events;
}

std::string json_string_field(std::size_t line, const nlohmann::json& obj, const char* name, bool required) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) {
        if (required) throw ParseError(line, std::string("missing field '") + name + "'");
        return {};
    }
    if (!it->is_string()) throw ParseError(line, std::string("field '") + name + "' must be a string");
    return it->get<std::string>();
}

std::vector<GraphEvent> parse_native_jsonl(std::string_view text) {
    std::vector<GraphEvent> events;
    for (const Line& line : split_lines(text)) {
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line.text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line.number, std::string("malformed JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(line.number, "expected a JSON object");
        auto ts = obj.find("timestamp_ms");
        if (ts == obj.end() || !ts->is_number_integer())
            throw ParseError(line.number, "timestamp_ms must be an integer");
        if (auto seq = obj.find("seq"); seq != obj.end() && !seq->is_null() && !seq->is_number_integer())
            throw ParseError(line.number, "seq must be an integer");
        events.push_back(make_event(line.number, ts->get<Millis>(), json_string_field(line.number, obj, "kind", true),
                                    json_string_field(line.number, obj, "subject_a", true),
                                    json_string_field(line.number, obj, "subject_b", false),
                                    json_string_field(line.number, obj, "label", false)));
    }
    return events;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::vector<GraphEvent> parse_event_stream(std::string_view text, InputFormat format) {
    std::vector<GraphEvent> events;
    switch (format) {
    case InputFormat::NativeCsv: events = parse_native_csv(text); break;
    case InputFormat::NativeJsonl: events = parse_native_jsonl(text); break;
    case InputFormat::FlowCsv: throw std::invalid_argument("flow-csv must go through parse_flow_csv");
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const GraphEvent& x, const GraphEvent& y) { return x.timestamp < y.timestamp; });
    std::uint64_t seq = 0;
    for (GraphEvent& ev : events) ev.seq = ++seq;
    return events;
}

std::string format_events_csv(std::span<const GraphEvent> events) {
    std::string out = "seq,timestamp_ms,kind,subject_a,subject_b,label\n";
    for (const GraphEvent& ev : events) {
        out += std::to_string(ev.seq) + ',' + std::to_string(ev.timestamp) + ',' + std::string(to_token(ev.kind)) + ',' +
               csv_escape(ev.a) + ',' + csv_escape(ev.b) + ',' + csv_escape(ev.label.value_or("")) + '\n';
    }
    return out;
}

std::vector<FlowRecord> parse_flow_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) return {};
    const auto cols = header_index(lines.front(), {"time_ms", "duration_ms", "source", "destination"});
    std::vector<std::pair<std::string, std::size_t>> extra;
    for (const auto& [name, i] : cols)
        if (name != "time_ms" && name != "duration_ms" && name != "source" && name != "destination") extra.emplace_back(name, i);
    std::sort(extra.begin(), extra.end(), [](const auto& x, const auto& y) { return x.second < y.second; });

    std::vector<FlowRecord> records;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const Line& line = lines[r];
        auto f = split_csv_row(line);
        if (f.size() < cols.size())
            throw ParseError(line.number, "expected " + std::to_string(cols.size()) + " fields, found " + std::to_string(f.size()));
        FlowRecord rec;
        rec.time = parse_int(line.number, trim(f[cols.at("time_ms")]), "time_ms");
        rec.duration = parse_int(line.number, trim(f[cols.at("duration_ms")]), "duration_ms");
        if (rec.time < 0) throw ParseError(line.number, "negative timestamp " + std::to_string(rec.time));
        if (rec.duration < 0) throw ParseError(line.number, "negative duration " + std::to_string(rec.duration));
        rec.source = trim(f[cols.at("source")]);
        rec.destination = trim(f[cols.at("destination")]);
        if (rec.source.empty() || rec.destination.empty()) throw ParseError(line.number, "missing source or destination");
        for (const auto& [name, i] : extra) rec.attributes.emplace_back(name, f[i]);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace graphstage
