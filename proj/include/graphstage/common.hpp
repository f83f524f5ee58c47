#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace graphstage {

/// Integer milliseconds since the stream epoch.
using Millis = std::int64_t;

using NodeId = std::string;

/// Unordered node pair, stored with a < b.
struct EdgeKey {
    NodeId a;
    NodeId b;

    static EdgeKey make(NodeId x, NodeId y) {
        if (y < x) return EdgeKey{std::move(y), std::move(x)};
        return EdgeKey{std::move(x), std::move(y)};
    }

    bool touches(const NodeId& n) const { return a == n || b == n; }
    const NodeId& other(const NodeId& n) const { return a == n ? b : a; }

    auto operator<=>(const EdgeKey&) const = default;
    bool operator==(const EdgeKey&) const = default;
};

/// A node or an edge; the unit that appears, disappears and gets animated.
struct Entity {
    enum class Kind : std::uint8_t { Node, Edge };

    Kind kind = Kind::Node;
    NodeId a;
    NodeId b;  // empty for nodes

    static Entity node(NodeId id) { return Entity{Kind::Node, std::move(id), {}}; }
    static Entity edge(const EdgeKey& e) { return Entity{Kind::Edge, e.a, e.b}; }

    bool is_node() const { return kind == Kind::Node; }
    EdgeKey edge_key() const { return EdgeKey{a, b}; }
    std::string to_string() const { return is_node() ? a : a + "--" + b; }

    auto operator<=>(const Entity&) const = default;
    bool operator==(const Entity&) const = default;
};

/// Malformed input text; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Invalid configuration values (thresholds, durations, layout parameters).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace graphstage
