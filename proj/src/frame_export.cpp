#include "graphstage/animation.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>
#include <sstream>

namespace graphstage {

namespace {

std::string entity_key(const Entity& e) { return e.is_node() ? e.a : e.a + "|" + e.b; }

const char* highlight_colour(Highlight h) {
    switch (h) {
    case Highlight::DeleteOrange: return "#ff8c00";
    case Highlight::AddBlue: return "#1e90ff";
    case Highlight::None: break;
    }
    return "#444444";
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string frame_to_json(const FrameSnapshot& frame) {
    nlohmann::json j;
    j["t"] = frame.t;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    auto& edges = j["edges"] = nlohmann::json::array();
    for (const auto& [e, v] : frame.entities) {
        nlohmann::json item{{"opacity", v.opacity},
                            {"highlight", to_token(v.highlight)},
                            {"highlight_strength", v.highlight_strength}};
        if (e.is_node()) {
            item["id"] = e.a;
            if (auto it = frame.positions.find(e.a); it != frame.positions.end()) {
                item["x"] = it->second.x;
                item["y"] = it->second.y;
            }
            if (auto it = frame.label_opacity.find(e.a); it != frame.label_opacity.end())
                item["label_opacity"] = it->second;
            nodes.push_back(std::move(item));
        } else {
            item["a"] = e.a;
            item["b"] = e.b;
            edges.push_back(std::move(item));
        }
    }
    return j.dump();
}

std::string frame_to_svg(const FrameSnapshot& frame, double width, double height) {
    double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
    double max_x = -min_x, max_y = -min_x;
    for (const auto& [_, p] : frame.positions) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    if (frame.positions.empty()) min_x = min_y = max_x = max_y = 0.0;
    const double margin = 20.0;
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
    const double scale = std::min(width, height) - 2.0 * margin;
    auto sx = [&](double x) { return margin + (x - min_x) / span * scale; };
    auto sy = [&](double y) { return margin + (y - min_y) / span * scale; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    for (const auto& [e, v] : frame.entities) {
        if (e.is_node() || v.opacity <= 0.0) continue;
        const Vec2 a = frame.positions.at(e.a);
        const Vec2 b = frame.positions.at(e.b);
        const Highlight h = v.highlight_strength > 0.0 ? v.highlight : Highlight::None;
        out << "  <line data-id=\"" << xml_escape(entity_key(e)) << "\" x1=\"" << sx(a.x) << "\" y1=\"" << sy(a.y)
            << "\" x2=\"" << sx(b.x) << "\" y2=\"" << sy(b.y) << "\" stroke=\"" << highlight_colour(h)
            << "\" stroke-opacity=\"" << v.opacity << "\"/>\n";
    }
    for (const auto& [e, v] : frame.entities) {
        if (!e.is_node() || v.opacity <= 0.0) continue;
        const Vec2 p = frame.positions.at(e.a);
        const Highlight h = v.highlight_strength > 0.0 ? v.highlight : Highlight::None;
        out << "  <circle data-id=\"" << xml_escape(e.a) << "\" cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y)
            << "\" r=\"5\" fill=\"" << highlight_colour(h) << "\" fill-opacity=\"" << v.opacity << "\"/>\n";
    }
    for (const auto& [n, opacity] : frame.label_opacity) {
        if (opacity <= 0.0) continue;
        const Vec2 p = frame.positions.at(n);
        out << "  <text x=\"" << sx(p.x) + 7 << "\" y=\"" << sy(p.y) - 7 << "\" font-size=\"10\" fill-opacity=\""
            << opacity << "\">" << xml_escape(n) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace graphstage
