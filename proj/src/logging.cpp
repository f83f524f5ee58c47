#include "graphstage/logging.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

namespace graphstage::log {

namespace {

spdlog::logger& logger() {
    static std::shared_ptr<spdlog::logger> instance = [] {
        auto l = spdlog::stderr_color_mt("graphstage");
        l->set_pattern("%^%l%$: %v");
        l->set_level(spdlog::level::warn);
        return l;
    }();
    return *instance;
}

}  // namespace

void init_from_env() {
    const char* value = std::getenv("GRAPHSTAGE_LOG");
    if (!value || !*value) return;
    const auto level = spdlog::level::from_str(value);
    // from_str maps unknown names to off; only honour exact names.
    if (level == spdlog::level::off && std::string_view(value) != "off") {
        logger().warn("GRAPHSTAGE_LOG: unknown level \"{}\"; keeping warn", value);
        return;
    }
    logger().set_level(level);
}

void debug(std::string_view message) { logger().debug("{}", message); }
void info(std::string_view message) { logger().info("{}", message); }
void warn(std::string_view message) { logger().warn("{}", message); }
void error(std::string_view message) { logger().error("{}", message); }

}  // namespace graphstage::log
