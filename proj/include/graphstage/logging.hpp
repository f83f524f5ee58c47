#pragma once

#include <string_view>

namespace graphstage::log {

/// Reads GRAPHSTAGE_LOG (trace, debug, info, warn, error, off; default warn).
/// Messages go to stderr.
void init_from_env();

void debug(std::string_view message);
void info(std::string_view message);
void warn(std::string_view message);
void error(std::string_view message);

}  // namespace graphstage::log
