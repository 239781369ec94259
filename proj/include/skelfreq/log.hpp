#pragma once

#include <functional>
#include <string>

namespace skelfreq {

using WarningHandler = std::function<void(const std::string&)>;

/// Replaces the sink for library warnings (default: stderr). Returns the
/// previous handler.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace skelfreq
