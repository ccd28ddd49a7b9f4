#pragma once

#include <functional>
#include <string_view>

namespace fbmflow {

/// Diagnostics that must not abort a computation go through here. The
/// default sink writes to stderr.
void warn(std::string_view message);

/// Replaces the sink; returns the previous one. An empty function silences.
std::function<void(std::string_view)> set_warning_sink(std::function<void(std::string_view)> sink);

}  // namespace fbmflow
