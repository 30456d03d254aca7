#pragma once

#include <json.hpp>

#include <functional>
#include <string>
#include <string_view>

namespace phenoclust::log {

/// A sink receives one complete JSON document per event (no trailing newline).
using Sink = std::function<void(const std::string&)>;

/// Replaces the process-wide sink. Passing an empty function silences logging.
void set_sink(Sink sink);

/// Restores the default sink, which writes lines to stderr.
void reset_sink();

/// Emits `{"level": ..., "event": ..., <fields>}` as a single line.
void emit(std::string_view level, std::string_view event, nlohmann::json fields = nlohmann::json::object());

inline void warn(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
    emit("warn", event, std::move(fields));
}

inline void info(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
    emit("info", event, std::move(fields));
}

} // namespace phenoclust::log
