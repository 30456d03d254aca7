#include "phenoclust/log.hpp"

#include <iostream>
#include <mutex>

namespace phenoclust::log {
namespace {

std::mutex sink_mutex;

void stderr_sink(const std::string& line) { std::cerr << line << '\n'; }

Sink& current_sink() {
    static Sink sink = stderr_sink;
    return sink;
}

} // namespace

void set_sink(Sink sink) {
    std::lock_guard lock(sink_mutex);
    current_sink() = std::move(sink);
}

void reset_sink() { set_sink(stderr_sink); }

void emit(std::string_view level, std::string_view event, nlohmann::json fields) {
    nlohmann::json line = nlohmann::json::object();
    line["level"] = level;
    line["event"] = event;
    if (fields.is_object()) {
        for (auto& [key, value] : fields.items()) line[key] = value;
    }
    std::lock_guard lock(sink_mutex);
    if (current_sink()) current_sink()(line.dump());
}

} // namespace phenoclust::log
