#pragma once

#include <iosfwd>
#include <string_view>

#include <json.hpp>

namespace booqa::log {

enum class Level { debug, info, warn, error };

// Structured JSONL logging: one object per line with "level" and "event"
// plus caller-supplied fields. Defaults to stderr at level info.
void set_sink(std::ostream* out);
void set_min_level(Level level);

void emit(Level level, std::string_view event, nlohmann::json fields = nlohmann::json::object());

inline void info(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  emit(Level::info, event, std::move(fields));
}
inline void warn(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  emit(Level::warn, event, std::move(fields));
}

}  // namespace booqa::log
