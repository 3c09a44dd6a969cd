#include "booqa/log.hpp"

#include <iostream>
#include <mutex>

namespace booqa::log {

namespace {

struct State {
  std::mutex mutex;
  std::ostream* sink = &std::cerr;
  Level min_level = Level::info;
};

State& state() {
  static State s;
  return s;
}

const char* level_name(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "info";
}

}  // namespace

void set_sink(std::ostream* out) {
  std::lock_guard lock(state().mutex);
  state().sink = out;
}

void set_min_level(Level level) {
  std::lock_guard lock(state().mutex);
  state().min_level = level;
}

void emit(Level level, std::string_view event, nlohmann::json fields) {
  auto& s = state();
  std::lock_guard lock(s.mutex);
  if (s.sink == nullptr || level < s.min_level) return;
  nlohmann::json line = nlohmann::json::object();
  line["level"] = level_name(level);
  line["event"] = event;
  if (fields.is_object()) {
    for (auto& [k, v] : fields.items()) line[k] = v;
  }
  (*s.sink) << line.dump() << '\n';
}

}  // namespace booqa::log
