#include "concdiam/diagnostics.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace concdiam::diag {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink;
  return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  Sink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

void emit(Level level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) {
    current_sink()(level, message);
    return;
  }
  std::cerr << (level == Level::warning ? "warning: " : "note: ") << message << '\n';
}

}  // namespace concdiam::diag
