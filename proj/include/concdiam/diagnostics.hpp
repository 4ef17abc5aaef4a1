#pragma once

#include <functional>
#include <string_view>

// Warnings and notes raised while loading or computing. They go to stderr
// unless a sink is installed.
namespace concdiam::diag {

enum class Level { note, warning };

using Sink = std::function<void(Level, std::string_view)>;

/// Installs `sink` and returns the previous one. An empty sink restores stderr.
Sink set_sink(Sink sink);

void emit(Level level, std::string_view message);
inline void warn(std::string_view message) { emit(Level::warning, message); }
inline void note(std::string_view message) { emit(Level::note, message); }

}  // namespace concdiam::diag
