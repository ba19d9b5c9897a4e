#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string_view>

namespace qmclock {

using DiagnosticSink = std::function<void(std::string_view)>;

namespace detail {
struct DiagnosticState {
  std::mutex mutex;
  DiagnosticSink sink = [](std::string_view msg) { std::clog << "[qmclock] " << msg << '\n'; };
};

inline DiagnosticState& diagnostic_state() {
  static DiagnosticState state;
  return state;
}
}  // namespace detail

/// Replaces the process-wide diagnostic sink. Pass an empty function to silence.
inline void set_diagnostic_sink(DiagnosticSink sink) {
  auto& st = detail::diagnostic_state();
  std::scoped_lock lock(st.mutex);
  st.sink = std::move(sink);
}

inline void diagnose(std::string_view msg) {
  auto& st = detail::diagnostic_state();
  std::scoped_lock lock(st.mutex);
  if (st.sink) st.sink(msg);
}

}  // namespace qmclock
