#pragma once

#include <chrono>
#include <cstdint>

namespace ranagent {

using SteadyClock = std::chrono::steady_clock;
using Duration = std::chrono::nanoseconds;

inline std::int64_t utc_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline double to_seconds(Duration d) { return std::chrono::duration<double>(d).count(); }
inline double to_millis(Duration d) {
  return std::chrono::duration<double, std::milli>(d).count();
}

class Stopwatch {
 public:
  Stopwatch() : start_(SteadyClock::now()) {}
  Duration elapsed() const { return SteadyClock::now() - start_; }
  SteadyClock::time_point start() const { return start_; }

 private:
  SteadyClock::time_point start_;
};

}  // namespace ranagent
