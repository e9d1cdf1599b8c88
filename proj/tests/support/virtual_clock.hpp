#pragma once

#include "dvl/llm_client.hpp"

#include <algorithm>
#include <mutex>
#include <vector>

namespace testutil {

// Deterministic clock: sleep_for advances time instead of blocking, and every
// sleep is recorded for assertions.
class VirtualClock : public dvl::llm::Clock {
public:
  std::chrono::milliseconds now() override {
    std::lock_guard lock(mutex_);
    return now_;
  }

  void sleep_for(std::chrono::milliseconds d) override {
    std::lock_guard lock(mutex_);
    now_ += std::max(d, std::chrono::milliseconds(0));
    sleeps_.push_back(d);
  }

  std::vector<std::chrono::milliseconds> sleeps() const {
    std::lock_guard lock(mutex_);
    return sleeps_;
  }

private:
  mutable std::mutex mutex_;
  std::chrono::milliseconds now_{0};
  std::vector<std::chrono::milliseconds> sleeps_;
};

}  // namespace testutil
