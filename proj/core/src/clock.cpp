#include "agentmend/clock.hpp"

#include <thread>

namespace agentmend {

double SteadyClock::now() const {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

double ManualClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void ManualClock::advance(double seconds) {
  std::lock_guard lock(mu_);
  if (seconds > 0) now_ += seconds;
}

std::shared_ptr<Clock> steady_clock() {
  static const auto clock = std::make_shared<SteadyClock>();
  return clock;
}

RateLimiter::RateLimiter(double requests_per_minute)
    : rpm_(requests_per_minute), next_slot_(std::chrono::steady_clock::now()) {}

void RateLimiter::set_rate(double requests_per_minute) {
  std::lock_guard lock(mu_);
  rpm_ = requests_per_minute;
}

double RateLimiter::rate() const {
  std::lock_guard lock(mu_);
  return rpm_;
}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    if (rpm_ <= 0) return;
    const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(60.0 / rpm_));
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval;
  }
  std::this_thread::sleep_until(slot);
}

RateLimiter& shared_rate_limiter() {
  static RateLimiter limiter;
  return limiter;
}

}  // namespace agentmend
