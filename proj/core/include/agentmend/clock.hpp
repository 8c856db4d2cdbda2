#pragma once

#include <chrono>
#include <memory>
#include <mutex>

namespace agentmend {

/// Seconds since an arbitrary epoch. Live runs use the steady clock; scripted
/// runs use a ManualClock that the mock provider advances by each reply's
/// scripted latency, so wall times are reproducible.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  double now() const override;
};

class ManualClock final : public Clock {
 public:
  double now() const override;
  void advance(double seconds);

 private:
  mutable std::mutex mu_;
  double now_ = 0.0;
};

std::shared_ptr<Clock> steady_clock();

/// Spaces requests evenly at `requests_per_minute`; 0 disables limiting.
/// One process-wide instance gates every live provider and search backend.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute = 0.0);

  void set_rate(double requests_per_minute);
  double rate() const;
  /// Blocks until the caller may issue one request.
  void acquire();

 private:
  mutable std::mutex mu_;
  double rpm_;
  std::chrono::steady_clock::time_point next_slot_;
};

RateLimiter& shared_rate_limiter();

}  // namespace agentmend
