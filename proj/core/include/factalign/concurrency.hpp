#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "factalign/error.hpp"

namespace factalign {

// Either a value or the Error that prevented it.
template <typename T>
struct Outcome {
  std::optional<T> value;
  std::optional<Error> error;

  bool ok() const { return value.has_value(); }
};

// Converts whatever escaped `fn` into an Error.
template <typename Fn>
auto capture(Fn&& fn) -> Outcome<std::invoke_result_t<Fn>> {
  Outcome<std::invoke_result_t<Fn>> out;
  try {
    out.value.emplace(fn());
  } catch (const Error& e) {
    out.error.emplace(e);
  } catch (const std::exception& e) {
    out.error.emplace(ErrorCode::kInternal, e.what());
  }
  return out;
}

// Runs fn(i) for i in [0, n) on at most `limit` threads and returns the
// outcomes in index order. Failures never abort other items.
template <typename Fn>
auto parallel_map(std::size_t n, std::size_t limit, Fn fn)
    -> std::vector<Outcome<std::invoke_result_t<Fn, std::size_t>>> {
  using T = std::invoke_result_t<Fn, std::size_t>;
  std::vector<Outcome<T>> results(n);
  const std::size_t workers = std::min(std::max<std::size_t>(limit, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = capture([&] { return fn(i); });
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        results[i] = capture([&] { return fn(i); });
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

// Like parallel_map but rethrows the first failure (in index order).
template <typename Fn>
auto parallel_map_or_throw(std::size_t n, std::size_t limit, Fn fn)
    -> std::vector<std::invoke_result_t<Fn, std::size_t>> {
  auto outcomes = parallel_map(n, limit, std::move(fn));
  std::vector<std::invoke_result_t<Fn, std::size_t>> out;
  out.reserve(n);
  for (auto& o : outcomes) {
    if (!o.ok()) throw *o.error;
    out.push_back(std::move(*o.value));
  }
  return out;
}

// Bounds the number of in-flight calls.
class Limiter {
 public:
  explicit Limiter(std::size_t slots) : free_(std::max<std::size_t>(slots, 1)) {}

  class Slot {
   public:
    explicit Slot(Limiter& l) : l_(l) { l_.acquire(); }
    ~Slot() { l_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    Limiter& l_;
  };

  std::size_t peak() const {
    std::lock_guard lock(mu_);
    return peak_;
  }

 private:
  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return free_ > 0; });
    --free_;
    peak_ = std::max(peak_, ++in_flight_);
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      ++free_;
      --in_flight_;
    }
    cv_.notify_one();
  }

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t free_;
  std::size_t in_flight_ = 0;
  std::size_t peak_ = 0;
};

}  // namespace factalign
