#pragma once

// Deterministic chunked work splitting.
//
// An index range is cut into fixed-size chunks that do not depend on the
// worker count. Workers claim chunks in any order, but results come back
// indexed by chunk, so a caller that folds them front to back gets the same
// answer for any number of workers.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace cannonball {

inline constexpr std::uint64_t kDefaultChunk = std::uint64_t{1} << 16;

struct ChunkPlan {
  std::uint64_t lo = 1;
  std::uint64_t hi = 0;
  std::uint64_t chunk = kDefaultChunk;

  std::size_t count() const {
    if (hi < lo) return 0;
    return static_cast<std::size_t>((hi - lo) / chunk + 1);
  }
  std::pair<std::uint64_t, std::uint64_t> bounds(std::size_t i) const {
    const std::uint64_t first = lo + static_cast<std::uint64_t>(i) * chunk;
    const std::uint64_t last = (hi - first < chunk - 1) ? hi : first + chunk - 1;
    return {first, last};
  }
};

/// Runs fn(first, last) on every chunk of the plan and returns the results
/// in chunk order. The first exception (by chunk index) is rethrown.
template <class Fn>
auto map_chunks(const ChunkPlan& plan, unsigned workers, Fn&& fn)
    -> std::vector<decltype(fn(std::uint64_t{}, std::uint64_t{}))> {
  using Result = decltype(fn(std::uint64_t{}, std::uint64_t{}));
  const std::size_t n = plan.count();
  std::vector<Result> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto drain = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        auto [first, last] = plan.bounds(i);
        results[i] = fn(first, last);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const unsigned spawn =
      static_cast<unsigned>(std::min<std::size_t>(std::max(workers, 1u), n));
  if (spawn <= 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(drain);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace cannonball
