// parallel.hpp: deterministic block-parallel sampling with seeded substreams

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace qci {

/// Samples are processed in fixed-size blocks; each block owns one RNG stream,
/// so results depend on (seed, sample count) only, never on the thread count.
inline constexpr std::size_t kSamplesPerBlock = 1024;

/// Stream for block `block` of a job with master seed `seed`:
/// mt19937_64 seeded by std::seed_seq{lo32(seed), hi32(seed), lo32(block), hi32(block)}.
inline std::mt19937_64 block_stream(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return std::mt19937_64(seq);
}

inline unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs fn(task) for task in [0, n_tasks) on up to `threads` workers and
/// returns the results in task order.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t n_tasks, unsigned threads, Fn&& fn) {
  std::vector<Result> results(n_tasks);
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n_tasks, 1)));

  if (threads <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) results[t] = fn(t);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < n_tasks; t = next++) {
          try {
            results[t] = fn(t);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
  return results;
}

/// Running mean/variance (Welford) with an order-fixed merge.
struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const SampleStats& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(count + o.count);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.count) / n;
    m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
    count += o.count;
  }

  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double std_dev() const { return std::sqrt(variance()); }
  double std_error() const { return count > 0 ? std_dev() / std::sqrt(static_cast<double>(count)) : 0.0; }
};

inline std::size_t block_count(std::size_t samples) {
  return (samples + kSamplesPerBlock - 1) / kSamplesPerBlock;
}

inline std::size_t block_size(std::size_t samples, std::size_t block) {
  return std::min(kSamplesPerBlock, samples - block * kSamplesPerBlock);
}

}  // namespace qci
