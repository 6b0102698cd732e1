#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wassergeo {

inline constexpr const char* kVersion = "1.0.0";

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// Error carrying a machine-readable code such as "TriangleViolation".
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

/// SplitMix64: a 64-bit counter-based generator. The state advances by the
/// golden-ratio increment and each output is a bijective mix of the counter,
/// so streams are reproducible on every platform and cheap to split.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent child stream; the parent advances by one step.
  SplitMix64 split() { return SplitMix64(next() ^ 0xD1B54A32D192ED03ULL); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::size_t below(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
  }

  std::uint64_t state() const { return state_; }

private:
  std::uint64_t state_;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// processed independently, so results never depend on the thread count.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Global worker cap used by the parallel loops in this library.
inline unsigned& thread_cap() {
  static unsigned cap = 1;
  return cap;
}

inline double pos_part(double r) { return r > 0 ? r : 0.0; }
inline double neg_part(double r) { return r < 0 ? -r : 0.0; }

/// 64-bit FNV-1a; used to derive per-case seeds independently of the
/// standard library.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Log-spaced grid of `count` points on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    g[i] = std::exp(a + (b - a) * s);
  }
  return g;
}

/// Monotone bisection for an increasing function: returns r with f(r) = target.
inline double invert_increasing(const std::function<double(double)>& f, double target,
                                double lo = 0.0, double hi = 1.0, double tol = 1e-12) {
  while (f(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error("InversionFailed", "target outside range");
  }
  for (int it = 0; it < 400 && hi - lo > tol * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace wassergeo
