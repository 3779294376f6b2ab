#pragma once

#include <cstdint>
#include <cmath>
#include <complex>
#include <functional>
#include <future>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace uhs {

using complexd = std::complex<double>;

inline int global_workers = 0; // 0 = hardware_concurrency

/// Runs body(i) for i in [0, count), chunked over worker threads.
/// Results must be written to disjoint slots; the schedule is deterministic.
inline void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& body) {
  int nw = global_workers > 0 ? global_workers
                              : static_cast<int>(std::thread::hardware_concurrency());
  if (nw <= 1 || count < 4) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::future<void>> futs;
  std::int64_t chunk = (count + nw - 1) / nw;
  for (int w = 0; w < nw; ++w) {
    std::int64_t lo = w * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    futs.push_back(std::async(std::launch::async, [lo, hi, &body] {
      for (std::int64_t i = lo; i < hi; ++i) body(i);
    }));
  }
  for (auto& f : futs) f.get();
}

/// splitmix64, used to derive independent substream seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d649bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x5851f42d4c957f2dull * (stream + 1));
  std::uint64_t a = splitmix64(s), b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), h);
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double sqr(double v) { return v * v; }

} // namespace uhs
