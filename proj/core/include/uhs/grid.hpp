#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "uhs/errors.hpp"

namespace uhs {

/// Periodic spectral grid on the centered box [-L/2, L/2)^d with n points per
/// axis.  n must be a power of two.  Dual frequencies are 2*pi*m/L with the
/// integer m in [-n/2, n/2) stored in FFT order.
class Grid {
public:
  Grid(int d, int n, double box_length) : d_(d), n_(n), box_(box_length) {
    if (d < 1 || d > 3) fail(ErrorKind::structural, "grid dimension must be 1, 2 or 3");
    if (n < 2 || (n & (n - 1)) != 0) fail(ErrorKind::structural, "points per axis must be a power of two");
    if (!(box_length > 0)) fail(ErrorKind::structural, "box length must be positive");
    h_ = box_ / n_;
    std::int64_t total = 1;
    for (int a = 0; a < d_; ++a) total *= n_;
    size_ = total;
    freq_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      int m = i <= n_ / 2 - 1 ? i : i - n_; // FFT order: 0..n/2-1, -n/2..-1
      freq_[i] = 2.0 * std::numbers::pi * m / box_;
    }
  }

  int dim() const { return d_; }
  int points_per_axis() const { return n_; }
  double box_length() const { return box_; }
  double spacing() const { return h_; }
  std::int64_t size() const { return size_; }
  double nyquist() const { return std::numbers::pi * n_ / box_; }

  bool operator==(const Grid& o) const { return d_ == o.d_ && n_ == o.n_ && box_ == o.box_; }
  bool operator!=(const Grid& o) const { return !(*this == o); }

  /// Physical coordinate of index i along one axis, in [-L/2, L/2).
  double coord(int i) const { return -0.5 * box_ + h_ * i; }
  /// Dual frequency of index i along one axis (FFT order).
  double freq(int i) const { return freq_[i]; }

  std::array<int, 3> unflatten(std::int64_t idx) const {
    std::array<int, 3> ix{0, 0, 0};
    for (int a = d_ - 1; a >= 0; --a) {
      ix[a] = static_cast<int>(idx % n_);
      idx /= n_;
    }
    return ix; // row-major: last axis fastest
  }

  std::int64_t flatten(const std::array<int, 3>& ix) const {
    std::int64_t idx = 0;
    for (int a = 0; a < d_; ++a) idx = idx * n_ + ix[a];
    return idx;
  }

  std::array<double, 3> point(std::int64_t idx) const {
    auto ix = unflatten(idx);
    std::array<double, 3> x{0, 0, 0};
    for (int a = 0; a < d_; ++a) x[a] = coord(ix[a]);
    return x;
  }

  std::array<double, 3> frequency(std::int64_t idx) const {
    auto ix = unflatten(idx);
    std::array<double, 3> xi{0, 0, 0};
    for (int a = 0; a < d_; ++a) xi[a] = freq_[ix[a]];
    return xi;
  }

  double frequency_norm(std::int64_t idx) const {
    auto xi = frequency(idx);
    double s = 0;
    for (int a = 0; a < d_; ++a) s += xi[a] * xi[a];
    return std::sqrt(s);
  }

private:
  int d_;
  int n_;
  double box_;
  double h_;
  std::int64_t size_;
  std::vector<double> freq_;
};

} // namespace uhs
