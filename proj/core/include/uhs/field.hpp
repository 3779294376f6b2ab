#pragma once

#include <complex>
#include <vector>

#include "uhs/grid.hpp"
#include "uhs/util.hpp"

namespace uhs {

enum class Rep { physical, frequency };

/// Complex grid function.  Frequency-space values use the unitary DFT
/// normalization, so the plain l2 norm of `values` is representation
/// independent (Parseval).
class Field {
public:
  Field(const Grid& grid, Rep rep = Rep::physical)
      : grid_(grid), rep_(rep), values_(grid.size(), complexd(0.0, 0.0)) {}
  Field(const Grid& grid, Rep rep, std::vector<complexd> values)
      : grid_(grid), rep_(rep), values_(std::move(values)) {
    if (static_cast<std::int64_t>(values_.size()) != grid_.size())
      fail(ErrorKind::structural, "field size does not match grid");
  }

  const Grid& grid() const { return grid_; }
  Rep rep() const { return rep_; }
  const std::vector<complexd>& values() const { return values_; }
  std::vector<complexd>& values() { return values_; }
  complexd operator[](std::int64_t i) const { return values_[i]; }
  complexd& operator[](std::int64_t i) { return values_[i]; }
  std::int64_t size() const { return grid_.size(); }

  /// L2(dx) norm: h^{d/2} * l2(values), identical in both representations.
  double l2_norm() const {
    double s = 0;
    for (const auto& v : values_) s += std::norm(v);
    return std::sqrt(s * cell_volume());
  }

  double max_abs() const {
    double m = 0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  double cell_volume() const {
    double hv = 1;
    for (int a = 0; a < grid_.dim(); ++a) hv *= grid_.spacing();
    return hv;
  }

  Field& operator+=(const Field& o) { bin(o, +1.0); return *this; }
  Field& operator-=(const Field& o) { bin(o, -1.0); return *this; }
  Field& operator*=(complexd c) {
    for (auto& v : values_) v *= c;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { a += b; return a; }
  friend Field operator-(Field a, const Field& b) { a -= b; return a; }
  friend Field operator*(complexd c, Field a) { a *= c; return a; }

  /// Pointwise product; both fields must be physical.
  friend Field hadamard(const Field& a, const Field& b) {
    a.check_same(b);
    if (a.rep() != Rep::physical || b.rep() != Rep::physical)
      fail(ErrorKind::structural, "pointwise product requires physical representation");
    Field out(a.grid(), Rep::physical);
    for (std::int64_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
  }

  friend Field conjugate(Field a) {
    if (a.rep() != Rep::physical)
      fail(ErrorKind::structural, "conjugate requires physical representation");
    for (auto& v : a.values_) v = std::conj(v);
    return a;
  }

  /// L2(dx) inner product <a, b> = integral a * conj(b).
  friend complexd inner(const Field& a, const Field& b) {
    a.check_same(b);
    complexd s(0, 0);
    for (std::int64_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
    return s * a.cell_volume();
  }

  void check_same(const Field& o) const {
    if (grid_ != o.grid_) fail(ErrorKind::structural, "fields live on different grids");
    if (rep_ != o.rep_) fail(ErrorKind::structural, "field representations differ");
  }

  void set_rep(Rep r) { rep_ = r; }

private:
  void bin(const Field& o, double s) {
    check_same(o);
    for (std::int64_t i = 0; i < size(); ++i) values_[i] += s * o.values_[i];
  }

  Grid grid_;
  Rep rep_;
  std::vector<complexd> values_;
};

/// Time-sampled field on a uniform time lattice t_i = t0 + i*dt.
class SpaceTimeField {
public:
  SpaceTimeField(double t0, double dt) : t0_(t0), dt_(dt) {}

  void push(Field f) {
    if (!snapshots_.empty() && snapshots_.front().grid() != f.grid())
      fail(ErrorKind::structural, "snapshots must share one grid");
    snapshots_.push_back(std::move(f));
  }

  std::size_t steps() const { return snapshots_.size(); }
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double horizon() const { return snapshots_.empty() ? 0.0 : dt_ * (snapshots_.size() - 1); }
  double time(std::size_t i) const { return t0_ + dt_ * i; }
  const Field& at(std::size_t i) const { return snapshots_[i]; }
  Field& at(std::size_t i) { return snapshots_[i]; }
  const Grid& grid() const { return snapshots_.front().grid(); }

  /// Trapezoid weight for snapshot i in time integrals over [t0, horizon].
  double quad_weight(std::size_t i) const {
    if (snapshots_.size() < 2) return 0.0;
    return (i == 0 || i + 1 == snapshots_.size()) ? 0.5 * dt_ : dt_;
  }

private:
  double t0_;
  double dt_;
  std::vector<Field> snapshots_;
};

} // namespace uhs
