#include "uhs/lp.hpp"

#include <cmath>

#include "uhs/cutoffs.hpp"

namespace uhs {

namespace lp {

double base(double r, int k) { return cutoffs::chi(std::ldexp(r, -k)); }

double shell(double r, int k) {
  if (k == 0) return base(r, 0);
  return base(r, k) - base(r, k - 1);
}

int top_shell(const Grid& grid) {
  double rmax = grid.nyquist() * std::sqrt(static_cast<double>(grid.dim()));
  return std::max(0, static_cast<int>(std::ceil(std::log2(rmax))));
}

int max_resolvable_shell(const Grid& grid) {
  return static_cast<int>(std::floor(std::log2(grid.nyquist())));
}

} // namespace lp

namespace {

Field apply_radial(const Field& u, const std::function<double(double)>& m) {
  Field uh = to_frequency(u);
  const Grid& g = u.grid();
  for (std::int64_t i = 0; i < g.size(); ++i) uh[i] *= m(g.frequency_norm(i));
  return u.rep() == Rep::frequency ? uh : to_physical(uh);
}

} // namespace

Field project(const Field& u, int k) {
  if (k < 0) fail(ErrorKind::structural, "shell index must be nonnegative");
  if (k > lp::top_shell(u.grid()))
    fail(ErrorKind::resolution, "shell above Nyquist");
  return apply_radial(u, [k](double r) { return lp::shell(r, k); });
}

Field project_below(const Field& u, int k) {
  if (k <= 0) {
    Field z(u.grid(), u.rep());
    return z;
  }
  return apply_radial(u, [k](double r) { return lp::base(r, k - 1); });
}

Field project_above(const Field& u, int k) {
  if (k <= 0) return u;
  return apply_radial(u, [k](double r) { return 1.0 - lp::base(r, k - 1); });
}

Field project_fat(const Field& u, int k) {
  int lo = std::max(0, k - 1);
  return apply_radial(u, [lo, k](double r) {
    return lp::base(r, k + 1) - (lo > 0 ? lp::base(r, lo - 1) : 0.0);
  });
}

Field paraproduct(const Field& g, const Field& f) {
  g.check_same(f);
  const Field gp = to_physical(g), fp = to_physical(f);
  int top = lp::top_shell(f.grid());
  Field out(f.grid(), Rep::physical);
  for (int k = lp::paraproduct_gap + 1; k <= top; ++k) {
    Field fk = project(fp, k);
    Field glow = project_below(gp, k - lp::paraproduct_gap);
    out += hadamard(glow, fk);
  }
  return out;
}

Field balanced_part(const Field& f, const Field& g) {
  f.check_same(g);
  const Field fp = to_physical(f), gp = to_physical(g);
  int top = lp::top_shell(f.grid());
  std::vector<Field> fs, gs;
  fs.reserve(top + 1);
  gs.reserve(top + 1);
  for (int k = 0; k <= top; ++k) {
    fs.push_back(project(fp, k));
    gs.push_back(project(gp, k));
  }
  Field out(f.grid(), Rep::physical);
  for (int k = 0; k <= top; ++k)
    for (int j = std::max(0, k - lp::paraproduct_gap); j <= std::min(top, k + lp::paraproduct_gap); ++j)
      out += hadamard(fs[j], gs[k]);
  return out;
}

CubePartition::CubePartition(const Grid& grid, int scale_k) : grid_(grid), scale_(scale_k) {
  double want = std::ldexp(1.0, scale_k) / grid.spacing(); // cells per side
  int m = 1;
  while (2 * m <= want && 2 * m <= grid.points_per_axis()) m *= 2;
  if (want >= grid.points_per_axis()) m = grid.points_per_axis();
  m_ = m;
  blocks_ = grid.points_per_axis() / m_;
  // Per-axis smooth windows: difference of steps across block edges, wrapped
  // periodically.  Transition width is a quarter side (or two cells).
  int n = grid.points_per_axis();
  window1d_.assign(static_cast<std::size_t>(blocks_) * n, 0.0);
  double tau = std::max(2.0 * grid.spacing(), 0.25 * m_ * grid.spacing());
  if (blocks_ == 1) {
    for (int i = 0; i < n; ++i) window1d_[i] = 1.0;
    return;
  }
  double L = grid.box_length();
  for (int b = 0; b < blocks_; ++b) {
    double a0 = b * m_ * grid.spacing();           // block start offset
    double a1 = a0 + m_ * grid.spacing();          // block end offset
    for (int i = 0; i < n; ++i) {
      double x = i * grid.spacing();
      // nearest periodic images of the two edges
      double best = 0;
      for (int w = -1; w <= 1; ++w) {
        double lo = a0 + w * L, hi = a1 + w * L;
        double v = cutoffs::step((x - lo) / tau + 0.5) - cutoffs::step((x - hi) / tau + 0.5);
        if (v > best) best = v;
      }
      window1d_[static_cast<std::size_t>(b) * n + i] = best;
    }
  }
  // Normalize so the windows sum to one exactly at every sample.
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int b = 0; b < blocks_; ++b) s += window1d_[static_cast<std::size_t>(b) * n + i];
    for (int b = 0; b < blocks_; ++b) window1d_[static_cast<std::size_t>(b) * n + i] /= s;
  }
}

std::int64_t CubePartition::cube_count() const {
  std::int64_t c = 1;
  for (int a = 0; a < grid_.dim(); ++a) c *= blocks_;
  return c;
}

std::array<int, 3> CubePartition::cube_coords(std::int64_t q) const {
  std::array<int, 3> c{0, 0, 0};
  for (int a = grid_.dim() - 1; a >= 0; --a) {
    c[a] = static_cast<int>(q % blocks_);
    q /= blocks_;
  }
  return c;
}

double CubePartition::cube_sumsq(const std::vector<complexd>& values, std::int64_t q) const {
  auto c = cube_coords(q);
  int n = grid_.points_per_axis();
  double s = 0;
  std::array<int, 3> lo{}, hi{};
  for (int a = 0; a < grid_.dim(); ++a) {
    lo[a] = c[a] * m_;
    hi[a] = lo[a] + m_;
  }
  if (grid_.dim() == 1) {
    for (int i = lo[0]; i < hi[0]; ++i) s += std::norm(values[i]);
  } else if (grid_.dim() == 2) {
    for (int i = lo[0]; i < hi[0]; ++i)
      for (int j = lo[1]; j < hi[1]; ++j) s += std::norm(values[static_cast<std::int64_t>(i) * n + j]);
  } else {
    for (int i = lo[0]; i < hi[0]; ++i)
      for (int j = lo[1]; j < hi[1]; ++j)
        for (int l = lo[2]; l < hi[2]; ++l)
          s += std::norm(values[(static_cast<std::int64_t>(i) * n + j) * n + l]);
  }
  return s;
}

double CubePartition::cube_l2(const Field& u, std::int64_t q) const {
  return std::sqrt(cube_sumsq(u.values(), q) * u.cell_volume());
}

double CubePartition::window(int axis_index, std::int64_t q, int) const {
  return window1d_[static_cast<std::size_t>(q) * grid_.points_per_axis() + axis_index];
}

Field CubePartition::smooth_mask(std::int64_t q) const {
  auto c = cube_coords(q);
  Field out(grid_, Rep::physical);
  int n = grid_.points_per_axis();
  for (std::int64_t i = 0; i < grid_.size(); ++i) {
    auto ix = grid_.unflatten(i);
    double w = 1;
    for (int a = 0; a < grid_.dim(); ++a)
      w *= window1d_[static_cast<std::size_t>(c[a]) * n + ix[a]];
    out[i] = w;
  }
  return out;
}

} // namespace uhs
