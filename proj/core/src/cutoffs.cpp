#include "uhs/cutoffs.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace uhs {
namespace cutoffs {

namespace {

inline double f(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }

inline double df(double t) { return t > 0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

// rho' is proportional to this window: sharp rise over [1/8, 1/7], flat 1 up
// to 2.5, tail-off over [2.5, 3].  The tail is wider than chi's transition so
// that chi'(r/2R) / rho'(r/R) -> 0 toward the matching support edge.
inline double rho_window(double s) {
  constexpr double lo0 = 0.125, lo1 = 1.0 / 7.0;
  constexpr double hi0 = 2.5, hi1 = 3.0;
  return step((s - lo0) / (lo1 - lo0)) * (1.0 - step((s - hi0) / (hi1 - hi0)));
}

struct RhoTable {
  static constexpr int kN = 8192;
  static constexpr double kLo = 0.125, kHi = 3.0;
  std::array<double, kN + 1> cum{};
  double norm = 1.0;

  RhoTable() {
    const double h = (kHi - kLo) / kN;
    cum[0] = 0.0;
    for (int i = 0; i < kN; ++i) {
      double a = kLo + i * h, b = a + h;
      // Simpson on each sub-interval; rho_window is smooth so this is ~1e-13.
      cum[i + 1] = cum[i] + h / 6.0 * (rho_window(a) + 4.0 * rho_window(0.5 * (a + b)) + rho_window(b));
    }
    norm = cum[kN];
  }

  double eval(double s) const {
    if (s <= kLo) return 0.0;
    if (s >= kHi) return 1.0;
    const double h = (kHi - kLo) / kN;
    double u = (s - kLo) / h;
    int i = std::min(kN - 1, static_cast<int>(u));
    double t = u - i;
    double a = kLo + i * h;
    // Cubic Hermite with exact slopes from rho_window.
    double p0 = cum[i], p1 = cum[i + 1];
    double m0 = rho_window(a) * h, m1 = rho_window(a + h) * h;
    double t2 = t * t, t3 = t2 * t;
    double v = (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0 +
               (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * m1;
    return v / norm;
  }
};

const RhoTable& rho_table() {
  static RhoTable table;
  return table;
}

} // namespace

double step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = f(t), b = f(1.0 - t);
  return a / (a + b);
}

double dstep(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double a = f(t), b = f(1.0 - t);
  double da = df(t), db = -df(1.0 - t);
  double s = a + b;
  return (da * s - a * (da + db)) / (s * s);
}

double chi(double r) { return 1.0 - step((r - 1.0) * 2.0); }

double chi_below(double r, double rho) { return chi(r / rho); }

double chi_above(double r, double rho) { return 1.0 - chi_below(r, rho); }

double rho(double s) { return rho_table().eval(s); }

double drho(double s) { return rho_window(s) / rho_table().norm; }

double phi_below(double x, double c, double delta0) {
  return 1.0 - step((x - c) / delta0);
}

double phi_above(double x, double c, double delta0) {
  return step((x - c) / delta0);
}

double chi_gt1(double r) { return step((r - 0.5) / 1.5); }

} // namespace cutoffs

Field make_cutoff(const Grid& grid, CutoffKind kind, double rho) {
  if (!(rho > 0)) fail(ErrorKind::structural, "cutoff radius must be positive");
  // chi transitions over [rho, 1.5*rho]; require at least 4 cells across it.
  if (0.5 * rho < 4.0 * grid.spacing())
    fail(ErrorKind::resolution, "cutoff transition width below 4 grid cells");
  return sample_radial(grid, [rho, kind](double r) {
    double v = cutoffs::chi_below(r, rho);
    return kind == CutoffKind::chi_below ? v : 1.0 - v;
  });
}

Field sample_radial(const Grid& grid, const std::function<double(double)>& w) {
  Field out(grid, Rep::physical);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    auto x = grid.point(i);
    double r = 0;
    for (int a = 0; a < grid.dim(); ++a) r += x[a] * x[a];
    out[i] = w(std::sqrt(r));
  }
  return out;
}

Field sample(const Grid& grid, const std::function<complexd(const std::array<double, 3>&)>& w) {
  Field out(grid, Rep::physical);
  for (std::int64_t i = 0; i < grid.size(); ++i) out[i] = w(grid.point(i));
  return out;
}

} // namespace uhs
