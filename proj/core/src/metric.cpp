#include "uhs/metric.hpp"

#include <cmath>

#include "uhs/cutoffs.hpp"
#include "uhs/errors.hpp"
#include "uhs/util.hpp"

namespace uhs {

namespace {

double vec_norm(int d, const Vec3& x) {
  double r = 0;
  for (int a = 0; a < d; ++a) r += x[a] * x[a];
  return std::sqrt(r);
}

Mat3 flat_of(int d, Signature sig) {
  Mat3 g{};
  for (int i = 0; i < d; ++i) g[i * 3 + i] = 1.0;
  if (sig == Signature::ultrahyperbolic) {
    if (d < 2) fail(ErrorKind::structural, "ultrahyperbolic signature needs d >= 2");
    g[1 * 3 + 1] = -1.0;
  }
  return g;
}

// d/dr of chi(r/r0), via the analytic step derivative.
double dchi_below(double r, double r0) {
  return -cutoffs::dstep((r / r0 - 1.0) * 2.0) * 2.0 / r0;
}

} // namespace

void Metric::validate(std::uint64_t seed) const {
  auto rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double box = std::max(1.0, 4.0 * support_radius);
  for (int trial = 0; trial < 256; ++trial) {
    Vec3 x{}, xi{};
    double nxi = 0;
    for (int a = 0; a < d; ++a) {
      x[a] = U(rng) * box;
      xi[a] = U(rng);
      nxi += xi[a] * xi[a];
    }
    nxi = std::sqrt(nxi);
    if (nxi < 1e-6) continue;
    for (int a = 0; a < d; ++a) xi[a] /= nxi;
    Mat3 g;
    eval(x, 0.0, g);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (std::abs(g[i * 3 + j] - g[j * 3 + i]) > 1e-12)
          fail(ErrorKind::structural, "metric is not symmetric at a sample point");
    Vec3 gxi{};
    matvec(x, 0.0, xi, gxi);
    double n = vec_norm(d, gxi);
    if (n > nondeg_c + 1e-9 || n < 1.0 / nondeg_c - 1e-9)
      fail(ErrorKind::structural, "metric violates declared non-degeneracy constant");
    if (vec_norm(d, x) > support_radius) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          if (std::abs(g[i * 3 + j] - flat[i * 3 + j]) > 1e-12)
            fail(ErrorKind::structural, "metric differs from flat limit outside support radius");
    }
  }
}

Metric flat_metric(int d, Signature sig) {
  Metric m;
  m.d = d;
  m.signature = sig;
  m.flat = flat_of(d, sig);
  m.nondeg_c = 1.0;
  m.size_M = 0.0;
  m.support_radius = 0.0;
  Mat3 flat = m.flat;
  m.eval = [flat](const Vec3&, double, Mat3& g) { g = flat; };
  m.grad = [](const Vec3&, double, Grad3& dg) { dg.fill(0.0); };
  return m;
}

Metric bump_metric(int d, Signature sig, double amplitude, double r0) {
  if (std::abs(amplitude) >= 1.0)
    fail(ErrorKind::structural, "conformal bump amplitude must satisfy |A| < 1");
  Metric m;
  m.d = d;
  m.signature = sig;
  m.flat = flat_of(d, sig);
  m.nondeg_c = 1.0 / (1.0 - std::abs(amplitude));
  m.size_M = std::abs(amplitude);
  m.support_radius = 1.5 * r0; // chi(r/r0) vanishes for r >= 1.5 r0
  Mat3 flat = m.flat;
  m.eval = [flat, d, amplitude, r0](const Vec3& x, double, Mat3& g) {
    double f = 1.0 + amplitude * cutoffs::chi_below(vec_norm(d, x), r0);
    for (int i = 0; i < 9; ++i) g[i] = f * flat[i];
  };
  m.grad = [flat, d, amplitude, r0](const Vec3& x, double, Grad3& dg) {
    dg.fill(0.0);
    double r = vec_norm(d, x);
    if (r < 1e-14) return;
    double df = amplitude * dchi_below(r, r0);
    for (int l = 0; l < d; ++l) {
      double xl = x[l] / r;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) dg[l * 9 + i * 3 + j] = df * xl * flat[i * 3 + j];
    }
  };
  return m;
}

Metric gaussian_bump_metric(int d, Signature sig, double amplitude, double width) {
  if (std::abs(amplitude) >= 1.0)
    fail(ErrorKind::structural, "conformal bump amplitude must satisfy |A| < 1");
  Metric m;
  m.d = d;
  m.signature = sig;
  m.flat = flat_of(d, sig);
  m.nondeg_c = 1.0 / (1.0 - std::abs(amplitude));
  m.size_M = std::abs(amplitude);
  m.support_radius = 8.5 * width;
  Mat3 flat = m.flat;
  m.eval = [flat, d, amplitude, width](const Vec3& x, double, Mat3& g) {
    double r = vec_norm(d, x);
    double f = 1.0 + amplitude * std::exp(-0.5 * sqr(r / width));
    for (int i = 0; i < 9; ++i) g[i] = f * flat[i];
  };
  m.grad = [flat, d, amplitude, width](const Vec3& x, double, Grad3& dg) {
    dg.fill(0.0);
    double r = vec_norm(d, x);
    double df = -amplitude * std::exp(-0.5 * sqr(r / width)) / sqr(width);
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) dg[l * 9 + i * 3 + j] = df * x[l] * flat[i * 3 + j];
  };
  return m;
}

Metric trapping_annulus_metric(int d, double r0, double width) {
  // h(r) = 1 + A * step(u), u = (r - (r0 - 0.35 w)) / w, so that the circular
  // orbit radius r0 sits at u0 = 0.35 where step is convex (stable orbit).
  const double u0 = 0.35;
  double s0 = cutoffs::step(u0), s1 = cutoffs::dstep(u0) / width;
  // Solve A s1 = (2 / r0)(1 + A s0).
  double denom = s1 - 2.0 * s0 / r0;
  if (denom <= 0) fail(ErrorKind::structural, "annulus too wide to carry a trapped orbit");
  double A = (2.0 / r0) / denom;
  double a = r0 - u0 * width;
  Metric m;
  m.d = d;
  m.signature = Signature::elliptic;
  m.flat = flat_of(d, Signature::elliptic);
  // h rises to 1+A then returns to 1 over one more width.
  auto h = [A, a, width](double r) {
    double rise = cutoffs::step((r - a) / width);
    double fall = cutoffs::step((r - a - 1.5 * width) / width);
    return 1.0 + A * rise * (1.0 - fall);
  };
  auto dh = [A, a, width](double r) {
    double rise = cutoffs::step((r - a) / width);
    double fall = cutoffs::step((r - a - 1.5 * width) / width);
    double drise = cutoffs::dstep((r - a) / width) / width;
    double dfall = cutoffs::dstep((r - a - 1.5 * width) / width) / width;
    return A * (drise * (1.0 - fall) - rise * dfall);
  };
  m.nondeg_c = 1.0 + A;
  m.size_M = A;
  m.support_radius = a + 2.5 * width;
  m.eval = [h, d](const Vec3& x, double, Mat3& g) {
    g.fill(0.0);
    double f = h(vec_norm(d, x));
    for (int i = 0; i < d; ++i) g[i * 3 + i] = f;
  };
  m.grad = [dh, d](const Vec3& x, double, Grad3& dg) {
    dg.fill(0.0);
    double r = vec_norm(d, x);
    if (r < 1e-14) return;
    double df = dh(r);
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < d; ++i) dg[l * 9 + i * 3 + i] = df * x[l] / r;
  };
  return m;
}

bool VectorBump::zero() const {
  for (int a = 0; a < d; ++a)
    if (amplitude[a] != complexd(0, 0)) return false;
  return true;
}

void VectorBump::eval(const Vec3& x, std::array<complexd, 3>& out) const {
  out.fill(complexd(0, 0));
  Vec3 y{};
  for (int a = 0; a < d; ++a) y[a] = x[a] - center[a];
  double r = vec_norm(d, y);
  double w = gauss_width > 0 ? std::exp(-0.5 * sqr(r / gauss_width))
                             : cutoffs::chi_below(r, radius);
  if (mode == Mode::constant) {
    for (int a = 0; a < d; ++a) out[a] = amplitude[a] * w;
  } else {
    for (int a = 0; a < d; ++a) out[a] = amplitude[0] * y[a] * w;
  }
}

void VectorBump::grad(const Vec3& x, std::array<complexd, 9>& out) const {
  out.fill(complexd(0, 0));
  Vec3 y{};
  for (int a = 0; a < d; ++a) y[a] = x[a] - center[a];
  double r = vec_norm(d, y);
  double w, dw;
  if (gauss_width > 0) {
    w = std::exp(-0.5 * sqr(r / gauss_width));
    dw = -r / sqr(gauss_width) * w;
  } else {
    w = cutoffs::chi_below(r, radius);
    dw = r < 1e-14 ? 0.0 : dchi_below(r, radius);
  }
  if (mode == Mode::constant) {
    if (r < 1e-14) return;
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) out[j * 3 + l] = amplitude[j] * dw * y[l] / r;
  } else {
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) {
        complexd v = r < 1e-14 ? complexd(0, 0) : amplitude[0] * y[j] * dw * y[l] / r;
        if (j == l) v += amplitude[0] * w;
        out[j * 3 + l] = v;
      }
  }
}

} // namespace uhs
