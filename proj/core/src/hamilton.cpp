#include "uhs/hamilton.hpp"

#include <algorithm>
#include <cmath>

#include "uhs/util.hpp"

namespace uhs {

namespace {

constexpr int kCap = 64; // max ODE state size (2d + variational blocks)

struct StepperState {
  double z[kCap];
};

// Dormand-Prince 5(4) with FSAL.  Returns false on step-size underflow.
class Rk45 {
public:
  Rk45(int n, std::function<void(double, const double*, double*)> f, const FlowOptions& opt)
      : n_(n), f_(std::move(f)), opt_(opt) {}

  /// Advances z from t to t_target exactly.  cb(t_prev, z_prev, t_now, z_now)
  /// is invoked after each accepted step; returning false stops early.
  /// Returns the reached time.
  double run(double* z, double t, double t_target,
             const std::function<bool(double, const double*, double, const double*)>& cb,
             bool* underflow = nullptr, long* steps_taken = nullptr) {
    if (underflow) *underflow = false;
    double dir = t_target >= t ? 1.0 : -1.0;
    if (t_target == t) return t;
    double h = dir * std::min(opt_.max_step, 0.01 * std::abs(t_target - t) + 1e-6);
    double k1[kCap];
    f_(t, z, k1);
    long steps = 0;
    double zprev[kCap];
    while (dir * (t_target - t) > 1e-14 * std::max(1.0, std::abs(t))) {
      if (steps++ > opt_.max_steps) fail(ErrorKind::integration, "step budget exhausted");
      if (dir * h > dir * (t_target - t)) h = t_target - t;
      if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
        if (underflow) {
          *underflow = true;
          break;
        }
        fail(ErrorKind::integration, "step-size underflow near t = " + std::to_string(t));
      }
      double k2[kCap], k3[kCap], k4[kCap], k5[kCap], k6[kCap], k7[kCap], y[kCap];
      auto stage = [&](const double* coef, int m, double c, double* kout) {
        for (int i = 0; i < n_; ++i) {
          double s = 0;
          const double* ks[6] = {k1, k2, k3, k4, k5, k6};
          for (int j = 0; j < m; ++j) s += coef[j] * ks[j][i];
          y[i] = z[i] + h * s;
        }
        f_(t + c * h, y, kout);
      };
      static const double a2[] = {0.2};
      static const double a3[] = {3.0 / 40, 9.0 / 40};
      static const double a4[] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
      static const double a5[] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
      static const double a6[] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656};
      static const double a7[] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
      static const double e[] = {71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
      stage(a2, 1, 0.2, k2);
      stage(a3, 2, 0.3, k3);
      stage(a4, 3, 0.8, k4);
      stage(a5, 4, 8.0 / 9.0, k5);
      stage(a6, 5, 1.0, k6);
      double znew[kCap];
      for (int i = 0; i < n_; ++i) {
        double s = a7[0] * k1[i] + a7[2] * k3[i] + a7[3] * k4[i] + a7[4] * k5[i] + a7[5] * k6[i];
        znew[i] = z[i] + h * s;
      }
      f_(t + h, znew, k7);
      double err = 0;
      for (int i = 0; i < n_; ++i) {
        double ei = e[0] * k1[i] + e[2] * k3[i] + e[3] * k4[i] + e[4] * k5[i] + e[5] * k6[i] + e[6] * k7[i];
        double sc = opt_.tol * (1.0 + std::max(std::abs(z[i]), std::abs(znew[i])));
        double r = h * ei / sc;
        err += r * r;
      }
      err = std::sqrt(err / n_);
      if (err <= 1.0) {
        for (int i = 0; i < n_; ++i) {
          zprev[i] = z[i];
          z[i] = znew[i];
        }
        double tprev = t;
        t += h;
        for (int i = 0; i < n_; ++i) k1[i] = k7[i]; // FSAL
        if (cb && !cb(tprev, zprev, t, z)) break;
      }
      double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(fac, 0.2, 5.0);
      if (std::abs(h) > opt_.max_step) h = dir * opt_.max_step;
    }
    if (steps_taken) *steps_taken += steps;
    return t;
  }

private:
  int n_;
  std::function<void(double, const double*, double*)> f_;
  FlowOptions opt_;
};

double nrm(int d, const double* v) {
  double s = 0;
  for (int a = 0; a < d; ++a) s += v[a] * v[a];
  return std::sqrt(s);
}

// Bicharacteristic right-hand side at fixed coefficient time 0.
void bichar_rhs(const Metric& m, double, const double* z, double* dz) {
  int d = m.d;
  Vec3 x{}, xi{};
  for (int a = 0; a < d; ++a) {
    x[a] = z[a];
    xi[a] = z[d + a];
  }
  Mat3 g;
  Grad3 dg;
  m.eval(x, 0.0, g);
  m.grad(x, 0.0, dg);
  for (int i = 0; i < d; ++i) {
    double s = 0;
    for (int j = 0; j < d; ++j) s += g[i * 3 + j] * xi[j];
    dz[i] = -2.0 * s; // dx/dt = grad_xi a
  }
  for (int l = 0; l < d; ++l) {
    double s = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s += dg[l * 9 + i * 3 + j] * xi[i] * xi[j];
    dz[d + l] = s; // dxi/dt = -grad_x a
  }
}

bool outgoing(const Metric& m, const double* z) {
  int d = m.d;
  Vec3 x{}, xi{}, gxi{};
  for (int a = 0; a < d; ++a) {
    x[a] = z[a];
    xi[a] = z[d + a];
  }
  m.matvec(x, 0.0, xi, gxi);
  double dot = 0;
  for (int a = 0; a < d; ++a) dot += -2.0 * gxi[a] * x[a];
  return dot >= 0;
}

// Largest s in [0,1] with |x_a + s (x_b - x_a)| <= R, or -1 if the segment
// stays outside.
double last_param_inside(int d, const double* xa, const double* xb, double R) {
  double p[3]{}, q[3]{};
  for (int a = 0; a < d; ++a) {
    p[a] = xa[a];
    q[a] = xb[a] - xa[a];
  }
  double A = 0, B = 0, C = -R * R;
  for (int a = 0; a < d; ++a) {
    A += q[a] * q[a];
    B += 2 * p[a] * q[a];
    C += p[a] * p[a];
  }
  if (A < 1e-300) return C <= 0 ? 1.0 : -1.0;
  double disc = B * B - 4 * A * C;
  if (disc < 0) return -1.0;
  double r2 = (-B + std::sqrt(disc)) / (2 * A); // larger root
  if (r2 < 0) return -1.0;
  return std::min(1.0, r2);
}

} // namespace

Ray flow(const Metric& m, const Vec3& x0, const Vec3& xi0, double t_end, const FlowOptions& opt) {
  int d = m.d;
  if (nrm(d, xi0.data()) == 0) fail(ErrorKind::precondition, "flow requires a nonzero frequency");
  double z[kCap];
  for (int a = 0; a < d; ++a) {
    z[a] = x0[a];
    z[d + a] = xi0[a];
  }
  Ray ray;
  ray.a0 = m.principal(x0, 0.0, xi0);
  ray.t.push_back(0);
  ray.x.push_back(x0);
  ray.xi.push_back(xi0);
  Rk45 stepper(2 * d, [&m](double t, const double* zz, double* dz) { bichar_rhs(m, t, zz, dz); }, opt);
  bool underflow = false;
  long steps = 0;
  stepper.run(z, 0.0, t_end,
              [&](double, const double*, double t, const double* znew) {
                Vec3 x{}, xi{};
                for (int a = 0; a < d; ++a) {
                  x[a] = znew[a];
                  xi[a] = znew[d + a];
                }
                ray.t.push_back(t);
                ray.x.push_back(x);
                ray.xi.push_back(xi);
                ray.max_drift = std::max(ray.max_drift, std::abs(m.principal(x, 0.0, xi) - ray.a0));
                return true;
              },
              &underflow, &steps);
  ray.steps = steps;
  ray.complete = !underflow;
  if (underflow)
    fail(ErrorKind::integration,
         "step-size underflow after " + std::to_string(ray.size()) + " samples");
  return ray;
}

double homogeneity_check(const Metric& m, const Vec3& x0, const Vec3& xi0, double lambda,
                         double T, const FlowOptions& opt) {
  if (!(lambda > 0)) fail(ErrorKind::structural, "homogeneity scale must be positive");
  int d = m.d;
  double worst = 0;
  const int n_cmp = 8;
  for (int i = 1; i <= n_cmp; ++i) {
    double t = T * i / n_cmp;
    Ray slow = flow(m, x0, xi0, lambda * t, opt);
    Vec3 xis{};
    for (int a = 0; a < d; ++a) xis[a] = lambda * xi0[a];
    Ray fast = flow(m, x0, xis, t, opt);
    double dev = 0;
    for (int a = 0; a < d; ++a) {
      dev += std::abs(slow.x.back()[a] - fast.x.back()[a]);
      dev += std::abs(lambda * slow.xi.back()[a] - fast.xi.back()[a]);
    }
    worst = std::max(worst, dev);
  }
  return worst;
}

std::vector<std::pair<Vec3, Vec3>> sample_ball_sphere(int d, double R, int count, std::uint64_t seed) {
  auto halton = [](std::int64_t idx, int base) {
    double f = 1.0, r = 0.0;
    while (idx > 0) {
      f /= base;
      r += f * (idx % base);
      idx /= base;
    }
    return r;
  };
  std::vector<std::pair<Vec3, Vec3>> out;
  out.reserve(count);
  std::int64_t offset = static_cast<std::int64_t>(seed % 65537) + 17;
  static const int bases[] = {2, 3, 5, 7, 11};
  for (int i = 0; i < count; ++i) {
    std::int64_t idx = offset + i;
    double u[5];
    for (int b = 0; b < 5; ++b) u[b] = halton(idx, bases[b]);
    Vec3 x{}, xi{};
    if (d == 1) {
      x[0] = (2 * u[0] - 1) * R;
      xi[0] = u[1] < 0.5 ? 1.0 : -1.0;
    } else if (d == 2) {
      double r = R * std::sqrt(u[0]), th = 2 * std::numbers::pi * u[1];
      x = {r * std::cos(th), r * std::sin(th), 0};
      double ph = 2 * std::numbers::pi * u[2];
      xi = {std::cos(ph), std::sin(ph), 0};
    } else {
      double r = R * std::cbrt(u[0]);
      double cth = 2 * u[1] - 1, sth = std::sqrt(std::max(0.0, 1 - cth * cth));
      double ph = 2 * std::numbers::pi * u[2];
      x = {r * sth * std::cos(ph), r * sth * std::sin(ph), r * cth};
      double c2 = 2 * u[3] - 1, s2 = std::sqrt(std::max(0.0, 1 - c2 * c2));
      double p2 = 2 * std::numbers::pi * u[4];
      xi = {s2 * std::cos(p2), s2 * std::sin(p2), c2};
    }
    out.emplace_back(x, xi);
  }
  return out;
}

namespace {

struct ExitScan {
  double last_inside = 0; // last time (in integration parameter s >= 0) in B_R
  bool certified = false;
  double reached = 0;
};

// Integrates one time direction and tracks the last time the ray meets B_R.
ExitScan scan_direction(const Metric& m, const Vec3& x0, const Vec3& xi0, double R,
                        double t_cap, int dir, const FlowOptions& opt_in) {
  int d = m.d;
  FlowOptions opt = opt_in;
  opt.max_step = std::min(opt.max_step, std::max(0.25, R / 8.0));
  double z[kCap];
  for (int a = 0; a < d; ++a) {
    z[a] = x0[a];
    z[d + a] = xi0[a];
  }
  double r_cert = std::max(R, m.support_radius) * (1.0 + 1e-9);
  ExitScan scan;
  if (nrm(d, z) <= R) scan.last_inside = 0;
  Rk45 stepper(2 * d,
               [&m, dir](double t, const double* zz, double* dz) {
                 bichar_rhs(m, t, zz, dz);
                 if (dir < 0)
                   for (int i = 0; i < 2 * m.d; ++i) dz[i] = -dz[i];
               },
               opt);
  bool underflow = false;
  scan.reached = stepper.run(
      z, 0.0, t_cap,
      [&](double tprev, const double* zprev, double tnow, const double* znow) {
        double s = last_param_inside(d, zprev, znow, R);
        if (s >= 0) scan.last_inside = tprev + s * (tnow - tprev);
        // certified exit: outside the flat radius and outgoing (in the
        // direction of integration the position moves radially outward)
        if (nrm(d, znow) > r_cert) {
          double zz[kCap];
          for (int i = 0; i < 2 * d; ++i) zz[i] = znow[i];
          if (dir < 0)
            for (int a = 0; a < d; ++a) zz[d + a] = -zz[d + a]; // reverse time = flip xi
          if (outgoing(m, zz)) {
            scan.certified = true;
            return false;
          }
        }
        return true;
      },
      &underflow);
  return scan;
}

} // namespace

TrappingReport nontrapping_parameter(const Metric& m, double R, const SamplerSpec& sampler,
                                     double t_cap, const FlowOptions& opt) {
  TrappingReport rep;
  rep.R = R;
  rep.t_cap = t_cap;
  auto samples = sample_ball_sphere(m.d, R, sampler.count, sampler.seed);
  if (sampler.ring_radius) {
    double rr = *sampler.ring_radius;
    for (int i = 0; i < sampler.ring_count; ++i) {
      double th = 2 * std::numbers::pi * i / sampler.ring_count;
      Vec3 x{rr * std::cos(th), rr * std::sin(th), 0};
      Vec3 xi{-std::sin(th), std::cos(th), 0};
      samples.emplace_back(x, xi);
      Vec3 xi2{std::sin(th), -std::cos(th), 0};
      samples.emplace_back(x, xi2);
    }
  }
  rep.samples = static_cast<int>(samples.size());
  std::vector<double> exits(samples.size(), 0.0);
  std::vector<char> trapped(samples.size(), 0);
  parallel_for(static_cast<std::int64_t>(samples.size()), [&](std::int64_t i) {
    const auto& [x0, xi0] = samples[i];
    double worst = 0;
    bool bad = false;
    for (int dir : {+1, -1}) {
      ExitScan scan = scan_direction(m, x0, xi0, R, t_cap, dir, opt);
      worst = std::max(worst, scan.last_inside);
      if (!scan.certified) bad = true;
    }
    exits[i] = worst;
    trapped[i] = bad ? 1 : 0;
  });
  bool any_trapped = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (trapped[i]) any_trapped = true;
    if (exits[i] >= rep.L) {
      rep.L = exits[i];
      rep.worst_x = samples[i].first;
      rep.worst_xi = samples[i].second;
      rep.worst_exit = exits[i];
    }
  }
  rep.L = std::min(rep.L, t_cap);
  rep.verdict = any_trapped ? "trapped-suspect" : "nontrapping-estimate";
  return rep;
}

FlatAsymptoticsReport flat_asymptotics_check(const Metric& m, double R0, double eps0,
                                             int samples, std::uint64_t seed, double horizon,
                                             const FlowOptions& opt) {
  (void)eps0;
  int d = m.d;
  FlatAsymptoticsReport rep;
  auto data = sample_ball_sphere(d, 1.0, samples, seed);
  for (auto& [x, xi] : data) {
    // push the base point out to |x| in [R0, 2 R0]
    double r = nrm(d, x.data());
    double target = R0 * (1.0 + (r > 0 ? r : 0.5));
    if (r < 1e-9) {
      x[0] = target;
    } else {
      for (int a = 0; a < d; ++a) x[a] *= target / r;
    }
    double zz[kCap];
    for (int a = 0; a < d; ++a) {
      zz[a] = x[a];
      zz[d + a] = xi[a];
    }
    if (!outgoing(m, zz)) {
      rep.rejected++;
      continue;
    }
    Ray ray = flow(m, x, xi, horizon, opt);
    for (std::size_t i = 1; i < ray.size(); ++i) {
      double t = ray.t[i];
      Vec3 dev{};
      for (int a = 0; a < d; ++a) {
        double flat = 0;
        for (int b = 0; b < d; ++b) flat += m.flat[a * 3 + b] * xi[b];
        dev[a] = ray.x[i][a] - x[a] + 2.0 * t * flat;
      }
      double nxi = nrm(d, xi.data());
      rep.worst_position_dev = std::max(rep.worst_position_dev, nrm(d, dev.data()) / (t * nxi));
      Vec3 dxi{};
      for (int a = 0; a < d; ++a) dxi[a] = ray.xi[i][a] - xi[a];
      rep.worst_frequency_dev = std::max(rep.worst_frequency_dev, nrm(d, dxi.data()) / nxi);
    }
  }
  return rep;
}

double integrate_along_flow(const Metric& m, const std::function<double(const Vec3&)>& v,
                            double v_support_radius, const Vec3& x, const Vec3& xi,
                            double t_cap, const FlowOptions& opt) {
  int d = m.d;
  double total = 0;
  double r_done = std::max(v_support_radius, m.support_radius) * (1.0 + 1e-9);
  for (int dir : {+1, -1}) {
    double z[kCap];
    for (int a = 0; a < d; ++a) {
      z[a] = x[a];
      z[d + a] = xi[a];
    }
    z[2 * d] = 0; // accumulator
    bool done = false;
    Rk45 stepper(2 * d + 1,
                 [&](double t, const double* zz, double* dz) {
                   bichar_rhs(m, t, zz, dz);
                   if (dir < 0)
                     for (int i = 0; i < 2 * d; ++i) dz[i] = -dz[i];
                   Vec3 pos{};
                   for (int a = 0; a < d; ++a) pos[a] = zz[a];
                   dz[2 * d] = std::abs(v(pos));
                 },
                 opt);
    stepper.run(z, 0.0, t_cap, [&](double, const double*, double, const double* znow) {
      if (nrm(d, znow) > r_done) {
        double zz[kCap];
        for (int i = 0; i < 2 * d; ++i) zz[i] = znow[i];
        if (dir < 0)
          for (int a = 0; a < d; ++a) zz[d + a] = -zz[d + a];
        if (outgoing(m, zz)) {
          done = true;
          return false;
        }
      }
      return true;
    });
    if (!done)
      fail(ErrorKind::trapped_flow, "ray failed to certify exit before the time cap");
    total += z[2 * d];
  }
  return total;
}

PerturbationReport perturbation_stability_check(const Metric& m0, const Metric& m1, double R0,
                                                double budget, int samples, std::uint64_t seed,
                                                const FlowOptions& opt) {
  int d = m0.d;
  PerturbationReport rep;
  // sampled sup-norm gap over a probe lattice
  auto probes = sample_ball_sphere(d, std::max({R0, m0.support_radius, m1.support_radius}), 512, seed + 3);
  for (const auto& [x, xi] : probes) {
    (void)xi;
    Mat3 g0, g1;
    m0.eval(x, 0.0, g0);
    m1.eval(x, 0.0, g1);
    for (int i = 0; i < 9; ++i) rep.sup_metric_gap = std::max(rep.sup_metric_gap, std::abs(g0[i] - g1[i]));
  }
  if (rep.sup_metric_gap > budget)
    fail(ErrorKind::precondition, "metric pair exceeds the perturbation budget");
  auto data = sample_ball_sphere(d, R0, samples, seed);
  double dt_cmp = std::max(1e-3, R0 / 64.0);
  double horizon = 4.0 * R0;
  for (const auto& [x0, xi0] : data) {
    double za[kCap], zb[kCap];
    for (int a = 0; a < d; ++a) {
      za[a] = zb[a] = x0[a];
      za[d + a] = zb[d + a] = xi0[a];
    }
    Rk45 s0(2 * d, [&m0](double t, const double* z, double* dz) { bichar_rhs(m0, t, z, dz); }, opt);
    Rk45 s1(2 * d, [&m1](double t, const double* z, double* dz) { bichar_rhs(m1, t, z, dz); }, opt);
    double t = 0;
    while (t < horizon && nrm(d, za) <= R0 * (1 + 1e-9)) {
      double tn = t + dt_cmp;
      s0.run(za, t, tn, nullptr);
      s1.run(zb, t, tn, nullptr);
      t = tn;
      double dev = 0;
      for (int i = 0; i < 2 * d; ++i) dev += sqr(za[i] - zb[i]);
      rep.max_ray_divergence = std::max(rep.max_ray_divergence, std::sqrt(dev));
    }
  }
  SamplerSpec sp;
  sp.count = std::min(samples * 4, 1024);
  sp.seed = seed + 11;
  double cap = 50.0 * R0 * std::max(m0.nondeg_c, m1.nondeg_c);
  TrappingReport r0 = nontrapping_parameter(m0, R0, sp, cap, opt);
  TrappingReport r1 = nontrapping_parameter(m1, R0, sp, cap, opt);
  rep.L_ratio = r1.L / std::max(1e-12, r0.L);
  return rep;
}

AugmentedRay flow_augmented(const Metric& m, const Vec3& x0, const Vec3& xi0, int n_accum,
                            const std::function<void(const Vec3&, const Vec3&, double*)>& integrand,
                            double stop_radius, double t_cap, int time_dir,
                            const FlowOptions& opt) {
  int d = m.d;
  if (n_accum > 8) fail(ErrorKind::structural, "too many ray accumulators");
  double z[kCap];
  for (int a = 0; a < d; ++a) {
    z[a] = x0[a];
    z[d + a] = xi0[a];
  }
  for (int i = 0; i < n_accum; ++i) z[2 * d + i] = 0;
  double r_cert = stop_radius * (1.0 + 1e-9);
  AugmentedRay out;
  Rk45 stepper(2 * d + n_accum,
               [&](double t, const double* zz, double* dz) {
                 bichar_rhs(m, t, zz, dz);
                 if (time_dir < 0)
                   for (int i = 0; i < 2 * d; ++i) dz[i] = -dz[i];
                 Vec3 pos{}, fr{};
                 for (int a = 0; a < d; ++a) {
                   pos[a] = zz[a];
                   fr[a] = zz[d + a];
                 }
                 integrand(pos, fr, dz + 2 * d);
               },
               opt);
  out.reached = stepper.run(z, 0.0, t_cap, [&](double, const double*, double, const double* znow) {
    if (nrm(d, znow) > r_cert) {
      double zz[kCap];
      for (int i = 0; i < 2 * d; ++i) zz[i] = znow[i];
      if (time_dir < 0)
        for (int a = 0; a < d; ++a) zz[d + a] = -zz[d + a];
      if (outgoing(m, zz)) {
        out.certified = true;
        return false;
      }
    }
    return true;
  });
  for (int a = 0; a < d; ++a) {
    out.x[a] = z[a];
    out.xi[a] = z[d + a];
  }
  for (int i = 0; i < n_accum; ++i) out.accum[i] = z[2 * d + i];
  return out;
}

std::pair<Vec3, Vec3> flow_point(const Metric& m, const Vec3& x0, const Vec3& xi0, double t,
                                 const FlowOptions& opt) {
  int d = m.d;
  double z[kCap];
  for (int a = 0; a < d; ++a) {
    z[a] = x0[a];
    z[d + a] = xi0[a];
  }
  Rk45 stepper(2 * d, [&m](double tt, const double* zz, double* dz) { bichar_rhs(m, tt, zz, dz); },
               opt);
  stepper.run(z, 0.0, t, nullptr);
  Vec3 x{}, xi{};
  for (int a = 0; a < d; ++a) {
    x[a] = z[a];
    xi[a] = z[d + a];
  }
  return {x, xi};
}

FlowJacobian flow_derivatives(const Metric& m, const Vec3& x, const Vec3& xi, double t,
                              int order, const FlowOptions& opt) {
  if (order > 2) fail(ErrorKind::structural, "flow derivatives implemented to order 2 only");
  int d = m.d;
  int n2 = 2 * d;
  // state: z (2d) then J columns (2d x 2d), column-major in the tail
  int ntot = n2 + n2 * n2;
  double z[kCap];
  for (int a = 0; a < d; ++a) {
    z[a] = x[a];
    z[d + a] = xi[a];
  }
  for (int c = 0; c < n2; ++c)
    for (int r = 0; r < n2; ++r) z[n2 + c * n2 + r] = (r == c) ? 1.0 : 0.0;

  auto jacobian_rhs = [&m, d, n2](double, const double* zz, double* dz) {
    bichar_rhs(m, 0.0, zz, dz);
    // DF blocks via analytic grad and finite-difference hessian of g
    Vec3 pos{}, fr{};
    for (int a = 0; a < d; ++a) {
      pos[a] = zz[a];
      fr[a] = zz[d + a];
    }
    Mat3 g;
    Grad3 dg;
    m.eval(pos, 0.0, g);
    m.grad(pos, 0.0, dg);
    double DF[6][6] = {};
    const double hfd = 1e-5;
    // d(dx/dt)_i / dx_m = -2 d_m g^{ij} xi_j ; d(dx/dt)_i / dxi_j = -2 g^{ij}
    for (int i = 0; i < d; ++i) {
      for (int mm = 0; mm < d; ++mm) {
        double s = 0;
        for (int j = 0; j < d; ++j) s += dg[mm * 9 + i * 3 + j] * fr[j];
        DF[i][mm] = -2.0 * s;
      }
      for (int j = 0; j < d; ++j) DF[i][d + j] = -2.0 * g[i * 3 + j];
    }
    // d(dxi/dt)_l / dx_m needs d_m d_l g^{ij}: central difference on grad
    for (int mm = 0; mm < d; ++mm) {
      Vec3 xp = pos, xm = pos;
      xp[mm] += hfd;
      xm[mm] -= hfd;
      Grad3 gp, gm;
      m.grad(xp, 0.0, gp);
      m.grad(xm, 0.0, gm);
      for (int l = 0; l < d; ++l) {
        double s = 0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            s += (gp[l * 9 + i * 3 + j] - gm[l * 9 + i * 3 + j]) / (2 * hfd) * fr[i] * fr[j];
        DF[d + l][mm] = s;
      }
    }
    // d(dxi/dt)_l / dxi_m = 2 d_l g^{mj} xi_j
    for (int l = 0; l < d; ++l)
      for (int mm = 0; mm < d; ++mm) {
        double s = 0;
        for (int j = 0; j < d; ++j) s += dg[l * 9 + mm * 3 + j] * fr[j];
        DF[d + l][d + mm] = 2.0 * s;
      }
    for (int c = 0; c < n2; ++c)
      for (int r = 0; r < n2; ++r) {
        double s = 0;
        for (int k = 0; k < n2; ++k) s += DF[r][k] * zz[n2 + c * n2 + k];
        dz[n2 + c * n2 + r] = s;
      }
  };

  Rk45 stepper(ntot, jacobian_rhs, opt);
  stepper.run(z, 0.0, t, nullptr);
  FlowJacobian out;
  auto J = [&](int r, int c) { return z[n2 + c * n2 + r]; };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      out.dx_dx[i * 3 + j] = J(i, j);
      out.dx_dxi[i * 3 + j] = J(i, d + j);
      out.dxi_dx[i * 3 + j] = J(d + i, j);
      out.dxi_dxi[i * 3 + j] = J(d + i, d + j);
    }
  // cross-validation against central differences of the flow map
  double eps = 1e-5;
  double worst = 0;
  for (int c = 0; c < n2; ++c) {
    Vec3 xp = x, xm = x, fp = xi, fm = xi;
    if (c < d) {
      xp[c] += eps;
      xm[c] -= eps;
    } else {
      fp[c - d] += eps;
      fm[c - d] -= eps;
    }
    Ray rp = flow(m, xp, fp, t, opt);
    Ray rm = flow(m, xm, fm, t, opt);
    for (int r = 0; r < n2; ++r) {
      double vp = r < d ? rp.x.back()[r] : rp.xi.back()[r - d];
      double vm = r < d ? rm.x.back()[r] : rm.xi.back()[r - d];
      double fd = (vp - vm) / (2 * eps);
      double scale = std::max({1.0, std::abs(fd), std::abs(J(r, c))});
      worst = std::max(worst, std::abs(fd - J(r, c)) / scale);
    }
  }
  out.fd_mismatch = worst;
  if (worst > 1e-3)
    fail(ErrorKind::integration,
         "variational Jacobian disagrees with finite differences (rel " + std::to_string(worst) + ")");
  return out;
}

} // namespace uhs
