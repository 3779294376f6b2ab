#include "uhs/solver.hpp"

#include <algorithm>
#include <cmath>

#include "uhs/cutoffs.hpp"
#include "uhs/fft.hpp"
#include "uhs/hamilton.hpp"
#include "uhs/lp.hpp"

namespace uhs {

namespace {

// Working data for one run: sampled coefficient fields and spectral tables.
struct StepContext {
  Grid grid;
  Mat3 flat{};
  int d = 2;
  bool para = false;
  std::vector<double> flat_symbol;       // -g_inf^{jk} xi_j xi_k
  std::vector<double> flat_symbol_hi;    // same, windowed to S_{>=5} (para principal part)
  std::vector<std::vector<complexd>> deriv; // i xi_a tables
  std::vector<double> dealias;           // 2/3-rule mask
  Field cfac;                            // conformal factor - 1 at t = 0
  Field bfield[3], btfield[3];
  std::function<Field(double)> source;
  // time-dependent conformal factor / b (nonlinear iterations)
  std::function<Field(double)> cfac_t;
  std::function<Field(double)> b_t; // b = b_t * e_1 model coupling

  explicit StepContext(const Grid& g) : grid(g), cfac(g), bfield{g, g, g}, btfield{g, g, g} {}

  Field c_at(double t) const { return cfac_t ? cfac_t(t) : cfac; }
};

std::vector<double> flat_table(const Grid& g, const Mat3& flat, bool hi_window) {
  std::vector<double> out(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) {
    auto xi = g.frequency(i);
    double s = 0;
    for (int a = 0; a < g.dim(); ++a)
      for (int b = 0; b < g.dim(); ++b) s += flat[a * 3 + b] * xi[a] * xi[b];
    double w = 1.0;
    if (hi_window) w = 1.0 - lp::base(g.frequency_norm(i), lp::paraproduct_gap);
    out[i] = -s * w;
  }
  return out;
}

Field dealias_field(const StepContext& ctx, Field f) {
  Field fh = to_frequency(f);
  for (std::int64_t i = 0; i < ctx.grid.size(); ++i) fh[i] *= ctx.dealias[i];
  return to_physical(fh);
}

Field derivative(const StepContext& ctx, const Field& f, int axis) {
  return apply_multiplier(f, ctx.deriv[axis]);
}

// coefficient action: plain product or paraproduct, dealiased
Field coeff_apply(const StepContext& ctx, const Field& coeff, const Field& f) {
  if (ctx.para) return dealias_field(ctx, paraproduct(coeff, f));
  return dealias_field(ctx, hadamard(coeff, f));
}

/// i [ sum_jk g_inf^{jk} d_j( (c-1) . d_k v ) + b . grad v + bt . grad conj v - f ]
Field variable_part(const StepContext& ctx, const Field& v, double t) {
  const Grid& g = ctx.grid;
  Field acc(g, Rep::physical);
  Field c = ctx.c_at(t);
  // second-order conformal part
  for (int k = 0; k < ctx.d; ++k) {
    Field dv = derivative(ctx, v, k);
    Field cdv = coeff_apply(ctx, c, dv);
    for (int j = 0; j < ctx.d; ++j) {
      double gjk = ctx.flat[j * 3 + k];
      if (gjk == 0.0) continue;
      acc += complexd(gjk, 0) * derivative(ctx, cdv, j);
    }
  }
  // first-order parts
  Field vbar = conjugate(to_physical(v));
  for (int a = 0; a < ctx.d; ++a) {
    // the nonlinear model couples b along the first axis only
    Field ba = ctx.b_t ? (a == 0 ? ctx.b_t(t) : Field(g, Rep::physical)) : ctx.bfield[a];
    bool bz = true, btz = true;
    for (std::int64_t i = 0; i < g.size() && (bz || btz); ++i) {
      if (ba[i] != complexd(0, 0)) bz = false;
      if (ctx.btfield[a][i] != complexd(0, 0)) btz = false;
    }
    if (!bz) acc += coeff_apply(ctx, ba, derivative(ctx, v, a));
    if (!btz) acc += coeff_apply(ctx, ctx.btfield[a], derivative(ctx, vbar, a));
  }
  if (ctx.source) acc -= ctx.source(t);
  return complexd(0, 1) * acc;
}

Field propagate_flat(const StepContext& ctx, const Field& v, double s, bool para_window) {
  const auto& table = para_window ? ctx.flat_symbol_hi : ctx.flat_symbol;
  Field fh = to_frequency(v);
  for (std::int64_t i = 0; i < ctx.grid.size(); ++i)
    fh[i] *= std::polar(1.0, -table[i] * s); // i d_t v = -(table) v  =>  e^{-i table t}
  return to_physical(fh);
}

double outer_mass_fraction(const Field& v) {
  const Grid& g = v.grid();
  double outer = 0, total = 0;
  double lim = g.box_length() / 3.0;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double m = std::norm(v[i]);
    total += m;
    auto x = g.point(i);
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(x[a]) > lim) {
        outer += m;
        break;
      }
  }
  return total > 0 ? outer / total : 0.0;
}

StepContext make_context(const CoefficientSet& coeffs, const Grid& g, const SolverConfig& cfg) {
  StepContext ctx(g);
  ctx.d = g.dim();
  ctx.flat = coeffs.metric.flat;
  ctx.para = cfg.paradifferential;
  ctx.flat_symbol = flat_table(g, ctx.flat, false);
  ctx.flat_symbol_hi = flat_table(g, ctx.flat, true);
  for (int a = 0; a < ctx.d; ++a)
    ctx.deriv.push_back(multiplier_table_c(g, [a](const std::array<double, 3>& xi) {
      return complexd(0, xi[a]);
    }));
  ctx.dealias.resize(g.size());
  double cap = cfg.dealias_fraction * g.nyquist();
  for (std::int64_t i = 0; i < g.size(); ++i) {
    auto xi = g.frequency(i);
    bool ok = true;
    for (int a = 0; a < ctx.d; ++a)
      if (std::abs(xi[a]) > cap) ok = false;
    ctx.dealias[i] = ok ? 1.0 : 0.0;
  }
  // conformal factor: metric = c(x) g_inf
  Mat3 probe;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    auto xp = g.point(i);
    coeffs.metric.eval({xp[0], xp[1], xp[2]}, 0.0, probe);
    // ratio against the first nonzero flat entry
    double c = 0;
    for (int a = 0; a < ctx.d; ++a)
      if (std::abs(ctx.flat[a * 3 + a]) > 0.5) {
        c = probe[a * 3 + a] / ctx.flat[a * 3 + a];
        break;
      }
    ctx.cfac[i] = c - 1.0;
  }
  for (int a = 0; a < ctx.d; ++a) {
    ctx.bfield[a] = sample(g, [&](const std::array<double, 3>& x) {
      std::array<complexd, 3> bv;
      coeffs.b.eval({x[0], x[1], x[2]}, bv);
      return bv[a];
    });
    ctx.btfield[a] = sample(g, [&](const std::array<double, 3>& x) {
      std::array<complexd, 3> bv;
      coeffs.btilde.eval({x[0], x[1], x[2]}, bv);
      return bv[a];
    });
  }
  ctx.source = coeffs.source;
  return ctx;
}

void stability_guard(const StepContext& ctx, double dt) {
  double sup_c = 0;
  for (std::int64_t i = 0; i < ctx.grid.size(); ++i)
    sup_c = std::max(sup_c, std::abs(ctx.cfac[i]));
  double sup_b = 0;
  for (int a = 0; a < ctx.d; ++a)
    for (std::int64_t i = 0; i < ctx.grid.size(); ++i)
      sup_b = std::max(sup_b, std::abs(ctx.bfield[a][i]) + std::abs(ctx.btfield[a][i]));
  double max_sym = 0, max_xi = 0;
  for (std::int64_t i = 0; i < ctx.grid.size(); ++i) {
    max_sym = std::max(max_sym, std::abs(ctx.flat_symbol[i]) * ctx.dealias[i]);
    max_xi = std::max(max_xi, ctx.grid.frequency_norm(i) * ctx.dealias[i]);
  }
  double z = dt * (sup_c * max_sym + sup_b * max_xi);
  if (z > 1.5)
    fail(ErrorKind::precondition,
         "explicit coupling too stiff for dt (dt * |L_var| = " + std::to_string(z) +
             "); shrink dt or use implicit midpoint");
}

SpaceTimeField run_scheme(StepContext& ctx, const Field& v0_in, const SolverConfig& cfg,
                          RunReport* report) {
  const Grid& g = ctx.grid;
  Field v = to_physical(v0_in);
  if (cfg.k1_floor > 0) v = project_above(v, cfg.k1_floor);
  v = dealias_field(ctx, v);
  if (cfg.scheme == Scheme::exponential_splitting) stability_guard(ctx, cfg.dt);
  long nsteps = std::lround(cfg.T / cfg.dt);
  SpaceTimeField out(0.0, cfg.dt * cfg.snapshot_stride);
  out.push(v);
  double wrap = outer_mass_fraction(v);
  bool para = ctx.para;
  for (long n = 0; n < nsteps; ++n) {
    double t = n * cfg.dt;
    if (cfg.scheme == Scheme::exponential_splitting) {
      // Lawson midpoint: exact flat propagator around an explicit midpoint
      Field k1 = variable_part(ctx, v, t);
      Field vh = propagate_flat(ctx, v + complexd(0.5 * cfg.dt, 0) * k1, 0.5 * cfg.dt, para);
      Field k2 = variable_part(ctx, vh, t + 0.5 * cfg.dt);
      v = propagate_flat(ctx, v, cfg.dt, para) +
          complexd(cfg.dt, 0) * propagate_flat(ctx, k2, 0.5 * cfg.dt, para);
    } else {
      // implicit midpoint: flat part solved exactly in Fourier space, the
      // variable part fixed-point iterated
      Field rhs = to_frequency(v);
      const auto& table = para ? ctx.flat_symbol_hi : ctx.flat_symbol;
      for (std::int64_t i = 0; i < g.size(); ++i) {
        complexd lam(0, -table[i] * 0.5 * cfg.dt);
        rhs[i] = (1.0 + lam) * rhs[i];
      }
      Field w = v;
      bool converged = false;
      for (int it = 0; it < cfg.fixed_point_max; ++it) {
        Field mid = complexd(0.5, 0) * (v + w);
        Field nv = variable_part(ctx, mid, t + 0.5 * cfg.dt);
        Field tot = rhs + to_frequency(complexd(cfg.dt, 0) * nv);
        for (std::int64_t i = 0; i < g.size(); ++i) {
          complexd lam(0, -table[i] * 0.5 * cfg.dt);
          tot[i] = tot[i] / (1.0 - lam);
        }
        Field wn = to_physical(tot);
        double gap = (wn - w).l2_norm();
        w = wn;
        if (gap <= cfg.fixed_point_tol * std::max(1.0, w.l2_norm())) {
          converged = true;
          break;
        }
      }
      if (!converged)
        fail(ErrorKind::integration, "implicit midpoint fixed point failed to converge");
      v = w;
    }
    wrap = std::max(wrap, outer_mass_fraction(v));
    if ((n + 1) % cfg.snapshot_stride == 0 || n + 1 == nsteps) out.push(v);
  }
  if (report) {
    report->scheme = cfg.scheme == Scheme::exponential_splitting ? "exponential-splitting"
                                                                 : "implicit-midpoint";
    report->dt = cfg.dt;
    report->T = cfg.T;
    report->steps = static_cast<int>(nsteps);
    report->mass_wrap = wrap;
    report->mass_wrap_warning = wrap > 1e-6;
    report->norms["LinfL2"] = norm_LinfL2(out);
  }
  return out;
}

} // namespace

void CoefficientSet::validate(const Grid& grid) const {
  if (skip_decay_checks) return;
  // sampled smallness of (g - g_inf, b, btilde) outside 2 R0
  double worst = 0;
  for (std::int64_t i = 0; i < grid.size(); i += 7) {
    auto xp = grid.point(i);
    Vec3 x{xp[0], xp[1], xp[2]};
    double r = 0;
    for (int a = 0; a < grid.dim(); ++a) r += x[a] * x[a];
    if (std::sqrt(r) <= 2.0 * R0) continue;
    Mat3 g;
    metric.eval(x, 0.0, g);
    for (int a = 0; a < 9; ++a) worst = std::max(worst, std::abs(g[a] - metric.flat[a]));
    std::array<complexd, 3> bv, btv;
    b.eval(x, bv);
    btilde.eval(x, btv);
    for (int a = 0; a < grid.dim(); ++a)
      worst = std::max({worst, std::abs(bv[a]), std::abs(btv[a])});
  }
  if (worst > eps0)
    fail(ErrorKind::precondition, "coefficients are not small outside 2 R0 (sampled " +
                                      std::to_string(worst) + ")");
}

SpaceTimeField evolve_linear(const CoefficientSet& coeffs, const Field& v0,
                             const SolverConfig& config, RunReport* report) {
  SolverConfig cfg = config;
  cfg.paradifferential = false;
  coeffs.validate(v0.grid());
  StepContext ctx = make_context(coeffs, v0.grid(), cfg);
  return run_scheme(ctx, v0, cfg, report);
}

ParaRun evolve_paradifferential(const CoefficientSet& coeffs, const Field& v0,
                                const SolverConfig& config, RunReport* report) {
  SolverConfig cfg = config;
  cfg.paradifferential = true;
  coeffs.validate(v0.grid());
  StepContext ctx = make_context(coeffs, v0.grid(), cfg);
  SpaceTimeField v = run_scheme(ctx, v0, cfg, report);
  // paradifferential remainder source on the computed solution:
  //   R = (T_b - b) dv + (T_bt - bt) d conj v + sum g_inf^{jk} d_j((T_c - c) d_k v)
  SpaceTimeField rem(v.t0(), v.dt());
  for (std::size_t s = 0; s < v.steps(); ++s) {
    const Field& vq = v.at(s);
    Field acc(v.grid(), Rep::physical);
    Field vbar = conjugate(to_physical(vq));
    for (int k = 0; k < ctx.d; ++k) {
      Field dv = derivative(ctx, vq, k);
      Field diff = dealias_field(ctx, paraproduct(ctx.cfac, dv)) -
                   dealias_field(ctx, hadamard(ctx.cfac, dv));
      for (int j = 0; j < ctx.d; ++j) {
        double gjk = ctx.flat[j * 3 + k];
        if (gjk == 0.0) continue;
        acc += complexd(gjk, 0) * derivative(ctx, diff, j);
      }
    }
    for (int a = 0; a < ctx.d; ++a) {
      Field dv = derivative(ctx, vq, a);
      Field dvb = derivative(ctx, vbar, a);
      acc += dealias_field(ctx, paraproduct(ctx.bfield[a], dv)) -
             dealias_field(ctx, hadamard(ctx.bfield[a], dv));
      acc += dealias_field(ctx, paraproduct(ctx.btfield[a], dvb)) -
             dealias_field(ctx, hadamard(ctx.btfield[a], dvb));
    }
    rem.push(acc);
  }
  return ParaRun{std::move(v), std::move(rem)};
}

Metric metric_from_conformal_field(const Field& factor, const Mat3& flat) {
  const Grid g = factor.grid();
  auto values = std::make_shared<std::vector<double>>(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) (*values)[i] = factor[i].real();
  int n = g.points_per_axis();
  int d = g.dim();
  double h = g.spacing(), L = g.box_length();
  auto at = [values, n, d](int i, int j) {
    i = ((i % n) + n) % n;
    j = ((j % n) + n) % n;
    return d == 1 ? (*values)[i] : (*values)[static_cast<std::int64_t>(i) * n + j];
  };
  // periodic Catmull-Rom interpolation of the factor
  auto interp1 = [](double t, double p0, double p1, double p2, double p3) {
    return p1 + 0.5 * t * (p2 - p0 + t * (2 * p0 - 5 * p1 + 4 * p2 - p3 + t * (3 * (p1 - p2) + p3 - p0)));
  };
  auto eval_c = [=](const Vec3& x) {
    double u = (x[0] + 0.5 * L) / h;
    int i = static_cast<int>(std::floor(u));
    double t = u - i;
    if (d == 1) return interp1(t, at(i - 1, 0), at(i, 0), at(i + 1, 0), at(i + 2, 0));
    double v = (x[1] + 0.5 * L) / h;
    int j = static_cast<int>(std::floor(v));
    double s = v - j;
    double rows[4];
    for (int r = -1; r <= 2; ++r)
      rows[r + 1] = interp1(s, at(i + r, j - 1), at(i + r, j), at(i + r, j + 1), at(i + r, j + 2));
    return interp1(t, rows[0], rows[1], rows[2], rows[3]);
  };
  Metric m;
  m.d = d;
  m.flat = flat;
  m.signature = flat[4] < 0 ? Signature::ultrahyperbolic : Signature::elliptic;
  double supdev = 0;
  for (double v : *values) supdev = std::max(supdev, std::abs(v - 1.0));
  m.size_M = supdev;
  m.nondeg_c = 1.0 / std::max(1e-3, 1.0 - supdev);
  m.support_radius = 0.45 * L; // effectively flat near the box edge
  m.eval = [eval_c, flat, d](const Vec3& x, double, Mat3& g2) {
    double c = eval_c(x);
    for (int i = 0; i < 9; ++i) g2[i] = c * flat[i];
  };
  m.grad = [eval_c, flat, d, h](const Vec3& x, double, Grad3& dg) {
    dg.fill(0.0);
    double step = 0.5 * h;
    for (int l = 0; l < d; ++l) {
      Vec3 xp = x, xm = x;
      xp[l] += step;
      xm[l] -= step;
      double dc = (eval_c(xp) - eval_c(xm)) / (2 * step);
      for (int i = 0; i < 9; ++i) dg[l * 9 + i] = dc * flat[i];
    }
  };
  return m;
}

NonlinearRun evolve_nonlinear(const NonlinearModel& model, const Field& u0,
                              const SolverConfig& config, double contraction_tol,
                              int max_iterations) {
  const Grid& g = u0.grid();
  SolverConfig cfg = config;
  cfg.paradifferential = true;
  NonlinearRun run;
  // nontrapping certification for g(u0)
  Field c0(g, Rep::physical);
  Field u0p = to_physical(u0);
  for (std::int64_t i = 0; i < g.size(); ++i) c0[i] = 1.0 + model.alpha * u0p[i].real();
  Metric m0 = metric_from_conformal_field(c0, flat_metric(g.dim(), Signature::elliptic).flat);
  double R0 = g.box_length() / 8.0;
  SamplerSpec sp;
  sp.count = 256;
  TrappingReport t0 = nontrapping_parameter(m0, R0, sp, 60.0 * R0);
  if (t0.trapped()) fail(ErrorKind::trapped_flow, "g(u0) is trapped-suspect");
  run.L_initial = t0.L;

  double sigma = model.s - 1.0;
  SpaceTimeField prev(0.0, cfg.dt * cfg.snapshot_stride); // u^0 = 0 trajectory
  long nsteps = std::lround(cfg.T / cfg.dt);
  Field zero(g, Rep::physical);
  for (long n = 0; n <= nsteps / cfg.snapshot_stride; ++n) prev.push(zero);
  SpaceTimeField current = prev;
  for (int it = 0; it < max_iterations; ++it) {
    // coefficients frozen from the previous iterate, sampled at half-steps
    auto sample_prev = [&, nsteps](double t) -> Field {
      double pos = t / (cfg.dt * cfg.snapshot_stride);
      std::size_t i0 = std::min<std::size_t>(prev.steps() - 1, static_cast<std::size_t>(pos));
      std::size_t i1 = std::min<std::size_t>(prev.steps() - 1, i0 + 1);
      double w = std::clamp(pos - i0, 0.0, 1.0);
      Field out = prev.at(i0);
      out *= complexd(1.0 - w, 0);
      Field b = prev.at(i1);
      b *= complexd(w, 0);
      out += b;
      return out;
    };
    CoefficientSet coeffs;
    coeffs.metric = flat_metric(g.dim(), Signature::elliptic);
    coeffs.R0 = R0;
    coeffs.skip_decay_checks = true; // smallness is certified through u0 below
    StepContext ctx = make_context(coeffs, g, cfg);
    ctx.cfac_t = [&, sample_prev](double t) {
      Field un = sample_prev(t);
      Field c(g, Rep::physical);
      for (std::int64_t i = 0; i < g.size(); ++i) c[i] = model.alpha * un[i].real();
      return c;
    };
    ctx.b_t = [&, sample_prev](double t) {
      Field un = sample_prev(t);
      Field b(g, Rep::physical);
      for (std::int64_t i = 0; i < g.size(); ++i) b[i] = -model.beta * un[i];
      return b;
    };
    // G(u^n) = F(u^n) + (para - full) second order + T_b d_1 u^n
    ctx.source = [&, sample_prev](double t) {
      Field un = to_physical(sample_prev(t));
      Field du = apply_multiplier(un, ctx.deriv[0]);
      Field F(g, Rep::physical);
      for (std::int64_t i = 0; i < g.size(); ++i) F[i] = model.beta * un[i] * du[i];
      F = dealias_field(ctx, F);
      Field c = ctx.cfac_t(t);
      Field acc = F;
      for (int k = 0; k < ctx.d; ++k) {
        Field dv = derivative(ctx, un, k);
        Field diff = dealias_field(ctx, paraproduct(c, dv)) - dealias_field(ctx, hadamard(c, dv));
        for (int j = 0; j < ctx.d; ++j) {
          double gjk = ctx.flat[j * 3 + k];
          if (gjk == 0.0) continue;
          acc += complexd(gjk, 0) * derivative(ctx, diff, j);
        }
      }
      Field bt = ctx.b_t(t);
      acc += dealias_field(ctx, paraproduct(bt, du));
      return acc;
    };
    current = run_scheme(ctx, u0, cfg, &run.report);
    // contraction history in l1X^{s-1}
    SpaceTimeField diff(0.0, current.dt());
    for (std::size_t i = 0; i < current.steps(); ++i) diff.push(current.at(i) - prev.at(i));
    double gap = norm_Xs(diff, sigma, true).value;
    run.iterate_gaps.push_back(gap);
    prev = current;
    if (gap < contraction_tol) {
      run.converged = true;
      break;
    }
    if (run.iterate_gaps.size() >= 2 &&
        gap < 1e-12 * std::max(1.0, norm_Xs(current, sigma, true).value)) {
      run.converged = true;
      break;
    }
  }
  if (run.iterate_gaps.size() >= 2 &&
      run.iterate_gaps.back() <= 0.75 * run.iterate_gaps[run.iterate_gaps.size() - 2])
    run.converged = true;
  run.u = current;
  // comparable nontrapping for the evolved metric
  Field cT(g, Rep::physical);
  const Field& uT = current.at(current.steps() - 1);
  for (std::int64_t i = 0; i < g.size(); ++i) cT[i] = 1.0 + model.alpha * uT[i].real();
  Metric mT = metric_from_conformal_field(cT, flat_metric(g.dim(), Signature::elliptic).flat);
  run.L_final = nontrapping_parameter(mT, R0, sp, 60.0 * R0).L;
  return run;
}

EstimateReport verify_estimate(const SpaceTimeField& v, const Field& v0, const SpaceTimeField* f,
                               EstimateKind kind, double sigma) {
  EstimateReport rep;
  rep.sigma = sigma;
  double y_up = 0;
  if (f && f->steps() > 1) y_up = norm_Ys_upper(*f, sigma, false).value;
  switch (kind) {
    case EstimateKind::energy: {
      rep.kind = "energy";
      double linf = 0;
      for (std::size_t i = 0; i < v.steps(); ++i)
        linf = std::max(linf, norm_Hs(v.at(i), sigma).value);
      rep.lhs = linf;
      rep.rhs = norm_Hs(v0, sigma).value + y_up;
      rep.parts["LinfHs"] = linf;
      break;
    }
    case EstimateKind::local_smoothing: {
      rep.kind = "local-smoothing";
      rep.lhs = norm_Xcal(v, sigma).value;
      double linf = 0;
      for (std::size_t i = 0; i < v.steps(); ++i)
        linf = std::max(linf, norm_Hs(v.at(i), sigma).value);
      rep.rhs = linf + y_up;
      break;
    }
    case EstimateKind::full: {
      rep.kind = "full";
      rep.lhs = norm_Xs(v, sigma, true).value;
      double y1 = 0;
      if (f && f->steps() > 1) y1 = norm_Ys_upper(*f, sigma, true).value;
      rep.rhs = norm_l1Hs(v0, sigma).value + y1;
      break;
    }
    case EstimateKind::z_control: {
      rep.kind = "z-control";
      rep.lhs = norm_Zcal(v, sigma).value;
      rep.rhs = norm_Hs(v0, sigma).value + y_up + norm_Xcal(v, sigma).value;
      break;
    }
  }
  rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

double local_smoothing_ratio(const SpaceTimeField& v, const Field& v0, double R, double s) {
  const Grid& g = v.grid();
  Field mask = sample_radial(g, [R](double r) { return cutoffs::chi_below(r, R); });
  SpaceTimeField masked(v.t0(), v.dt());
  for (std::size_t i = 0; i < v.steps(); ++i) masked.push(hadamard(mask, to_physical(v.at(i))));
  double den = v0.l2_norm();
  return den > 0 ? norm_L2Hs(masked, s) / den : 0.0;
}

double mizohata_oracle_mismatch(const SpaceTimeField& v, const Field& v0, const Vec3& b_real,
                                double floor) {
  const Grid& g = v.grid();
  Field v0h = to_frequency(v0);
  double peak = v0h.max_abs();
  double worst = 0;
  for (std::size_t s = 0; s < v.steps(); ++s) {
    double t = v.time(s);
    Field vh = to_frequency(v.at(s));
    for (std::int64_t m = 0; m < g.size(); ++m) {
      double a0 = std::abs(v0h[m]);
      if (a0 < floor * peak) continue;
      auto xi = g.frequency(m);
      double rate = 0;
      for (int a = 0; a < g.dim(); ++a) rate += b_real[a] * xi[a];
      double expect = a0 * std::exp(-rate * t);
      worst = std::max(worst, std::abs(std::abs(vh[m]) - expect) / std::max(expect, 1e-300));
    }
  }
  return worst;
}

WeakLipschitzReport weak_lipschitz_check(const NonlinearModel& model, const Field& u0a,
                                         const Field& u0b, const SolverConfig& config,
                                         double sigma, double budget) {
  WeakLipschitzReport rep;
  Field d0 = to_physical(u0a) - to_physical(u0b);
  double dist_l1l2 = l1_cubes(d0, 0); // unit-cube l1 of L2 masses
  if (dist_l1l2 > budget)
    fail(ErrorKind::precondition, "data separation exceeds the weak-Lipschitz budget");
  rep.distance0 = norm_l1Hs(d0, sigma).value;
  NonlinearRun ra = evolve_nonlinear(model, u0a, config);
  NonlinearRun rb = evolve_nonlinear(model, u0b, config);
  rep.L_ratio = rb.L_initial / std::max(1e-12, ra.L_initial);
  SpaceTimeField diff(0.0, ra.u.dt());
  for (std::size_t i = 0; i < ra.u.steps(); ++i) diff.push(ra.u.at(i) - rb.u.at(i));
  rep.distance = norm_Xs(diff, sigma, true).value;
  rep.ratio = rep.distance0 > 0 ? rep.distance / rep.distance0 : 0.0;
  return rep;
}

EnvelopeCheckReport frequency_envelope_check(const SpaceTimeField& u, const Field& u0, double s) {
  EnvelopeCheckReport rep;
  auto env = envelope(u0, EnvelopeSpace::l1Hs, s);
  double base = norm_l1Hs(u0, s).value;
  int top = static_cast<int>(env.c.size()) - 1;
  for (int k = 0; k <= top; ++k) {
    SpaceTimeField uk(u.t0(), u.dt());
    for (std::size_t i = 0; i < u.steps(); ++i) uk.push(project(u.at(i), k));
    double num = norm_Xs(uk, s, true).value;
    double den = env.c[k] * base;
    rep.margins.push_back(den > 0 ? num / den : 0.0);
    rep.worst = std::max(rep.worst, rep.margins.back());
  }
  return rep;
}

} // namespace uhs
