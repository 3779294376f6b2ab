#include "uhs/renorm.hpp"

#include <algorithm>
#include <cmath>

#include "uhs/cutoffs.hpp"
#include "uhs/lp.hpp"

namespace uhs {

namespace {

double vnorm(int d, const Vec3& v) {
  double s = 0;
  for (int a = 0; a < d; ++a) s += v[a] * v[a];
  return std::sqrt(s);
}

double vdot(int d, const Vec3& a, const Vec3& b) {
  double s = 0;
  for (int t = 0; t < d; ++t) s += a[t] * b[t];
  return s;
}

double cos_angle(int d, const Vec3& a, const Vec3& b) {
  double na = vnorm(d, a), nb = vnorm(d, b);
  if (na < 1e-300 || nb < 1e-300) return 1.0;
  return std::clamp(vdot(d, a, b) / (na * nb), -1.0, 1.0);
}

} // namespace

void RenormParams::validate() const {
  if (Rprime < 8.0 * R) fail(ErrorKind::structural, "renorm requires R' >= 8 R");
  if (k1 < k0 + 8) fail(ErrorKind::structural, "renorm requires k1 >= k0 + 8");
  if (!(R > 0) || !(delta0 > 0) || !(sigma >= 0))
    fail(ErrorKind::structural, "renorm parameters out of range");
}

double FrozenCoefficients::B(const Vec3& x, const Vec3& xi) const {
  std::array<complexd, 3> bv;
  b.eval(x, bv);
  double first = 0;
  for (int a = 0; a < metric.d; ++a) first += bv[a].real() * xi[a];
  // {a, <xi>^sigma} <xi>^{-sigma} = sigma <xi>^{-2} (d_l g^{ij} xi_i xi_j) xi_l
  Grad3 dg;
  metric.grad(x, 0.0, dg);
  double r2 = 1;
  for (int a = 0; a < metric.d; ++a) r2 += xi[a] * xi[a];
  double second = 0;
  for (int l = 0; l < metric.d; ++l) {
    double qf = 0;
    for (int i = 0; i < metric.d; ++i)
      for (int j = 0; j < metric.d; ++j) qf += dg[l * 9 + i * 3 + j] * xi[i] * xi[j];
    second += qf * xi[l];
  }
  return first + sigma * second / r2;
}

double FrozenCoefficients::cos_theta(const Vec3& x, const Vec3& xi) const {
  Vec3 ainf{};
  for (int i = 0; i < metric.d; ++i) {
    double s = 0;
    for (int j = 0; j < metric.d; ++j) s += metric.flat[i * 3 + j] * xi[j];
    ainf[i] = s;
  }
  return cos_angle(metric.d, x, ainf);
}

double FrozenCoefficients::cos_alpha(const Vec3& x, const Vec3& xi) const {
  Vec3 axi{};
  metric.matvec(x, 0.0, xi, axi);
  return cos_angle(metric.d, x, axi);
}

double FrozenCoefficients::cos_beta(const Vec3& x, const Vec3& xi) const {
  Vec3 axi{}, ainf{};
  metric.matvec(x, 0.0, xi, axi);
  for (int i = 0; i < metric.d; ++i) {
    double s = 0;
    for (int j = 0; j < metric.d; ++j) s += metric.flat[i * 3 + j] * xi[j];
    ainf[i] = s;
  }
  return cos_angle(metric.d, axi, ainf);
}

FrozenCoefficients freeze_coefficients(const Metric& m, const VectorBump& b,
                                       const VectorBump& btilde, RenormParams& params,
                                       const Grid& reference, std::uint64_t seed) {
  params.validate();
  FrozenCoefficients fr;
  fr.metric = m;
  fr.b = b;
  fr.btilde = btilde;
  fr.sigma = params.sigma;
  fr.coeff_support = std::max({m.support_radius, b.zero() ? 0.0 : b.support_radius(),
                               btilde.zero() ? 0.0 : btilde.support_radius()});
  if (fr.coeff_support > params.R / 8.0 + 1e-12)
    fail(ErrorKind::structural,
         "coefficient support exceeds B_{R/8}; shrink the bumps or grow R");
  // spectral truncation residual of the analytic profiles on the reference grid
  auto residual = [&](const std::function<complexd(const Vec3&)>& f) {
    Field sampled = sample(reference, [&](const std::array<double, 3>& x) {
      return f({x[0], x[1], x[2]});
    });
    double total = sampled.l2_norm();
    if (total <= 0) return 0.0;
    return project_above(sampled, params.k0).l2_norm() / total;
  };
  double worst = 0;
  if (!b.zero())
    worst = std::max(worst, residual([&](const Vec3& x) {
      std::array<complexd, 3> v;
      b.eval(x, v);
      return v[0] + v[1] + v[2];
    }));
  if (m.size_M > 0)
    worst = std::max(worst, residual([&](const Vec3& x) {
      Mat3 g;
      m.eval(x, 0.0, g);
      return complexd(g[0] - m.flat[0], 0);
    }));
  fr.truncation_residual = worst;
  if (worst > 1e-6)
    fail(ErrorKind::precondition,
         "coefficient profiles are not band-concentrated below 2^k0 (residual " +
             std::to_string(worst) + "); raise k0 or widen the profiles");
  double cap = params.t_cap > 0 ? params.t_cap
                                : 25.0 * (3.0 * params.Rprime) * std::max(1.0, m.nondeg_c);
  SamplerSpec sp;
  sp.count = 512;
  sp.seed = seed;
  fr.certificate = nontrapping_parameter(m, 2.0 * params.Rprime, sp, cap);
  if (fr.certificate.trapped())
    fail(ErrorKind::trapped_flow, "frozen metric is trapped-suspect; construction refused");
  if (params.L_2Rprime < 0) params.L_2Rprime = fr.certificate.L;
  if (params.L_R < 0) {
    SamplerSpec spR;
    spR.count = 512;
    spR.seed = seed + 1;
    params.L_R = nontrapping_parameter(m, params.R, spR, cap).L;
  }
  if (params.t_cap <= 0) params.t_cap = cap;
  return fr;
}

CheckLattice make_check_lattice(int dim, double x_extent, int x_radial, int x_angular, int k1,
                                int xi_radial, int xi_angular) {
  CheckLattice lat;
  lat.x.push_back({0, 0, 0});
  for (int ir = 0; ir < x_radial; ++ir) {
    double r = x_extent * std::pow(0.02, static_cast<double>(x_radial - 1 - ir) /
                                             std::max(1, x_radial - 1));
    if (dim == 1) {
      lat.x.push_back({r, 0, 0});
      lat.x.push_back({-r, 0, 0});
    } else {
      for (int ia = 0; ia < x_angular; ++ia) {
        double th = 2 * std::numbers::pi * (ia + 0.25) / x_angular;
        if (dim == 2)
          lat.x.push_back({r * std::cos(th), r * std::sin(th), 0});
        else
          lat.x.push_back({r * std::cos(th), r * std::sin(th) * 0.8, r * std::sin(th) * 0.6});
      }
    }
  }
  for (int ir = 0; ir < xi_radial; ++ir) {
    double lam = std::pow(2.0, static_cast<double>(k1) * ir / std::max(1, xi_radial - 1));
    if (dim == 1) {
      lat.xi.push_back({lam, 0, 0});
      lat.xi.push_back({-lam, 0, 0});
    } else {
      for (int ia = 0; ia < xi_angular; ++ia) {
        double th = 2 * std::numbers::pi * (ia + 0.5) / xi_angular;
        if (dim == 2)
          lat.xi.push_back({lam * std::cos(th), lam * std::sin(th), 0});
        else
          lat.xi.push_back(
              {lam * std::cos(th) * 0.9, lam * std::sin(th), lam * std::cos(th) * 0.436});
      }
    }
  }
  return lat;
}

RenormSymbols::RenormSymbols(FrozenCoefficients frozen, RenormParams params)
    : frozen_(std::move(frozen)), params_(params) {
  stop_radius_psi_ = std::max({std::min(6.0 * params_.R, frozen_.coeff_support),
                               frozen_.metric.support_radius, 0.25 * params_.R});
  stop_radius_p_ = std::max(3.0 * params_.Rprime, frozen_.metric.support_radius);
  ray_opt_.tol = 1e-10;
  ray_opt_.max_step = 0.5;
}

double RenormSymbols::psi1(const Vec3& x, const Vec3& xi) const {
  int d = frozen_.metric.d;
  const double R = params_.R;
  double cut_x = cutoffs::chi_below(vnorm(d, x), 2.0 * R);
  double lam = vnorm(d, xi);
  double cut_xi = cutoffs::chi_gt1(lam);
  if (cut_x == 0.0 || cut_xi == 0.0) return 0.0;
  Vec3 omega{};
  for (int a = 0; a < d; ++a) omega[a] = xi[a] / lam;
  double mu = 1.0 / (lam * lam);
  double total = 0;
  for (int sgn : {+1, -1}) {
    Vec3 w = omega;
    for (int a = 0; a < d; ++a) w[a] *= sgn;
    AugmentedRay ray = flow_augmented(
        frozen_.metric, x, w, 2,
        [&](const Vec3& pos, const Vec3& fr, double* acc) {
          double cut = cutoffs::chi_below(vnorm(d, pos), 4.0 * R);
          acc[0] = acc[1] = 0;
          if (cut == 0.0) return;
          std::array<complexd, 3> bv;
          frozen_.b.eval(pos, bv);
          double a1 = 0;
          for (int a = 0; a < d; ++a) a1 += bv[a].real() * fr[a];
          acc[0] = cut * a1;
          Grad3 dg;
          frozen_.metric.grad(pos, 0.0, dg);
          double g0 = 0;
          for (int l = 0; l < d; ++l) {
            double qf = 0;
            for (int i = 0; i < d; ++i)
              for (int j = 0; j < d; ++j) qf += dg[l * 9 + i * 3 + j] * fr[i] * fr[j];
            g0 += qf * fr[l];
          }
          double fr2 = 0;
          for (int a = 0; a < d; ++a) fr2 += fr[a] * fr[a];
          acc[1] = cut * frozen_.sigma * g0 / (mu + fr2);
        },
        stop_radius_psi_, params_.t_cap, -1, ray_opt_);
    if (!ray.certified)
      fail(ErrorKind::trapped_flow, "escape integral did not certify exit; construction refused");
    total += ray.accum[0] + ray.accum[1];
  }
  return -0.5 * cut_xi * cut_x * total;
}

double RenormSymbols::psi2(const Vec3& x, const Vec3& xi) const {
  int d = frozen_.metric.d;
  const double R = params_.R;
  double lam = vnorm(d, xi);
  double w = cutoffs::chi_gt1(lam);
  if (w == 0.0) return 0.0;
  double r = vnorm(d, x);
  double ct = frozen_.cos_theta(x, xi);
  double gam = 0.5 * (1.0 + ct);
  double phm = cutoffs::phi_below(ct, -0.5, params_.delta0);
  double v = cutoffs::rho(r / R) * phm - cutoffs::rho(r * gam / R) * (1.0 - phm);
  return params_.Kprime * w * v;
}

namespace {

// -xi_i xi_j grad_xi(s) . grad_x A^{ij} + K'' chi_{<2}(|xi|) for an angular
// correction symbol s (psi2 or p2)
double remainder_symbol(const Metric& metric, double Kdprime,
                        const std::function<double(const Vec3&, const Vec3&)>& s, const Vec3& x,
                        const Vec3& xi) {
  int d = metric.d;
  double lam = 0;
  for (int a = 0; a < d; ++a) lam += xi[a] * xi[a];
  lam = std::sqrt(lam);
  double cushion = Kdprime * cutoffs::chi_below(lam, 2.0);
  Grad3 dg;
  metric.grad(x, 0.0, dg);
  bool flat = true;
  for (double v : dg)
    if (v != 0.0) flat = false;
  if (flat) return cushion;
  double h = 1e-3 * (1.0 + lam);
  double sum = 0;
  for (int l = 0; l < d; ++l) {
    auto f = [&](double t) {
      Vec3 xit = xi;
      xit[l] += t;
      return s(x, xit);
    };
    double dps = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
    double qf = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) qf += dg[l * 9 + i * 3 + j] * xi[i] * xi[j];
    sum += dps * qf;
  }
  return -sum + cushion;
}

} // namespace

double RenormSymbols::r_O(const Vec3& x, const Vec3& xi) const {
  return remainder_symbol(frozen_.metric, params_.Kdprime,
                          [this](const Vec3& xx, const Vec3& ff) { return psi2(xx, ff); }, x, xi);
}

double RenormSymbols::eta(const Vec3& x) const {
  int d = frozen_.metric.d;
  double cut = cutoffs::chi_below(vnorm(d, x), 2.0 * params_.Rprime);
  if (cut == 0.0) return 0.0;
  std::array<complexd, 3> bv, btv;
  frozen_.b.eval(x, bv);
  frozen_.btilde.eval(x, btv);
  double s = 0;
  for (int a = 0; a < d; ++a) s += std::norm(bv[a]) + std::norm(btv[a]);
  Grad3 dg;
  frozen_.metric.grad(x, 0.0, dg);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s += sqr(dg[l * 9 + i * 3 + j]);
  double L = std::max(params_.L_2Rprime, 1e-6);
  return cut * std::sqrt(s + 1.0 / (L * L));
}

double RenormSymbols::p1(const Vec3& x, const Vec3& xi) const {
  int d = frozen_.metric.d;
  double lam = vnorm(d, xi);
  double cut_xi = cutoffs::chi_gt1(lam);
  double cut_x = cutoffs::chi_below(vnorm(d, x), params_.Rprime);
  if (cut_xi == 0.0 || cut_x == 0.0) return 0.0;
  Vec3 omega{};
  for (int a = 0; a < d; ++a) omega[a] = xi[a] / lam;
  AugmentedRay ray = flow_augmented(
      frozen_.metric, x, omega, 1,
      [&](const Vec3& pos, const Vec3& fr, double* acc) {
        double w = cutoffs::chi_below(vnorm(d, pos), 2.0 * params_.R) + eta(pos);
        acc[0] = w * vnorm(d, fr);
      },
      stop_radius_p_, params_.t_cap, +1, ray_opt_);
  if (!ray.certified)
    fail(ErrorKind::trapped_flow, "escape integral did not certify exit; construction refused");
  return -cut_xi * cut_x * ray.accum[0];
}

double RenormSymbols::p2(const Vec3& x, const Vec3& xi) const {
  int d = frozen_.metric.d;
  const double Rp = params_.Rprime;
  double lam = vnorm(d, xi);
  double w = cutoffs::chi_gt1(lam);
  if (w == 0.0) return 0.0;
  double r = vnorm(d, x);
  double ct = frozen_.cos_theta(x, xi);
  double gam = 0.5 * (1.0 + ct);
  double phm = cutoffs::phi_below(ct, -0.5, params_.delta0);
  double v = cutoffs::rho(r / Rp) * phm - cutoffs::rho(r * gam / Rp) * (1.0 - phm);
  return params_.Kprime_q * w * v;
}

double RenormSymbols::r_q(const Vec3& x, const Vec3& xi) const {
  return remainder_symbol(frozen_.metric, params_.Kdprime_q,
                          [this](const Vec3& xx, const Vec3& ff) { return p2(xx, ff); }, x, xi);
}

double RenormSymbols::H_a(const std::function<double(const Vec3&, const Vec3&)>& f, const Vec3& x,
                          const Vec3& xi) const {
  int d = frozen_.metric.d;
  double lam = vnorm(d, xi);
  double delta = 1e-4 / (1.0 + 2.0 * lam * frozen_.metric.nondeg_c);
  auto [xp, xip] = flow_point(frozen_.metric, x, xi, delta, ray_opt_);
  auto [xm, xim] = flow_point(frozen_.metric, x, xi, -delta, ray_opt_);
  return (f(xp, xip) - f(xm, xim)) / (2.0 * delta);
}

double RenormSymbols::H_a_analytic(const std::function<double(const Vec3&, const Vec3&)>& f,
                                   const Vec3& x, const Vec3& xi) const {
  int d = frozen_.metric.d;
  Mat3 g;
  Grad3 dg;
  frozen_.metric.eval(x, 0.0, g);
  frozen_.metric.grad(x, 0.0, dg);
  double lam = vnorm(d, xi);
  double hx = 1e-5 * (1.0 + vnorm(d, x));
  double hxi = 1e-5 * (1.0 + lam);
  double total = 0;
  for (int l = 0; l < d; ++l) {
    double gxil = 0;
    for (int j = 0; j < d; ++j) gxil += g[l * 3 + j] * xi[j];
    double dxa = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) dxa += dg[l * 9 + i * 3 + j] * xi[i] * xi[j];
    dxa = -dxa; // grad_x a = -(d_l g) xi xi
    Vec3 xp = x, xm = x, fp = xi, fm = xi;
    xp[l] += hx;
    xm[l] -= hx;
    fp[l] += hxi;
    fm[l] -= hxi;
    double dfx = (f(xp, xi) - f(xm, xi)) / (2 * hx);
    double dfxi = (f(x, fp) - f(x, fm)) / (2 * hxi);
    total += (-2.0 * gxil) * dfx - dxa * dfxi;
  }
  return total;
}

Symbol RenormSymbols::O_symbol() const {
  const RenormSymbols* self = this;
  return Symbol(frozen_.metric.d, 0,
                [self](const Vec3& x, const Vec3& xi) { return complexd(self->O(x, xi), 0); });
}

Symbol RenormSymbols::q_symbol() const {
  const RenormSymbols* self = this;
  return Symbol(frozen_.metric.d, 0,
                [self](const Vec3& x, const Vec3& xi) { return complexd(self->q(x, xi), 0); });
}

namespace {

// (H_a psi + chi_{<2R} B + r) / (1 + |xi|): equals the O-weighted form of the
// positivity inequality divided by O > 0.
double check_O_point(const RenormSymbols& sym, const Vec3& x, const Vec3& xi) {
  int d = sym.frozen().metric.d;
  double lam = vnorm(d, xi);
  auto psif = [&sym](const Vec3& xx, const Vec3& ff) { return sym.psi(xx, ff); };
  double Hpsi = sym.H_a(psif, x, xi);
  double r = vnorm(d, x);
  double E = Hpsi + cutoffs::chi_below(r, 2.0 * sym.params().R) * sym.frozen().B(x, xi) +
             sym.r_O(x, xi);
  return E / (1.0 + lam);
}

// C(M) (H_a p + r - (chi_{<2R} + chi_{<R'} eta) |xi|) / (1 + |xi|): the stated
// inequality with both sides divided by q > 0.
double check_q_point(const RenormSymbols& sym, const Vec3& x, const Vec3& xi,
                     double* ellipticity = nullptr) {
  int d = sym.frozen().metric.d;
  double lam = vnorm(d, xi);
  auto pf = [&sym](const Vec3& xx, const Vec3& ff) { return sym.p(xx, ff); };
  double Hp = sym.H_a(pf, x, xi);
  double CM = sym.params().CM;
  double r = vnorm(d, x);
  double chi2R = cutoffs::chi_below(r, 2.0 * sym.params().R);
  double chiRp = cutoffs::chi_below(r, sym.params().Rprime);
  double lhs = Hp + sym.r_q(x, xi);
  double rhs = (chi2R + chiRp * sym.eta(x)) * lam;
  if (ellipticity) {
    double denom = chi2R * lam;
    *ellipticity = denom > 1e-9 ? lhs / denom : 1e300;
  }
  return CM * (lhs - rhs) / (1.0 + lam);
}

} // namespace

RenormSymbols build_renorm(FrozenCoefficients frozen, RenormParams params, bool calibrate) {
  params.validate();
  if (params.t_cap <= 0)
    params.t_cap = 25.0 * (3.0 * params.Rprime) * std::max(1.0, frozen.metric.nondeg_c);
  if (params.L_2Rprime < 0) params.L_2Rprime = std::max(1.0, 2.0 * params.Rprime);
  if (params.CM < 0) params.CM = 8.0 * (1.0 + frozen.metric.size_M);
  int d = frozen.metric.d;
  auto samples = sample_ball_sphere(d, 3.0 * params.R, 96, 23);
  double min_axi = 1e300;
  for (const auto& [x, om] : samples) {
    Vec3 axi{};
    frozen.metric.matvec(x, 0.0, om, axi);
    min_axi = std::min(min_axi, vnorm(d, axi));
  }
  min_axi = std::max(min_axi, 1e-6);
  CheckLattice coarse = make_check_lattice(d, 3.4 * params.Rprime, 12, d == 1 ? 1 : 6, params.k1,
                                           4, d == 1 ? 1 : 6);
  if (params.K < 0 || params.Kq < 0) {
    RenormParams pk = params;
    pk.K = pk.Kprime = pk.Kdprime = pk.Kq = pk.Kprime_q = pk.Kdprime_q = 0;
    RenormSymbols probe(frozen, pk);
    double sup_psi = 0, sup_p = 0;
    for (const auto& [x, om] : samples) {
      Vec3 xi{};
      for (int a = 0; a < d; ++a) xi[a] = 4.0 * om[a];
      sup_psi = std::max(sup_psi, 2.0 * std::abs(probe.psi1(x, xi)));
      sup_p = std::max(sup_p, std::abs(probe.p1(x, xi)));
    }
    if (params.K < 0) params.K = 2.0 * std::max(sup_psi, 1e-6);
    if (params.Kq < 0) params.Kq = 2.0 * std::max(sup_p, 1e-6);
  }
  if (params.Kprime < 0) {
    double base = 8.0 * params.K / min_axi;
    params.Kprime = base;
    params.Kdprime = 8.0 * params.Kprime;
    if (calibrate) {
      for (int j = 0; j < 9; ++j) {
        params.Kprime = base * std::ldexp(1.0, j);
        params.Kdprime = 8.0 * params.Kprime;
        RenormSymbols cand(frozen, params);
        double worst = 0;
        for (std::size_t ix = 0; ix < coarse.x.size(); ix += 2)
          for (std::size_t im = 0; im < coarse.xi.size(); im += 2)
            worst = std::min(worst, check_O_point(cand, coarse.x[ix], coarse.xi[im]));
        if (worst >= -5e-4) break;
      }
    }
  }
  if (params.Kdprime < 0) params.Kdprime = std::max(8.0 * params.Kprime, 1.0);
  if (params.Kprime_q < 0) {
    double base = 8.0 * params.Kq / min_axi;
    params.Kprime_q = base;
    params.Kdprime_q = 8.0 * params.Kprime_q;
    if (calibrate) {
      for (int j = 0; j < 9; ++j) {
        params.Kprime_q = base * std::ldexp(1.0, j);
        params.Kdprime_q = 8.0 * params.Kprime_q;
        RenormSymbols cand(frozen, params);
        double infp = 0;
        for (const auto& x : coarse.x)
          for (std::size_t im = 0; im < coarse.xi.size(); im += 2)
            infp = std::min(infp, cand.p(x, coarse.xi[im]));
        cand.inf_p_ = infp;
        double worst = 0;
        for (std::size_t ix = 0; ix < coarse.x.size(); ix += 2)
          for (std::size_t im = 0; im < coarse.xi.size(); im += 2)
            worst = std::min(worst, check_q_point(cand, coarse.x[ix], coarse.xi[im]));
        if (worst >= -5e-4) break;
      }
    }
  }
  if (params.Kdprime_q < 0) params.Kdprime_q = std::max(8.0 * params.Kprime_q, 1.0);
  RenormSymbols sym(frozen, params);
  CheckLattice lat = make_check_lattice(d, 3.4 * params.Rprime, 16, d == 1 ? 1 : 8, params.k1, 4,
                                        d == 1 ? 1 : 8);
  double infp = 0;
  for (const auto& x : lat.x)
    for (const auto& xi : lat.xi) infp = std::min(infp, sym.p(x, xi));
  sym.inf_p_ = infp;
  return sym;
}

CommutatorCheckReport positive_commutator_check_O(const RenormSymbols& sym,
                                                  const CheckLattice& lattice) {
  CommutatorCheckReport rep;
  std::int64_t nx = static_cast<std::int64_t>(lattice.x.size());
  std::int64_t nxi = static_cast<std::int64_t>(lattice.xi.size());
  std::vector<double> vals(nx * nxi);
  parallel_for(nx, [&](std::int64_t ix) {
    for (std::int64_t im = 0; im < nxi; ++im)
      vals[ix * nxi + im] = check_O_point(sym, lattice.x[ix], lattice.xi[im]);
  });
  rep.worst = 1e300;
  for (std::int64_t ix = 0; ix < nx; ++ix)
    for (std::int64_t im = 0; im < nxi; ++im)
      if (vals[ix * nxi + im] < rep.worst) {
        rep.worst = vals[ix * nxi + im];
        rep.worst_x = lattice.x[ix];
        rep.worst_xi = lattice.xi[im];
      }
  auto psif = [&sym](const Vec3& xx, const Vec3& ff) { return sym.psi(xx, ff); };
  for (std::int64_t ix = 0; ix < nx; ix += std::max<std::int64_t>(1, nx / 5))
    for (std::int64_t im = 0; im < nxi; im += std::max<std::int64_t>(1, nxi / 5)) {
      double h1 = sym.H_a(psif, lattice.x[ix], lattice.xi[im]);
      double h2 = sym.H_a_analytic(psif, lattice.x[ix], lattice.xi[im]);
      double scale = std::max({1.0, std::abs(h1), std::abs(h2)});
      rep.h_a_two_route_gap = std::max(rep.h_a_two_route_gap, std::abs(h1 - h2) / scale);
    }
  return rep;
}

CommutatorCheckReport positive_commutator_check_q(const RenormSymbols& sym,
                                                  const CheckLattice& lattice) {
  CommutatorCheckReport rep;
  std::int64_t nx = static_cast<std::int64_t>(lattice.x.size());
  std::int64_t nxi = static_cast<std::int64_t>(lattice.xi.size());
  std::vector<double> vals(nx * nxi), ell(nx * nxi);
  parallel_for(nx, [&](std::int64_t ix) {
    for (std::int64_t im = 0; im < nxi; ++im)
      vals[ix * nxi + im] = check_q_point(sym, lattice.x[ix], lattice.xi[im], &ell[ix * nxi + im]);
  });
  rep.worst = 1e300;
  rep.ellipticity_margin = 1e300;
  for (std::int64_t ix = 0; ix < nx; ++ix)
    for (std::int64_t im = 0; im < nxi; ++im) {
      if (vals[ix * nxi + im] < rep.worst) {
        rep.worst = vals[ix * nxi + im];
        rep.worst_x = lattice.x[ix];
        rep.worst_xi = lattice.xi[im];
      }
      rep.ellipticity_margin = std::min(rep.ellipticity_margin, ell[ix * nxi + im]);
    }
  auto pfun = [&sym](const Vec3& xx, const Vec3& ff) { return sym.p(xx, ff); };
  for (std::int64_t ix = 0; ix < nx; ix += std::max<std::int64_t>(1, nx / 5))
    for (std::int64_t im = 0; im < nxi; im += std::max<std::int64_t>(1, nxi / 5)) {
      double h1 = sym.H_a(pfun, lattice.x[ix], lattice.xi[im]);
      double h2 = sym.H_a_analytic(pfun, lattice.x[ix], lattice.xi[im]);
      double scale = std::max({1.0, std::abs(h1), std::abs(h2)});
      rep.h_a_two_route_gap = std::max(rep.h_a_two_route_gap, std::abs(h1 - h2) / scale);
    }
  return rep;
}

AngleIdentityReport angle_identity_check(const FrozenCoefficients& frozen, double r_min,
                                         double r_max, int samples, std::uint64_t seed) {
  AngleIdentityReport rep;
  int d = frozen.metric.d;
  auto data = sample_ball_sphere(d, 1.0, samples, seed);
  for (auto& [x, xi] : data) {
    double r = vnorm(d, x);
    double target = r_min + (r_max - r_min) * (r > 0 ? std::min(r, 1.0) : 0.37);
    if (r < 1e-9)
      x[0] = target;
    else
      for (int a = 0; a < d; ++a) x[a] *= target / r;
    r = target;
    Mat3 g;
    frozen.metric.eval(x, 0.0, g);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        rep.metric_gap =
            std::max(rep.metric_gap, std::abs(g[i * 3 + j] - frozen.metric.flat[i * 3 + j]));
    Vec3 axi{};
    frozen.metric.matvec(x, 0.0, xi, axi);
    double naxi = vnorm(d, axi);
    if (naxi < 1e-12) continue;
    double h = 1e-4 * std::max(1.0, r);
    double lhs = 0;
    for (int l = 0; l < d; ++l) {
      auto f = [&](double t) {
        Vec3 xt = x;
        xt[l] += t;
        return frozen.cos_theta(xt, xi);
      };
      lhs += axi[l] * (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
    }
    double ct = frozen.cos_theta(x, xi);
    double delta = lhs / naxi - (1.0 - ct * ct) / r;
    rep.worst_r_delta = std::max(rep.worst_r_delta, std::abs(delta) * r);
  }
  return rep;
}

EtaReport eta_domination_check(const RenormSymbols& sym, const CheckLattice& lattice) {
  EtaReport rep;
  const auto& fr = sym.frozen();
  int d = fr.metric.d;
  double L = std::max(sym.params().L_2Rprime, 1e-6);
  rep.floor = 1e300;
  for (const auto& x : lattice.x) {
    if (vnorm(d, x) > sym.params().Rprime) continue;
    double ev = sym.eta(x);
    rep.floor = std::min(rep.floor, ev * L);
    Grad3 dg;
    fr.metric.grad(x, 0.0, dg);
    double gn = 0;
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) gn += sqr(dg[l * 9 + i * 3 + j]);
    gn = std::sqrt(gn);
    std::array<complexd, 3> bv, btv;
    fr.b.eval(x, bv);
    fr.btilde.eval(x, btv);
    double first = 0;
    for (int a = 0; a < d; ++a) first += std::abs(bv[a]) + std::abs(btv[a]);
    for (const auto& xi : lattice.xi) {
      double lam = vnorm(d, xi);
      double lhs = gn * lam + std::max(first * lam, std::abs(fr.B(x, xi)));
      rep.constant = std::max(rep.constant, lhs / (ev * lam));
    }
  }
  return rep;
}

bool UniformityReport::plateau_within(double factor) const {
  double lo = 1e300, hi = 0;
  for (double v : sup_O) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi <= factor * lo;
}

UniformityReport linf_uniformity_scan(const FrozenCoefficients& frozen, const RenormParams& base,
                                      const std::vector<double>& R_list) {
  UniformityReport rep;
  for (double R : R_list) {
    RenormParams p = base;
    p.R = R;
    p.Rprime = std::max(base.Rprime, 8.0 * R);
    p.K = p.Kprime = p.Kdprime = -1;
    p.L_R = -1;
    RenormSymbols sym = build_renorm(frozen, p);
    int d = frozen.metric.d;
    double sup = 0, supgx = 0, supsem = 0;
    auto lat = make_check_lattice(d, 3.5 * R, 14, d == 1 ? 1 : 10, 6, 4, d == 1 ? 1 : 8);
    for (const auto& x : lat.x)
      for (const auto& xi : lat.xi) {
        sup = std::max(sup, sym.O(x, xi));
        double lam = vnorm(d, xi);
        double hx = 1e-4, hxi = 1e-3 * (1.0 + lam);
        double gx = 0, gxi = 0;
        for (int l = 0; l < d; ++l) {
          Vec3 xp = x, xm = x;
          xp[l] += hx;
          xm[l] -= hx;
          gx += sqr((sym.O(xp, xi) - sym.O(xm, xi)) / (2 * hx));
          Vec3 fp = xi, fm = xi;
          fp[l] += hxi;
          fm[l] -= hxi;
          gxi += sqr((sym.O(x, fp) - sym.O(x, fm)) / (2 * hxi));
        }
        supgx = std::max(supgx, std::sqrt(gx));
        supsem = std::max({supsem, std::sqrt(gx), std::sqrt(1.0 + lam * lam) * std::sqrt(gxi)});
      }
    rep.R_values.push_back(R);
    rep.sup_O.push_back(sup);
    rep.sup_grad_x.push_back(supgx);
    rep.first_seminorm.push_back(supsem);
  }
  return rep;
}

GridRenorm::GridRenorm(const RenormSymbols& sym, const Grid& grid, int harmonics)
    : grid_(grid), sym_(&sym), P_(harmonics) {
  if (sym.frozen().metric.size_M != 0)
    fail(ErrorKind::dependency,
         "grid materialization requires a flat frozen metric (scale-invariant escape integrals)");
  int d = grid.dim();
  if (d == 1) {
    std::int64_t n = grid.size();
    psi_plus_.resize(n);
    psi_minus_.resize(n);
    parallel_for(n, [&](std::int64_t j) {
      Vec3 x{grid.coord(static_cast<int>(j)), 0, 0};
      psi_plus_[j] = sym.psi(x, {4.0, 0, 0});
      psi_minus_[j] = sym.psi(x, {-4.0, 0, 0});
    });
    double s = 1;
    for (std::int64_t j = 0; j < n; ++j)
      s = std::max({s, std::exp(psi_plus_[j]), std::exp(psi_minus_[j])});
    sup_O_ = s;
    return;
  }
  if (d != 2) fail(ErrorKind::structural, "grid materialization supports d = 1 or 2");
  if (sym.frozen().b.mode != VectorBump::Mode::radial && !sym.frozen().b.zero())
    fail(ErrorKind::dependency,
         "d = 2 materialization requires a rotation-covariant (radial) profile");
  int nr = 192;
  n_angles_ = 256;
  double rmax = grid.box_length() * std::sqrt(2.0) * 0.5 + grid.spacing();
  radii_.resize(nr);
  for (int i = 0; i < nr; ++i) radii_[i] = rmax * i / (nr - 1);
  kernel_.assign(static_cast<std::size_t>(nr) * n_angles_, 0.0);
  parallel_for(nr, [&](std::int64_t i) {
    for (int j = 0; j < n_angles_; ++j) {
      double dth = 2 * std::numbers::pi * j / n_angles_;
      Vec3 x{radii_[i], 0, 0};
      Vec3 xi{4.0 * std::cos(dth), -4.0 * std::sin(dth), 0};
      kernel_[i * n_angles_ + j] = sym_->psi(x, xi);
    }
  });
  double s = 1;
  for (double v : kernel_) s = std::max(s, std::exp(v));
  sup_O_ = s;
}

complexd GridRenorm::psi_tabled(std::int64_t j, const Vec3& xi) const {
  double w = cutoffs::chi_gt1(std::abs(xi[0]));
  if (w == 0.0) return 0.0;
  double base = xi[0] > 0 ? psi_plus_[j] : psi_minus_[j];
  return w * base; // tabled values carry chi_{>1} = 1
}

Field GridRenorm::apply_exp(const Field& f, double sign) const {
  const Grid& g = grid_;
  Field fh = to_frequency(f);
  if (g.dim() == 1) {
    Field low(g, Rep::frequency), hip(g, Rep::frequency), him(g, Rep::frequency);
    std::vector<std::int64_t> trans;
    for (std::int64_t m = 0; m < g.size(); ++m) {
      double xi = g.frequency(m)[0];
      double axi = std::abs(xi);
      if (axi <= 0.5)
        low[m] = fh[m];
      else if (axi >= 2.0) {
        if (xi > 0)
          hip[m] = fh[m];
        else
          him[m] = fh[m];
      } else if (fh[m] != complexd(0, 0))
        trans.push_back(m);
    }
    Field out = to_physical(low);
    Field hp = to_physical(hip), hm = to_physical(him);
    for (std::int64_t j = 0; j < g.size(); ++j)
      out[j] += std::exp(sign * psi_plus_[j]) * hp[j] + std::exp(sign * psi_minus_[j]) * hm[j];
    double scale = 1.0 / std::sqrt(static_cast<double>(g.size()));
    for (std::int64_t m : trans) {
      auto ix = g.unflatten(m);
      double parity = (ix[0] & 1) ? -1.0 : 1.0;
      complexd c = fh[m] * scale * parity;
      double xi = g.frequency(m)[0];
      for (std::int64_t j = 0; j < g.size(); ++j) {
        double x = g.coord(static_cast<int>(j));
        out[j] += std::exp(sign * psi_tabled(j, {xi, 0, 0}).real()) * std::polar(1.0, x * xi) * c;
      }
    }
    return f.rep() == Rep::frequency ? to_frequency(out) : out;
  }
  for (std::int64_t m = 0; m < g.size(); ++m) {
    if (fh[m] == complexd(0, 0)) continue;
    if (g.frequency_norm(m) < 2.0)
      fail(ErrorKind::resolution, "d = 2 materialized apply needs input supported in |xi| >= 2");
  }
  // harmonics of exp(sign G(r, .)) per table radius
  int nr = static_cast<int>(radii_.size());
  int na = n_angles_;
  std::vector<complexd> ghat(static_cast<std::size_t>(nr) * na);
  parallel_for(nr, [&](std::int64_t i) {
    std::vector<complexd> row(na);
    for (int j = 0; j < na; ++j)
      row[j] = std::exp(sign * kernel_[static_cast<std::size_t>(i) * na + j]);
    for (int p = 0; p < na; ++p) {
      complexd s(0, 0);
      for (int j = 0; j < na; ++j)
        s += row[j] * std::polar(1.0, -2 * std::numbers::pi * p * j / na);
      ghat[static_cast<std::size_t>(i) * na + p] = s / static_cast<double>(na);
    }
  });
  int half = std::min(P_, na / 2 - 1);
  Field out(g, Rep::physical);
  double rscale = (nr - 1) / radii_.back();
  // precompute polar coordinates of grid and mode angles once
  std::vector<double> thx(g.size()), rx(g.size());
  for (std::int64_t j = 0; j < g.size(); ++j) {
    auto x = g.point(j);
    thx[j] = std::atan2(x[1], x[0]);
    rx[j] = std::sqrt(x[0] * x[0] + x[1] * x[1]);
  }
  for (int p = -half; p <= half; ++p) {
    int pidx = (p % na + na) % na;
    Field part(g, Rep::frequency);
    bool any = false;
    for (std::int64_t m = 0; m < g.size(); ++m) {
      if (fh[m] == complexd(0, 0)) continue;
      auto xi = g.frequency(m);
      double th = std::atan2(xi[1], xi[0]);
      part[m] = fh[m] * std::polar(1.0, -p * th);
      any = true;
    }
    if (!any) break;
    Field pphys = to_physical(part);
    parallel_for(g.size(), [&](std::int64_t j) {
      double posn = rx[j] * rscale;
      int i0 = std::clamp(static_cast<int>(posn), 0, nr - 2);
      double t = std::clamp(posn - i0, 0.0, 1.0);
      auto at = [&](int k) {
        return ghat[static_cast<std::size_t>(std::clamp(k, 0, nr - 1)) * na + pidx];
      };
      complexd p0 = at(i0 - 1), p1 = at(i0), p2 = at(i0 + 1), p3 = at(i0 + 2);
      complexd gv = p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                                   t * (3.0 * (p1 - p2) + p3 - p0)));
      out[j] += gv * std::polar(1.0, p * thx[j]) * pphys[j];
    });
  }
  return f.rep() == Rep::frequency ? to_frequency(out) : out;
}

ApproxInverseReport approx_inverse_check(const GridRenorm& table, const Grid& grid,
                                         const std::vector<int>& shells, int trials,
                                         std::uint64_t seed) {
  ApproxInverseReport rep;
  rep.shells = shells;
  for (int k : shells) {
    double worst = 0;
    for (int t = 0; t < trials; ++t) {
      auto rng = make_rng(seed, 1000 * k + t);
      Field f = random_shell_field(grid, k, rng);
      double nf = f.l2_norm();
      if (nf <= 0) continue;
      Field around = table.apply_exp(table.apply_exp(f, +1.0), -1.0);
      worst = std::max(worst, (around - f).l2_norm() / nf);
    }
    rep.remainder_norm.push_back(worst);
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < shells.size(); ++i) {
    xs.push_back(shells[i]);
    ys.push_back(std::log2(std::max(rep.remainder_norm[i], 1e-300)));
  }
  rep.slope = fit_slope(xs, ys);
  int ktop = shells.back();
  double c0 = 0;
  for (int t = 0; t < trials; ++t) {
    auto rng = make_rng(seed, 777 + t);
    Field f = random_shell_field(grid, ktop, rng);
    double nf = f.l2_norm();
    if (nf <= 0) continue;
    double no = table.apply_exp(f, +1.0).l2_norm();
    if (no > 0) c0 = std::max(c0, nf / no);
  }
  rep.inverse_constant = c0;
  return rep;
}

} // namespace uhs
