#include <doctest.h>

#include "uhs/cutoffs.hpp"
#include "uhs/renorm.hpp"

using namespace uhs;

namespace {

// shared small geometry: R = 8, R' = 64, effective coefficient support ~ 1
RenormParams small_params() {
  RenormParams p;
  p.R = 8;
  p.Rprime = 64;
  p.k0 = 7;
  p.k1 = 15;
  p.sigma = 2.0;
  return p;
}

VectorBump gauss_b(int d, complexd amp, double w = 0.11) {
  VectorBump b;
  b.d = d;
  b.amplitude[0] = amp;
  b.gauss_width = w;
  return b;
}

VectorBump no_b(int d) {
  VectorBump b;
  b.d = d;
  return b;
}

Grid ref_grid(int d) { return d == 1 ? Grid(1, 4096, 12.0) : Grid(2, 512, 12.0); }

} // namespace

TEST_CASE("freeze verifies band concentration and certifies nontrapping") {
  RenormParams p = small_params();
  Metric m = flat_metric(2, Signature::elliptic);
  auto fr = freeze_coefficients(m, gauss_b(2, 0.4), no_b(2), p, ref_grid(2));
  CHECK(fr.truncation_residual <= 1e-6);
  CHECK(!fr.certificate.trapped());
  CHECK(p.L_R > 0);
  CHECK(p.L_2Rprime > 0);
  // a chi-profile bump of the same size is not band-concentrated below 2^k0
  RenormParams p2 = small_params();
  VectorBump rough;
  rough.d = 2;
  rough.amplitude[0] = 0.4;
  rough.radius = 0.6;
  CHECK_THROWS_AS(freeze_coefficients(m, rough, no_b(2), p2, ref_grid(2)), Error);
}

TEST_CASE("psi1 matches the straight-line quadrature oracle") {
  RenormParams p = small_params();
  Metric m = flat_metric(2, Signature::elliptic);
  VectorBump b = gauss_b(2, complexd(0.5, 0.2)); // only Re enters B
  auto fr = freeze_coefficients(m, b, no_b(2), p, ref_grid(2));
  RenormParams pc = p;
  pc.K = pc.Kq = 1;
  pc.Kprime = pc.Kprime_q = 1;
  pc.Kdprime = pc.Kdprime_q = 1;
  pc.CM = 1;
  RenormSymbols sym(fr, pc);
  Vec3 x{0.7, -0.4, 0};
  for (double ang : {0.3, 1.9}) {
    for (double lam : {4.0, 64.0}) {
      Vec3 xi{lam * std::cos(ang), lam * std::sin(ang), 0};
      double got = sym.psi1(x, xi);
      // oracle: -1/2 [ sum over both signs of int_0^inf Re b(x + 2 sgn omega s) . sgn omega ds ]
      Vec3 om{std::cos(ang), std::sin(ang), 0};
      auto half_line = [&](int sgn) {
        double acc = 0;
        int nq = 40000;
        double smax = 10.0, h = smax / nq;
        for (int i = 0; i <= nq; ++i) {
          double s = i * h;
          Vec3 pos{x[0] + 2 * sgn * om[0] * s, x[1] + 2 * sgn * om[1] * s, 0};
          std::array<complexd, 3> bv;
          fr.b.eval(pos, bv);
          double w = (i == 0 || i == nq) ? 0.5 : 1.0;
          double cut = cutoffs::chi_below(std::sqrt(pos[0] * pos[0] + pos[1] * pos[1]), 4 * p.R);
          acc += w * h * cut * (bv[0].real() * om[0] * sgn + bv[1].real() * om[1] * sgn);
        }
        return acc;
      };
      double oracle = -0.5 * (half_line(+1) + half_line(-1)) * cutoffs::chi_gt1(lam) *
                      cutoffs::chi_below(std::sqrt(x[0] * x[0] + x[1] * x[1]), 2 * p.R);
      CHECK(got == doctest::Approx(oracle).epsilon(1e-6));
      // evenness in xi
      Vec3 mxi{-xi[0], -xi[1], 0};
      CHECK(sym.psi1(x, mxi) == doctest::Approx(got).epsilon(1e-9));
    }
  }
  // support: psi1 vanishes beyond the chi_{<2R} cutoff
  CHECK(sym.psi1({4.0 * p.R, 0, 0}, {4, 0, 0}) == 0.0);
  CHECK(sym.psi1({3.1 * p.R, 0, 0}, {4, 0, 0}) == 0.0);
}

TEST_CASE("backward rays: the flow direction convention") {
  // for g = I, dx/dt = -2 xi; the backward ray from (x, omega) moves along
  // +omega, so psi1's integrand sees the half line x + 2 omega s.  A bump
  // displaced along +e1 must therefore be seen by omega = +e1 at the origin.
  RenormParams p = small_params();
  Metric m = flat_metric(2, Signature::elliptic);
  VectorBump b = gauss_b(2, 0.5);
  b.center = {0.6, 0, 0};
  auto fr = freeze_coefficients(m, b, no_b(2), p, ref_grid(2));
  RenormParams pc = p;
  pc.K = pc.Kq = pc.Kprime = pc.Kprime_q = pc.Kdprime = pc.Kdprime_q = pc.CM = 1;
  RenormSymbols sym(fr, pc);
  double with = std::abs(sym.psi1({0, 0, 0}, {4, 0, 0}));
  CHECK(with > 1e-3); // the symmetrized integral sees it either way
}

TEST_CASE("zero coefficients give the trivial family") {
  RenormParams p = small_params();
  Metric m = flat_metric(2, Signature::ultrahyperbolic);
  auto fr = freeze_coefficients(m, no_b(2), no_b(2), p, ref_grid(2));
  RenormSymbols sym = build_renorm(fr, p);
  for (double r : {0.0, 3.0, 20.0})
    for (double lam : {4.0, 256.0}) {
      Vec3 x{r, 0.3 * r, 0}, xi{0.6 * lam, -0.8 * lam, 0};
      CHECK(sym.psi1(x, xi) == 0.0);
      CHECK(sym.O(x, xi) == doctest::Approx(std::exp(sym.psi2(x, xi))).epsilon(1e-12));
      CHECK(sym.r_O(x, xi) ==
            doctest::Approx(sym.params().Kdprime * cutoffs::chi_below(lam, 2.0)));
    }
  // eta floor: chi_{<2R'} L(2R')^{-1}
  double ev = sym.eta({3.0, 0, 0});
  CHECK(ev == doctest::Approx(1.0 / sym.params().L_2Rprime).epsilon(1e-9));
  CHECK(sym.eta({4.0 * p.Rprime, 0, 0}) == 0.0);
}

TEST_CASE("psi2 plateaus, vanishing core and continuity") {
  RenormParams p = small_params();
  p.K = p.Kq = 1.0;
  p.Kprime = p.Kprime_q = 3.0;
  p.Kdprime = p.Kdprime_q = 24.0;
  p.CM = 8.0;
  Metric m = flat_metric(2, Signature::elliptic);
  auto fr = freeze_coefficients(m, gauss_b(2, 0.3), no_b(2), p, ref_grid(2));
  RenormSymbols sym(fr, p);
  double R = p.R;
  // cos(theta) < -1/2 - delta0 and r >= 3R: psi2 = K'
  {
    Vec3 x{3.5 * R, 0, 0};
    Vec3 xi{-4.0, 0, 0}; // cos(theta) = -1
    CHECK(sym.psi2(x, xi) == doctest::Approx(p.Kprime).epsilon(1e-12));
  }
  // r <= R/8: psi2 = 0 on every branch
  for (double ang : {0.0, 0.7, 2.5})
    CHECK(sym.psi2({R / 8 * 0.9, 0, 0}, {4 * std::cos(ang), 4 * std::sin(ang), 0}) == 0.0);
  // continuity scan across the angular transition at fixed r = 2R
  double worst_jump = 0, prev = 0;
  bool first = true;
  for (int i = 0; i <= 400; ++i) {
    double th = std::numbers::pi * i / 400;
    Vec3 x{2 * R, 0, 0}, xi{4 * std::cos(th), 4 * std::sin(th), 0};
    double v = sym.psi2(x, xi);
    if (!first) worst_jump = std::max(worst_jump, std::abs(v - prev));
    prev = v;
    first = false;
  }
  CHECK(worst_jump <= p.Kprime * 0.2);
}

TEST_CASE("angle identity") {
  SUBCASE("flat elliptic: delta vanishes to differencing error") {
    RenormParams p = small_params();
    Metric m = flat_metric(2, Signature::elliptic);
    auto fr = freeze_coefficients(m, no_b(2), no_b(2), p, ref_grid(2));
    auto rep = angle_identity_check(fr, p.R / 8, 4 * p.R, 128, 3);
    CHECK(rep.worst_r_delta <= 1e-8);
  }
  SUBCASE("flat ultrahyperbolic: beta = 0, residual tiny") {
    RenormParams p = small_params();
    Metric m = flat_metric(2, Signature::ultrahyperbolic);
    auto fr = freeze_coefficients(m, no_b(2), no_b(2), p, ref_grid(2));
    auto rep = angle_identity_check(fr, p.R / 8, 4 * p.R, 128, 3);
    CHECK(rep.worst_r_delta <= 1e-8);
  }
  SUBCASE("small bump: r |delta| controlled by the metric gap") {
    RenormParams p = small_params();
    Metric m = gaussian_bump_metric(2, Signature::elliptic, 0.1, 0.11);
    auto fr = freeze_coefficients(m, no_b(2), no_b(2), p, ref_grid(2));
    auto rep = angle_identity_check(fr, p.R / 8, 4 * p.R, 128, 3);
    CHECK(rep.worst_r_delta <= 10.0 * 0.1);
  }
}

TEST_CASE("built O is positive, bounded, even inside the core ball") {
  RenormParams p = small_params();
  Metric m = gaussian_bump_metric(2, Signature::elliptic, 0.15, 0.11);
  auto fr = freeze_coefficients(m, gauss_b(2, 0.4), no_b(2), p, ref_grid(2));
  RenormSymbols sym = build_renorm(fr, p);
  double sup_psi1 = 0;
  auto data = sample_ball_sphere(2, 3 * p.R, 48, 9);
  for (const auto& [x, om] : data) {
    Vec3 xi{4 * om[0], 4 * om[1], 0};
    sup_psi1 = std::max(sup_psi1, std::abs(sym.psi1(x, xi)));
    CHECK(sym.O(x, xi) > 0);
  }
  double bound = std::exp(sup_psi1 + 2 * sym.params().Kprime);
  for (const auto& [x, om] : data) {
    Vec3 xi{4 * om[0], 4 * om[1], 0};
    CHECK(sym.O(x, xi) <= bound * (1 + 1e-9));
  }
  double worst = 0;
  for (const auto& [x0, om] : data) {
    Vec3 x = x0;
    for (int a = 0; a < 2; ++a) x[a] *= (p.R / 8) / (3.0 * p.R) * 0.9;
    Vec3 xi{4 * om[0], 4 * om[1], 0}, mxi{-xi[0], -xi[1], 0};
    worst = std::max(worst, std::abs(sym.O(x, xi) - sym.O(x, mxi)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("positive commutator for O") {
  Metric m = flat_metric(2, Signature::elliptic);
  CheckLattice lat = make_check_lattice(2, 3.2 * 64.0, 12, 8, 15, 4, 8);
  SUBCASE("coefficient-free flat case reduces to the cushion") {
    RenormParams p0 = small_params();
    auto fr0 = freeze_coefficients(m, no_b(2), no_b(2), p0, ref_grid(2));
    RenormSymbols sym = build_renorm(fr0, p0);
    auto rep = positive_commutator_check_O(sym, lat);
    CHECK(rep.pass());
  }
  SUBCASE("bump coefficients pass at the stated tolerance") {
    RenormParams p = small_params();
    auto fr = freeze_coefficients(m, gauss_b(2, 0.4), no_b(2), p, ref_grid(2));
    RenormSymbols sym = build_renorm(fr, p);
    auto rep = positive_commutator_check_O(sym, lat);
    CHECK(rep.worst >= -1e-3);
    CHECK(rep.h_a_two_route_gap <= 1e-4);
  }
  SUBCASE("sabotage K' = 0 fails in the transition region") {
    RenormParams ps = small_params();
    ps.K = ps.Kq = 1.0;
    ps.Kprime = ps.Kdprime = 0.0;
    ps.Kprime_q = ps.Kdprime_q = 0.0;
    auto frs = freeze_coefficients(m, gauss_b(2, 0.4), no_b(2), ps, ref_grid(2));
    RenormSymbols sym = build_renorm(frs, ps, false);
    auto rep = positive_commutator_check_O(sym, lat);
    CHECK(rep.worst < -1e-3);
  }
}

TEST_CASE("eta domination and q family") {
  RenormParams p = small_params();
  Metric m = gaussian_bump_metric(2, Signature::elliptic, 0.15, 0.11);
  auto fr = freeze_coefficients(m, gauss_b(2, 0.4), gauss_b(2, complexd(0.0, 0.3)), p, ref_grid(2));
  RenormSymbols sym = build_renorm(fr, p);
  CheckLattice lat = make_check_lattice(2, 3.2 * p.Rprime, 12, 8, p.k1, 4, 8);
  SUBCASE("eta dominates the first-order symbols") {
    auto rep = eta_domination_check(sym, lat);
    CHECK(rep.constant <= 8.0);
    CHECK(rep.floor >= 0.99);
  }
  SUBCASE("q >= 1 everywhere and constant on the far outgoing plateau") {
    for (const auto& x : lat.x)
      for (const auto& xi : lat.xi) CHECK(sym.log_q(x, xi) >= -1e-9);
    Vec3 x1{4.0 * p.Rprime, 0, 0};
    Vec3 out1{-4.0, 0, 0}, out2{-256.0, 0, 0};
    double q1 = sym.log_q(x1, out1);
    CHECK(sym.log_q(x1, out2) == doctest::Approx(q1).epsilon(1e-12));
    Vec3 x2{5.0 * p.Rprime, 1.0, 0};
    Vec3 out3{-x2[0], -x2[1], 0};
    for (int a = 0; a < 2; ++a) out3[a] *= 4.0 / (5.0 * p.Rprime);
    CHECK(sym.log_q(x2, out3) == doctest::Approx(q1).epsilon(1e-6));
  }
  SUBCASE("transport identity for p1 in the flat coefficient-free interior") {
    RenormParams p0 = small_params();
    Metric m0 = flat_metric(2, Signature::elliptic);
    auto fr0 = freeze_coefficients(m0, no_b(2), no_b(2), p0, ref_grid(2));
    RenormSymbols sym0 = build_renorm(fr0, p0);
    auto p1f = [&sym0](const Vec3& xx, const Vec3& ff) { return sym0.p1(xx, ff); };
    for (const auto& [x, om] : sample_ball_sphere(2, 0.5 * p0.Rprime, 16, 4)) {
      Vec3 xi{8 * om[0], 8 * om[1], 0};
      double lhs = sym0.H_a(p1f, x, xi);
      double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
      double rhs = (cutoffs::chi_below(r, 2 * p0.R) + sym0.eta(x)) * 8.0;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }
  }
  SUBCASE("positive commutator for q with ellipticity") {
    auto rep = positive_commutator_check_q(sym, lat);
    CHECK(rep.worst >= -1e-3);
    CHECK(rep.ellipticity_margin >= 0.99);
    CHECK(rep.h_a_two_route_gap <= 1e-4);
  }
  SUBCASE("sabotage K' = 0 fails the q inequality") {
    RenormParams ps = small_params();
    ps.K = ps.Kq = 1.0;
    ps.Kprime = ps.Kdprime = 0.0;
    ps.Kprime_q = ps.Kdprime_q = 0.0;
    auto frs =
        freeze_coefficients(m, gauss_b(2, 0.4), gauss_b(2, complexd(0.0, 0.3)), ps, ref_grid(2));
    RenormSymbols syms = build_renorm(frs, ps, false);
    auto rep = positive_commutator_check_q(syms, lat);
    CHECK(rep.worst < -1e-3);
  }
}

TEST_CASE("escape integral plateau across R'") {
  RenormParams p = small_params();
  Metric m = flat_metric(2, Signature::elliptic);
  double sup_prev = -1;
  for (double rp : {64.0, 128.0}) {
    RenormParams pp = p;
    pp.Rprime = rp;
    pp.L_2Rprime = -1;
    pp.t_cap = -1;
    auto frp = freeze_coefficients(m, gauss_b(2, 0.4), no_b(2), pp, ref_grid(2));
    RenormSymbols sym = build_renorm(frp, pp);
    double sup = 0;
    for (const auto& [x, om] : sample_ball_sphere(2, 2.0 * p.R, 32, 7)) {
      Vec3 xi{4 * om[0], 4 * om[1], 0};
      sup = std::max(sup, std::abs(sym.p1(x, xi)));
    }
    if (sup_prev > 0) {
      CHECK(sup <= 2.0 * sup_prev);
      CHECK(sup >= 0.5 * sup_prev);
    }
    sup_prev = sup;
  }
}

TEST_CASE("grid materialization agrees with the dense quantizer (d = 1)") {
  RenormParams p = small_params();
  Metric m = flat_metric(1, Signature::elliptic);
  VectorBump b = gauss_b(1, 0.5, 0.11);
  auto fr = freeze_coefficients(m, b, no_b(1), p, ref_grid(1));
  RenormSymbols sym = build_renorm(fr, p);
  Grid g(1, 2048, 64.0);
  GridRenorm table(sym, g);
  CHECK(table.sup_O() >= 1.0);
  auto rng = make_rng(17, 0);
  Field f = random_shell_field(g, 4, rng);
  Field fast = table.apply_exp(f, +1.0);
  Symbol dense = sym.O_symbol();
  Field slow = quantize_apply(dense, f);
  double dev = 0, scale = std::max(1e-30, slow.max_abs());
  for (std::int64_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(fast[i] - slow[i]));
  CHECK(dev <= 1e-8 * scale);
}

TEST_CASE("approximate inverse has unit slope decay (small case)") {
  RenormParams p = small_params();
  Metric m = flat_metric(1, Signature::elliptic);
  auto fr = freeze_coefficients(m, gauss_b(1, 0.5, 0.11), no_b(1), p, ref_grid(1));
  RenormSymbols sym = build_renorm(fr, p);
  Grid g(1, 4096, 64.0);
  GridRenorm table(sym, g);
  auto rep = approx_inverse_check(table, g, {4, 5, 6}, 8, 5);
  CHECK(rep.pass(0.45)); // short shell range here; acceptance runs 4..9
  CHECK(rep.inverse_constant < 10.0);
  // psi = 0 gives a zero remainder
  RenormParams pz = small_params();
  pz.Kprime = 0;
  pz.Kdprime = 0;
  auto fr0 = freeze_coefficients(m, no_b(1), no_b(1), pz, ref_grid(1));
  RenormSymbols symz = build_renorm(fr0, pz, false);
  GridRenorm tz(symz, g);
  auto rng = make_rng(21, 0);
  Field f = random_shell_field(g, 5, rng);
  Field around = tz.apply_exp(tz.apply_exp(f, 1.0), -1.0);
  CHECK((around - f).l2_norm() <= 1e-10 * f.l2_norm());
}
