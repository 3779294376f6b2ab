#include <doctest.h>

#include "uhs/cutoffs.hpp"
#include "uhs/lp.hpp"
#include "uhs/probes.hpp"

using namespace uhs;

namespace {

// smooth compactly supported coefficient for x-dependent symbols
complexd smooth_bump(const Vec3& x, double r0 = 2.0) {
  double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  return cutoffs::chi_below(r, r0);
}

double jap(const Vec3& xi, int d) {
  double s = 1;
  for (int a = 0; a < d; ++a) s += xi[a] * xi[a];
  return std::sqrt(s);
}

} // namespace

TEST_CASE("quantization oracles: identity, derivative, multiplication") {
  Grid g(2, 64, 16.0);
  auto rng = make_rng(2, 0);
  Field f = random_bandlimited_field(g, rng, 0.4);

  Symbol one = Symbol::multiplier(2, 0, [](const Vec3&) { return complexd(1, 0); });
  Field idf = quantize_apply(one, f);
  double dev = 0;
  for (std::int64_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(idf[i] - f[i]));
  CHECK(dev <= 1e-10 * std::max(1.0, f.max_abs()));

  // a = i xi_1 applied to sin(w x1) gives w cos(w x1)
  double w = 2 * std::numbers::pi / g.box_length() * 4;
  Field s(g, Rep::physical);
  for (std::int64_t i = 0; i < g.size(); ++i) s[i] = std::sin(w * g.point(i)[0]);
  Symbol dx1 = Symbol::multiplier(2, 1, [](const Vec3& xi) { return complexd(0, xi[0]); });
  Field ds = quantize_apply(dx1, s);
  dev = 0;
  for (std::int64_t i = 0; i < g.size(); ++i)
    dev = std::max(dev, std::abs(ds[i] - w * std::cos(w * g.point(i)[0])));
  CHECK(dev <= 1e-10 * w);

  Symbol mult = Symbol::multiplication(2, [](const Vec3& x) { return smooth_bump(x); });
  Field mf = quantize_apply(mult, f);
  dev = 0;
  for (std::int64_t i = 0; i < g.size(); ++i)
    dev = std::max(dev, std::abs(mf[i] - smooth_bump(g.point(i)) * f[i]));
  CHECK(dev <= 1e-12 * std::max(1.0, f.max_abs()));
}

TEST_CASE("general quantization path agrees with the separable fast path") {
  Grid g(1, 256, 16.0);
  auto rng = make_rng(3, 0);
  Field f = random_bandlimited_field(g, rng, 0.4);
  auto fx = [](const Vec3& x) { return smooth_bump(x, 3.0); };
  auto fxi = [](const Vec3& xi) { return complexd(1.0 / jap(xi, 1), 0); };
  Symbol sep = Symbol::separable(1, 0, {{fx, fxi}});
  Symbol gen(1, 0, [&](const Vec3& x, const Vec3& xi) { return fx(x) * fxi(xi); });
  Field a = quantize_apply(sep, f);
  Field b = quantize_apply(gen, f);
  double dev = 0;
  for (std::int64_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
  CHECK(dev <= 1e-11 * std::max(1.0, a.max_abs()));
}

TEST_CASE("quantization is linear and guards aliasing") {
  Grid g(1, 256, 16.0);
  auto rng = make_rng(4, 0);
  Field f = random_bandlimited_field(g, rng, 0.4);
  Field h = random_bandlimited_field(g, rng, 0.4);
  Symbol a(1, 0, [](const Vec3& x, const Vec3& xi) {
    return smooth_bump(x) * complexd(0, xi[0] / jap(xi, 1));
  });
  Field lhs = quantize_apply(a, f + h);
  Field rhs = quantize_apply(a, f) + quantize_apply(a, h);
  double dev = 0;
  for (std::int64_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(lhs[i] - rhs[i]));
  CHECK(dev <= 1e-12 * std::max(1.0, lhs.max_abs()));

  // aliasing guard: a pure mode just above Nyquist/2 is refused
  Field bad(g, Rep::frequency);
  bad[3 * g.points_per_axis() / 8] = 1.0; // mode at 0.75 * Nyquist
  Field badp = to_physical(bad);
  CHECK_THROWS_AS(quantize_apply(a, badp), Error);
}

TEST_CASE("adjoint pairing identity") {
  Grid g(1, 128, 16.0);
  auto rng = make_rng(5, 0);
  Field f = random_bandlimited_field(g, rng, 0.4);
  Field h = random_bandlimited_field(g, rng, 0.4);
  Symbol a(1, 0, [](const Vec3& x, const Vec3& xi) {
    return smooth_bump(x) * (0.3 + complexd(0, xi[0]) / jap(xi, 1));
  });
  complexd p1 = inner(quantize_apply(a, f), h);
  complexd p2 = inner(f, quantize_adjoint_apply(a, h));
  CHECK(std::abs(p1 - p2) <= 1e-10 * (1 + std::abs(p1)));
}

TEST_CASE("symbol seminorms") {
  ProbeLattice lat = make_probe_lattice(1, 4.0, 17, 0.5, 64.0, 9, 4);
  Symbol one = Symbol::multiplier(1, 0, [](const Vec3&) { return complexd(1, 0); });
  CHECK(seminorm(one, 0, 0, lat) == doctest::Approx(1.0));
  Symbol bracket = Symbol::multiplier(1, 1, [](const Vec3& xi) { return complexd(jap(xi, 1), 0); });
  CHECK(seminorm(bracket, 1, 0, lat) == doctest::Approx(1.0).epsilon(1e-6));
  // misdeclared order: i xi with m = 0 diverges as the probe radius grows
  Symbol mis = Symbol::multiplier(1, 0, [](const Vec3& xi) { return complexd(0, xi[0]); });
  ProbeLattice small = make_probe_lattice(1, 1.0, 3, 0.5, 8.0, 5, 2);
  ProbeLattice big = make_probe_lattice(1, 1.0, 3, 0.5, 512.0, 9, 2);
  CHECK(seminorm(mis, 0, 0, big) > 16 * seminorm(mis, 0, 0, small));
}

TEST_CASE("operator norm estimates") {
  Grid g(1, 256, 16.0);
  SUBCASE("identity") {
    double n = operator_norm([](const Field& f) { return f; },
                             [&](std::mt19937_64& rng) { return random_bandlimited_field(g, rng); },
                             8, 11);
    CHECK(n == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("shell projection has norm one on shell fields") {
    int k = 4;
    double n = operator_norm([k](const Field& f) { return project(f, k); },
                             [&](std::mt19937_64& rng) { return random_shell_field(g, k, rng); },
                             8, 12);
    CHECK(n == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("derivative multiplier on a shell scales like 2^k") {
    int k = 5;
    Symbol dx1 = Symbol::multiplier(1, 1, [](const Vec3& xi) { return complexd(0, xi[0]); });
    double n = operator_norm([&](const Field& f) { return quantize_apply(dx1, f); },
                             [&](std::mt19937_64& rng) { return random_shell_field(g, k, rng); },
                             8, 13);
    CHECK(n >= std::ldexp(1.0, k - 1));
    CHECK(n <= 1.5 * std::ldexp(1.0, k + 1));
  }
  SUBCASE("trial floor enforced") {
    CHECK_THROWS_AS(operator_norm([](const Field& f) { return f; },
                                  [&](std::mt19937_64& rng) { return random_bandlimited_field(g, rng); },
                                  4, 1),
                    Error);
  }
}

TEST_CASE("multipliers commute with shell projections exactly") {
  Grid g(1, 256, 16.0);
  auto rng = make_rng(6, 0);
  Field f = random_bandlimited_field(g, rng, 0.4);
  Symbol mult = Symbol::multiplier(1, 0, [](const Vec3& xi) { return complexd(1.0 / jap(xi, 1), 0); });
  Field a = project(quantize_apply(mult, f), 4);
  Field b = quantize_apply(mult, project(f, 4));
  double dev = 0;
  for (std::int64_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
  CHECK(dev <= 1e-12 * std::max(1.0, f.max_abs()));
}

TEST_CASE("garding probe") {
  Grid g(1, 512, 16.0);
  ProbeLattice lat = make_probe_lattice(1, 6.0, 13, 0.25, 128.0, 9, 2);
  SUBCASE("elliptic first-order multiplier stays bounded below while the form grows") {
    Symbol a = Symbol::multiplier(1, 1, [](const Vec3& xi) {
      double r = std::abs(xi[0]);
      return complexd(r * cutoffs::chi_gt1(r), 0);
    });
    auto rep = garding_probe(a, g, 2.0, lat, 8, 21);
    CHECK(rep.worst_constant >= -1e-10);
    // the diagonal form on shell k grows like 2^k
    CHECK(rep.per_shell.back().second > rep.per_shell.front().second);
  }
  SUBCASE("nonnegative multiplication symbol is semi-positive") {
    Symbol a = Symbol::multiplication(1, [](const Vec3& x) { return smooth_bump(x); });
    auto rep = garding_probe(a, g, 0.0, lat, 8, 22);
    CHECK(rep.worst_constant >= -1e-10);
  }
  SUBCASE("negativity precondition is enforced") {
    Symbol a = Symbol::multiplier(1, 1, [](const Vec3& xi) { return complexd(-std::abs(xi[0]), 0); });
    CHECK_THROWS_AS(garding_probe(a, g, 1.0, lat, 8, 23), Error);
  }
  SUBCASE("matrix symbol with bounded off-diagonal part") {
    MatrixSymbol a;
    a.entry[0] = Symbol::multiplier(1, 1, [](const Vec3& xi) { return complexd(std::abs(xi[0]), 0); });
    a.entry[3] = a.entry[0];
    a.entry[1] = Symbol::multiplication(1, [](const Vec3& x) { return 0.5 * smooth_bump(x); });
    a.entry[2] = a.entry[1];
    auto rep = garding_probe_matrix(a, g, 8, 24);
    CHECK(rep.worst_constant >= -1.0); // finite, order one
  }
}

TEST_CASE("poisson bracket identities") {
  Symbol dx1 = Symbol::multiplier(2, 1, [](const Vec3& xi) { return complexd(0, xi[0]); });
  Symbol mx = Symbol::multiplication(2, [](const Vec3& x) { return smooth_bump(x); });
  Symbol pb = poisson_bracket(dx1, mx);
  // {i xi_1, m(x)} = i d_1 m
  Vec3 x{0.9, 0.4, 0}, xi{1.3, -0.2, 0};
  complexd lhs = pb(x, xi);
  complexd rhs = complexd(0, 1) * mx.dx(x, xi, 0, 1e-4);
  CHECK(std::abs(lhs - rhs) <= 1e-6);
  // antisymmetry: {a, a} = 0
  Symbol self(2, 1, [](const Vec3& x_, const Vec3& xi_) {
    return smooth_bump(x_) * complexd(xi_[0], xi_[1]);
  });
  Symbol zero = poisson_bracket(self, self);
  CHECK(std::abs(zero(x, xi)) <= 1e-8);
}

TEST_CASE("poisson bracket of the principal symbol with the bracket weight") {
  // {a, <xi>^s} <xi>^{-s} cross-checked against finite differences
  Metric m = bump_metric(2, Signature::elliptic, 0.3, 1.0);
  double s = 2.0;
  Symbol principal(2, 2, [&m](const Vec3& x, const Vec3& xi) {
    return complexd(m.principal(x, 0.0, xi), 0);
  });
  Symbol weight = Symbol::multiplier(2, s, [s](const Vec3& xi) {
    return complexd(std::pow(jap(xi, 2), s), 0);
  });
  Symbol pb = poisson_bracket(principal, weight);
  // closed form: {a, <xi>^s} = -grad_x a . grad_xi <xi>^s
  //            = (d_l g^{ij} xi_i xi_j) * s <xi>^{s-2} xi_l
  Vec3 x{0.5, -0.3, 0}, xi{1.2, 0.7, 0};
  Grad3 dg;
  m.grad(x, 0.0, dg);
  double sum = 0;
  for (int l = 0; l < 2; ++l) {
    double q = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) q += dg[l * 9 + i * 3 + j] * xi[i] * xi[j];
    sum += q * s * std::pow(jap(xi, 2), s - 2) * xi[l];
  }
  CHECK(pb(x, xi).real() == doctest::Approx(sum).epsilon(1e-6));
}

TEST_CASE("calculus remainders vanish for commuting multipliers") {
  Grid g(1, 256, 16.0);
  Symbol m1 = Symbol::multiplier(1, 0, [](const Vec3& xi) { return complexd(1.0 / jap(xi, 1), 0); });
  Symbol m2 = Symbol::multiplier(1, 1, [](const Vec3& xi) { return complexd(0, xi[0]); });
  auto rep = calculus_remainder_probe(m1, m2, g, {3, 4, 5}, 8, 31);
  for (double v : rep.composition) CHECK(v <= 1e-10);
  for (double v : rep.adjoint) CHECK(v <= 1e-10);
  for (double v : rep.commutator) CHECK(v <= 1e-10);
}

TEST_CASE("composition remainder of (i xi, m(x)) is flat in the shell") {
  Grid g(1, 1024, 16.0);
  Symbol a1 = Symbol::multiplier(1, 1, [](const Vec3& xi) { return complexd(0, xi[0]); });
  Symbol a2 = Symbol::multiplication(1, [](const Vec3& x) { return smooth_bump(x); });
  auto rep = calculus_remainder_probe(a1, a2, g, {3, 4, 5, 6}, 8, 37);
  // remainder = Op(d_1 m . lower order): order 0 = flat curve
  CHECK(std::abs(rep.slope_composition) <= 0.3);
}

TEST_CASE("coifman-meyer commutator stays bounded over shells") {
  Grid g(1, 1024, 32.0);
  Field coeff = sample(g, [](const std::array<double, 3>& x) {
    return smooth_bump({x[0], 0, 0}, 3.0);
  });
  for (double m : {0.0, 1.0}) {
    auto rep = coifman_meyer_probe(coeff, m, g, {4, 5, 6, 7}, 8, 41);
    double lo = 1e300, hi = 0;
    for (double v : rep.measured) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi < 2.0);  // normalized curve stays order one
  }
}
