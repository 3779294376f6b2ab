#include <doctest.h>

#include "uhs/cutoffs.hpp"
#include "uhs/norms.hpp"
#include "uhs/quantize.hpp"

using namespace uhs;

namespace {

Field single_mode(const Grid& g, const std::array<int, 3>& mode) {
  Field f(g, Rep::physical);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    auto x = g.point(i);
    double phase = 0;
    for (int a = 0; a < g.dim(); ++a) phase += g.freq(mode[a]) * x[a];
    f[i] = std::polar(1.0, phase);
  }
  return f;
}

} // namespace

TEST_CASE("shell partition of unity on the lattice") {
  Grid g(2, 64, 16.0);
  int top = lp::top_shell(g);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double r = g.frequency_norm(i);
    double s = 0;
    for (int k = 0; k <= top; ++k) s += lp::shell(r, k);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("shell supports are 2-separated") {
  Grid g(2, 64, 16.0);
  int top = lp::top_shell(g);
  for (int k = 0; k <= top; ++k)
    for (int j = k + 2; j <= top; ++j)
      for (double r = 0.01; r < g.nyquist() * 2; r *= 1.1)
        CHECK(lp::shell(r, k) * lp::shell(r, j) == 0.0);
}

TEST_CASE("projection reproduces single modes and sums back") {
  Grid g(2, 64, 16.0);
  auto rng = make_rng(3, 0);
  Field u = random_bandlimited_field(g, rng);
  int top = lp::top_shell(g);
  Field sum(g, Rep::physical);
  for (int k = 0; k <= top; ++k) sum += project(u, k);
  double worst = 0;
  for (std::int64_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(sum[i] - u[i]));
  CHECK(worst <= 1e-12 * std::max(1.0, u.max_abs()));

  // single mode in the interior plateau of a shell passes through S_k
  // |xi| = 2^k with my shells means base(k) = 1, base(k-1) = 0 there
  std::array<int, 3> mode{0, 0, 0};
  int k_target = 3;
  double want = std::ldexp(1.0, k_target) * 0.9; // inside the shell plateau [0.75, 1] * 2^k
  int m = static_cast<int>(std::round(want * g.box_length() / (2 * std::numbers::pi)));
  mode[0] = m;
  Field w = single_mode(g, mode);
  Field wk = project(w, k_target);
  double dev = 0;
  for (std::int64_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(wk[i] - w[i]));
  CHECK(dev <= 1e-10);
  CHECK_THROWS_AS(project(w, 30), Error);
}

TEST_CASE("S_k S_j annihilate for separated shells on random fields") {
  Grid g(2, 64, 16.0);
  auto rng = make_rng(5, 0);
  Field u = random_bandlimited_field(g, rng);
  Field a = project(project(u, 4), 2);
  CHECK(a.l2_norm() <= 1e-13 * u.l2_norm());
}

TEST_CASE("Bony decomposition is exact") {
  Grid g(2, 64, 16.0);
  for (int trial = 0; trial < 4; ++trial) {
    auto rng = make_rng(100 + trial, 0);
    Field f = random_bandlimited_field(g, rng);
    Field h = random_bandlimited_field(g, rng);
    Field lhs = paraproduct(h, f) + paraproduct(f, h) + balanced_part(f, h);
    Field rhs = hadamard(f, h);
    double scale = std::max(1.0, rhs.max_abs());
    double worst = 0;
    for (std::int64_t i = 0; i < g.size(); ++i)
      worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
    CHECK(worst <= 1e-12 * scale);
  }
}

TEST_CASE("paraproduct with constant low factor is a tail projection") {
  Grid g(2, 64, 16.0);
  auto rng = make_rng(7, 0);
  Field f = random_bandlimited_field(g, rng);
  Field one(g, Rep::physical);
  for (std::int64_t i = 0; i < g.size(); ++i) one[i] = 1.0;
  Field tf = paraproduct(one, f);
  Field expected = project_above(f, lp::paraproduct_gap + 1);
  double worst = 0;
  for (std::int64_t i = 0; i < g.size(); ++i)
    worst = std::max(worst, std::abs(tf[i] - expected[i]));
  CHECK(worst <= 1e-12 * std::max(1.0, f.max_abs()));
}

TEST_CASE("high-low paraproduct output lives at the high shell") {
  Grid g(1, 512, 16.0);
  // g at shell 2, f at a high shell: T_g f stays in a fattened high annulus
  int kg = 2, kf = 7;
  auto rng = make_rng(11, 0);
  Field glow = random_shell_field(g, kg, rng);
  Field fhigh = random_shell_field(g, kf, rng);
  Field tgf = paraproduct(glow, fhigh);
  Field outside = tgf - project_fat(tgf, kf);
  CHECK(outside.l2_norm() <= 1e-10 * std::max(1e-30, tgf.l2_norm()));
}

TEST_CASE("cube partition of unity and dilate support") {
  Grid g(2, 64, 32.0);
  CubePartition part(g, 3); // cubes of side 8
  CHECK(part.cubes_per_axis() == 4);
  Field sum(g, Rep::physical);
  for (std::int64_t q = 0; q < part.cube_count(); ++q) sum += part.smooth_mask(q);
  for (std::int64_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(sum[i] - 1.0) <= 1e-12);
  // support inside 1.5-dilate: mask vanishes two cubes away
  Field mask = part.smooth_mask(0);
  std::array<int, 3> far{33, 33, 0};
  CHECK(std::abs(mask[g.flatten(far)]) == 0.0);
}

TEST_CASE("cube l2 sum reproduces the L2 norm") {
  Grid g(2, 64, 32.0);
  auto rng = make_rng(13, 0);
  Field u = random_bandlimited_field(g, rng);
  for (int k : {1, 3, 5})
    CHECK(l2_cubes(u, k) == doctest::Approx(u.l2_norm()).epsilon(1e-6));
}

TEST_CASE("l1 cube sum of a single mode counts cubes") {
  Grid g(2, 64, 32.0);
  int k = 2; // cubes of side 4, 8 per axis
  std::array<int, 3> mode{static_cast<int>(std::round(std::ldexp(1.0, k) * g.box_length() / (2 * std::numbers::pi))), 0, 0};
  Field u = single_mode(g, mode);
  CubePartition part(g, k);
  double per_cube = std::sqrt(std::pow(part.side(), g.dim()));
  double expected = static_cast<double>(part.cube_count()) * per_cube;
  CHECK(l1_cubes(u, k) == doctest::Approx(expected).epsilon(1e-6));
  // brute-force cube sum agrees (independent loop over blocks)
  double brute = 0;
  for (std::int64_t q = 0; q < part.cube_count(); ++q) brute += part.cube_l2(u, q);
  CHECK(l1_cubes(u, k) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("zero field has zero norms") {
  Grid g(2, 32, 16.0);
  Field z(g, Rep::physical);
  CHECK(norm_Hs(z, 1.5).value == 0.0);
  CHECK(norm_l1Hs(z, 1.5).value == 0.0);
  SpaceTimeField u(0, 0.1);
  for (int i = 0; i < 4; ++i) u.push(z);
  CHECK(norm_X(u) == 0.0);
  CHECK(norm_Xs(u, 1.0, true).value == 0.0);
}

TEST_CASE("envelope invariants and closed forms") {
  Grid g(2, 64, 16.0);
  SUBCASE("random fields satisfy the invariant suite") {
    for (int trial = 0; trial < 20; ++trial) {
      auto rng = make_rng(500 + trial, 0);
      Field u = random_bandlimited_field(g, rng);
      auto env = envelope(u, EnvelopeSpace::Hs, 0.0);
      std::vector<double> shells;
      for (int k = 0; k < static_cast<int>(env.c.size()); ++k)
        shells.push_back(project(u, k).l2_norm());
      CHECK(envelope_violation(env, shells, u.l2_norm()) <= 1e-12);
    }
  }
  SUBCASE("single shell gives the two-sided exponential up to normalization") {
    Grid g2(2, 128, 8.0); // Nyquist ~50, shell 4 well inside the cap
    auto rng = make_rng(77, 0);
    int k0 = 4;
    Field u = random_shell_field(g2, k0, rng);
    auto env = envelope(u, EnvelopeSpace::Hs, 0.0);
    // shape: ratios against the k0 value follow the decay weights
    for (int j = 0; j < k0; ++j) {
      double expected = std::pow(2.0, -env.delta * (k0 - j));
      CHECK(env.c[j] / env.c[k0] == doctest::Approx(expected).epsilon(0.05));
    }
    for (int j = k0 + 1; j < static_cast<int>(env.c.size()); ++j) {
      double expected = std::pow(2.0, -env.sigma * (j - k0));
      CHECK(env.c[j] / env.c[k0] == doctest::Approx(expected).epsilon(0.05));
    }
  }
  SUBCASE("two equal shells give the max of the single-shell envelopes") {
    auto rng = make_rng(78, 0);
    Field a = random_shell_field(g, 1, rng);
    Field b = random_shell_field(g, 3, rng);
    b *= complexd(a.l2_norm() / b.l2_norm(), 0);
    Field u = a + b;
    auto env = envelope(u, EnvelopeSpace::Hs, 0.0);
    auto env_a = envelope(a, EnvelopeSpace::Hs, 0.0);
    auto env_b = envelope(b, EnvelopeSpace::Hs, 0.0);
    for (std::size_t j = 0; j < env.c.size(); ++j) {
      double expected = std::max(env_a.c[j], env_b.c[j]) / std::sqrt(2.0);
      CHECK(env.c[j] == doctest::Approx(expected).epsilon(0.35));
    }
  }
  SUBCASE("zero field is refused") {
    Field z(g, Rep::physical);
    CHECK_THROWS_AS(envelope(z, EnvelopeSpace::Hs, 0.0), Error);
  }
}

TEST_CASE("y surrogate brackets") {
  Grid g(2, 32, 16.0);
  auto rng = make_rng(21, 0);
  SpaceTimeField f(0, 0.05);
  for (int i = 0; i < 8; ++i) {
    Field s = random_bandlimited_field(g, rng);
    f.push(s);
  }
  for (int k : {0, 2, 4}) {
    auto [lo, up] = y_surrogate(f, k);
    CHECK(lo <= up * (1 + 1e-12));
    CHECK(up > 0);
    // homogeneity: doubling the field doubles both bounds
    SpaceTimeField f2(0, 0.05);
    for (std::size_t i = 0; i < f.steps(); ++i) {
      Field s = f.at(i);
      s *= 2.0;
      f2.push(s);
    }
    auto [lo2, up2] = y_surrogate(f2, k);
    CHECK(lo2 == doctest::Approx(2 * lo).epsilon(1e-10));
    CHECK(up2 == doctest::Approx(2 * up).epsilon(1e-10));
  }
}

TEST_CASE("y surrogate matches a dictionary packet within factor 4") {
  Grid g(2, 32, 16.0);
  // field equal to one of the dictionary wave packets
  int k = 3;
  double xi0 = std::min(std::ldexp(1.0, k), g.nyquist() * 0.5);
  Field packet = uhs::sample(g, [&](const std::array<double, 3>& x) {
    double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    double env = cutoffs::chi_below(r, std::max(std::ldexp(1.0, 2) / 2.0, 4 * g.spacing()));
    return complexd(env, 0) * std::exp(complexd(0, xi0 * x[0]));
  });
  SpaceTimeField f(0, 0.05);
  for (int i = 0; i < 8; ++i) f.push(packet);
  auto [lo, up] = y_surrogate(f, k);
  CHECK(lo > 0);
  CHECK(up / lo <= 4.0);
}

TEST_CASE("pure L1L2 split wins for generic data") {
  Grid g(2, 32, 16.0);
  auto rng = make_rng(23, 0);
  SpaceTimeField f(0, 0.1);
  for (int i = 0; i < 5; ++i) f.push(random_bandlimited_field(g, rng));
  auto [lo, up] = y_surrogate(f, 0);
  (void)lo;
  CHECK(up <= norm_L1L2(f) * (1 + 1e-12));
}
