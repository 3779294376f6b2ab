#include <doctest.h>

#include "uhs/cutoffs.hpp"
#include "uhs/hamilton.hpp"

using namespace uhs;

TEST_CASE("flat elliptic rays are straight with speed 2|xi|") {
  Metric m = flat_metric(2, Signature::elliptic);
  Ray r = flow(m, {0, 0, 0}, {1, 0, 0}, 3.0);
  CHECK(r.x.back()[0] == doctest::Approx(-6.0).epsilon(1e-10));
  CHECK(r.x.back()[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.xi.back()[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.hamiltonian_drift_rel() <= 1e-12);
}

TEST_CASE("flat ultrahyperbolic null ray") {
  Metric m = flat_metric(2, Signature::ultrahyperbolic);
  Ray r = flow(m, {0, 0, 0}, {1, 1, 0}, 2.0);
  CHECK(r.a0 == doctest::Approx(0.0));
  // dx/dt = -2 (xi1, -xi2) = (-2, 2)
  CHECK(r.x.back()[0] == doctest::Approx(-4.0).epsilon(1e-10));
  CHECK(r.x.back()[1] == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(r.xi.back()[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.xi.back()[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero frequency is refused") {
  Metric m = flat_metric(2, Signature::elliptic);
  CHECK_THROWS_AS(flow(m, {0, 0, 0}, {0, 0, 0}, 1.0), Error);
}

TEST_CASE("bump metric conserves the Hamiltonian against a tighter reference") {
  Metric m = bump_metric(2, Signature::elliptic, 0.3, 1.0);
  m.validate();
  auto data = sample_ball_sphere(2, 2.0, 16, 5);
  for (const auto& [x0, xi0] : data) {
    FlowOptions opt;
    opt.tol = 1e-10;
    Ray r = flow(m, x0, xi0, 4.0, opt);
    CHECK(r.hamiltonian_drift_rel() <= 1e-8);
    FlowOptions tight;
    tight.tol = 1e-12;
    Ray ref = flow(m, x0, xi0, 4.0, tight);
    Vec3 dev{};
    for (int a = 0; a < 2; ++a) dev[a] = r.x.back()[a] - ref.x.back()[a];
    CHECK(std::abs(dev[0]) + std::abs(dev[1]) <= 1e-7);
  }
}

TEST_CASE("time reversibility") {
  Metric m = bump_metric(2, Signature::ultrahyperbolic, 0.2, 1.0);
  Ray fwd = flow(m, {0.3, -0.2, 0}, {0.8, 0.6, 0}, 2.5);
  Vec3 xe = fwd.x.back(), xie = fwd.xi.back();
  Ray back = flow(m, xe, xie, -2.5);
  CHECK(std::abs(back.x.back()[0] - 0.3) + std::abs(back.x.back()[1] + 0.2) <= 1e-7);
  CHECK(std::abs(back.xi.back()[0] - 0.8) + std::abs(back.xi.back()[1] - 0.6) <= 1e-7);
}

TEST_CASE("homogeneity law") {
  SUBCASE("flat metric scales exactly") {
    Metric m = flat_metric(2, Signature::elliptic);
    CHECK(homogeneity_check(m, {0.5, 0.1, 0}, {0.6, -0.8, 0}, 3.0, 1.0) <= 1e-10);
    CHECK(homogeneity_check(m, {0.5, 0.1, 0}, {0.6, -0.8, 0}, 1.0, 1.0) <= 1e-12);
  }
  SUBCASE("bump metric scales to integrator accuracy") {
    Metric m = bump_metric(2, Signature::elliptic, 0.25, 1.0);
    FlowOptions opt;
    opt.tol = 1e-11;
    CHECK(homogeneity_check(m, {0.4, 0.0, 0}, {0.9, 0.435889894354067, 0}, 2.0, 1.5, opt) <= 1e-7);
  }
}

TEST_CASE("flat nontrapping parameter equals the chord time R") {
  SamplerSpec sp;
  sp.count = 2048;
  for (Signature sig : {Signature::elliptic, Signature::ultrahyperbolic}) {
    Metric m = flat_metric(2, sig);
    TrappingReport rep = nontrapping_parameter(m, 2.0, sp, 60.0);
    CHECK(!rep.trapped());
    CHECK(rep.L == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("nontrapping estimate is monotone in R") {
  Metric m = bump_metric(2, Signature::elliptic, 0.3, 1.0);
  SamplerSpec sp;
  sp.count = 512;
  double prev = 0;
  for (double R : {1.0, 2.0, 4.0}) {
    TrappingReport rep = nontrapping_parameter(m, R, sp, 200.0);
    CHECK(!rep.trapped());
    CHECK(rep.L >= prev - 1e-9);
    prev = rep.L;
  }
}

TEST_CASE("trapping annulus is detected") {
  Metric m = trapping_annulus_metric(2, 2.0, 0.5);
  m.validate();
  // the circular orbit at r0 stays circular for a long time
  Ray orbit = flow(m, {2.0, 0, 0}, {0, 1, 0}, 40.0);
  double rdev = 0;
  for (const auto& x : orbit.x)
    rdev = std::max(rdev, std::abs(std::sqrt(x[0] * x[0] + x[1] * x[1]) - 2.0));
  CHECK(rdev <= 1e-6);
  SamplerSpec sp;
  sp.count = 512;
  sp.ring_radius = 2.0;
  TrappingReport rep = nontrapping_parameter(m, 3.0, sp, 120.0);
  CHECK(rep.trapped());
}

TEST_CASE("flat asymptotics") {
  SUBCASE("flat metric has zero deviation") {
    Metric m = flat_metric(2, Signature::elliptic);
    auto rep = flat_asymptotics_check(m, 2.0, 0.1, 64, 3, 10.0);
    CHECK(rep.worst_position_dev <= 1e-10);
    CHECK(rep.worst_frequency_dev <= 1e-10);
  }
  SUBCASE("outgoing rays started outside the bump never see it") {
    Metric m = bump_metric(2, Signature::elliptic, 0.3, 1.0);
    auto rep = flat_asymptotics_check(m, 4.0, 0.1, 64, 3, 10.0);
    CHECK(rep.worst_position_dev <= 1e-10);
    CHECK(rep.worst_frequency_dev <= 1e-10);
  }
  SUBCASE("small bump passes at eps0 = 0.1 from just outside the support") {
    Metric m = bump_metric(2, Signature::elliptic, 0.05, 1.0);
    auto rep = flat_asymptotics_check(m, 1.6, 0.1, 128, 3, 20.0);
    CHECK(rep.pass(0.1));
  }
}

TEST_CASE("integrability along the flow") {
  Metric m = flat_metric(2, Signature::elliptic);
  SUBCASE("zero integrand") {
    double v = integrate_along_flow(m, [](const Vec3&) { return 0.0; }, 1.0, {0, 0, 0}, {1, 0, 0}, 50.0);
    CHECK(v == 0.0);
  }
  SUBCASE("bump through the center matches the chord integral") {
    auto bump = [](const Vec3& x) {
      double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
      return cutoffs::chi_below(r, 1.0 / 1.5); // support radius exactly 1
    };
    double v = integrate_along_flow(m, bump, 1.0, {0, 0, 0}, {1, 0, 0}, 50.0);
    // straight-line quadrature oracle at speed 2
    int nq = 20001;
    double oracle = 0, h = 4.0 / (nq - 1);
    for (int i = 0; i < nq; ++i) {
      double t = -2.0 + h * i;
      Vec3 p{-2 * t, 0, 0};
      double w = (i == 0 || i == nq - 1) ? 0.5 : 1.0;
      oracle += w * h * bump(p);
    }
    CHECK(v == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(v == doctest::Approx(1.0).epsilon(0.1)); // ~ chord/speed
  }
  SUBCASE("trapped flow refuses") {
    Metric trap = trapping_annulus_metric(2, 2.0, 0.5);
    CHECK_THROWS_AS(integrate_along_flow(
                        trap, [](const Vec3&) { return 1.0; }, 1.0, {2.0, 0, 0}, {0, 1, 0}, 30.0),
                    Error);
  }
}

TEST_CASE("sweep bound against l1Hs of the coefficient") {
  // max over directions of the flow integral is controlled by (1+L) ||v||
  Metric m = bump_metric(2, Signature::elliptic, 0.2, 1.0);
  auto bump = [](const Vec3& x) {
    double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    return cutoffs::chi_below(r, 1.0);
  };
  double worst = 0;
  for (int i = 0; i < 64; ++i) {
    double th = 2 * std::numbers::pi * i / 64;
    double v = integrate_along_flow(m, bump, 1.5, {0.2, -0.1, 0}, {std::cos(th), std::sin(th), 0}, 60.0);
    worst = std::max(worst, v);
  }
  SamplerSpec sp;
  sp.count = 256;
  TrappingReport rep = nontrapping_parameter(m, 1.5, sp, 60.0);
  // measured constant: worst / ((1+L) * scale); just record that it is sane
  CHECK(worst <= 4.0 * (1.0 + rep.L));
  CHECK(worst > 0);
}

TEST_CASE("perturbation stability") {
  Metric m0 = bump_metric(2, Signature::elliptic, 0.2, 1.0);
  SUBCASE("identical metrics") {
    auto rep = perturbation_stability_check(m0, m0, 2.0, 1e-3, 32, 5);
    CHECK(rep.max_ray_divergence == 0.0);
    CHECK(rep.L_ratio == doctest::Approx(1.0));
  }
  SUBCASE("tiny amplitude change stays within the Gronwall envelope") {
    Metric m1 = bump_metric(2, Signature::elliptic, 0.2 * (1 + 1e-6), 1.0);
    auto rep = perturbation_stability_check(m0, m1, 2.0, 1e-3, 32, 5);
    CHECK(rep.max_ray_divergence <= 1e-3);
    CHECK(rep.pass());
  }
  SUBCASE("budget violation is a precondition error") {
    Metric m1 = bump_metric(2, Signature::elliptic, 0.5, 1.0);
    CHECK_THROWS_AS(perturbation_stability_check(m0, m1, 2.0, 1e-6, 8, 5), Error);
  }
}

TEST_CASE("flow derivatives") {
  SUBCASE("flat metric Jacobian is the linear flow") {
    Metric m = flat_metric(2, Signature::ultrahyperbolic);
    auto J = flow_derivatives(m, {0.1, 0.2, 0}, {1.0, 0.3, 0}, 1.5);
    // dx/dxi = -2 t g_inf
    CHECK(J.dx_dxi[0] == doctest::Approx(-3.0).epsilon(1e-8));
    CHECK(J.dx_dxi[4] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(J.dxi_dxi[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(J.dxi_dx[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(J.fd_mismatch <= 1e-4);
  }
  SUBCASE("t = 0 gives the identity") {
    Metric m = bump_metric(2, Signature::elliptic, 0.2, 1.0);
    auto J = flow_derivatives(m, {0.3, 0, 0}, {0, 1, 0}, 0.0);
    CHECK(J.dx_dx[0] == doctest::Approx(1.0));
    CHECK(J.dx_dx[1] == doctest::Approx(0.0));
    CHECK(J.dxi_dxi[4] == doctest::Approx(1.0));
  }
  SUBCASE("bump metric cross-validates against finite differences") {
    Metric m = bump_metric(2, Signature::elliptic, 0.25, 1.0);
    auto J = flow_derivatives(m, {0.2, -0.4, 0}, {0.6, 0.8, 0}, 2.0);
    CHECK(J.fd_mismatch <= 1e-4);
  }
}
