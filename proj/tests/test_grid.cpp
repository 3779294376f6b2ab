#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "uhs/cutoffs.hpp"
#include "uhs/fft.hpp"
#include "uhs/field_io.hpp"
#include "uhs/util.hpp"

using namespace uhs;

namespace {

Field random_field(const Grid& g, std::uint64_t seed) {
  auto rng = make_rng(seed, 0);
  std::normal_distribution<double> N(0, 1);
  Field f(g, Rep::physical);
  for (std::int64_t i = 0; i < g.size(); ++i) f[i] = complexd(N(rng), N(rng));
  return f;
}

} // namespace

TEST_CASE("grid invariants") {
  Grid g(2, 64, 32.0);
  CHECK(g.spacing() * g.points_per_axis() == 32.0);
  CHECK_THROWS_AS(Grid(2, 65, 32.0), Error);
  CHECK_THROWS_AS(Grid(4, 64, 32.0), Error);
  // frequency lattice symmetric about zero up to Nyquist
  int n = g.points_per_axis();
  for (int i = 1; i < n / 2; ++i)
    CHECK(g.freq(i) == doctest::Approx(-g.freq(n - i)).epsilon(1e-15));
}

TEST_CASE("transform round trip and Parseval") {
  for (int d : {1, 2}) {
    Grid g(d, d == 1 ? 256 : 64, 16.0);
    Field f = random_field(g, 42 + d);
    Field fh = transform(f, Rep::frequency);
    Field back = transform(fh, Rep::physical);
    double worst = 0;
    for (std::int64_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(back[i] - f[i]));
    CHECK(worst <= 1e-12 * f.max_abs());
    CHECK(fh.l2_norm() == doctest::Approx(f.l2_norm()).epsilon(1e-12));
    CHECK_THROWS_AS(transform(f, Rep::physical), Error);
  }
}

TEST_CASE("transform of constants and characters") {
  Grid g(2, 32, 8.0);
  Field one(g, Rep::physical);
  for (std::int64_t i = 0; i < g.size(); ++i) one[i] = 1.0;
  Field oh = transform(one, Rep::frequency);
  // all mass on the zero mode
  CHECK(std::abs(oh[0]) == doctest::Approx(std::sqrt(static_cast<double>(g.size()))));
  double off = 0;
  for (std::int64_t i = 1; i < g.size(); ++i) off = std::max(off, std::abs(oh[i]));
  CHECK(off <= 1e-12 * std::abs(oh[0]));

  // e^{i x xi0} concentrates on the lattice mode xi0
  std::array<int, 3> mode{3, 2, 0};
  Field wave(g, Rep::physical);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    auto x = g.point(i);
    double phase = g.freq(mode[0]) * x[0] + g.freq(mode[1]) * x[1];
    wave[i] = std::polar(1.0, phase);
  }
  Field wh = transform(wave, Rep::frequency);
  std::int64_t target = g.flatten(mode);
  double at = std::abs(wh[target]);
  for (std::int64_t i = 0; i < g.size(); ++i)
    if (i != target) CHECK(std::abs(wh[i]) <= 1e-10 * at);
}

TEST_CASE("cutoff profiles") {
  using namespace cutoffs;
  CHECK(chi(0.3) == 1.0);
  CHECK(chi(1.0) == 1.0);
  CHECK(chi(1.51) == 0.0);
  CHECK(chi_below(3.0, 1.0) == 0.0); // chi_{<1} at |x| = 3
  CHECK(chi_below(0.0, 1.0) == 1.0);
  // partition chi_{<rho} + chi_{>rho} = 1
  for (double r = 0; r < 5; r += 0.05)
    CHECK(chi_below(r, 1.3) + chi_above(r, 1.3) == doctest::Approx(1.0).epsilon(1e-15));
  // phi_{<-1/2} plateau and support with the default margin
  double d0 = default_delta0;
  CHECK(phi_below(-0.5, -0.5, d0) == 1.0);
  CHECK(phi_below(-0.5 + d0 + 0.01, -0.5, d0) == 0.0);
  // rho plateau/support
  CHECK(rho(0.125) == 0.0);
  CHECK(rho(3.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rho(5.0) == doctest::Approx(1.0).epsilon(1e-12));
  double prev = -1;
  for (double s = 0; s <= 3.2; s += 0.01) {
    CHECK(rho(s) >= prev - 1e-12);
    prev = rho(s);
  }
  // drho is comparable to its plateau level on [1/7, 2]
  double plateau = drho(1.0);
  for (double s = 1.0 / 7 + 0.002; s <= 2.0; s += 0.01) CHECK(drho(s) >= 0.9 * plateau);
  // monotone in [0,1]
  for (double s = 0; s < 4; s += 0.03) {
    CHECK(rho(s) >= 0.0);
    CHECK(rho(s) <= 1.0);
  }
}

TEST_CASE("make_cutoff on grid") {
  Grid g(2, 64, 32.0);
  Field c = make_cutoff(g, CutoffKind::chi_below, 4.0);
  // value 1 inside the ball and 0 well outside
  std::array<int, 3> center{32, 32, 0};
  CHECK(c[g.flatten(center)].real() == doctest::Approx(1.0));
  std::array<int, 3> corner{0, 0, 0};
  CHECK(std::abs(c[g.flatten(corner)]) == 0.0);
  CHECK_THROWS_AS(make_cutoff(g, CutoffKind::chi_below, 1.0), Error); // transition below 4h
  // refinement consistency: shared lattice points match exactly
  Grid g2(2, 128, 32.0);
  Field c2 = make_cutoff(g2, CutoffKind::chi_below, 4.0);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      std::array<int, 3> a{i, j, 0}, b{2 * i, 2 * j, 0};
      CHECK(c[g.flatten(a)] == c2[g2.flatten(b)]);
    }
}

TEST_CASE("field io round trips") {
  namespace fs = std::filesystem;
  Grid g(2, 16, 4.0);
  Field f = random_field(g, 9);
  auto dir = fs::temp_directory_path();
  std::string raw = (dir / "uhs_test_field.fld").string();
  std::string csv = (dir / "uhs_test_field.csv").string();
  dump_field(f, raw, FieldFormat::raw);
  Field back = load_field(raw);
  CHECK(back.grid() == f.grid());
  CHECK(back.rep() == f.rep());
  bool exact = true;
  for (std::int64_t i = 0; i < g.size(); ++i)
    if (back[i] != f[i]) exact = false;
  CHECK(exact);

  dump_field(f, csv, FieldFormat::csv);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "ix,iy,re,im");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == g.size());

  // truncated file -> format error
  std::string trunc = (dir / "uhs_test_trunc.fld").string();
  {
    std::ifstream src(raw, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(src)), {});
    std::ofstream dst(trunc, std::ios::binary);
    dst.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_field(trunc), Error);
  std::remove(raw.c_str());
  std::remove(csv.c_str());
  std::remove(trunc.c_str());
}
