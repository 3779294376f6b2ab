#include "uhs/quantize.hpp"

#include <cmath>

#include "uhs/lp.hpp"
#include "uhs/util.hpp"

namespace uhs {

namespace {

void check_bandlimit_guard(const Field& f) {
  Field fh = to_frequency(f);
  const Grid& g = f.grid();
  double cap = 0.5 * g.nyquist();
  double tail = 0, total = 0;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double m = std::norm(fh[i]);
    total += m;
    auto xi = g.frequency(i);
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(xi[a]) > cap) {
        tail += m;
        break;
      }
  }
  if (total > 0 && tail > 1e-20 * total)
    fail(ErrorKind::resolution, "input exceeds the Nyquist/2 aliasing guard");
}

// The DFT is taken over the index lattice while grid coordinates are centered
// at the box middle, so the Fourier coefficient against e^{i xi . x} carries a
// parity sign (-1)^{sum of integer mode indices}.
double center_sign(const Grid& g, std::int64_t freq_index) {
  auto ix = g.unflatten(freq_index);
  int s = 0;
  for (int a = 0; a < g.dim(); ++a) s += ix[a];
  return (s & 1) ? -1.0 : 1.0;
}

struct ModeList {
  std::vector<std::int64_t> idx;
  std::vector<complexd> coeff; // coefficients of e^{i xi . x} with centered x
};

ModeList nonzero_modes(const Field& fhat) {
  ModeList m;
  const Grid& g = fhat.grid();
  double scale = 1.0 / std::sqrt(static_cast<double>(fhat.size()));
  for (std::int64_t i = 0; i < fhat.size(); ++i) {
    if (fhat[i] != complexd(0.0, 0.0)) {
      m.idx.push_back(i);
      m.coeff.push_back(fhat[i] * scale * center_sign(g, i));
    }
  }
  return m;
}

} // namespace

Field quantize_apply_indexed(const std::function<complexd(std::int64_t, const Vec3&)>& a,
                             const Field& f, bool check_bandlimit) {
  const Grid& g = f.grid();
  Field fp = to_physical(f);
  if (check_bandlimit) check_bandlimit_guard(fp);
  Field fh = to_frequency(fp);
  ModeList modes = nonzero_modes(fh);
  const std::int64_t nm = static_cast<std::int64_t>(modes.idx.size());
  std::vector<Vec3> xs(nm);
  for (std::int64_t m = 0; m < nm; ++m) xs[m] = g.frequency(modes.idx[m]);
  Field out(g, Rep::physical);
  parallel_for(g.size(), [&](std::int64_t j) {
    auto x = g.point(j);
    complexd s(0, 0);
    for (std::int64_t m = 0; m < nm; ++m) {
      double phase = 0;
      for (int t = 0; t < g.dim(); ++t) phase += x[t] * xs[m][t];
      s += a(j, xs[m]) * std::polar(1.0, phase) * modes.coeff[m];
    }
    out[j] = s;
  });
  return f.rep() == Rep::frequency ? to_frequency(out) : out;
}

Field quantize_apply(const Symbol& a, const Field& f) {
  const Grid& g = f.grid();
  if (a.dim() != g.dim()) fail(ErrorKind::structural, "symbol dimension does not match grid");
  switch (a.kind()) {
    case SymbolKind::multiplier: {
      Vec3 zero{};
      auto table = multiplier_table_c(g, [&](const std::array<double, 3>& xi) { return a(zero, xi); });
      return apply_multiplier(f, table);
    }
    case SymbolKind::multiplication: {
      Field fp = to_physical(f);
      Field out(g, Rep::physical);
      Vec3 zero{};
      for (std::int64_t i = 0; i < g.size(); ++i) out[i] = a(g.point(i), zero) * fp[i];
      return f.rep() == Rep::frequency ? to_frequency(out) : out;
    }
    case SymbolKind::separable: {
      Field fp = to_physical(f);
      check_bandlimit_guard(fp);
      Field acc(g, Rep::physical);
      for (const auto& [fx, fxi] : a.separable_terms()) {
        auto table = multiplier_table_c(g, [&](const std::array<double, 3>& xi) { return fxi(xi); });
        Field part = apply_multiplier(fp, table);
        for (std::int64_t i = 0; i < g.size(); ++i) acc[i] += fx(g.point(i)) * part[i];
      }
      return f.rep() == Rep::frequency ? to_frequency(acc) : acc;
    }
    case SymbolKind::general:
    default:
      return quantize_apply_indexed(
          [&a, &g](std::int64_t j, const Vec3& xi) { return a(g.point(j), xi); }, f);
  }
}

Field quantize_adjoint_apply(const Symbol& a, const Field& f) {
  const Grid& g = f.grid();
  if (a.kind() == SymbolKind::multiplier) {
    Vec3 zero{};
    auto table = multiplier_table_c(g, [&](const std::array<double, 3>& xi) {
      return std::conj(a(zero, xi));
    });
    return apply_multiplier(f, table);
  }
  // (Op(a)^* f)^(xi) = n^{-d/2} sum_x conj(a(x, xi)) e^{-i x.xi} f(x),
  // then the unitary inverse transform assembles the output.
  Field fp = to_physical(f);
  check_bandlimit_guard(fp);
  double scale = 1.0 / std::sqrt(static_cast<double>(g.size()));
  Field ghat(g, Rep::frequency);
  parallel_for(g.size(), [&](std::int64_t m) {
    auto xi = g.frequency(m);
    Vec3 xiv{xi[0], xi[1], xi[2]};
    complexd s(0, 0);
    for (std::int64_t j = 0; j < g.size(); ++j) {
      if (fp[j] == complexd(0.0, 0.0)) continue;
      auto x = g.point(j);
      double phase = 0;
      for (int t = 0; t < g.dim(); ++t) phase += x[t] * xi[t];
      s += std::conj(a(x, xiv)) * std::polar(1.0, -phase) * fp[j];
    }
    ghat[m] = s * scale * center_sign(g, m);
  });
  Field out = transform(ghat, Rep::physical);
  return f.rep() == Rep::frequency ? to_frequency(out) : out;
}

std::array<Field, 2> quantize_apply_matrix(const MatrixSymbol& a, const std::array<Field, 2>& f) {
  std::array<Field, 2> out{quantize_apply(a.entry[0], f[0]) + quantize_apply(a.entry[1], f[1]),
                           quantize_apply(a.entry[2], f[0]) + quantize_apply(a.entry[3], f[1])};
  return out;
}

double operator_norm(const std::function<Field(const Field&)>& apply,
                     const std::function<Field(std::mt19937_64&)>& sampler, int trials,
                     std::uint64_t seed) {
  if (trials < 8) fail(ErrorKind::precondition, "operator norm estimation needs at least 8 trials");
  double best = 0;
  for (int t = 0; t < trials; ++t) {
    auto rng = make_rng(seed, t);
    Field f = sampler(rng);
    double nf = f.l2_norm();
    if (nf <= 0) continue;
    Field af = apply(f);
    best = std::max(best, af.l2_norm() / nf);
  }
  return best;
}

namespace {

Field random_modes(const Grid& g, std::mt19937_64& rng,
                   const std::function<double(double)>& weight, double cap_fraction) {
  Field fh(g, Rep::frequency);
  std::normal_distribution<double> N(0.0, 1.0);
  double cap = cap_fraction * g.nyquist();
  for (std::int64_t i = 0; i < g.size(); ++i) {
    auto xi = g.frequency(i);
    bool under_cap = true;
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(xi[a]) > cap) under_cap = false;
    double w = under_cap ? weight(g.frequency_norm(i)) : 0.0;
    if (w > 0) fh[i] = w * complexd(N(rng), N(rng));
    else {
      N(rng); N(rng); // keep the draw sequence aligned across weights
    }
  }
  return to_physical(fh);
}

} // namespace

Field random_shell_field(const Grid& grid, int k, std::mt19937_64& rng) {
  return random_modes(grid, rng, [k](double r) { return lp::shell(r, k); }, 0.45);
}

Field random_above_field(const Grid& grid, int k, std::mt19937_64& rng) {
  return random_modes(grid, rng, [k](double r) { return k <= 0 ? 1.0 : 1.0 - lp::base(r, k - 1); }, 0.45);
}

Field random_bandlimited_field(const Grid& grid, std::mt19937_64& rng, double cap_fraction) {
  return random_modes(grid, rng, [](double) { return 1.0; }, cap_fraction);
}

} // namespace uhs
