#include "uhs/symbol.hpp"

#include <cmath>

#include "uhs/errors.hpp"

namespace uhs {

Symbol Symbol::multiplier(int dim, double order, std::function<complexd(const Vec3&)> m) {
  Symbol s(dim, order, [m](const Vec3&, const Vec3& xi) { return m(xi); }, SymbolKind::multiplier);
  return s;
}

Symbol Symbol::multiplication(int dim, std::function<complexd(const Vec3&)> m) {
  Symbol s(dim, 0.0, [m](const Vec3& x, const Vec3&) { return m(x); }, SymbolKind::multiplication);
  return s;
}

Symbol Symbol::separable(int dim, double order,
                         std::vector<std::pair<std::function<complexd(const Vec3&)>,
                                               std::function<complexd(const Vec3&)>>> terms) {
  auto copy = terms;
  Symbol s(dim, order,
           [copy](const Vec3& x, const Vec3& xi) {
             complexd v(0, 0);
             for (const auto& [fx, fxi] : copy) v += fx(x) * fxi(xi);
             return v;
           },
           SymbolKind::separable);
  s.terms_ = std::move(terms);
  return s;
}

namespace {

// fourth-order central difference along one coordinate of a 2d-variable function
complexd fd4(const std::function<complexd(double)>& f, double h) {
  return (-f(2 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2 * h)) / (12.0 * h);
}

} // namespace

complexd Symbol::dx(const Vec3& x, const Vec3& xi, int axis, double h) const {
  if (dx_) return dx_(x, xi, axis);
  return fd4([&](double t) {
    Vec3 xt = x;
    xt[axis] += t;
    return eval_(xt, xi);
  }, h);
}

complexd Symbol::dxi(const Vec3& x, const Vec3& xi, int axis, double h) const {
  if (dxi_) return dxi_(x, xi, axis);
  return fd4([&](double t) {
    Vec3 xit = xi;
    xit[axis] += t;
    return eval_(x, xit);
  }, h);
}

Symbol operator*(const Symbol& a, const Symbol& b) {
  auto ea = a.eval_, eb = b.eval_;
  SymbolKind kind = SymbolKind::general;
  if (a.kind_ == SymbolKind::multiplier && b.kind_ == SymbolKind::multiplier) kind = SymbolKind::multiplier;
  if (a.kind_ == SymbolKind::multiplication && b.kind_ == SymbolKind::multiplication)
    kind = SymbolKind::multiplication;
  return Symbol(a.dim_, a.order_ + b.order_,
                [ea, eb](const Vec3& x, const Vec3& xi) { return ea(x, xi) * eb(x, xi); }, kind);
}

Symbol operator+(const Symbol& a, const Symbol& b) {
  auto ea = a.eval_, eb = b.eval_;
  SymbolKind kind = a.kind_ == b.kind_ ? a.kind_ : SymbolKind::general;
  if (kind == SymbolKind::separable) kind = SymbolKind::general;
  return Symbol(a.dim_, std::max(a.order_, b.order_),
                [ea, eb](const Vec3& x, const Vec3& xi) { return ea(x, xi) + eb(x, xi); }, kind);
}

Symbol conj(const Symbol& a) {
  auto ea = a.eval_;
  return Symbol(a.dim_, a.order_,
                [ea](const Vec3& x, const Vec3& xi) { return std::conj(ea(x, xi)); }, a.kind_);
}

Symbol scale(complexd c, const Symbol& a) {
  auto ea = a.eval_;
  return Symbol(a.dim_, a.order_, [c, ea](const Vec3& x, const Vec3& xi) { return c * ea(x, xi); },
                a.kind_);
}

ProbeLattice make_probe_lattice(int dim, double x_extent, int x_per_axis, double xi_min,
                                double xi_max, int xi_radial, int xi_angular) {
  ProbeLattice lat;
  lat.x_spacing = 2.0 * x_extent / std::max(1, x_per_axis - 1);
  // x: tensor lattice over [-extent, extent]^d
  std::vector<double> axis(x_per_axis);
  for (int i = 0; i < x_per_axis; ++i)
    axis[i] = x_per_axis == 1 ? 0.0 : -x_extent + 2.0 * x_extent * i / (x_per_axis - 1);
  if (dim == 1) {
    for (double v : axis) lat.x.push_back({v, 0, 0});
  } else if (dim == 2) {
    for (double c0 : axis)
      for (double c1 : axis) lat.x.push_back({c0, c1, 0});
  } else {
    for (double c0 : axis)
      for (double c1 : axis)
        for (double c2 : axis) lat.x.push_back({c0, c1, c2});
  }
  // xi: log-radial times angular
  for (int ir = 0; ir < xi_radial; ++ir) {
    double r = xi_min * std::pow(xi_max / xi_min, xi_radial == 1 ? 0.0 : static_cast<double>(ir) / (xi_radial - 1));
    if (dim == 1) {
      lat.xi.push_back({r, 0, 0});
      lat.xi.push_back({-r, 0, 0});
    } else if (dim == 2) {
      for (int ia = 0; ia < xi_angular; ++ia) {
        double th = 2 * std::numbers::pi * ia / xi_angular;
        lat.xi.push_back({r * std::cos(th), r * std::sin(th), 0});
      }
    } else {
      for (int ia = 0; ia < xi_angular; ++ia) {
        double th = std::numbers::pi * (ia + 0.5) / xi_angular;
        for (int ib = 0; ib < xi_angular; ++ib) {
          double ph = 2 * std::numbers::pi * ib / xi_angular;
          lat.xi.push_back({r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph), r * std::cos(th)});
        }
      }
    }
  }
  return lat;
}

namespace {

// Nested central differences for mixed multi-index derivatives.
complexd multi_deriv(const Symbol& a, const Vec3& x, const Vec3& xi,
                     const std::array<int, 3>& alpha, const std::array<int, 3>& beta,
                     double hx, double hxi) {
  // peel one derivative at a time
  for (int ax = 0; ax < 3; ++ax) {
    if (beta[ax] > 0) {
      auto b2 = beta;
      b2[ax]--;
      auto g = [&](double t) {
        Vec3 xt = x;
        xt[ax] += t;
        return multi_deriv(a, xt, xi, alpha, b2, hx, hxi);
      };
      return (-g(2 * hx) + 8.0 * g(hx) - 8.0 * g(-hx) + g(-2 * hx)) / (12.0 * hx);
    }
    if (alpha[ax] > 0) {
      auto a2 = alpha;
      a2[ax]--;
      auto g = [&](double t) {
        Vec3 xit = xi;
        xit[ax] += t;
        return multi_deriv(a, x, xit, alpha, a2, hx, hxi);
      };
      return (-g(2 * hxi) + 8.0 * g(hxi) - 8.0 * g(-hxi) + g(-2 * hxi)) / (12.0 * hxi);
    }
  }
  return a(x, xi);
}

void enumerate_multi(int dim, int total, std::vector<std::array<int, 3>>& out) {
  out.clear();
  for (int i = 0; i <= total; ++i)
    for (int j = 0; j <= total - i; ++j)
      for (int k = 0; k <= total - i - j; ++k) {
        std::array<int, 3> m{i, j, k};
        bool ok = true;
        for (int a = dim; a < 3; ++a)
          if (m[a] != 0) ok = false;
        if (ok && i + j + k == total) out.push_back(m);
      }
}

} // namespace

double seminorm(const Symbol& a, double m, int j, const ProbeLattice& lattice) {
  double worst = 0;
  double hx = 0.25 * lattice.x_spacing;
  for (const auto& x : lattice.x) {
    for (const auto& xi : lattice.xi) {
      double r2 = 0;
      for (int t = 0; t < a.dim(); ++t) r2 += xi[t] * xi[t];
      double bracket = std::sqrt(1.0 + r2);
      double hxi = 0.05 * bracket;
      for (int ja = 0; ja <= j; ++ja)
        for (int jb = 0; ja + jb <= j; ++jb) {
          std::vector<std::array<int, 3>> alphas, betas;
          enumerate_multi(a.dim(), ja, alphas);
          enumerate_multi(a.dim(), jb, betas);
          for (const auto& alpha : alphas)
            for (const auto& beta : betas) {
              complexd v = multi_deriv(a, x, xi, alpha, beta, hx, hxi);
              double w = std::pow(bracket, ja - m) * std::abs(v);
              worst = std::max(worst, w);
            }
        }
    }
  }
  return worst;
}

Symbol poisson_bracket(const Symbol& a1, const Symbol& a2, double fd_step) {
  int dim = a1.dim();
  auto ev = [a1, a2, dim, fd_step](const Vec3& x, const Vec3& xi) {
    complexd s(0, 0);
    for (int l = 0; l < dim; ++l)
      s += a1.dxi(x, xi, l, fd_step) * a2.dx(x, xi, l, fd_step) -
           a2.dxi(x, xi, l, fd_step) * a1.dx(x, xi, l, fd_step);
    return s;
  };
  return Symbol(dim, a1.order() + a2.order() - 1, ev);
}

} // namespace uhs
