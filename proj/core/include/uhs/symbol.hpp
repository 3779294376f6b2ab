#pragma once

#include <functional>
#include <string>

#include "uhs/metric.hpp"

namespace uhs {

/// Structure tags that unlock exact fast paths in the quantizer.
enum class SymbolKind {
  general,        // full a(x, xi)
  multiplier,     // a = a(xi)
  multiplication, // a = a(x)
  separable,      // a = sum_r alpha_r(x) beta_r(xi)
};

/// A phase-space function a(x, xi) with declared order m.  Evaluators are
/// pure; derivative evaluators are optional and fall back to fourth-order
/// central differences with a step tied to the probe spacing.
class Symbol {
public:
  using Eval = std::function<complexd(const Vec3& x, const Vec3& xi)>;

  Symbol() = default;
  Symbol(int dim, double order, Eval eval, SymbolKind kind = SymbolKind::general)
      : dim_(dim), order_(order), eval_(std::move(eval)), kind_(kind) {}

  static Symbol multiplier(int dim, double order, std::function<complexd(const Vec3&)> m);
  static Symbol multiplication(int dim, std::function<complexd(const Vec3&)> m);
  static Symbol separable(int dim, double order,
                          std::vector<std::pair<std::function<complexd(const Vec3&)>,
                                                std::function<complexd(const Vec3&)>>> terms);

  int dim() const { return dim_; }
  double order() const { return order_; }
  SymbolKind kind() const { return kind_; }
  const auto& separable_terms() const { return terms_; }

  complexd operator()(const Vec3& x, const Vec3& xi) const { return eval_(x, xi); }

  /// Partial derivative in x_axis or xi_axis; analytic when provided.
  complexd dx(const Vec3& x, const Vec3& xi, int axis, double h) const;
  complexd dxi(const Vec3& x, const Vec3& xi, int axis, double h) const;

  void set_dx(std::function<complexd(const Vec3&, const Vec3&, int)> g) { dx_ = std::move(g); }
  void set_dxi(std::function<complexd(const Vec3&, const Vec3&, int)> g) { dxi_ = std::move(g); }

  // algebra
  friend Symbol operator*(const Symbol& a, const Symbol& b);
  friend Symbol operator+(const Symbol& a, const Symbol& b);
  friend Symbol conj(const Symbol& a);
  friend Symbol scale(complexd c, const Symbol& a);

private:
  int dim_ = 1;
  double order_ = 0;
  Eval eval_;
  SymbolKind kind_ = SymbolKind::general;
  std::vector<std::pair<std::function<complexd(const Vec3&)>, std::function<complexd(const Vec3&)>>> terms_;
  std::function<complexd(const Vec3&, const Vec3&, int)> dx_, dxi_;
};

/// Probe lattice for seminorm estimation and positivity scans: a box lattice
/// in x times a log-radial x angular mesh in xi.
struct ProbeLattice {
  std::vector<Vec3> x;
  std::vector<Vec3> xi;
  double x_spacing = 0.1; // finite-difference step scale in x
};

ProbeLattice make_probe_lattice(int dim, double x_extent, int x_per_axis, double xi_min,
                                double xi_max, int xi_radial, int xi_angular);

/// Symbol seminorm |a|^{(j)}_{S^m}: sup over the lattice of
/// <xi>^{|alpha|-m} |d_x^beta d_xi^alpha a| for |alpha + beta| <= j.
/// j <= 4 without analytic derivatives.
double seminorm(const Symbol& a, double m, int j, const ProbeLattice& lattice);

/// Poisson bracket {a1, a2} = grad_xi a1 . grad_x a2 - grad_xi a2 . grad_x a1.
Symbol poisson_bracket(const Symbol& a1, const Symbol& a2, double fd_step = 1e-4);

/// 2x2 matrix symbol for the conjugated system probes.
struct MatrixSymbol {
  std::array<Symbol, 4> entry; // row-major
  int dim() const { return entry[0].dim(); }
};

} // namespace uhs
