#pragma once

#include <functional>

#include "uhs/field.hpp"

namespace uhs {

/// The fixed C-infinity profile family used by every cutoff in the toolkit.
///
/// All transitions are built from the analytic step
///   step(t) = f(t) / (f(t) + f(1-t)),  f(t) = exp(-1/t) for t > 0,
/// which is exactly 0 for t <= 0 and exactly 1 for t >= 1.
namespace cutoffs {

/// C-infinity monotone step from 0 at t<=0 to 1 at t>=1.
double step(double t);
/// d/dt of step.
double dstep(double t);

/// Radial bump chi: 1 for r <= 1, 0 for r >= 3/2 (inside the admissible
/// "vanishes outside radius 2" envelope; the tightened transition keeps the
/// localization error of the renormalization symbols inside the region where
/// the escape weight rho is still increasing).
double chi(double r);
/// chi_{<rho}(x) = chi(|x|/rho), chi_{>rho} = 1 - chi_{<rho}.
double chi_below(double r, double rho);
double chi_above(double r, double rho);

/// Escape transition profile: 0 for s <= 1/8, 1 for s >= 3, increasing, with
/// rho' comparable to 1 on [1/7, 2] and an exponential tail-off at 3 that is
/// slower than chi's transition tail.
double rho(double s);
double drho(double s);

/// Decreasing angular selector: 1 for x <= c, 0 for x >= c + delta0.
double phi_below(double x, double c, double delta0);
/// phi_{>c} = 1 - phi_{<c}.
double phi_above(double x, double c, double delta0);

/// Increasing radial frequency selector: 0 for r <= 1/2, 1 for r >= 2.
double chi_gt1(double r);

constexpr double default_delta0 = 0.1;

} // namespace cutoffs

enum class CutoffKind { chi_below, chi_above };

/// Samples chi_{<rho} or chi_{>rho} on the grid.  The transition width of the
/// profile must be resolvable: 0.5*rho >= 4h.
Field make_cutoff(const Grid& grid, CutoffKind kind, double rho);

/// Samples an arbitrary radial profile w(|x|) on the grid (no resolution guard).
Field sample_radial(const Grid& grid, const std::function<double(double)>& w);

/// Samples w(x) on the grid.
Field sample(const Grid& grid, const std::function<complexd(const std::array<double, 3>&)>& w);

} // namespace uhs
