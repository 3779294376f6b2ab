#pragma once

#include <array>
#include <functional>
#include <string>

#include "uhs/field.hpp"

namespace uhs {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major d x d block in use
using Grad3 = std::array<double, 27>; // [l*9 + i*3 + j] = d_l g^{ij}

enum class Signature { elliptic, ultrahyperbolic };

/// The coefficient matrix field g^{jk}(x) (optionally g(t,x)) with its flat
/// limit, non-degeneracy constant and declared size/support.  Evaluators are
/// pure and safe to share across threads.
struct Metric {
  int d = 2;
  bool time_dependent = false;
  Signature signature = Signature::elliptic;
  Mat3 flat{};            // g_infinity
  double nondeg_c = 1;    // c in c^{-1}|xi| <= |g xi| <= c|xi|
  double size_M = 0;      // declared l1H^{s0} size of g - g_infinity
  double support_radius = 0; // g == flat outside this radius
  std::function<void(const Vec3& x, double t, Mat3& g)> eval;
  std::function<void(const Vec3& x, double t, Grad3& dg)> grad;

  void matvec(const Vec3& x, double t, const Vec3& xi, Vec3& out) const {
    Mat3 g;
    eval(x, t, g);
    for (int i = 0; i < d; ++i) {
      double s = 0;
      for (int j = 0; j < d; ++j) s += g[i * 3 + j] * xi[j];
      out[i] = s;
    }
  }

  /// Principal symbol a(x, xi) = -g^{jk}(x) xi_j xi_k.
  double principal(const Vec3& x, double t, const Vec3& xi) const {
    Vec3 gxi{};
    matvec(x, t, xi, gxi);
    double s = 0;
    for (int i = 0; i < d; ++i) s += gxi[i] * xi[i];
    return -s;
  }

  /// Sampled invariant checks (symmetry, non-degeneracy, flat tail); throws
  /// a structural error on violation.
  void validate(std::uint64_t seed = 7) const;
};

/// g == g_infinity everywhere.
Metric flat_metric(int d, Signature sig);

/// Conformal bump: g = (1 + A chi(|x|/r0)) g_infinity; compactly supported
/// perturbation, size |A| < 1 keeps non-degeneracy.
Metric bump_metric(int d, Signature sig, double amplitude, double radius);

/// Conformal Gaussian bump: g = (1 + A e^{-r^2/2w^2}) g_infinity.
/// Band-concentrated; flat to 1e-15 beyond 8.5 w (the declared support).
Metric gaussian_bump_metric(int d, Signature sig, double amplitude, double width);

/// Conformal elliptic annulus h(r) I with h'(r0) = 2 h(r0)/r0, which carries
/// a circular bicharacteristic at radius r0 (and a stable one when the rise
/// is convex there).
Metric trapping_annulus_metric(int d, double r0, double width);

/// First-order coefficient profile, compactly supported:
///   constant mode:  b^j(x) = amp_j chi(|x - center| / radius)
///   radial mode:    b^j(x) = amp_0 (x - center)_j chi(|x - center| / radius)
/// The radial mode is rotation covariant, which the materialized symbol
/// kernels rely on.
struct VectorBump {
  enum class Mode { constant, radial };
  int d = 2;
  Mode mode = Mode::constant;
  std::array<complexd, 3> amplitude{};
  double radius = 1;
  /// > 0 selects the Gaussian envelope e^{-r^2 / 2 w^2} instead of the chi
  /// profile.  Gaussians are what the frequency-truncated (S_{<k0}) ledger
  /// wants: band-concentrated with an effectively compact tail (< 1e-15
  /// beyond 8.5 w).
  double gauss_width = 0;
  Vec3 center{};

  bool zero() const;
  double support_radius() const {
    return gauss_width > 0 ? 8.5 * gauss_width : 1.5 * radius;
  }
  void eval(const Vec3& x, std::array<complexd, 3>& out) const;
  void grad(const Vec3& x, std::array<complexd, 9>& out) const; // [j*3+l] = d_l b^j
};

} // namespace uhs
