#pragma once

#include <optional>
#include <string>

#include "uhs/metric.hpp"

namespace uhs {

/// A bicharacteristic trajectory for a(x, xi) = -g^{jk}(x) xi_j xi_k,
/// sampled at the accepted integrator steps.
struct Ray {
  std::vector<double> t;
  std::vector<Vec3> x;
  std::vector<Vec3> xi;
  double a0 = 0;          // conserved Hamiltonian at the initial datum
  double max_drift = 0;   // max |a(x_i, xi_i) - a0|
  long steps = 0;
  bool complete = true;   // false when the integrator gave up (partial ray)

  std::size_t size() const { return t.size(); }
  double hamiltonian_drift_rel() const {
    return max_drift / std::max(1.0, std::abs(a0));
  }
};

struct FlowOptions {
  double tol = 1e-10;     // per-step relative error target
  double max_step = 1.0;
  long max_steps = 4000000;
};

/// Integrates the bicharacteristic ODE over [0, t_end] (t_end may be
/// negative).  Adaptive Dormand-Prince 5(4); Hamiltonian drift is monitored
/// and recorded.  Step-size underflow raises an integration error carrying a
/// partial ray in the message.
Ray flow(const Metric& m, const Vec3& x0, const Vec3& xi0, double t_end,
         const FlowOptions& opt = {});

/// Max over samples of |x^{lambda t}_(x,xi) - x^t_(x,lambda xi)| +
/// |lambda xi^{lambda t}_(x,xi) - xi^t_(x,lambda xi)| over t in [0, T].
double homogeneity_check(const Metric& m, const Vec3& x0, const Vec3& xi0,
                         double lambda, double T, const FlowOptions& opt = {});

struct TrappingReport {
  double R = 0;
  int samples = 0;
  double L = 0;              // estimated nontrapping parameter (lower bound)
  double t_cap = 0;
  std::string verdict;       // "nontrapping-estimate" | "trapped-suspect"
  Vec3 worst_x{}, worst_xi{};
  double worst_exit = 0;

  bool trapped() const { return verdict == "trapped-suspect"; }
};

struct SamplerSpec {
  int count = 4096;         // low-discrepancy samples over B_R x S^{d-1}
  std::uint64_t seed = 1;
  /// Optional ring of extra samples on a circle of this radius with
  /// tangential frequencies (used by trapping scenarios).
  std::optional<double> ring_radius;
  int ring_count = 32;
};

/// Estimates L(R) = sup over sampled data in B_R x S^{d-1} of the last time
/// the ray meets the closed ball B_R, in either time direction.  A ray whose
/// exit is never certified before t_cap makes the verdict trapped-suspect.
/// Exit is certified outside max(R, support radius) once the ray is outgoing;
/// there the flow is exactly straight, so certified rays cannot return.
TrappingReport nontrapping_parameter(const Metric& m, double R,
                                     const SamplerSpec& sampler, double t_cap,
                                     const FlowOptions& opt = {});

struct FlatAsymptoticsReport {
  double worst_position_dev = 0; // max |x^t - x + 2 t g_inf xi| / (t |xi|)
  double worst_frequency_dev = 0; // max |xi^t - xi| / |xi|
  int rejected = 0;              // non-outgoing samples (reported, not fatal)
  bool pass(double eps0) const {
    return worst_position_dev <= eps0 && worst_frequency_dev <= eps0;
  }
};

/// Checks the flat-flow closeness of initially outgoing rays started outside
/// B_{R0}.
FlatAsymptoticsReport flat_asymptotics_check(const Metric& m, double R0, double eps0,
                                             int samples, std::uint64_t seed,
                                             double horizon, const FlowOptions& opt = {});

/// Integral of |v| along the full bicharacteristic through (x, xi), truncated
/// once the ray has certified exit past the support of v.  Refuses on rays
/// that fail to certify before the cap.
double integrate_along_flow(const Metric& m, const std::function<double(const Vec3&)>& v,
                            double v_support_radius, const Vec3& x, const Vec3& xi,
                            double t_cap, const FlowOptions& opt = {});

struct PerturbationReport {
  double sup_metric_gap = 0;   // sampled sup |g0 - g1|
  double max_ray_divergence = 0; // while inside B_{R0}
  double L_ratio = 1;
  bool pass() const { return L_ratio >= 0.5 && L_ratio <= 2.0; }
};

/// Compares ray families and nontrapping parameters of two metrics whose
/// sampled gap is within the stated budget (precondition error otherwise).
PerturbationReport perturbation_stability_check(const Metric& m0, const Metric& m1,
                                                double R0, double budget,
                                                int samples, std::uint64_t seed,
                                                const FlowOptions& opt = {});

/// First-order Jacobian blocks of the time-t flow map, via the variational
/// ODE, cross-validated against central finite differences of the flow.
/// order == 2 additionally returns nothing but validates the mixed second
/// differences; order > 2 is refused.
struct FlowJacobian {
  // [i][j] = d x^t_i / d x_j etc., d x d blocks
  Mat3 dx_dx{}, dx_dxi{}, dxi_dx{}, dxi_dxi{};
  double fd_mismatch = 0; // worst relative mismatch vs finite differences
};

FlowJacobian flow_derivatives(const Metric& m, const Vec3& x, const Vec3& xi,
                              double t, int order = 1, const FlowOptions& opt = {});

/// Shared low-discrepancy sampler over B_R x S^{d-1} (Halton).
std::vector<std::pair<Vec3, Vec3>> sample_ball_sphere(int d, double R, int count,
                                                      std::uint64_t seed);

/// Bicharacteristic quadrature: integrates accumulators dA/ds = w(x(s), xi(s))
/// along the ray from (x0, xi0) in the given time direction until the ray has
/// a certified exit beyond stop_radius (or t_cap, leaving certified false).
/// For time_dir < 0 the accumulators equal the integrals over (-inf, 0].
struct AugmentedRay {
  Vec3 x{}, xi{};
  std::array<double, 8> accum{};
  bool certified = false;
  double reached = 0;
};

AugmentedRay flow_augmented(const Metric& m, const Vec3& x0, const Vec3& xi0, int n_accum,
                            const std::function<void(const Vec3&, const Vec3&, double*)>& integrand,
                            double stop_radius, double t_cap, int time_dir,
                            const FlowOptions& opt = {});

/// Single short flow step to time t (may be negative); returns the endpoint.
std::pair<Vec3, Vec3> flow_point(const Metric& m, const Vec3& x0, const Vec3& xi0, double t,
                                 const FlowOptions& opt = {});

} // namespace uhs
