#pragma once

#include "uhs/quantize.hpp"

namespace uhs {

/// Result of one randomized operator probe, including the per-shell curve.
struct OperatorProbeReport {
  std::string kind;
  std::vector<int> shells;
  std::vector<double> measured;
  double reference = 0; // the bound the curve is compared against
  double margin = 0;    // allowed measured/reference factor
  int trials = 0;
  bool pass = false;
  int onset_shell = -1; // k0 at which the high-frequency bound kicks in
  std::string note;
};

/// High-frequency Calderon-Vaillancourt probe: measures ||Op(a) S_{>=k}|| for
/// each k and passes when the curve is within margin * sup|a| from some k0 on.
OperatorProbeReport cv_highfreq_probe(const Symbol& a, const Grid& grid,
                                      const std::vector<int>& k_list, int trials,
                                      std::uint64_t seed, double sup_a, double margin = 4.0);

/// Sharp Garding probe: min over trials of Re<Op(a) f, f> / ||f||^2 with
/// trial fields across shells.  Nonnegativity of Re a for |xi| >= R_g is
/// verified on the lattice first (precondition error).
struct GardingReport {
  double worst_constant = 0;
  std::vector<std::pair<int, double>> per_shell; // (k, min quadratic form)
  bool frequency_independent(double slack) const;
};
GardingReport garding_probe(const Symbol& a, const Grid& grid, double R_g,
                            const ProbeLattice& lattice, int trials, std::uint64_t seed);
GardingReport garding_probe_matrix(const MatrixSymbol& a, const Grid& grid, int trials,
                                   std::uint64_t seed);

/// Per-shell decay of the symbolic-calculus remainders:
///   composition  Op(a1)Op(a2) - Op(a1 a2)        ~ 2^{k(m1+m2-1)}
///   adjoint      Op(a1)^* - Op(conj a1)           ~ 2^{k(m1-1)}
///   commutator   [Op(a1),Op(a2)] - Op(-i{a1,a2})  ~ 2^{k(m1+m2-2)}
struct CalculusRemainderReport {
  std::vector<int> shells;
  std::vector<double> composition, adjoint, commutator; // per-shell norms
  double slope_composition = 0, slope_adjoint = 0, slope_commutator = 0;
  bool slopes_within(double m1, double m2, double tol) const;
};
CalculusRemainderReport calculus_remainder_probe(const Symbol& a1, const Symbol& a2,
                                                 const Grid& grid, const std::vector<int>& shells,
                                                 int trials, std::uint64_t seed);

/// Coifman-Meyer commutator probe: shell-k norm of [P, T_g] on shell-k inputs
/// divided by ||g||_{W^{1,inf}} 2^{k(m-1)}, for P = <D>^m.
OperatorProbeReport coifman_meyer_probe(const Field& g_coeff, double m, const Grid& grid,
                                        const std::vector<int>& shells, int trials,
                                        std::uint64_t seed);

} // namespace uhs
