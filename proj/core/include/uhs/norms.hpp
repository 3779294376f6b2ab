#pragma once

#include <string>

#include "uhs/lp.hpp"

namespace uhs {

/// One computed norm with its per-shell breakdown.
struct NormReport {
  std::string kind;
  double s = 0;
  double value = 0;
  std::vector<std::pair<int, double>> shells; // (k, contribution before 2^{ks} weights are squared-summed)
};

// ---- spatial norms ----

/// H^s via shell weights: ( sum_k 2^{2ks} ||S_k u||_{L2}^2 )^{1/2}.
NormReport norm_Hs(const Field& u, double s);
/// l1H^s: the cube sums at matched scale are l1 instead of l2.
NormReport norm_l1Hs(const Field& u, double s);
/// Plain cube-l1 of an (unprojected) field at one scale.
double l1_cubes(const Field& u, int scale_k);
/// Cube-l2 at one scale (equals the L2 norm for hard cubes).
double l2_cubes(const Field& u, int scale_k);

// ---- space-time norms ----

/// Local energy space X: sup over cube scales l and cubes Q of
/// 2^{-l/2} ||u||_{L2([0,T] x Q)}.
double norm_X(const SpaceTimeField& u);
/// X_k = 2^{k/2} ||u||_X + ||u||_{LinfL2}.
double norm_Xk(const SpaceTimeField& u, int k);
double norm_LinfL2(const SpaceTimeField& u);
double norm_L1L2(const SpaceTimeField& u);
double norm_L2L2(const SpaceTimeField& u);

/// X^s (l1 = false) or l1X^s (l1 = true).
NormReport norm_Xs(const SpaceTimeField& u, double s, bool l1);
/// Local-energy component of X^sigma: ( sum_j 2^{2j(sigma+1/2)} ||S_j u||_X^2 )^{1/2}.
NormReport norm_Xcal(const SpaceTimeField& u, double sigma);
/// Z^sigma = ( sum_j 2^{2j sigma} ||S_j u||_{LinfL2}^2 )^{1/2}.
NormReport norm_Zcal(const SpaceTimeField& u, double sigma);
/// L2 in time of H^s in space (trapezoid in t).
double norm_L2Hs(const SpaceTimeField& u, double s);

// ---- Y surrogate ----

/// (lower, upper) bracket for the Y_k norm of f.
/// upper: min over the fixed decomposition family (pure L1L2; spatial splits
/// at each dyadic radius; frequency splits at each shell) of
/// 2^{-k/2} Yatom(u1) + ||u2||_{L1L2}, where Yatom is the best cube-scale
/// atomic sum.  lower: best normalized pairing against a fixed dictionary of
/// unit-X_k test fields.  lower <= upper always.
std::pair<double, double> y_surrogate(const SpaceTimeField& f, int k);

/// Y^s / l1Y^s assembled from per-shell Y_k upper surrogates.
NormReport norm_Ys_upper(const SpaceTimeField& f, double s, bool l1);

/// Atomic upper bound for the Y norm of w (min over cube scales of
/// sum_Q 2^{l/2} ||chi_Q w||_{L2L2}).
double y_atom_upper(const SpaceTimeField& w);

// ---- frequency envelopes ----

struct FrequencyEnvelope {
  std::vector<double> c;
  double delta = 0.125; // left slow-variation exponent
  double sigma = 0.5;   // right variation exponent
  double base_norm = 0;
};

enum class EnvelopeSpace { Hs, l1Hs };

/// Constructive admissible envelope; throws on the zero field.
/// c_j is the paper's sum-of-weighted-maxima, halved and then rescaled by
/// min(1, 2/||c||_l2), which preserves ||S_k u|| <= c_k ||u||.
FrequencyEnvelope envelope(const Field& u, EnvelopeSpace space, double s,
                           double delta = 0.125, double sigma = 0.5);

/// Checks all three envelope invariants; returns worst violation (<= 0 passes).
double envelope_violation(const FrequencyEnvelope& env, const std::vector<double>& shell_norms,
                          double base_norm);

} // namespace uhs
