#pragma once

#include "uhs/fft.hpp"
#include "uhs/symbol.hpp"

namespace uhs {

/// Kohn-Nirenberg quantization on the grid:
///   (Op(a) f)(x) = sum_xi a(x, xi) e^{i x.xi} c(xi),
/// with c the Fourier coefficients of f.  Exact for multipliers and for
/// multiplication symbols.  The input must be band-limited below Nyquist/2
/// (relative tail below 1e-10), else a resolution error is raised.
///
/// Cost: multiplier/multiplication/separable symbols run at FFT speed; the
/// general path iterates over the nonzero modes of f for every x, so shell-
/// limited inputs stay cheap.
Field quantize_apply(const Symbol& a, const Field& f);

/// Adjoint Op(a)^* f, same conventions.
Field quantize_adjoint_apply(const Symbol& a, const Field& f);

/// General tabled variant: the symbol is given per (flattened x index, xi).
Field quantize_apply_indexed(const std::function<complexd(std::int64_t, const Vec3&)>& a,
                             const Field& f, bool check_bandlimit = true);

/// Matrix quantization for 2-component fields.
std::array<Field, 2> quantize_apply_matrix(const MatrixSymbol& a, const std::array<Field, 2>& f);

/// Randomized lower bound on the operator norm of `apply` between L2 spaces:
/// max over `trials` random fields drawn by `sampler` of ||A f|| / ||f||.
/// Reproducible under a fixed seed.
double operator_norm(const std::function<Field(const Field&)>& apply,
                     const std::function<Field(std::mt19937_64&)>& sampler, int trials,
                     std::uint64_t seed);

/// Random complex field with unit-variance Gaussian modes on shell k
/// (band-limited below the dealiasing cap).
Field random_shell_field(const Grid& grid, int k, std::mt19937_64& rng);
/// Random field with modes on all shells >= k below the cap.
Field random_above_field(const Grid& grid, int k, std::mt19937_64& rng);
/// Random band-limited field (all shells below the cap).
Field random_bandlimited_field(const Grid& grid, std::mt19937_64& rng, double cap_fraction = 0.45);

} // namespace uhs
