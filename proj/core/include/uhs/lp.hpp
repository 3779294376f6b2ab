#pragma once

#include <optional>

#include "uhs/fft.hpp"

namespace uhs {

/// Inhomogeneous Littlewood-Paley family built from the radial base
/// multiplier phi(xi) = chi(|xi|) (1 on B1, 0 outside B2):
///   S_0 = phi(xi),  S_k = phi(2^{-k} xi) - phi(2^{-k+1} xi)  for k >= 1.
/// Shell k is supported in the annulus 2^{k-1} <= |xi| <= 1.5 * 2^k, so
/// sum_{k<=K} S_k == 1 exactly on every lattice point once 2^K exceeds the
/// largest lattice frequency.
namespace lp {

constexpr int paraproduct_gap = 4; // the "k-4" offset

/// phi(2^{-k} xi) evaluated at radius r = |xi|.
double base(double r, int k);
/// Shell-k multiplier at radius r.
double shell(double r, int k);

/// Largest shell index needed for a complete partition on this grid.
int top_shell(const Grid& grid);
/// Largest shell whose plateau is still resolvable (2^k <= Nyquist).
int max_resolvable_shell(const Grid& grid);

} // namespace lp

/// S_k u.  Shells with 2^k above Nyquist raise a resolution error.
Field project(const Field& u, int k);
/// S_{<k} u = sum_{0 <= j < k} S_j u (zero field for k <= 0).
Field project_below(const Field& u, int k);
/// S_{>=k} u.
Field project_above(const Field& u, int k);
/// Fattened projection (one extra shell on each side).
Field project_fat(const Field& u, int k);

/// Paraproduct T_g f = sum_{k >= 0} S_{<k-4} g S_k f.
Field paraproduct(const Field& g, const Field& f);
/// Balanced part Pi(f, g) = sum_{|j-k| <= 4} S_j f S_k g, so that
/// T_f g + T_g f + Pi(f, g) == f g pointwise.
Field balanced_part(const Field& f, const Field& g);

/// Partition of the box into cubes of side ~2^k (clamped to [h, L]).
/// Cube boundaries are cell-aligned; sides are powers of two in cells.
class CubePartition {
public:
  CubePartition(const Grid& grid, int scale_k);

  int scale() const { return scale_; }
  int cells_per_side() const { return m_; }
  int cubes_per_axis() const { return blocks_; }
  std::int64_t cube_count() const;
  double side() const { return m_ * grid_.spacing(); }

  /// Hard-mask L2(dx) norm of u restricted to cube q (flattened cube index).
  double cube_l2(const Field& u, std::int64_t q) const;
  /// Hard-mask squared L2 cell sum (no cell volume factor).
  double cube_sumsq(const std::vector<complexd>& values, std::int64_t q) const;

  /// Smooth partition window for cube q sampled along one axis; the windows
  /// multiply across axes, sum to one exactly, and are supported in a
  /// 1.5-dilate of the cube.
  double window(int axis_index, std::int64_t q, int axis) const;
  Field smooth_mask(std::int64_t q) const;

  const Grid& grid() const { return grid_; }

private:
  std::array<int, 3> cube_coords(std::int64_t q) const;

  Grid grid_;
  int scale_;
  int m_;      // cells per cube side
  int blocks_; // cubes per axis
  std::vector<double> window1d_; // blocks_ x n window values for one axis
};

} // namespace uhs
