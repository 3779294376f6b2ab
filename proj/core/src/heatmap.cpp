#include "uhs/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "uhs/errors.hpp"

namespace uhs {

namespace {

// compact blue -> teal -> yellow ramp, 8 anchors, linearly interpolated
constexpr unsigned char kRamp[8][3] = {
    {13, 8, 135},   {84, 2, 163},   {139, 10, 165}, {185, 50, 137},
    {219, 92, 104}, {244, 136, 73}, {254, 188, 43}, {240, 249, 33},
};

void pixel(double t, unsigned char* rgb) {
  t = std::clamp(t, 0.0, 1.0);
  double u = t * 7;
  int i = std::min(6, static_cast<int>(u));
  double w = u - i;
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<unsigned char>(std::lround((1 - w) * kRamp[i][c] + w * kRamp[i + 1][c]));
}

} // namespace

void render_heatmap(const std::vector<double>& values, int rows, int cols,
                    const std::string& path, const std::string& comment) {
  if (rows <= 0 || cols <= 0 || static_cast<std::size_t>(rows) * cols != values.size())
    fail(ErrorKind::usage, "heatmap shape does not match data");
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span = hi > lo ? hi - lo : 1.0;
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) fail(ErrorKind::format, "cannot open " + path + " for writing");
  std::fprintf(fp, "P6\n");
  if (!comment.empty()) std::fprintf(fp, "# %s\n", comment.c_str());
  std::fprintf(fp, "# range %.17g %.17g\n", lo, hi);
  std::fprintf(fp, "%d %d\n255\n", cols, rows);
  std::vector<unsigned char> row(static_cast<std::size_t>(cols) * 3);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c)
      pixel((values[static_cast<std::size_t>(r) * cols + c] - lo) / span, &row[3 * c]);
    std::fwrite(row.data(), 1, row.size(), fp);
  }
  std::fclose(fp);
}

void render_heatmap(const Field& field, const std::string& path, int slice,
                    const std::string& comment) {
  const Grid& g = field.grid();
  int n = g.points_per_axis();
  if (g.dim() == 1) {
    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = std::abs(field[i]);
    // replicate to a strip for visibility
    std::vector<double> strip;
    for (int r = 0; r < std::max(8, n / 16); ++r) strip.insert(strip.end(), vals.begin(), vals.end());
    render_heatmap(strip, std::max(8, n / 16), n, path, comment);
    return;
  }
  if (slice < 0 || (g.dim() == 2 && slice != 0) || (g.dim() == 3 && slice >= n))
    fail(ErrorKind::usage, "invalid heatmap slice");
  std::vector<double> vals(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::array<int, 3> ix{i, j, slice};
      vals[static_cast<std::size_t>(i) * n + j] = std::abs(field[g.flatten(ix)]);
    }
  render_heatmap(vals, n, n, path, comment);
}

} // namespace uhs
