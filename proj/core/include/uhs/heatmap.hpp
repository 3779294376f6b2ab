#pragma once

#include <string>

#include "uhs/field.hpp"

namespace uhs {

/// Renders |values| of a 2-D slice as a binary PPM (P6) with a fixed built-in
/// colormap.  Byte-identical output for identical input.  For d == 3 fields
/// pass the slice index along the last axis; invalid slices raise usage
/// errors.
void render_heatmap(const Field& field, const std::string& path, int slice = 0,
                    const std::string& comment = "");

/// Renders a raw matrix (rows x cols, row-major).
void render_heatmap(const std::vector<double>& values, int rows, int cols,
                    const std::string& path, const std::string& comment = "");

} // namespace uhs
