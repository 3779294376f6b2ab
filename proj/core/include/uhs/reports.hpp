#pragma once

#include <string>
#include <vector>

#include "uhs/hamilton.hpp"
#include "uhs/norms.hpp"

namespace uhs {

constexpr const char* toolkit_version = "uhs 0.1.0";

/// Writes rows (t, x..., xi..., hamiltonian_drift), prefixed with a comment
/// line carrying the toolkit version and scenario fingerprint.
void write_ray_csv(const Ray& ray, int dim, const std::string& path,
                   const std::string& fingerprint);

/// NormReport rows: kind, s, value, shell, contribution.
void write_norm_csv(const std::vector<NormReport>& reports, const std::string& path,
                    const std::string& fingerprint);

/// Per-shell probe rows: k, measured, reference, margin.
void write_shell_csv(const std::vector<int>& shells, const std::vector<double>& measured,
                     double reference, double margin, const std::string& path,
                     const std::string& fingerprint);

/// Canonical double formatting used by every CSV writer (17 significant
/// digits, bitwise reproducible).
std::string format_double(double v);

} // namespace uhs
