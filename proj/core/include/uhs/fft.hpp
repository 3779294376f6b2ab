#pragma once

#include "uhs/field.hpp"

namespace uhs {

/// Unitary discrete Fourier transform between the two representations.
/// transform(transform(f)) == f; the field's representation tag flips.
Field transform(const Field& field, Rep direction);

/// Forward if physical, inverse if frequency.
inline Field flip(const Field& field) {
  return transform(field, field.rep() == Rep::physical ? Rep::frequency : Rep::physical);
}

inline Field to_frequency(const Field& f) {
  return f.rep() == Rep::frequency ? f : transform(f, Rep::frequency);
}

inline Field to_physical(const Field& f) {
  return f.rep() == Rep::physical ? f : transform(f, Rep::physical);
}

/// Applies a Fourier multiplier m(xi) given as a frequency-space table.
Field apply_multiplier(const Field& f, const std::vector<double>& m);
Field apply_multiplier(const Field& f, const std::vector<complexd>& m);

/// Tabulates m(xi) over the dual lattice.
std::vector<double> multiplier_table(const Grid& g, const std::function<double(const std::array<double, 3>&)>& m);
std::vector<complexd> multiplier_table_c(const Grid& g, const std::function<complexd(const std::array<double, 3>&)>& m);

} // namespace uhs
