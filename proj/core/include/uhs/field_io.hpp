#pragma once

#include <string>

#include "uhs/field.hpp"

namespace uhs {

enum class FieldFormat { raw, csv };

/// Raw format: 32-byte header (8-byte magic "UHSFLD1\0", u32 d, u32 n,
/// f64 box length, u32 representation tag, u32 pad), then little-endian
/// float64 (re, im) pairs in row-major order.  Round trips bit-exactly.
/// CSV format: header "ix[,iy[,iz]],re,im", one row per point, 17 significant
/// digits.
void dump_field(const Field& field, const std::string& path, FieldFormat format);

/// Loads a raw-format field.  Bad magic, header, or truncation raise a
/// format error and no partial Field is returned.
Field load_field(const std::string& path);

} // namespace uhs
