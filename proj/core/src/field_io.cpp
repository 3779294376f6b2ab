#include "uhs/field_io.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace uhs {

namespace {

constexpr char kMagic[8] = {'U', 'H', 'S', 'F', 'L', 'D', '1', '\0'};

#pragma pack(push, 1)
struct RawHeader {
  char magic[8];
  std::uint32_t d;
  std::uint32_t n;
  double box;
  std::uint32_t rep;
  std::uint32_t pad;
};
#pragma pack(pop)
static_assert(sizeof(RawHeader) == 32);

void dump_csv(const Field& field, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) fail(ErrorKind::format, "cannot open " + path + " for writing");
  const Grid& g = field.grid();
  const char* headers[3] = {"ix,re,im\n", "ix,iy,re,im\n", "ix,iy,iz,re,im\n"};
  std::fputs(headers[g.dim() - 1], fp);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    auto ix = g.unflatten(i);
    for (int a = 0; a < g.dim(); ++a) std::fprintf(fp, "%d,", ix[a]);
    std::fprintf(fp, "%.17g,%.17g\n", field[i].real(), field[i].imag());
  }
  std::fclose(fp);
}

} // namespace

void dump_field(const Field& field, const std::string& path, FieldFormat format) {
  if (format == FieldFormat::csv) {
    dump_csv(field, path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::format, "cannot open " + path + " for writing");
  RawHeader h{};
  std::memcpy(h.magic, kMagic, 8);
  h.d = static_cast<std::uint32_t>(field.grid().dim());
  h.n = static_cast<std::uint32_t>(field.grid().points_per_axis());
  h.box = field.grid().box_length();
  h.rep = field.rep() == Rep::physical ? 0u : 1u;
  h.pad = 0;
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  out.write(reinterpret_cast<const char*>(field.values().data()),
            static_cast<std::streamsize>(field.size() * sizeof(complexd)));
  if (!out) fail(ErrorKind::format, "short write to " + path);
}

Field load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::format, "cannot open " + path);
  RawHeader h{};
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  if (!in || in.gcount() != sizeof(h)) fail(ErrorKind::format, "truncated header in " + path);
  if (std::memcmp(h.magic, kMagic, 8) != 0) fail(ErrorKind::format, "bad magic in " + path);
  if (h.d < 1 || h.d > 3 || h.n < 2 || (h.n & (h.n - 1)) != 0 || h.rep > 1)
    fail(ErrorKind::format, "bad header fields in " + path);
  Grid g(static_cast<int>(h.d), static_cast<int>(h.n), h.box);
  std::vector<complexd> values(g.size());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(g.size() * sizeof(complexd)));
  if (!in || in.gcount() != static_cast<std::streamsize>(g.size() * sizeof(complexd)))
    fail(ErrorKind::format, "truncated payload in " + path);
  return Field(g, h.rep == 0 ? Rep::physical : Rep::frequency, std::move(values));
}

} // namespace uhs
