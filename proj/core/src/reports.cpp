#include "uhs/reports.hpp"

#include <cstdio>

#include "uhs/errors.hpp"

namespace uhs {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::FILE* open_or_fail(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) fail(ErrorKind::format, "cannot open " + path + " for writing");
  return fp;
}

void stamp(std::FILE* fp, const std::string& fingerprint) {
  std::fprintf(fp, "# %s fingerprint=%s\n", toolkit_version, fingerprint.c_str());
}

} // namespace

void write_ray_csv(const Ray& ray, int dim, const std::string& path,
                   const std::string& fingerprint) {
  std::FILE* fp = open_or_fail(path);
  stamp(fp, fingerprint);
  std::fprintf(fp, "t");
  for (int a = 0; a < dim; ++a) std::fprintf(fp, ",x%d", a);
  for (int a = 0; a < dim; ++a) std::fprintf(fp, ",xi%d", a);
  std::fprintf(fp, ",hamiltonian_drift\n");
  for (std::size_t i = 0; i < ray.size(); ++i) {
    std::fprintf(fp, "%s", format_double(ray.t[i]).c_str());
    for (int a = 0; a < dim; ++a) std::fprintf(fp, ",%s", format_double(ray.x[i][a]).c_str());
    for (int a = 0; a < dim; ++a) std::fprintf(fp, ",%s", format_double(ray.xi[i][a]).c_str());
    std::fprintf(fp, ",%s\n", format_double(ray.max_drift).c_str());
  }
  std::fclose(fp);
}

void write_norm_csv(const std::vector<NormReport>& reports, const std::string& path,
                    const std::string& fingerprint) {
  std::FILE* fp = open_or_fail(path);
  stamp(fp, fingerprint);
  std::fprintf(fp, "kind,s,value,shell,contribution\n");
  for (const auto& rep : reports) {
    for (const auto& [k, c] : rep.shells)
      std::fprintf(fp, "%s,%s,%s,%d,%s\n", rep.kind.c_str(), format_double(rep.s).c_str(),
                   format_double(rep.value).c_str(), k, format_double(c).c_str());
    if (rep.shells.empty())
      std::fprintf(fp, "%s,%s,%s,,\n", rep.kind.c_str(), format_double(rep.s).c_str(),
                   format_double(rep.value).c_str());
  }
  std::fclose(fp);
}

void write_shell_csv(const std::vector<int>& shells, const std::vector<double>& measured,
                     double reference, double margin, const std::string& path,
                     const std::string& fingerprint) {
  std::FILE* fp = open_or_fail(path);
  stamp(fp, fingerprint);
  std::fprintf(fp, "k,measured,reference,margin\n");
  for (std::size_t i = 0; i < shells.size(); ++i)
    std::fprintf(fp, "%d,%s,%s,%s\n", shells[i], format_double(measured[i]).c_str(),
                 format_double(reference).c_str(), format_double(margin).c_str());
  std::fclose(fp);
}

} // namespace uhs
