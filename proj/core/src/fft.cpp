#include "uhs/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace uhs {

namespace {

// FFTW plan creation is not thread-safe; execution via fftw_execute_dft on
// fresh arrays is.  Plans are cached per (dim, n, direction) against a scratch
// buffer and executed in-place on aligned copies.
struct PlanKey {
  int d, n, sign;
  bool operator<(const PlanKey& o) const {
    return std::tie(d, n, sign) < std::tie(o.d, o.n, o.sign);
  }
};

class PlanCache {
public:
  fftw_plan get(int d, int n, int sign, fftw_complex* buf) {
    std::lock_guard<std::mutex> lock(mu_);
    PlanKey key{d, n, sign};
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    int dims[3] = {n, n, n};
    fftw_plan p = fftw_plan_dft(d, dims, buf, buf, sign, FFTW_ESTIMATE);
    plans_[key] = p;
    return p;
  }

private:
  std::mutex mu_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

struct FftwBuffer {
  explicit FftwBuffer(std::int64_t n) {
    data = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  }
  ~FftwBuffer() { fftw_free(data); }
  fftw_complex* data;
};

} // namespace

Field transform(const Field& field, Rep direction) {
  if (field.rep() == direction)
    fail(ErrorKind::structural, "field is already in the requested representation");
  const Grid& g = field.grid();
  const std::int64_t n = g.size();
  FftwBuffer buf(n);
  int sign = direction == Rep::frequency ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = cache().get(g.dim(), g.points_per_axis(), sign, buf.data);
  for (std::int64_t i = 0; i < n; ++i) {
    buf.data[i][0] = field[i].real();
    buf.data[i][1] = field[i].imag();
  }
  fftw_execute_dft(plan, buf.data, buf.data);
  double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<complexd> out(n);
  for (std::int64_t i = 0; i < n; ++i)
    out[i] = complexd(buf.data[i][0] * scale, buf.data[i][1] * scale);
  return Field(g, direction, std::move(out));
}

Field apply_multiplier(const Field& f, const std::vector<double>& m) {
  Field fh = to_frequency(f);
  for (std::int64_t i = 0; i < fh.size(); ++i) fh[i] *= m[i];
  return f.rep() == Rep::frequency ? fh : to_physical(fh);
}

Field apply_multiplier(const Field& f, const std::vector<complexd>& m) {
  Field fh = to_frequency(f);
  for (std::int64_t i = 0; i < fh.size(); ++i) fh[i] *= m[i];
  return f.rep() == Rep::frequency ? fh : to_physical(fh);
}

std::vector<double> multiplier_table(const Grid& g, const std::function<double(const std::array<double, 3>&)>& m) {
  std::vector<double> out(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) out[i] = m(g.frequency(i));
  return out;
}

std::vector<complexd> multiplier_table_c(const Grid& g, const std::function<complexd(const std::array<double, 3>&)>& m) {
  std::vector<complexd> out(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) out[i] = m(g.frequency(i));
  return out;
}

} // namespace uhs
