#include "bpdo/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace bpdo::fft {

namespace {

struct PlanKey {
  std::vector<int> dims;
  int sign;
  bool operator<(const PlanKey& o) const {
    if (sign != o.sign) return sign < o.sign;
    return dims < o.dims;
  }
};

std::mutex plan_mutex;
std::map<PlanKey, fftw_plan>& plan_cache() {
  static std::map<PlanKey, fftw_plan> cache;
  return cache;
}

fftw_plan get_plan(const std::vector<int>& dims, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  PlanKey key{dims, sign};
  auto it = plan_cache().find(key);
  if (it != plan_cache().end()) return it->second;
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  fftw_complex* in = fftw_alloc_complex(total);
  fftw_complex* out = fftw_alloc_complex(total);
  fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()),
                                 const_cast<int*>(dims.data()), in, out,
                                 sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  plan_cache().emplace(key, plan);
  return plan;
}

}  // namespace

void dft(std::vector<cplx>& data, const std::vector<int>& dims, int sign) {
  std::size_t total = 1;
  for (int d : dims) {
    require(d > 0, "dft: extents must be positive");
    total *= static_cast<std::size_t>(d);
  }
  require(total == data.size(), "dft: extents do not match data size");
  fftw_plan plan = get_plan(dims, sign);
  fftw_complex* in = fftw_alloc_complex(total);
  fftw_complex* out = fftw_alloc_complex(total);
  // std::complex<double> is array-compatible with double[2] by the standard.
  std::memcpy(in, reinterpret_cast<const double*>(data.data()), total * sizeof(cplx));
  fftw_execute_dft(plan, in, out);
  std::memcpy(reinterpret_cast<double*>(data.data()), out, total * sizeof(cplx));
  fftw_free(in);
  fftw_free(out);
}

}  // namespace bpdo::fft
