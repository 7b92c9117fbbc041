#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace semiclass::fft {

namespace {

std::mutex g_plan_mutex;  // fftw_plan_dft is not thread-safe

struct PlanSlot {
  fftw_plan plan = nullptr;
  fftw_complex* buf = nullptr;
  size_t size = 0;
  ~PlanSlot() {
    if (plan) fftw_destroy_plan(plan);
    if (buf) fftw_free(buf);
  }
};

using Key = std::pair<std::vector<int>, int>;

PlanSlot& get_slot(const std::vector<int>& dims, int sign) {
  thread_local std::map<Key, PlanSlot> cache;
  Key key{dims, sign};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  PlanSlot& slot = cache[key];
  size_t total = 1;
  for (int d : dims) total *= size_t(d);
  slot.size = total;
  slot.buf = fftw_alloc_complex(total);
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  slot.plan = fftw_plan_dft(int(dims.size()), dims.data(), slot.buf, slot.buf,
                            sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!slot.plan) fail(SC_ERR_INTERNAL, "fftw plan creation failed");
  return slot;
}

}  // namespace

void transform(std::vector<cplx>& data, const std::vector<int>& dims, int sign) {
  size_t total = 1;
  for (int d : dims) {
    if (d < 2) fail(SC_ERR_ARGUMENT, "fft: dims must be >= 2");
    total *= size_t(d);
  }
  if (data.size() != total) fail(SC_ERR_ARGUMENT, "fft: data size mismatch");
  PlanSlot& slot = get_slot(dims, sign);
  // std::complex<double> is layout-compatible with fftw_complex
  std::memcpy(static_cast<void*>(slot.buf), static_cast<const void*>(data.data()),
              total * sizeof(cplx));
  fftw_execute(slot.plan);
  std::memcpy(static_cast<void*>(data.data()), static_cast<const void*>(slot.buf),
              total * sizeof(cplx));
}

}  // namespace semiclass::fft
