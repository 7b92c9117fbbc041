#pragma once

// Shared plumbing: error type with C-API status codes, deterministic RNG and
// low-discrepancy sampling, float formatting used by all report writers.

#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "semiclass/semiclass.h"

namespace semiclass {

using cplx = std::complex<double>;

struct Error : std::runtime_error {
  sc_status code;
  Error(sc_status c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

[[noreturn]] inline void fail(sc_status code, const std::string& msg) {
  throw Error(code, msg);
}

inline std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return std::string(buf);
}

// Round-trip decimal form, used for CSV/JSON so reruns are byte-identical.
inline std::string fmt_g17(double x) { return strf("%.17g", x); }

// splitmix64: tiny deterministic generator for test vectors and start vectors.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next_u64() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }      // [0,1)
  double sym() { return 2.0 * uniform() - 1.0; }                   // (-1,1)
  cplx cnormalish() { return cplx(sym(), sym()); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + int(next_u64() % uint64_t(hi - lo + 1));
  }
};

// Halton sequence in [0,1)^d; fixed index offset so sampling is a pure
// function of (d, count).
inline double halton(uint64_t index, uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= double(base);
    r += f * double(index % base);
    index /= base;
  }
  return r;
}

inline std::vector<std::vector<double>> halton_box(int dim, int count, double radius) {
  static const uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (dim > 12) fail(SC_ERR_ARGUMENT, "halton_box: dimension > 12");
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  const uint64_t offset = 17;  // skip the degenerate initial runs
  for (int i = 0; i < count; ++i)
    for (int d = 0; d < dim; ++d)
      pts[i][d] = radius * (2.0 * halton(offset + uint64_t(i), primes[d]) - 1.0);
  return pts;
}

}  // namespace semiclass
