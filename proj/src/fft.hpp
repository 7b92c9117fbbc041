#pragma once

// Thin FFTW wrapper with per-thread plan caching.  Plans use FFTW_ESTIMATE so
// results are reproducible run to run; plan creation is serialized behind a
// global mutex (FFTW requirement), execution on thread-local buffers is not.

#include <complex>
#include <vector>

#include "util.hpp"

namespace semiclass::fft {

// In-place complex DFT, unnormalized, rank 1 or 2 (dims = {N} or {N0, N1},
// row-major).  sign -1 = forward (e^{-i..}), +1 = backward.
void transform(std::vector<cplx>& data, const std::vector<int>& dims, int sign);

inline void forward(std::vector<cplx>& data, const std::vector<int>& dims) {
  transform(data, dims, -1);
}
inline void backward(std::vector<cplx>& data, const std::vector<int>& dims) {
  transform(data, dims, +1);
}

}  // namespace semiclass::fft
