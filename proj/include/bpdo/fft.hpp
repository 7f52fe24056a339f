#pragma once

#include <vector>

#include "bpdo/common.hpp"

namespace bpdo::fft {

// Unnormalized multi-dimensional DFT over the row-major array `data` with
// extents `dims`.  sign = -1: sum with e^{-2 pi i jk/N} (forward);
// sign = +1: e^{+2 pi i jk/N} (backward).  Plans are cached per (dims, sign)
// and execution is safe from concurrent threads.
void dft(std::vector<cplx>& data, const std::vector<int>& dims, int sign);

}  // namespace bpdo::fft
