#pragma once

#include <string>

#include "tensopt/verify/workload.hpp"

namespace tensopt::bench {

/// Unoptimized int8 convolution with int32 bias for a 16x16 accelerator: one
/// output row (all out_spatial columns) per 16-channel output tile, summing
/// kernel taps and 16-channel input slices into the accumulator. Needs
/// out_spatial <= 16 and in_ch, out_ch multiples of 16.
std::string conv_unopt(const verify::ConvDims& d);

}  // namespace tensopt::bench
