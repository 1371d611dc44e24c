#pragma once

#include "bohm/core.hpp"

#include <vector>

namespace bohm::detail {

/// Unnormalized forward DFT of a row-major array in place (plans once per call).
void fft_forward(const std::vector<std::size_t>& points, std::vector<Complex>& data);

}  // namespace bohm::detail
