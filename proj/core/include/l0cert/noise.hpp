#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "l0cert/rational.hpp"

namespace l0cert {

// Input domain and randomization. Inputs live on the grid {0, 1/K, ..., 1}^d,
// stored as integer levels 0..K. Each coordinate is kept with probability
// alpha and otherwise replaced by a uniform draw over the K other levels.
// alpha is restricted to whole percents so all downstream mass computations
// stay rational: alpha = alpha_pct/100, beta = (1 - alpha)/K.
struct NoiseParams {
  int d = 1;
  int K = 1;
  int alpha_pct = 80;
};

// Throws validation_error unless d >= 1, K >= 1 and 1 <= alpha_pct <= 99.
void validate(const NoiseParams& params);

Rational alpha(const NoiseParams& params);
Rational beta(const NoiseParams& params);

using Point = std::vector<int>;

// One noisy draw. Deterministic in (params, x, seed); a fixed seed gives an
// identical point on every call. Coordinates outside 0..K are rejected.
Point sample(const NoiseParams& params, std::span<const int> x, std::uint64_t seed);

// Number of differing coordinates. The likelihood of observing z under noise
// centered at x is alpha^(d-u) * beta^u where u = hamming_distance(x, z), so
// this count is the whole sufficient statistic of the noise model.
int hamming_distance(std::span<const int> a, std::span<const int> b);

}  // namespace l0cert
