#include "l0cert/noise.hpp"

#include <random>
#include <string>

#include "l0cert/errors.hpp"

namespace l0cert {

void validate(const NoiseParams& params) {
  if (params.d < 1) throw validation_error("NoiseParams: d must be >= 1");
  if (params.K < 1) throw validation_error("NoiseParams: K must be >= 1");
  if (params.alpha_pct < 1 || params.alpha_pct > 99)
    throw validation_error("NoiseParams: alpha_pct must be in [1, 99]");
}

Rational alpha(const NoiseParams& params) {
  validate(params);
  return Rational(params.alpha_pct, 100);
}

Rational beta(const NoiseParams& params) {
  validate(params);
  return Rational(100 - params.alpha_pct, 100L * params.K);
}

Point sample(const NoiseParams& params, std::span<const int> x, std::uint64_t seed) {
  validate(params);
  if (static_cast<int>(x.size()) != params.d)
    throw validation_error("sample: point has dimension " + std::to_string(x.size()) +
                           ", expected " + std::to_string(params.d));
  for (int v : x)
    if (v < 0 || v > params.K)
      throw validation_error("sample: coordinate level " + std::to_string(v) +
                             " outside 0.." + std::to_string(params.K));

  // Draws are mapped with plain modulo so the stream depends only on the
  // mt19937_64 sequence, not on a library's distribution implementation.
  // The modulo bias is below 1e-17 and invisible to the statistical tests.
  std::mt19937_64 rng(seed);
  Point z(x.begin(), x.end());
  for (int i = 0; i < params.d; ++i) {
    bool keep = static_cast<int>(rng() % 100) < params.alpha_pct;
    if (keep) continue;
    int other = static_cast<int>(rng() % static_cast<std::uint64_t>(params.K));
    z[i] = other < x[i] ? other : other + 1;
  }
  return z;
}

int hamming_distance(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw validation_error("hamming_distance: dimension mismatch (" + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()) + ")");
  int u = 0;
  for (std::size_t i = 0; i < a.size(); ++i) u += a[i] != b[i];
  return u;
}

}  // namespace l0cert
