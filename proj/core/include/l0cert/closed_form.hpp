#pragma once

#include <optional>
#include <span>

namespace l0cert {

// Uniform box randomization on [x - gamma, x + gamma]^d over continuous
// inputs. Unlike the discrete certificates, these are closed forms and live
// happily in floating point: nothing downstream certifies against them.
struct UniformParams {
  double gamma = 1.0;
  int d = 1;
};

enum class UniformNorm { l1, linf };

// Certified radius of the smoothed classifier under uniform noise, for the
// l1 norm (2*p*gamma - gamma, independent of d) or the l-infinity norm
// (2*gamma - 2*gamma*(1.5 - p)^(1/d)). p must lie in [0, 1]; p <= 0.5 means
// the vote is not even a majority, reported as abstain (nullopt).
std::optional<double> uniform_radius(const UniformParams& params, double p, UniformNorm norm);

// Point-wise bound for a concrete offset delta: the worst case classifies all
// mass outside the overlap of the two noise boxes against the vote, so
// rho = max(0, p - (1 - overlap)) with overlap = prod_i max(0, 2*gamma -
// |delta_i|) / (2*gamma)^d.
double uniform_pointwise_numeric(const UniformParams& params, double p,
                                 std::span<const double> offset);

// Standard normal quantile, |error| <= 1e-9 over p in (0, 1). A rational
// approximation (Acklam's) refined by one Newton step on the CDF.
double std_normal_quantile(double p);

// Standard normal CDF via erfc.
double std_normal_cdf(double x);

// Correspondence between Gaussian smoothing N(0, sigma^2 I) and the discrete
// noise: both flip a coordinate across the halfway mark with the same
// probability when alpha = Phi(0.5 / sigma). Requires sigma > 0 on one side
// and alpha in (0.5, 1) on the other.
struct GaussianBaseline {
  double sigma = 1.0;
  double alpha = 0.5;

  static GaussianBaseline from_sigma(double sigma);
  static GaussianBaseline from_alpha(double alpha);
};

// l0 radius implied by the Gaussian l2 certificate sigma * Phi^-1(p) on binary
// inputs, where flipping r coordinates moves the input by sqrt(r) in l2: the
// largest integer r with sqrt(r) < sigma * Phi^-1(p), i.e.
// ceil((sigma * Phi^-1(p))^2) - 1, clamped at 0. Requires 0.5 <= p < 1.
int gaussian_l0_radius(double sigma, double p);

}  // namespace l0cert
