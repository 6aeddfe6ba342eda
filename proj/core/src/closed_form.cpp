#include "l0cert/closed_form.hpp"

#include <cmath>
#include <string>

#include "l0cert/errors.hpp"

namespace l0cert {

std::optional<double> uniform_radius(const UniformParams& params, double p, UniformNorm norm) {
  if (params.gamma <= 0.0) throw validation_error("uniform_radius: gamma must be positive");
  if (params.d < 1) throw validation_error("uniform_radius: d must be >= 1");
  if (!(p >= 0.0) || p > 1.0) throw validation_error("uniform_radius: p outside [0, 1]");
  if (p <= 0.5) return std::nullopt;
  double radius;
  if (norm == UniformNorm::l1) {
    radius = 2.0 * p * params.gamma - params.gamma;
  } else {
    radius = 2.0 * params.gamma -
             2.0 * params.gamma * std::pow(1.5 - p, 1.0 / static_cast<double>(params.d));
  }
  return std::max(0.0, radius);
}

double uniform_pointwise_numeric(const UniformParams& params, double p,
                                 std::span<const double> offset) {
  if (params.gamma <= 0.0)
    throw validation_error("uniform_pointwise_numeric: gamma must be positive");
  if (static_cast<int>(offset.size()) != params.d)
    throw validation_error("uniform_pointwise_numeric: offset has dimension " +
                           std::to_string(offset.size()) + ", expected " +
                           std::to_string(params.d));
  if (p < 0.0 || p > 1.0) throw validation_error("uniform_pointwise_numeric: p outside [0, 1]");
  const double width = 2.0 * params.gamma;
  double overlap = 1.0;
  for (double delta : offset) overlap *= std::max(0.0, width - std::fabs(delta)) / width;
  return std::max(0.0, p - (1.0 - overlap));
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw validation_error("std_normal_quantile: p outside (0, 1)");

  // Acklam's rational approximation, |relative error| < 1.15e-9 on its own.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }

  // One Newton step against the erfc-based CDF lands well below the 1e-9
  // target everywhere the density is representable.
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  if (pdf > 0.0) x -= (std_normal_cdf(x) - p) / pdf;
  return x;
}

GaussianBaseline GaussianBaseline::from_sigma(double sigma) {
  if (!(sigma > 0.0)) throw validation_error("GaussianBaseline: sigma must be positive");
  return {sigma, std_normal_cdf(0.5 / sigma)};
}

GaussianBaseline GaussianBaseline::from_alpha(double alpha) {
  if (!(alpha > 0.5) || !(alpha < 1.0))
    throw validation_error("GaussianBaseline: alpha outside (0.5, 1)");
  return {0.5 / std_normal_quantile(alpha), alpha};
}

int gaussian_l0_radius(double sigma, double p) {
  if (!(sigma > 0.0)) throw validation_error("gaussian_l0_radius: sigma must be positive");
  if (p < 0.5 || !(p < 1.0)) throw validation_error("gaussian_l0_radius: p outside [0.5, 1)");
  const double l2 = sigma * std_normal_quantile(p);
  if (l2 <= 0.0) return 0;
  const double r = std::ceil(l2 * l2) - 1.0;
  return r < 0.0 ? 0 : static_cast<int>(r);
}

}  // namespace l0cert
