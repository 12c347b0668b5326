#pragma once

#include <functional>
#include <span>
#include <vector>

namespace palmdpp {

struct KsResult {
  double statistic = 0.0;
  double pValue = 1.0;
};

/// Asymptotic Kolmogorov tail Q(lambda) = 2 sum_k (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// Two-sample Kolmogorov-Smirnov test with the Stephens small-sample
/// correction of the effective size.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
/// One-sample test against a continuous CDF.
KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double pValue = 1.0;
};

/// Pearson chi-square of observed counts against expected counts (same total),
/// dof = bins - 1.
ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected);

struct VarianceEstimate {
  double variance = 0.0;
  double standardError = 0.0;
};

/// Unbiased sample variance and the large-sample standard error
/// sqrt((m4 - s^4) / n).
VarianceEstimate sample_variance(std::span<const double> x);

/// (a - b) / sqrt(sa^2 + sb^2); 0 when both errors vanish and a == b.
double z_score(double a, double sa, double b, double sb);

}  // namespace palmdpp
