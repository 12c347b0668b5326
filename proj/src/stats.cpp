#include "palmdpp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>

#include "palmdpp/errors.hpp"
#include "palmdpp/parallel.hpp"

namespace palmdpp {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  // Small lambda: the series converges slowly, use the theta-function dual.
  if (lambda < 1.0) {
    const double x = -(std::numbers::pi * std::numbers::pi) / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 50; k += 2) s += std::exp(k * k * x);
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * t;
    if (t < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("KS test needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw PreconditionError("KS test needs a non-empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  const double ne = std::sqrt(n);
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.size() < 2)
    throw PreconditionError("chi-square needs matching bins, at least two");
  ChiSquareResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) throw PreconditionError("chi-square expected counts must be positive");
    const double d = observed[i] - expected[i];
    r.statistic += d * d / expected[i];
  }
  r.dof = static_cast<int>(observed.size()) - 1;
  boost::math::chi_squared dist(r.dof);
  r.pValue = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

VarianceEstimate sample_variance(std::span<const double> x) {
  if (x.size() < 4) throw PreconditionError("sample variance needs at least four values");
  const double n = static_cast<double>(x.size());
  const double mean = pairwise_sum(x.data(), x.size()) / n;
  std::vector<double> d2(x.size()), d4(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = pairwise_sum(d2) / n;
  const double m4 = pairwise_sum(d4) / n;
  return {m2 * n / (n - 1.0), std::sqrt(std::max(0.0, m4 - m2 * m2) / n)};
}

double z_score(double a, double sa, double b, double sb) {
  const double s = std::sqrt(sa * sa + sb * sb);
  if (s == 0.0) return a == b ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), a - b);
  return (a - b) / s;
}

}  // namespace palmdpp
