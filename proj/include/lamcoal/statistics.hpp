#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lamcoal {

/// sup_x |F_a(x) - F_b(x)| for the empirical CDFs; ties are handled exactly.
double two_sample_ks(std::span<const double> a, std::span<const double> b);

/// P(D > d) under the null for the two-sample statistic, from the
/// asymptotic Kolmogorov distribution with effective size nm/(n+m).
double ks_pvalue(double d, std::size_t n, std::size_t m);

/// Statistic exceeded with probability `level` under the null (asymptotic).
double ks_critical(std::size_t n, std::size_t m, double level);

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> x);

/// Linear interpolation between order statistics (type 7).
double quantile(std::vector<double> x, double p);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);
/// Least squares on (log x, log y); every value must be positive.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace lamcoal
