#include "lamcoal/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "lamcoal/errors.hpp"

namespace lamcoal {

double two_sample_ks(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("two_sample_ks: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  for (double v : x)
    if (std::isnan(v)) throw DomainError("two_sample_ks: NaN in sample");
  for (double v : y)
    if (std::isnan(v)) throw DomainError("two_sample_ks: NaN in sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double ks_pvalue(double d, std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw DomainError("ks_pvalue: empty sample");
  const double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_critical(std::size_t n, std::size_t m, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("ks_critical: level must lie in (0,1)");
  // ks_pvalue is decreasing in d; invert it by bisection on [0, 1].
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ks_pvalue(mid, n, m) > level ? lo : hi) = mid;
  }
  return hi;
}

Summary summarize(std::span<const double> x) {
  Summary s;
  s.n = x.size();
  if (x.empty()) return s;
  s.min = *std::min_element(x.begin(), x.end());
  s.max = *std::max_element(x.begin(), x.end());
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double v : x) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  s.mean = mean;
  s.sd = x.size() > 1 ? std::sqrt(m2 / static_cast<double>(x.size() - 1)) : 0.0;
  return s;
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw DomainError("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p must lie in [0,1]");
  std::sort(x.begin(), x.end());
  const double h = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(i < y.size() && y[i] > 0.0))
      throw DomainError("fit_loglog: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

}  // namespace lamcoal
