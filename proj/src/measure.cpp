#include "lamcoal/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "lamcoal/errors.hpp"

namespace lamcoal {

namespace {

double log_beta(double x, double y) {
  return boost::math::lgamma(x) + boost::math::lgamma(y) - boost::math::lgamma(x + y);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }

// Tabulated density helpers.
double tab_g(const TabulatedDensity& t, double y) {
  const auto& ys = t.y;
  const auto& gs = t.g;
  if (y < ys.front()) {
    const double s0 = std::pow(ys.front(), t.beta) * gs.front();
    const double s = t.A + (s0 - t.A) * (y / ys.front());
    return s * std::pow(y, -t.beta);
  }
  if (y >= ys.back()) return gs.back();
  const auto it = std::upper_bound(ys.begin(), ys.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - ys.begin()) - 1;
  const double y1 = ys[i], y2 = ys[i + 1], g1 = gs[i], g2 = gs[i + 1];
  if (y2 <= t.y0 && g1 > 0.0 && g2 > 0.0) {
    const double w = std::log(y / y1) / std::log(y2 / y1);
    return std::exp(std::log(g1) + w * std::log(g2 / g1));
  }
  const double w = (y - y1) / (y2 - y1);
  return g1 + w * (g2 - g1);
}

double tab_scaled(const TabulatedDensity& t, double y) {
  if (y < t.y.front()) {
    const double s0 = std::pow(t.y.front(), t.beta) * t.g.front();
    return t.A + (s0 - t.A) * (y / t.y.front());
  }
  return std::pow(y, t.beta) * tab_g(t, y);
}

double tab_bound(const TabulatedDensity& t, double lo, double hi) {
  std::vector<double> pts{lo, hi};
  for (double y : t.y)
    if (y > lo && y < hi) pts.push_back(y);
  if (t.y0 > lo && t.y0 < hi) pts.push_back(t.y0);
  std::sort(pts.begin(), pts.end());
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double u = pts[i], w = pts[i + 1];
    if (w <= t.y.front()) {
      m = std::max({m, tab_scaled(t, u), tab_scaled(t, w)});
    } else {
      m = std::max(m, std::pow(w, t.beta) * std::max(tab_g(t, u), tab_g(t, w)));
    }
  }
  return m;
}

}  // namespace

std::string LambdaSpec::kind_name() const {
  switch (kind.index()) {
    case 0: return "beta";
    case 1: return "perturbed_power";
    default: return "tabulated";
  }
}

namespace detail {

double scaled_density(const LambdaSpec& spec, double y) {
  switch (spec.kind.index()) {
    case 0: {
      const auto& k = std::get<BetaFamily>(spec.kind);
      return std::exp(-spec.log_norm + (k.a - 1.0) * std::log1p(-y));
    }
    case 1: {
      const auto& k = std::get<PerturbedPower>(spec.kind);
      return k.c0 + k.c1 * std::pow(y, k.alpha);
    }
    default:
      return tab_scaled(std::get<TabulatedDensity>(spec.kind), y);
  }
}

double density(const LambdaSpec& spec, double y) {
  if (spec.kind.index() == 2) return tab_g(std::get<TabulatedDensity>(spec.kind), y);
  return scaled_density(spec, y) * std::pow(y, -spec.beta);
}

}  // namespace detail

double lambda_density(const LambdaSpec& spec, double y) {
  if (!in_open_unit(y)) {
    std::ostringstream os;
    os << "lambda_density: y = " << y << " is outside (0,1)";
    throw DomainError(os.str());
  }
  return detail::density(spec, y);
}

double scaled_density_bound(const LambdaSpec& spec, double lo, double hi) {
  constexpr double pad = 1.0 + 1e-12;
  switch (spec.kind.index()) {
    case 0: {
      const auto& k = std::get<BetaFamily>(spec.kind);
      if (k.a < 1.0 && hi >= 1.0) return std::numeric_limits<double>::infinity();
      return pad * detail::scaled_density(spec, k.a >= 1.0 ? lo : hi);
    }
    case 1:
      return pad * std::max(detail::scaled_density(spec, lo), detail::scaled_density(spec, hi));
    default:
      return pad * tab_bound(std::get<TabulatedDensity>(spec.kind), lo, hi);
  }
}

quad::Result integrate_density(const LambdaSpec& spec, const std::function<double(double)>& f,
                               double lo, double hi, double rel_tol,
                               std::span<const double> hints) {
  quad::Result total;
  if (!(hi > lo)) return total;
  const double beta = spec.beta;

  // Interpolated densities have kinks at their nodes.
  const std::vector<double>* nodes =
      spec.kind.index() == 2 ? &std::get<TabulatedDensity>(spec.kind).y : nullptr;

  double a = lo;
  if (lo <= 0.0) {
    double s = std::min({hi, 0.5, spec.y0});
    for (double h : hints)
      if (h > 0.0) s = std::min(s, h);
    if (nodes && !nodes->empty()) s = std::min(s, nodes->front());
    total += quad::tanh_sinh(
        [&](double y) { return y > 0.0 ? f(y) * detail::density(spec, y) : 0.0; }, 0.0, s,
        rel_tol);
    a = s;
  }

  double b = hi;
  // BetaFamily carries (1-y)^{a-1}, which is not smooth at 1 unless a = 1;
  // that piece is integrated in u = 1 - y so that u is exact near 0.
  const bool beta_top = spec.kind.index() == 0 && hi >= 1.0 &&
                        std::get<BetaFamily>(spec.kind).a != 1.0;
  if (beta_top) {
    const double l = std::max(a, 0.5);
    if (l < 1.0) {
      const double ka = std::get<BetaFamily>(spec.kind).a;
      const double norm = std::exp(-spec.log_norm);
      total += quad::tanh_sinh(
          [&](double u) {
            if (u <= 0.0) return 0.0;
            const double y = 1.0 - u;
            return f(y) * norm * std::pow(y, -beta) * std::pow(u, ka - 1.0);
          },
          0.0, 1.0 - l, rel_tol);
    }
    b = l;
  }

  if (b > a) {
    std::vector<double> pts{a, b};
    auto add = [&](double y) {
      if (y > a && y < b) pts.push_back(y);
    };
    for (double h : hints) add(h);
    if (nodes)
      for (double y : *nodes) add(y);
    add(spec.y0);
    add(0.5);
    if (a > 0.0)
      for (double d = std::pow(10.0, std::ceil(std::log10(a))); d < b; d *= 10.0) add(d);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double u = pts[i], w = pts[i + 1];
      if (u > 0.0 && w / u > 1.5) {
        total += quad::gauss_kronrod(
            [&](double t) {
              const double y = std::exp(t);
              return f(y) * detail::density(spec, y) * y;
            },
            std::log(u), std::log(w), rel_tol);
      } else {
        total += quad::gauss_kronrod(
            [&](double y) { return f(y) * detail::density(spec, y); }, u, w, rel_tol);
      }
    }
  }
  return total;
}

double lambda_mass(const LambdaSpec& spec, double lo, double hi, const Tolerances& tol) {
  require(lo >= 0.0 && hi <= 1.0 && lo <= hi, "lambda_mass: need 0 <= lo <= hi <= 1");
  const auto r = integrate_density(spec, [](double) { return 1.0; }, lo, hi, 1e-13);
  quad::require_converged(r, tol.mass_rel, 0.0, "lambda_mass");
  return r.value;
}

LambdaSpec make_lambda(const LambdaKind& kind, std::span<const Atom> atoms,
                       const Tolerances& tol) {
  for (const auto& atom : atoms) {
    if (atom.mass == 0.0) continue;
    std::ostringstream os;
    if (atom.at == 0.0)
      os << "atom at 0 (mass " << atom.mass << ") is not supported: Λ({0}) must be 0";
    else if (atom.at == 1.0)
      os << "atom at 1 (mass " << atom.mass << ") is not supported: Λ({1}) must be 0";
    else
      os << "atom at " << atom.at << " is not supported: only absolutely continuous Λ";
    throw DomainError(os.str());
  }

  LambdaSpec spec;
  spec.kind = kind;
  double expected_mass = std::numeric_limits<double>::quiet_NaN();

  switch (kind.index()) {
    case 0: {
      const auto& k = std::get<BetaFamily>(kind);
      require(in_open_unit(k.beta), "beta must lie in (0,1)");
      require(k.a > 0.0 && std::isfinite(k.a), "a must be positive");
      spec.beta = k.beta;
      spec.log_norm = log_beta(1.0 - k.beta, k.a);
      spec.A = std::exp(-spec.log_norm);
      spec.y0 = 1.0;
      spec.upper_exponent = std::max(0.0, 1.0 - k.a);
      expected_mass = 1.0;
      break;
    }
    case 1: {
      const auto& k = std::get<PerturbedPower>(kind);
      require(in_open_unit(k.beta), "beta must lie in (0,1)");
      require(k.alpha > 0.0 && std::isfinite(k.alpha), "alpha must be positive");
      require(k.c0 > 0.0 && std::isfinite(k.c0), "c0 must be positive (it is the limit A)");
      require(std::isfinite(k.c1), "c1 must be finite");
      spec.beta = k.beta;
      spec.A = k.c0;
      spec.y0 = 1.0;
      expected_mass = k.c0 / (1.0 - k.beta) + k.c1 / (1.0 + k.alpha - k.beta);
      break;
    }
    default: {
      const auto& k = std::get<TabulatedDensity>(kind);
      require(in_open_unit(k.beta), "beta must lie in (0,1)");
      require(k.A > 0.0 && std::isfinite(k.A), "A must be positive");
      require(k.y0 > 0.0 && k.y0 <= 1.0, "y0 must lie in (0,1]");
      require(k.y.size() >= 2 && k.y.size() == k.g.size(),
              "tabulated density needs at least two (y, g) nodes of equal length");
      for (std::size_t i = 0; i < k.y.size(); ++i) {
        require(in_open_unit(k.y[i]), "tabulated nodes must lie in (0,1)");
        require(i == 0 || k.y[i] > k.y[i - 1], "tabulated nodes must be strictly increasing");
        require(k.g[i] >= 0.0 && std::isfinite(k.g[i]),
                "negative or non-finite tabulated density value");
      }
      spec.beta = k.beta;
      spec.A = k.A;
      spec.y0 = k.y0;
      break;
    }
  }

  // Nonnegativity on a validation grid, including points close to both ends.
  constexpr int grid = 2000;
  for (int i = 0; i <= grid; ++i) {
    const double y = std::pow(10.0, -12.0 + 12.0 * i / grid);
    for (double z : {y, 1.0 - y}) {
      if (!in_open_unit(z)) continue;
      const double g = detail::density(spec, z);
      if (!(g >= 0.0) || std::isnan(g)) {
        std::ostringstream os;
        os << "density is negative or undefined at y = " << z << " (g = " << g << ")";
        throw DomainError(os.str());
      }
    }
  }

  const auto r = integrate_density(spec, [](double) { return 1.0; }, 0.0, 1.0, 1e-13);
  quad::require_converged(r, tol.mass_rel, 0.0, "total mass");
  if (std::isnan(expected_mass)) {
    spec.total_mass = r.value;
  } else {
    if (std::abs(r.value - expected_mass) > tol.mass_rel * std::abs(expected_mass)) {
      std::ostringstream os;
      os.precision(17);
      os << "total mass by quadrature " << r.value << " disagrees with closed form "
         << expected_mass;
      throw NumericError(os.str());
    }
    spec.total_mass = expected_mass;
  }
  require(spec.total_mass > 0.0, "measure has zero total mass");
  return spec;
}

LambdaSpec make_beta(double beta, double a) { return make_lambda(BetaFamily{beta, a}); }

LambdaSpec make_perturbed_power(double beta, double alpha, double c0, double c1) {
  return make_lambda(PerturbedPower{beta, alpha, c0, c1});
}

namespace {

void check_bk(std::int64_t b, std::int64_t k) {
  if (b < 2 || k < 2 || k > b) {
    std::ostringstream os;
    os << "merge rate needs 2 <= k <= b, got b = " << b << ", k = " << k;
    throw DomainError(os.str());
  }
}

// log C(b,k) + log B(k-1-β', b-k+a') for k = 2..b by the ratio recurrence.
std::vector<double> log_beta_kernel(std::int64_t b, double beta, double a) {
  std::vector<double> out(static_cast<std::size_t>(b - 1));
  const double bd = static_cast<double>(b);
  out[0] = std::log(bd * (bd - 1.0) / 2.0) + log_beta(1.0 - beta, bd - 2.0 + a);
  for (std::int64_t k = 2; k < b; ++k) {
    const double kd = static_cast<double>(k);
    out[static_cast<std::size_t>(k - 1)] =
        out[static_cast<std::size_t>(k - 2)] +
        std::log((bd - kd) * (kd - 1.0 - beta) / ((kd + 1.0) * (bd - kd - 1.0 + a)));
  }
  return out;
}

}  // namespace

double merge_rate(const LambdaSpec& spec, std::int64_t b, std::int64_t k,
                  const Tolerances& tol) {
  check_bk(b, k);
  if (spec.kind.index() == 0) {
    const auto& f = std::get<BetaFamily>(spec.kind);
    return std::exp(log_beta(static_cast<double>(k) - 1.0 - f.beta,
                             static_cast<double>(b - k) + f.a) -
                    spec.log_norm);
  }
  return merge_rate_quadrature(spec, b, k, tol);
}

double merge_rate_quadrature(const LambdaSpec& spec, std::int64_t b, std::int64_t k,
                             const Tolerances& tol) {
  check_bk(b, k);
  const double km2 = static_cast<double>(k - 2);
  const double bmk = static_cast<double>(b - k);
  auto f = [=](double y) {
    double l = 0.0;
    if (km2 > 0.0) l += km2 * std::log(y);
    if (bmk > 0.0) l += bmk * std::log1p(-y);
    return std::exp(l);
  };
  std::vector<double> hints{1.0 / static_cast<double>(b)};
  if (k > 2) {
    const double mode = (km2 - spec.beta) / (static_cast<double>(b) - 2.0 - spec.beta);
    if (in_open_unit(mode)) hints.push_back(mode);
  }
  const auto r = integrate_density(spec, f, 0.0, 1.0, tol.merge_rate_rel * 1e-2, hints);
  quad::require_converged(r, tol.merge_rate_rel, 0.0, "merge_rate");
  return r.value;
}

double MergeKernel::decrease_rate() const {
  double s = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) s += static_cast<double>(i + 1) * rates[i];
  return s;
}

MergeKernel merge_kernel(const LambdaSpec& spec, std::int64_t b, const Tolerances& tol) {
  if (b < 2) throw DomainError("merge_kernel needs b >= 2");
  if (b > tol.n_max) {
    std::ostringstream os;
    os << "merge_kernel: b = " << b << " exceeds N_max = " << tol.n_max;
    throw CapacityError(os.str());
  }
  MergeKernel kern;
  kern.b = b;
  kern.rates.resize(static_cast<std::size_t>(b - 1));
  switch (spec.kind.index()) {
    case 0: {
      const auto& f = std::get<BetaFamily>(spec.kind);
      const auto l = log_beta_kernel(b, f.beta, f.a);
      for (std::size_t i = 0; i < l.size(); ++i) kern.rates[i] = std::exp(l[i] - spec.log_norm);
      break;
    }
    case 1: {
      // y^{-β}(c0 + c1 y^α) is a sum of two unnormalized Beta(·, 1) densities.
      const auto& f = std::get<PerturbedPower>(spec.kind);
      const auto l0 = log_beta_kernel(b, f.beta, 1.0);
      const auto l1 = log_beta_kernel(b, f.beta - f.alpha, 1.0);
      for (std::size_t i = 0; i < l0.size(); ++i)
        kern.rates[i] = std::max(0.0, f.c0 * std::exp(l0[i]) + f.c1 * std::exp(l1[i]));
      break;
    }
    default: {
      for (std::int64_t k = 2; k <= b; ++k) {
        const double c = std::exp(boost::math::lgamma(static_cast<double>(b) + 1.0) -
                                  boost::math::lgamma(static_cast<double>(k) + 1.0) -
                                  boost::math::lgamma(static_cast<double>(b - k) + 1.0));
        kern.rates[static_cast<std::size_t>(k - 2)] = c * merge_rate_quadrature(spec, b, k, tol);
      }
      break;
    }
  }
  for (double q : kern.rates) kern.total_rate += q;
  if (!(kern.total_rate > 0.0) || !std::isfinite(kern.total_rate))
    throw NumericError("merge_kernel: all merge rates underflowed");
  kern.probabilities.resize(kern.rates.size());
  for (std::size_t i = 0; i < kern.rates.size(); ++i)
    kern.probabilities[i] = kern.rates[i] / kern.total_rate;
  return kern;
}

void to_json(nlohmann::json& j, const LambdaSpec& spec) {
  switch (spec.kind.index()) {
    case 0: {
      const auto& k = std::get<BetaFamily>(spec.kind);
      j = {{"kind", "beta"}, {"beta", k.beta}, {"a", k.a}};
      break;
    }
    case 1: {
      const auto& k = std::get<PerturbedPower>(spec.kind);
      j = {{"kind", "perturbed_power"}, {"beta", k.beta}, {"alpha", k.alpha},
           {"c0", k.c0},               {"c1", k.c1}};
      break;
    }
    default: {
      const auto& k = std::get<TabulatedDensity>(spec.kind);
      j = {{"kind", "tabulated"}, {"beta", k.beta}, {"A", k.A}, {"y0", k.y0},
           {"y", k.y},            {"g", k.g}};
      break;
    }
  }
}

LambdaSpec lambda_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("measure description must be a JSON object");
  const std::string kind = j.value("kind", "");
  std::vector<std::string> allowed{"kind", "atoms"};
  auto num = [&](const char* key, std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
      if (fallback) return *fallback;
      throw DomainError(std::string("measure description is missing \"") + key + "\"");
    }
    if (!j.at(key).is_number())
      throw DomainError(std::string("measure field \"") + key + "\" must be a number");
    return j.at(key).get<double>();
  };

  LambdaKind lk;
  if (kind == "beta") {
    allowed.insert(allowed.end(), {"beta", "a"});
    lk = BetaFamily{num("beta"), num("a")};
  } else if (kind == "perturbed_power") {
    allowed.insert(allowed.end(), {"beta", "alpha", "c0", "c1"});
    lk = PerturbedPower{num("beta"), num("alpha"), num("c0", 1.0), num("c1", 1.0)};
  } else if (kind == "tabulated") {
    allowed.insert(allowed.end(), {"beta", "A", "y0", "y", "g"});
    TabulatedDensity t;
    t.beta = num("beta");
    t.A = num("A");
    t.y0 = num("y0", 1.0);
    try {
      t.y = j.at("y").get<std::vector<double>>();
      t.g = j.at("g").get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw DomainError("tabulated measure needs numeric arrays \"y\" and \"g\"");
    }
    lk = std::move(t);
  } else {
    throw DomainError("unknown measure kind \"" + kind +
                      "\" (expected beta, perturbed_power or tabulated)");
  }
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw DomainError("unknown measure field \"" + key + "\"");

  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    if (!j.at("atoms").is_array()) throw DomainError("\"atoms\" must be an array");
    for (const auto& a : j.at("atoms")) {
      if (!a.is_object() || !a.contains("at") || !a.contains("mass"))
        throw DomainError("each atom needs \"at\" and \"mass\"");
      atoms.push_back({a.at("at").get<double>(), a.at("mass").get<double>()});
    }
  }
  return make_lambda(lk, atoms);
}

}  // namespace lamcoal
