#include "haptix/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

namespace haptix::stats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sum_sq_dev(std::span<const double> v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

void check_groups(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw std::invalid_argument("need at least 2 groups");
  for (const auto& g : groups) {
    if (g.size() < 2) throw std::invalid_argument("every group needs at least 2 samples");
    for (double x : g)
      if (!std::isfinite(x)) throw std::invalid_argument("samples must be finite");
  }
}

// Integral of the beta(a, b) density over [0, x], x <= 0.5 region handled by caller.
double lower_beta_integral(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  auto density = [&](double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp(log_norm + (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t));
  };

  // Break points around the mode keep a narrow peak from being stepped over.
  const double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
  const double mode = (a > 1.0 && b > 1.0) ? (a - 1.0) / (a + b - 2.0) : a / (a + b);
  std::vector<double> pts{0.0};
  for (double k : {-12.0, -4.0, -1.0, 0.0, 1.0, 4.0, 12.0}) {
    const double p = mode + k * sd;
    if (p > pts.back() && p < x) pts.push_back(p);
  }
  pts.push_back(x);

  boost::math::quadrature::tanh_sinh<double> ts(15);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (i == 0) {
      total += ts.integrate(density, pts[0], pts[1], 1e-13);
    } else {
      total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(density, pts[i], pts[i + 1], 15, 1e-13);
    }
  }
  return total;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// P(range of k iid standard normals < w).
double range_cdf(double w, std::size_t k) {
  if (w <= 0.0) return 0.0;
  const double km1 = static_cast<double>(k - 1);
  auto f = [&](double z) {
    const double d = normal_cdf(z) - normal_cdf(z - w);
    return d <= 0.0 ? 0.0 : normal_pdf(z) * std::pow(d, km1);
  };
  // phi(z) is negligible outside [-9, 9].
  const double hi = 9.0;
  const double mid = std::min(hi, 0.5 * w);
  double v = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  v += GK::integrate(f, -9.0, mid, 12, 1e-13);
  if (mid < hi) v += GK::integrate(f, mid, hi, 12, 1e-13);
  return std::clamp(static_cast<double>(k) * v, 0.0, 1.0);
}

}  // namespace

double regularized_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta parameters must be positive");
  if (std::isnan(x)) throw std::invalid_argument("x is NaN");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x <= 0.5) return std::clamp(lower_beta_integral(x, a, b), 0.0, 1.0);
  return std::clamp(1.0 - lower_beta_integral(1.0 - x, b, a), 0.0, 1.0);
}

double f_sf(double f, double d1, double d2) {
  if (std::isnan(f)) throw std::invalid_argument("F is NaN");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return regularized_beta(d2 / (d2 + d1 * f), 0.5 * d2, 0.5 * d1);
}

double t_two_sided_p(double t, double df) {
  if (std::isnan(t)) throw std::invalid_argument("t is NaN");
  if (std::isinf(t)) return 0.0;
  return regularized_beta(df / (df + t * t), 0.5 * df, 0.5);
}

double ptukey(double q, std::size_t k, double df) {
  if (k < 2) throw std::invalid_argument("studentized range needs k >= 2");
  if (!(df > 0.0)) throw std::invalid_argument("df must be positive");
  if (std::isnan(q)) throw std::invalid_argument("q is NaN");
  if (q <= 0.0) return 0.0;
  if (std::isinf(q)) return 1.0;
  if (std::isinf(df) || df > 1e5) return range_cdf(q, k);

  // Mix over s = sqrt(chi2_df / df): P(Q < q) = E[range_cdf(q s)].
  const double log_c = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::numbers::ln2;
  auto f = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double dens = std::exp(log_c + (df - 1.0) * std::log(s) - 0.5 * df * s * s);
    return dens == 0.0 ? 0.0 : dens * range_cdf(q * s, k);
  };
  const double spread = 1.0 / std::sqrt(2.0 * df);
  std::vector<double> pts{0.0};
  for (double m : {-8.0, -3.0, 0.0, 3.0, 8.0, 16.0}) {
    const double p = 1.0 + m * spread;
    if (p > pts.back()) pts.push_back(p);
  }
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += GK::integrate(f, pts[i], pts[i + 1], 10, 1e-12);
  total += GK::integrate(f, pts.back(), kInf, 10, 1e-12);
  return std::clamp(total, 0.0, 1.0);
}

double tukey_sf(double q, std::size_t k, double df) { return 1.0 - ptukey(q, k, df); }

double qtukey(double p, std::size_t k, double df) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
  auto g = [&](double q) { return ptukey(q, k, df) - p; };
  double lo = 0.0, hi = 1.0;
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) throw std::domain_error("qtukey failed to bracket");
  }
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(48), iters);
  return 0.5 * (r.first + r.second);
}

AnovaResult anova_oneway(std::span<const std::vector<double>> groups) {
  check_groups(groups);
  std::size_t n = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    n += g.size();
    for (double x : g) grand += x;
  }
  grand /= static_cast<double>(n);

  AnovaResult r;
  for (const auto& g : groups) {
    const double m = mean_of(g);
    r.ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    r.ss_within += sum_sq_dev(g, m);
  }
  r.df_between = groups.size() - 1;
  r.df_within = n - groups.size();
  // Round-off from centring constant data is not variance.
  const double scale = std::max(1.0, grand * grand) * static_cast<double>(n) * 1e-24;
  const bool no_between = r.ss_between <= scale;
  const bool no_within = r.ss_within <= scale;
  if (no_between && no_within) {
    r.degenerate = true;
    r.F = 0.0;
    r.p = 1.0;
    return r;
  }
  if (no_within) {
    r.F = kInf;
    r.p = 0.0;
    return r;
  }
  const double msb = r.ss_between / static_cast<double>(r.df_between);
  const double msw = r.ss_within / static_cast<double>(r.df_within);
  r.F = msb / msw;
  r.p = f_sf(r.F, static_cast<double>(r.df_between), static_cast<double>(r.df_within));
  return r;
}

TukeyResult tukey_hsd(std::span<const std::vector<double>> groups, double alpha) {
  check_groups(groups);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const std::size_t k = groups.size();
  std::vector<double> means(k);
  std::size_t n = 0;
  double ssw = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    means[g] = mean_of(groups[g]);
    ssw += sum_sq_dev(groups[g], means[g]);
    n += groups[g].size();
  }
  TukeyResult r;
  r.df_within = n - k;
  r.ms_within = ssw / static_cast<double>(r.df_within);
  r.degenerate = r.ms_within == 0.0;
  const double df = static_cast<double>(r.df_within);

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      TukeyPair p;
      p.i = i;
      p.j = j;
      p.mean_diff = means[i] - means[j];
      const double se = std::sqrt(0.5 * r.ms_within *
                                  (1.0 / static_cast<double>(groups[i].size()) +
                                   1.0 / static_cast<double>(groups[j].size())));
      if (p.mean_diff == 0.0) {
        p.q = 0.0;
        p.p = 1.0;
      } else if (se == 0.0) {
        p.q = kInf;
        p.p = 0.0;
      } else {
        p.q = std::abs(p.mean_diff) / se;
        p.p = std::clamp(tukey_sf(p.q, k, df), 0.0, 1.0);
      }
      p.significant = p.p < alpha;
      r.pairs.push_back(p);
    }
  }
  return r;
}

TTestResult ttest_2tailed(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("each sample needs at least 2 values");
  for (auto v : {a, b})
    for (double x : v)
      if (!std::isfinite(x)) throw std::invalid_argument("samples must be finite");

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double raw_va = sum_sq_dev(a, ma) / (na - 1.0);
  const double raw_vb = sum_sq_dev(b, mb) / (nb - 1.0);

  TTestResult r;
  if (ma == mb) {
    r.degenerate = raw_va == 0.0 && raw_vb == 0.0;
    r.t = 0.0;
    r.p = 1.0;
    r.df = na + nb - 2.0;
    return r;
  }
  const double va = std::max(raw_va, kVarianceFloor) / na;
  const double vb = std::max(raw_vb, kVarianceFloor) / nb;
  r.t = (ma - mb) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p = t_two_sided_p(r.t, r.df);
  return r;
}

}  // namespace haptix::stats
