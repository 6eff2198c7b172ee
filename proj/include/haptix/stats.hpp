#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace haptix::stats {

// Regularized incomplete beta I_x(a, b), by adaptive quadrature of the beta
// density. Absolute error well below 1e-8 for a, b in [0.5, 1e4].
double regularized_beta(double x, double a, double b);

/// P(F > f) for the F distribution with (d1, d2) degrees of freedom.
double f_sf(double f, double d1, double d2);

/// P(|T| > |t|) for Student's t with df degrees of freedom.
double t_two_sided_p(double t, double df);

/// CDF of the studentized range for k groups and df error degrees of
/// freedom (df = infinity allowed), by double numerical integration.
double ptukey(double q, std::size_t k, double df);
double tukey_sf(double q, std::size_t k, double df);
/// Inverse of ptukey: the q with ptukey(q) = p.
double qtukey(double p, std::size_t k, double df);

struct AnovaResult {
  double F = 0.0;
  double p = 1.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  bool degenerate = false;  // no variance anywhere: F = 0, p = 1
};

/// Classic one-way ANOVA. Requires >= 2 groups of >= 2 samples
/// (std::invalid_argument otherwise).
AnovaResult anova_oneway(std::span<const std::vector<double>> groups);

struct TukeyPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double mean_diff = 0.0;  // mean_i - mean_j
  double q = 0.0;
  double p = 1.0;
  bool significant = false;
};

struct TukeyResult {
  std::vector<TukeyPair> pairs;  // (0,1), (0,2), ..., (k-2,k-1)
  double ms_within = 0.0;
  std::size_t df_within = 0;
  bool degenerate = false;
};

/// Tukey-Kramer HSD: q = |mean_i - mean_j| / sqrt(MSW/2 (1/n_i + 1/n_j)),
/// p from the studentized range with k groups, significant iff p < alpha.
TukeyResult tukey_hsd(std::span<const std::vector<double>> groups, double alpha = 0.05);

inline constexpr double kVarianceFloor = 1e-12;

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  bool degenerate = false;  // both groups constant and equal
};

/// Welch's two-sided t-test with Welch-Satterthwaite degrees of freedom.
/// Group variances are floored at kVarianceFloor.
TTestResult ttest_2tailed(std::span<const double> a, std::span<const double> b);

}  // namespace haptix::stats
