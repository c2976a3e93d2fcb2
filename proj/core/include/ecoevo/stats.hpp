#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ecoevo::stats {

using Sample = std::vector<double>;

struct AnovaResult {
  double f_statistic = 0.0;  // +inf when within-group variance is zero
  int df_between = 0;
  int df_within = 0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  double p_value = 1.0;
  bool significant(double alpha = 0.05) const noexcept { return p_value < alpha; }
};

// One-way ANOVA. Requires >= 2 groups of >= 2 samples each
// (std::invalid_argument otherwise). When both sums of squares vanish the
// test is degenerate and reported as F = 0, p = 1; zero within-group
// variance with a between-group difference gives F = +inf, p = 0.
AnovaResult one_way_anova(std::span<const Sample> groups);

struct TukeyPair {
  std::size_t group_i = 0;
  std::size_t group_j = 0;
  double mean_difference = 0.0;  // mean_i - mean_j
  double q = 0.0;
  bool significant = false;
};

struct TukeyResult {
  double q_critical = 0.0;
  int df_within = 0;
  std::vector<TukeyPair> pairs;  // i < j, each pair once
  const TukeyPair* find(std::size_t i, std::size_t j) const noexcept;
};

// Upper 5% point of the studentized range for k means and df degrees of
// freedom; tabulated for k in [2, 10], df >= 1, interpolated linearly in
// 1/df between table rows. Throws std::out_of_range outside the table.
double studentized_range_critical(int k, double df);

// Tukey's HSD for a balanced design at alpha = 0.05. Throws
// std::invalid_argument for unbalanced groups or any other alpha.
TukeyResult tukey_hsd(std::span<const Sample> groups, double alpha = 0.05);

struct PairedTTestResult {
  double mean_difference = 0.0;  // mean(a - b)
  double t_statistic = 0.0;
  int df = 0;
  double p_value = 1.0;  // two-sided
  bool significant(double alpha = 0.05) const noexcept { return p_value < alpha; }
};

// Two-sided paired t-test on equal-length samples (>= 2 pairs).
PairedTTestResult paired_t_test(std::span<const double> a,
                                std::span<const double> b);

double mean(std::span<const double> xs);

}  // namespace ecoevo::stats
