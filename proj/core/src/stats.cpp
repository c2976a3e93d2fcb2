#include "ecoevo/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace ecoevo::stats {

namespace {

struct QRow {
  double df;
  std::array<double, 9> q;  // k = 2..10
};

// Upper 5% points of the studentized range distribution.
constexpr std::array<QRow, 34> kQTable{{
  {1, {17.9693, 26.9755, 32.8187, 37.0815, 40.4076, 43.1186, 45.3973, 47.3566, 49.0710}},
  {2, {6.0849, 8.3308, 9.7980, 10.8811, 11.7343, 12.4349, 13.0273, 13.5390, 13.9885}},
  {3, {4.5007, 5.9096, 6.8245, 7.5017, 8.0371, 8.4783, 8.8525, 9.1766, 9.4620}},
  {4, {3.9265, 5.0402, 5.7571, 6.2870, 6.7064, 7.0526, 7.3465, 7.6015, 7.8263}},
  {5, {3.6354, 4.6017, 5.2183, 5.6731, 6.0329, 6.3299, 6.5823, 6.8014, 6.9947}},
  {6, {3.4605, 4.3392, 4.8956, 5.3049, 5.6284, 5.8953, 6.1222, 6.3192, 6.4931}},
  {7, {3.3441, 4.1649, 4.6813, 5.0601, 5.3591, 5.6057, 5.8153, 5.9973, 6.1579}},
  {8, {3.2612, 4.0410, 4.5288, 4.8858, 5.1672, 5.3991, 5.5962, 5.7673, 5.9183}},
  {9, {3.1992, 3.9485, 4.4149, 4.7554, 5.0235, 5.2444, 5.4319, 5.5947, 5.7384}},
  {10, {3.1511, 3.8768, 4.3266, 4.6543, 4.9120, 5.1242, 5.3042, 5.4605, 5.5984}},
  {11, {3.1127, 3.8196, 4.2561, 4.5736, 4.8230, 5.0281, 5.2021, 5.3531, 5.4863}},
  {12, {3.0813, 3.7729, 4.1987, 4.5077, 4.7502, 4.9496, 5.1187, 5.2653, 5.3946}},
  {13, {3.0552, 3.7341, 4.1509, 4.4529, 4.6897, 4.8842, 5.0491, 5.1921, 5.3181}},
  {14, {3.0332, 3.7014, 4.1105, 4.4066, 4.6385, 4.8290, 4.9903, 5.1301, 5.2534}},
  {15, {3.0143, 3.6734, 4.0760, 4.3670, 4.5947, 4.7816, 4.9399, 5.0770, 5.1979}},
  {16, {2.9980, 3.6491, 4.0461, 4.3327, 4.5568, 4.7406, 4.8962, 5.0310, 5.1498}},
  {17, {2.9837, 3.6280, 4.0200, 4.3027, 4.5237, 4.7048, 4.8580, 4.9907, 5.1077}},
  {18, {2.9712, 3.6093, 3.9970, 4.2763, 4.4944, 4.6731, 4.8243, 4.9552, 5.0705}},
  {19, {2.9600, 3.5927, 3.9766, 4.2528, 4.4685, 4.6450, 4.7944, 4.9236, 5.0375}},
  {20, {2.9500, 3.5779, 3.9583, 4.2319, 4.4452, 4.6199, 4.7676, 4.8954, 5.0079}},
  {21, {2.9410, 3.5646, 3.9419, 4.2130, 4.4244, 4.5973, 4.7435, 4.8699, 4.9813}},
  {22, {2.9329, 3.5526, 3.9270, 4.1959, 4.4055, 4.5769, 4.7217, 4.8469, 4.9572}},
  {23, {2.9255, 3.5417, 3.9136, 4.1805, 4.3883, 4.5583, 4.7018, 4.8260, 4.9353}},
  {24, {2.9188, 3.5317, 3.9013, 4.1663, 4.3727, 4.5413, 4.6838, 4.8069, 4.9152}},
  {25, {2.9126, 3.5226, 3.8900, 4.1534, 4.3583, 4.5258, 4.6672, 4.7894, 4.8969}},
  {26, {2.9070, 3.5142, 3.8796, 4.1415, 4.3451, 4.5115, 4.6519, 4.7733, 4.8800}},
  {27, {2.9017, 3.5064, 3.8701, 4.1305, 4.3329, 4.4983, 4.6378, 4.7584, 4.8644}},
  {28, {2.8969, 3.4993, 3.8612, 4.1203, 4.3217, 4.4861, 4.6248, 4.7446, 4.8500}},
  {29, {2.8924, 3.4926, 3.8530, 4.1109, 4.3112, 4.4747, 4.6127, 4.7318, 4.8366}},
  {30, {2.8882, 3.4864, 3.8454, 4.1021, 4.3015, 4.4642, 4.6014, 4.7199, 4.8241}},
  {40, {2.8582, 3.4421, 3.7907, 4.0391, 4.2316, 4.3885, 4.5205, 4.6345, 4.7345}},
  {60, {2.8288, 3.3987, 3.7371, 3.9774, 4.1632, 4.3141, 4.4411, 4.5504, 4.6463}},
  {120, {2.8000, 3.3561, 3.6846, 3.9169, 4.0960, 4.2412, 4.3630, 4.4678, 4.5595}},
    {std::numeric_limits<double>::infinity(),
     {2.7718, 3.3145, 3.6332, 3.8577, 4.0301, 4.1696, 4.2863, 4.3865, 4.4741}},
}};

double sum_of_squares(const Sample& xs, double m) {
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss;
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

AnovaResult one_way_anova(std::span<const Sample> groups) {
  if (groups.size() < 2) {
    throw std::invalid_argument("one_way_anova: need at least 2 groups");
  }
  std::size_t total_n = 0;
  double grand_sum = 0.0;
  for (const Sample& g : groups) {
    if (g.size() < 2) {
      throw std::invalid_argument("one_way_anova: each group needs >= 2 samples");
    }
    total_n += g.size();
    grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const double grand_mean = grand_sum / static_cast<double>(total_n);

  AnovaResult r;
  for (const Sample& g : groups) {
    const double m = mean(g);
    r.ss_between += static_cast<double>(g.size()) * (m - grand_mean) * (m - grand_mean);
    r.ss_within += sum_of_squares(g, m);
  }
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(total_n - groups.size());

  // Sums of squares below this are rounding noise relative to the data.
  double scale = 0.0;
  for (const Sample& g : groups) {
    for (double x : g) scale = std::max(scale, std::abs(x));
  }
  const double eps = 1e-24 * std::max(1.0, scale * scale) * static_cast<double>(total_n);
  const bool no_between = r.ss_between <= eps;
  const bool no_within = r.ss_within <= eps;
  if (no_between) {
    r.f_statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  if (no_within) {
    r.f_statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  const double ms_between = r.ss_between / r.df_between;
  const double ms_within = r.ss_within / r.df_within;
  r.f_statistic = ms_between / ms_within;
  const boost::math::fisher_f dist(r.df_between, r.df_within);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.f_statistic));
  return r;
}

const TukeyPair* TukeyResult::find(std::size_t i, std::size_t j) const noexcept {
  if (i > j) std::swap(i, j);
  for (const TukeyPair& p : pairs) {
    if (p.group_i == i && p.group_j == j) return &p;
  }
  return nullptr;
}

double studentized_range_critical(int k, double df) {
  if (k < 2 || k > 10) {
    throw std::out_of_range("studentized range table covers k in [2, 10]");
  }
  if (!(df >= 1.0)) {
    throw std::out_of_range("studentized range table needs df >= 1");
  }
  const auto col = static_cast<std::size_t>(k - 2);
  for (std::size_t i = 0; i < kQTable.size(); ++i) {
    if (df == kQTable[i].df) return kQTable[i].q[col];
    if (df < kQTable[i].df) {
      const QRow& lo = kQTable[i - 1];
      const QRow& hi = kQTable[i];
      const double x = 1.0 / df;
      const double x_lo = 1.0 / lo.df;
      const double x_hi = std::isinf(hi.df) ? 0.0 : 1.0 / hi.df;
      const double t = (x - x_lo) / (x_hi - x_lo);
      return lo.q[col] + t * (hi.q[col] - lo.q[col]);
    }
  }
  return kQTable.back().q[col];
}

TukeyResult tukey_hsd(std::span<const Sample> groups, double alpha) {
  if (alpha != 0.05) {
    throw std::invalid_argument("tukey_hsd: only alpha = 0.05 is tabulated");
  }
  if (groups.size() < 2) throw std::invalid_argument("tukey_hsd: need >= 2 groups");
  const std::size_t n = groups.front().size();
  for (const Sample& g : groups) {
    if (g.size() != n) {
      throw std::invalid_argument("tukey_hsd: groups must have equal sizes");
    }
  }
  const AnovaResult anova = one_way_anova(groups);
  const double ms_within = anova.ss_within / anova.df_within;
  const double se = std::sqrt(ms_within / static_cast<double>(n));

  TukeyResult r;
  r.df_within = anova.df_within;
  r.q_critical = studentized_range_critical(static_cast<int>(groups.size()),
                                            anova.df_within);
  std::vector<double> means;
  for (const Sample& g : groups) means.push_back(mean(g));
  const bool degenerate_between = anova.f_statistic == 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      TukeyPair p{i, j, means[i] - means[j], 0.0, false};
      const double diff = std::abs(p.mean_difference);
      if (degenerate_between || diff == 0.0) {
        p.q = 0.0;
      } else if (anova.f_statistic == std::numeric_limits<double>::infinity()) {
        p.q = std::numeric_limits<double>::infinity();
      } else {
        p.q = diff / se;
      }
      p.significant = p.q > r.q_critical;
      r.pairs.push_back(p);
    }
  }
  return r;
}

PairedTTestResult paired_t_test(std::span<const double> a,
                                std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("paired_t_test: need >= 2 equal-length pairs");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  PairedTTestResult r;
  r.df = static_cast<int>(d.size()) - 1;
  r.mean_difference = mean(d);
  const double var = sum_of_squares(d, r.mean_difference) / r.df;
  if (var == 0.0) {
    r.t_statistic = r.mean_difference == 0.0
                        ? 0.0
                        : std::copysign(std::numeric_limits<double>::infinity(),
                                        r.mean_difference);
    r.p_value = r.mean_difference == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t_statistic = r.mean_difference / std::sqrt(var / static_cast<double>(d.size()));
  const boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_statistic)));
  return r;
}

}  // namespace ecoevo::stats
