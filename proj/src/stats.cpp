#include "aeknn/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace aeknn {

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = mid;
    i = j;
  }
  return ranks;
}

double chi_square_sf(double x, std::size_t dof) {
  if (dof < 1) throw std::invalid_argument("chi_square_sf: dof must be >= 1");
  if (!(x > 0.0)) return 1.0;
  return boost::math::gamma_q(static_cast<double>(dof) / 2.0, x / 2.0);
}

TestReport friedman(const ResultMatrix& results, Direction direction, FriedmanForm form) {
  results.validate();
  const std::size_t n = results.rows();
  const std::size_t k = results.cols();
  const double sign = direction == Direction::HigherIsBetter ? -1.0 : 1.0;

  std::vector<double> rank_sum(k, 0.0);
  std::vector<double> row(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      row[j] = sign * results.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const auto r = mid_ranks(row);
    for (std::size_t j = 0; j < k; ++j) rank_sum[j] += r[j];
  }

  TestReport report;
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  double sum_sq = 0.0;
  for (const double s : rank_sum) {
    report.average_ranks.push_back(s / nd);
    sum_sq += (s / nd) * (s / nd);
  }
  const double chi2 = std::max(
      0.0, 12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0));

  if (form == FriedmanForm::ChiSquare) {
    report.statistic = chi2;
    report.p_value = chi_square_sf(chi2, k - 1);
    report.method = "friedman chi-square, " + std::to_string(k - 1) + " dof";
  } else {
    const double denom = nd * (kd - 1.0) - chi2;
    const double df1 = kd - 1.0;
    const double df2 = (kd - 1.0) * (nd - 1.0);
    if (denom <= 0.0) {
      // Every row ranks the columns identically.
      report.statistic = INFINITY;
      report.p_value = 0.0;
    } else {
      report.statistic = (nd - 1.0) * chi2 / denom;
      report.p_value = report.statistic > 0.0
                           ? boost::math::cdf(boost::math::complement(
                                 boost::math::fisher_f_distribution<double>(df1, df2), report.statistic))
                           : 1.0;
    }
    report.method = "friedman iman-davenport F";
  }
  return report;
}

TestReport wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: samples differ in length");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] - b[i] != 0.0) diffs.push_back(a[i] - b[i]);

  TestReport report;
  report.effective_pairs = diffs.size();
  if (diffs.empty()) {
    report.defined = false;
    report.statistic = NAN;
    report.p_value = NAN;
    report.method = "wilcoxon undefined: all differences are zero";
    return report;
  }

  std::vector<double> magnitudes(diffs.size());
  std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
  const auto ranks = mid_ranks(magnitudes);
  const std::size_t m = diffs.size();

  double w_plus = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (diffs[i] > 0.0) w_plus += ranks[i];
  const double total = static_cast<double>(m) * static_cast<double>(m + 1) / 2.0;
  const double w = std::min(w_plus, total - w_plus);
  report.statistic = w;

  if (m <= 20) {
    // Mid-ranks are multiples of 1/2, so doubled ranks are integers and the
    // null distribution of 2 W+ can be counted exactly.
    std::vector<std::size_t> doubled(m);
    std::size_t doubled_total = 0;
    for (std::size_t i = 0; i < m; ++i) {
      doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
      doubled_total += doubled[i];
    }
    std::vector<std::uint64_t> count(doubled_total + 1, 0);
    count[0] = 1;
    std::size_t reach = 0;
    for (const auto r : doubled) {
      for (std::size_t s = reach + 1; s-- > 0;)
        if (count[s]) count[s + r] += count[s];
      reach += r;
    }
    const auto w2 = static_cast<std::size_t>(std::llround(2.0 * w));
    std::uint64_t extreme = 0;
    for (std::size_t s = 0; s <= doubled_total; ++s)
      if (std::min(s, doubled_total - s) <= w2) extreme += count[s];
    report.p_value = static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(m));
    report.method = "wilcoxon exact (" + std::to_string(m) + " pairs)";
  } else {
    const double md = static_cast<double>(m);
    double tie_term = 0.0;
    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < m;) {
      std::size_t j = i;
      while (j < m && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const double mean = md * (md + 1.0) / 4.0;
    const double sd = std::sqrt(md * (md + 1.0) * (2.0 * md + 1.0) / 24.0 - tie_term / 48.0);
    const double z = std::min(0.0, w - mean + 0.5) / sd;
    const boost::math::normal_distribution<double> normal;
    report.p_value = std::min(1.0, 2.0 * boost::math::cdf(normal, z));
    report.method = "wilcoxon normal approximation (" + std::to_string(m) + " pairs)";
  }
  return report;
}

}  // namespace aeknn
