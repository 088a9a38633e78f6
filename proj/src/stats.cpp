#include "audit/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace audit::stats {

namespace {

void check_sample(const Sample& s) {
  if (s.values.empty()) throw DomainError("sample '" + s.label + "' is empty");
  for (double v : s.values) {
    if (!std::isfinite(v)) {
      throw DomainError("sample '" + s.label + "' contains a non-finite value");
    }
  }
}

double mean_of(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

// Sum of (t^3 - t) over all tie groups of the sorted pool.
double tie_term(std::vector<double> pooled) {
  std::sort(pooled.begin(), pooled.end());
  double total = 0.0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
    const double t = static_cast<double>(j - i);
    total += t * t * t - t;
    i = j;
  }
  return total;
}

bool has_ties(std::vector<double> pooled) {
  std::sort(pooled.begin(), pooled.end());
  return std::adjacent_find(pooled.begin(), pooled.end()) != pooled.end();
}

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", p);
  return buf;
}

// Null distribution route for the exact Mann-Whitney p: a subset-sum count
// over the pooled mid-ranks (scaled by 2 so ties stay integral). dp[k][s] =
// number of ways to assign k of the pooled ranks to sample a with scaled
// rank sum s. Counts stay exact in doubles for n <= 30.
double mwu_exact_p(const std::vector<double>& pooled_ranks, int n_a, double u_observed) {
  const int n = static_cast<int>(pooled_ranks.size());
  const int n_b = n - n_a;
  int max_sum = 0;
  std::vector<int> scaled(pooled_ranks.size());
  for (std::size_t i = 0; i < pooled_ranks.size(); ++i) {
    scaled[i] = static_cast<int>(std::llround(2.0 * pooled_ranks[i]));
    max_sum += scaled[i];
  }
  std::vector<std::vector<double>> dp(n_a + 1, std::vector<double>(max_sum + 1, 0.0));
  dp[0][0] = 1.0;
  for (int r : scaled) {
    for (int k = n_a; k >= 1; --k) {
      for (int s = max_sum; s >= r; --s) {
        if (dp[k - 1][s - r] != 0.0) dp[k][s] += dp[k - 1][s - r];
      }
    }
  }
  const double pairs = static_cast<double>(n_a) * n_b;
  double favorable = 0.0, total = 0.0;
  for (int s = 0; s <= max_sum; ++s) {
    const double count = dp[n_a][s];
    if (count == 0.0) continue;
    total += count;
    const double u_a = 0.5 * s - 0.5 * n_a * (n_a + 1);
    const double u_min = std::min(u_a, pairs - u_a);
    if (u_min <= u_observed + 1e-9) favorable += count;
  }
  return favorable / total;
}

struct QTable {
  double alpha;
  // Rows indexed by df, columns by k = 2..10.
  std::vector<std::pair<double, std::array<double, 9>>> rows;
};

const QTable kQ05{
    0.05,
    {
        {10, {3.15, 3.88, 4.33, 4.65, 4.91, 5.12, 5.30, 5.46, 5.60}},
        {12, {3.08, 3.77, 4.20, 4.51, 4.75, 4.95, 5.12, 5.27, 5.39}},
        {15, {3.01, 3.67, 4.08, 4.37, 4.59, 4.78, 4.94, 5.08, 5.20}},
        {20, {2.95, 3.58, 3.96, 4.23, 4.45, 4.62, 4.77, 4.90, 5.01}},
        {24, {2.92, 3.53, 3.90, 4.17, 4.37, 4.54, 4.68, 4.81, 4.92}},
        {30, {2.89, 3.49, 3.85, 4.10, 4.30, 4.46, 4.60, 4.72, 4.82}},
        {40, {2.86, 3.44, 3.79, 4.04, 4.23, 4.39, 4.52, 4.63, 4.73}},
        {60, {2.83, 3.40, 3.74, 3.98, 4.16, 4.31, 4.44, 4.55, 4.65}},
        {120, {2.80, 3.36, 3.68, 3.92, 4.10, 4.24, 4.36, 4.47, 4.56}},
        {0, {2.77, 3.31, 3.63, 3.86, 4.03, 4.17, 4.29, 4.39, 4.47}},  // df = infinity
    },
};

const QTable kQ01{
    0.01,
    {
        {10, {4.48, 5.27, 5.77, 6.14, 6.43, 6.67, 6.87, 7.05, 7.21}},
        {12, {4.32, 5.05, 5.50, 5.84, 6.10, 6.32, 6.51, 6.67, 6.81}},
        {15, {4.17, 4.84, 5.25, 5.56, 5.80, 5.99, 6.16, 6.31, 6.44}},
        {20, {4.02, 4.64, 5.02, 5.29, 5.51, 5.69, 5.84, 5.97, 6.09}},
        {24, {3.96, 4.55, 4.91, 5.17, 5.37, 5.54, 5.69, 5.81, 5.92}},
        {30, {3.89, 4.45, 4.80, 5.05, 5.24, 5.40, 5.54, 5.65, 5.76}},
        {40, {3.82, 4.37, 4.70, 4.93, 5.11, 5.26, 5.39, 5.50, 5.60}},
        {60, {3.76, 4.28, 4.59, 4.82, 4.99, 5.13, 5.25, 5.36, 5.45}},
        {120, {3.70, 4.20, 4.50, 4.71, 4.87, 5.01, 5.12, 5.21, 5.30}},
        {0, {3.64, 4.12, 4.40, 4.60, 4.76, 4.88, 4.99, 5.08, 5.16}},
    },
};

// Regularized lower incomplete gamma via its power series; valid y < a + 1.
double lower_gamma_series(double a, double y) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 500; ++n) {
    term *= y / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-y + a * std::log(y) - std::lgamma(a));
}

// Regularized upper incomplete gamma via the Lentz continued fraction;
// valid y >= a + 1.
double upper_gamma_continued_fraction(double a, double y) {
  constexpr double tiny = 1e-300;
  double b = y + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-y + a * std::log(y) - std::lgamma(a)) * h;
}

}  // namespace

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::mann_whitney_u:
      return "mann_whitney_u";
    case TestKind::kruskal_wallis:
      return "kruskal_wallis";
    case TestKind::tukey_hsd:
      return "tukey_hsd";
  }
  throw DomainError("unknown test kind");
}

std::string TestResult::summary() const {
  char buf[160];
  switch (test) {
    case TestKind::mann_whitney_u:
      std::snprintf(buf, sizeof(buf), "U=%.4g, p=%s", statistic,
                    p_value ? format_p(*p_value).c_str() : "n/a");
      break;
    case TestKind::kruskal_wallis:
      std::snprintf(buf, sizeof(buf), "H(%d)=%.4g, p=%s", df.value_or(0), statistic,
                    p_value ? format_p(*p_value).c_str() : "n/a");
      break;
    case TestKind::tukey_hsd: {
      int significant = 0;
      for (const PairwiseComparison& pc : pairwise) significant += pc.significant;
      std::snprintf(buf, sizeof(buf), "q_max=%.4g, %d/%zu pairs significant", statistic,
                    significant, pairwise.size());
      break;
    }
  }
  return buf;
}

std::vector<double> rank_with_ties(const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError("rank_with_ties: non-finite value");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) tie: all get the average 1-based rank.
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

TestResult mann_whitney_u(const Sample& a, const Sample& b, MwuMethod method) {
  check_sample(a);
  check_sample(b);
  const int n_a = static_cast<int>(a.values.size());
  const int n_b = static_cast<int>(b.values.size());
  const int n = n_a + n_b;

  std::vector<double> pooled;
  pooled.reserve(n);
  pooled.insert(pooled.end(), a.values.begin(), a.values.end());
  pooled.insert(pooled.end(), b.values.begin(), b.values.end());
  const std::vector<double> ranks = rank_with_ties(pooled);

  double rank_sum_a = 0.0;
  for (int i = 0; i < n_a; ++i) rank_sum_a += ranks[i];
  const double u_a = rank_sum_a - 0.5 * n_a * (n_a + 1);
  const double u_b = static_cast<double>(n_a) * n_b - u_a;
  const double u = std::min(u_a, u_b);

  const bool tied = has_ties(pooled);
  bool exact = false;
  switch (method) {
    case MwuMethod::automatic:
      exact = n <= 16 && !tied;
      break;
    case MwuMethod::exact:
      if (n > 30) throw DomainError("mann_whitney_u: exact method supported up to 30 values");
      exact = true;
      break;
    case MwuMethod::normal_approx:
      exact = false;
      break;
  }

  TestResult result;
  result.test = TestKind::mann_whitney_u;
  result.statistic = u;
  result.group_means[a.label] = mean_of(a.values);
  result.group_means[b.label] = mean_of(b.values);

  if (exact) {
    result.p_value = mwu_exact_p(ranks, n_a, u);
    result.notes = "exact (rank-sum distribution enumeration)";
  } else {
    // Conover (1999): tie-corrected variance; 0.5 continuity correction.
    const double mu = 0.5 * static_cast<double>(n_a) * n_b;
    const double correction = tie_term(pooled) / (static_cast<double>(n) * (n - 1));
    const double var =
        (static_cast<double>(n_a) * n_b / 12.0) * (static_cast<double>(n) + 1.0 - correction);
    if (var <= 0.0) {
      result.p_value = 1.0;
    } else {
      const double z = (std::abs(u - mu) - 0.5) / std::sqrt(var);
      result.p_value = std::clamp(2.0 * normal_sf(z), 0.0, 1.0);
    }
    result.notes = "normal approximation, tie-corrected, continuity-corrected";
  }
  return result;
}

TestResult kruskal_wallis(const std::vector<Sample>& groups) {
  if (groups.size() < 2) throw DomainError("kruskal_wallis: needs at least 2 groups");
  std::vector<double> pooled;
  for (const Sample& g : groups) {
    check_sample(g);
    pooled.insert(pooled.end(), g.values.begin(), g.values.end());
  }
  const double n = static_cast<double>(pooled.size());
  const std::vector<double> ranks = rank_with_ties(pooled);

  double h = -3.0 * (n + 1.0);
  std::size_t offset = 0;
  TestResult result;
  result.test = TestKind::kruskal_wallis;
  for (const Sample& g : groups) {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) rank_sum += ranks[offset + i];
    offset += g.values.size();
    h += 12.0 / (n * (n + 1.0)) * rank_sum * rank_sum / g.values.size();
    result.group_means[g.label] = mean_of(g.values);
  }
  const double correction = 1.0 - tie_term(pooled) / (n * n * n - n);
  // correction == 0 means every pooled value is identical; H is 0 by definition.
  h = correction > 0.0 ? h / correction : 0.0;
  if (std::abs(h) < 1e-12) h = 0.0;  // clean up cancellation noise for the H = 0 case

  result.statistic = h;
  result.df = static_cast<int>(groups.size()) - 1;
  result.p_value = chi_squared_sf(h, *result.df);
  result.notes = "tie-corrected";
  return result;
}

double studentized_range_critical(double alpha, int k, double df) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("studentized range: alpha must be in (0,1)");
  }
  const QTable* table = nullptr;
  if (std::abs(alpha - 0.05) < 1e-12) table = &kQ05;
  if (std::abs(alpha - 0.01) < 1e-12) table = &kQ01;
  if (table == nullptr) {
    throw DomainError("studentized range: only alpha 0.05 and 0.01 are tabulated");
  }
  if (k < 2 || k > 10) {
    throw DomainError("studentized range: tabulated for 2..10 groups, got " + std::to_string(k));
  }
  if (df < 10.0) df = 10.0;  // clamp below the first tabulated row (conservative for our n)

  const auto& rows = table->rows;
  const int col = k - 2;
  // Find bracketing rows; df key 0 encodes infinity.
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double lo = rows[i].first;
    const double hi = rows[i + 1].first;  // 0 = infinity on the last row
    const bool last = hi == 0.0;
    if (df <= lo) return rows[i].second[col];
    if (!last && df > hi) continue;
    // Interpolate linearly in 1/df (the classical convention for this table).
    const double x = 1.0 / df;
    const double x_lo = 1.0 / lo;
    const double x_hi = last ? 0.0 : 1.0 / hi;
    const double w = (x_lo - x) / (x_lo - x_hi);
    return rows[i].second[col] + w * (rows[i + 1].second[col] - rows[i].second[col]);
  }
  return rows.back().second[col];
}

TestResult tukey_hsd(const std::vector<Sample>& groups, double alpha) {
  if (groups.size() < 2) throw DomainError("tukey_hsd: needs at least 2 groups");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("tukey_hsd: alpha must be in (0,1)");
  std::vector<double> pooled;
  for (const Sample& g : groups) {
    check_sample(g);
    pooled.insert(pooled.end(), g.values.begin(), g.values.end());
  }
  const int k = static_cast<int>(groups.size());
  const int n = static_cast<int>(pooled.size());
  const int df = n - k;
  if (df < 1) throw DomainError("tukey_hsd: not enough observations for a within-group error");

  // Rank-transform, then run Tukey-Kramer on the ranks.
  const std::vector<double> ranks = rank_with_ties(pooled);
  std::vector<double> rank_means(groups.size());
  std::vector<std::size_t> sizes(groups.size());
  std::size_t offset = 0;
  double sse = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    sizes[g] = groups[g].values.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < sizes[g]; ++i) sum += ranks[offset + i];
    rank_means[g] = sum / sizes[g];
    for (std::size_t i = 0; i < sizes[g]; ++i) {
      const double d = ranks[offset + i] - rank_means[g];
      sse += d * d;
    }
    offset += sizes[g];
  }
  const double mse = sse / df;
  const double q_crit = studentized_range_critical(alpha, k, df);

  TestResult result;
  result.test = TestKind::tukey_hsd;
  result.df = df;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    result.group_means[groups[g].label] = mean_of(groups[g].values);
  }
  double q_max = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const double diff = rank_means[i] - rank_means[j];
      const double se =
          std::sqrt(mse / 2.0 * (1.0 / sizes[i] + 1.0 / sizes[j]));
      const double q = se > 0.0 ? std::abs(diff) / se : (diff == 0.0 ? 0.0 : HUGE_VAL);
      q_max = std::max(q_max, q);
      result.pairwise.push_back(
          PairwiseComparison{groups[i].label, groups[j].label, diff, q > q_crit});
    }
  }
  result.statistic = q_max;
  char note[96];
  std::snprintf(note, sizeof(note), "rank-transformed Tukey-Kramer, alpha=%g, q_crit=%.3f", alpha,
                q_crit);
  result.notes = note;
  return result;
}

double chi_squared_sf(double x, int df) {
  if (df < 1) throw DomainError("chi_squared_sf: df must be >= 1");
  if (!std::isfinite(x) || x < 0.0) throw DomainError("chi_squared_sf: x must be >= 0");
  if (x == 0.0) return 1.0;
  const double a = 0.5 * df;
  const double y = 0.5 * x;
  if (y < a + 1.0) return 1.0 - lower_gamma_series(a, y);
  return upper_gamma_continued_fraction(a, y);
}

}  // namespace audit::stats
