#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "audit/errors.hpp"

namespace audit::stats {

// A labeled group of observations. Values must be finite; groups must be
// non-empty wherever a test consumes them.
struct Sample {
  std::string label;
  std::vector<double> values;
};

enum class TestKind { mann_whitney_u, kruskal_wallis, tukey_hsd };

std::string_view to_string(TestKind kind);

struct PairwiseComparison {
  std::string group_a;
  std::string group_b;
  double difference = 0.0;  // mean rank of a minus mean rank of b
  bool significant = false;
};

struct TestResult {
  TestKind test = TestKind::kruskal_wallis;
  double statistic = 0.0;
  std::optional<int> df;
  // In [0, 1] whenever present. Absent for Tukey HSD (the embedded critical
  // value table yields per-pair decisions, not a p-value) and for tests that
  // could not be computed (see notes).
  std::optional<double> p_value;
  std::map<std::string, double> group_means;  // means of the raw values
  std::vector<PairwiseComparison> pairwise;   // Tukey only
  std::string notes;                          // method metadata

  // One-line rendering in the usual reporting style, e.g. "H(4)=51.60, p=1.7e-10".
  std::string summary() const;
};

// Mid-ranks (average rank across ties), 1-based. The ranks of n values
// always sum to n(n+1)/2.
std::vector<double> rank_with_ties(const std::vector<double>& values);

enum class MwuMethod {
  automatic,  // exact when n_a + n_b <= 16 and the pooled values are tie-free
  exact,      // rank-distribution enumeration; supported for n_a + n_b <= 30
  normal_approx,
};

// Two-sided Mann-Whitney U. The statistic is min(U_a, U_b). The exact
// p-value is the null probability that min(U_a, U_b) is at most the observed
// value, computed from the distribution of rank sums over all C(n, n_a)
// labelings; the approximate route uses the tie-corrected normal
// approximation with a 0.5 continuity correction (method noted in `notes`).
TestResult mann_whitney_u(const Sample& a, const Sample& b,
                          MwuMethod method = MwuMethod::automatic);

// Kruskal-Wallis H with tie correction, df = k - 1, p from the chi-squared
// upper tail. Identical groups give H = 0, p = 1.
TestResult kruskal_wallis(const std::vector<Sample>& groups);

// Tukey HSD on rank-transformed values (Tukey-Kramer for unequal group
// sizes), using an embedded studentized-range critical value table.
// Supported: alpha in {0.05, 0.01}, k <= 10 groups; df between table rows is
// interpolated linearly in 1/df, df below 10 clamps to the first row.
// DomainError for alpha outside (0,1) or outside the tabulated levels.
TestResult tukey_hsd(const std::vector<Sample>& groups, double alpha);

// Upper tail of the chi-squared distribution (regularized incomplete gamma
// Q(df/2, x/2)); series expansion for small x, Lentz continued fraction
// otherwise. DomainError for x < 0 or df < 1.
double chi_squared_sf(double x, int df);

// Standard normal upper tail.
double normal_sf(double z);

// Critical value of the studentized range statistic (same table and
// interpolation rules as tukey_hsd).
double studentized_range_critical(double alpha, int k, double df);

}  // namespace audit::stats
