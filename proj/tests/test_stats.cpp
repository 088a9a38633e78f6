#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "audit/common.hpp"
#include "audit/errors.hpp"
#include "audit/stats.hpp"

using namespace audit;
using namespace audit::stats;

namespace {

// --- reference implementations, written independently of src/stats.cpp -----

// U statistic by direct pair counting (ties count half).
double pair_count_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) u += 1.0;
      else if (x == y) u += 0.5;
    }
  }
  return u;
}

// Exact two-sided p by enumerating every labeling of the pooled sample.
double enumerate_mwu_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  const std::size_t n_a = a.size();

  double u_a = pair_count_u(a, b);
  double u_b = pair_count_u(b, a);
  const double observed = std::min(u_a, u_b);

  std::vector<std::size_t> pick(n_a);
  std::iota(pick.begin(), pick.end(), 0);
  std::size_t favorable = 0;
  std::size_t total = 0;
  for (;;) {
    std::vector<double> group_a, group_b;
    std::vector<bool> in_a(n, false);
    for (std::size_t index : pick) in_a[index] = true;
    for (std::size_t i = 0; i < n; ++i)
      (in_a[i] ? group_a : group_b).push_back(pooled[i]);
    double ua = pair_count_u(group_a, group_b);
    double ub = pair_count_u(group_b, group_a);
    if (std::min(ua, ub) <= observed + 1e-9) ++favorable;
    ++total;

    // next combination
    std::size_t i = n_a;
    while (i > 0 && pick[i - 1] == n - n_a + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n_a; ++j) pick[j] = pick[j - 1] + 1;
  }
  return double(favorable) / double(total);
}

// Rank by counting smaller/equal values; ties share the mid-rank.
std::vector<double> counting_ranks(const std::vector<double>& values) {
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (double v : values) {
      if (v < values[i]) ++less;
      else if (v == values[i]) ++equal;
    }
    ranks[i] = double(less) + (double(equal) + 1.0) / 2.0;
  }
  return ranks;
}

// Kruskal-Wallis through the deviation form
// H = (N - 1) * sum_j n_j (Rbar_j - Rbar)^2 / sum_ij (r_ij - Rbar)^2,
// which absorbs ties without an explicit correction factor.
double deviation_form_h(const std::vector<Sample>& groups) {
  std::vector<double> pooled;
  for (const auto& group : groups)
    pooled.insert(pooled.end(), group.values.begin(), group.values.end());
  auto ranks = counting_ranks(pooled);
  const double n = double(pooled.size());
  const double grand_mean = (n + 1.0) / 2.0;

  double numerator = 0.0;
  std::size_t offset = 0;
  for (const auto& group : groups) {
    double sum = 0.0;
    for (std::size_t i = 0; i < group.values.size(); ++i) sum += ranks[offset + i];
    offset += group.values.size();
    double mean = sum / double(group.values.size());
    numerator += double(group.values.size()) * (mean - grand_mean) * (mean - grand_mean);
  }
  double denominator = 0.0;
  for (double r : ranks) denominator += (r - grand_mean) * (r - grand_mean);
  if (denominator == 0.0) return 0.0;
  return (n - 1.0) * numerator / denominator;
}

// Chi-squared upper tail via the textbook recurrence
//   Q(x; k+2) = Q(x; k) + (x/2)^(k/2) e^(-x/2) / Gamma(k/2 + 1),
// seeded with Q(x; 1) = erfc(sqrt(x/2)) and Q(x; 2) = e^(-x/2).
double recurrence_chi2_sf(double x, int df) {
  double q = (df % 2 == 1) ? std::erfc(std::sqrt(x / 2.0)) : std::exp(-x / 2.0);
  for (int k = (df % 2 == 1) ? 1 : 2; k < df; k += 2) {
    double half_k = double(k) / 2.0;
    double log_term = half_k * std::log(x / 2.0) - x / 2.0 - std::lgamma(half_k + 1.0);
    q += std::exp(log_term);
  }
  return q;
}

std::vector<double> random_values(Rng& rng, int n, bool allow_ties) {
  std::vector<double> values;
  for (int i = 0; i < n; ++i)
    values.push_back(allow_ties ? double(rng.next_int(0, 5)) : rng.next_unit());
  return values;
}

}  // namespace

TEST_CASE("mid-ranks follow the tie convention") {
  CHECK(rank_with_ties({10, 20, 30}) == std::vector<double>{1, 2, 3});
  CHECK(rank_with_ties({30, 10, 20}) == std::vector<double>{3, 1, 2});
  CHECK(rank_with_ties({1, 1, 2}) == std::vector<double>{1.5, 1.5, 3});
  CHECK(rank_with_ties({5, 5, 5, 5}) == std::vector<double>{2.5, 2.5, 2.5, 2.5});
}

TEST_CASE("mid-ranks always sum to n(n+1)/2") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    auto values = random_values(rng, rng.next_int(1, 30), trial % 2 == 0);
    auto ranks = rank_with_ties(values);
    double sum = std::accumulate(ranks.begin(), ranks.end(), 0.0);
    double n = double(values.size());
    CHECK(sum == doctest::Approx(n * (n + 1) / 2).epsilon(1e-12));
    CHECK(ranks == counting_ranks(values));
  }
}

TEST_CASE("rank-sum test on fully separated samples") {
  auto result = mann_whitney_u({"low", {1, 2, 3}}, {"high", {4, 5, 6}});
  CHECK(result.statistic == 0.0);
  // Of the 20 equally likely labelings, exactly 2 reach min(U) = 0.
  REQUIRE(result.p_value.has_value());
  CHECK(*result.p_value == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(result.notes.find("exact") != std::string::npos);
  CHECK(result.group_means.at("low") == doctest::Approx(2.0));
  CHECK(result.group_means.at("high") == doctest::Approx(5.0));
}

TEST_CASE("rank-sum test sees no difference between identical samples") {
  auto result = mann_whitney_u({"a", {1, 2, 3}}, {"b", {1, 2, 3}});
  REQUIRE(result.p_value.has_value());
  CHECK(*result.p_value >= 0.99);
}

TEST_CASE("exact rank-sum p-values match full enumeration, ties included") {
  Rng rng(4242);
  for (int trial = 0; trial < 40; ++trial) {
    int n_a = rng.next_int(2, 6);
    int n_b = rng.next_int(2, 6);
    bool ties = trial % 2 == 0;
    Sample a{"a", random_values(rng, n_a, ties)};
    Sample b{"b", random_values(rng, n_b, ties)};
    auto result = mann_whitney_u(a, b, MwuMethod::exact);
    REQUIRE(result.p_value.has_value());
    CHECK(*result.p_value ==
          doctest::Approx(enumerate_mwu_p(a.values, b.values)).epsilon(1e-9));
    CHECK(result.statistic ==
          doctest::Approx(std::min(pair_count_u(a.values, b.values),
                                   pair_count_u(b.values, a.values))));
  }
}

TEST_CASE("rank-sum test is symmetric in its arguments") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Sample a{"a", random_values(rng, rng.next_int(2, 8), true)};
    Sample b{"b", random_values(rng, rng.next_int(2, 8), true)};
    auto ab = mann_whitney_u(a, b);
    auto ba = mann_whitney_u(b, a);
    CHECK(ab.statistic == doctest::Approx(ba.statistic));
    CHECK(*ab.p_value == doctest::Approx(*ba.p_value).epsilon(1e-12));
  }
}

TEST_CASE("rank-sum test only sees order, not scale") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    Sample a{"a", random_values(rng, 6, false)};
    Sample b{"b", random_values(rng, 7, false)};
    auto plain = mann_whitney_u(a, b);
    auto cubed_a = a, cubed_b = b;
    for (double& v : cubed_a.values) v = v * v * v;
    for (double& v : cubed_b.values) v = v * v * v;
    auto cubed = mann_whitney_u(cubed_a, cubed_b);
    CHECK(plain.statistic == doctest::Approx(cubed.statistic));
    CHECK(*plain.p_value == doctest::Approx(*cubed.p_value).epsilon(1e-12));
  }
}

TEST_CASE("normal approximation tracks the exact rank-sum p-value") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    int n_a = rng.next_int(4, 8);
    int n_b = rng.next_int(4, 8);
    Sample a{"a", random_values(rng, n_a, false)};
    Sample b{"b", random_values(rng, n_b, false)};
    auto exact = mann_whitney_u(a, b, MwuMethod::exact);
    auto approx = mann_whitney_u(a, b, MwuMethod::normal_approx);
    CHECK(std::abs(*exact.p_value - *approx.p_value) < 0.03);
  }
}

TEST_CASE("exact method refuses oversized samples") {
  std::vector<double> big(16), other(16);
  std::iota(big.begin(), big.end(), 0.0);
  std::iota(other.begin(), other.end(), 16.0);
  CHECK_THROWS_AS((void)mann_whitney_u({"a", big}, {"b", other}, MwuMethod::exact),
                  DomainError);
  // automatic falls back to the approximation instead
  auto result = mann_whitney_u({"a", big}, {"b", other});
  CHECK(result.notes.find("normal") != std::string::npos);
}

TEST_CASE("group comparison is null on identical groups") {
  std::vector<Sample> groups = {{"a", {1, 2, 3}}, {"b", {1, 2, 3}}, {"c", {1, 2, 3}}};
  auto result = kruskal_wallis(groups);
  CHECK(result.statistic == 0.0);
  REQUIRE(result.p_value.has_value());
  CHECK(*result.p_value == doctest::Approx(1.0));
  CHECK(result.df == 2);
}

TEST_CASE("group comparison matches the deviation form on random data") {
  Rng rng(314);
  for (int trial = 0; trial < 50; ++trial) {
    int k = rng.next_int(2, 5);
    std::vector<Sample> groups;
    for (int g = 0; g < k; ++g)
      groups.push_back({"g" + std::to_string(g),
                        random_values(rng, rng.next_int(2, 8), trial % 2 == 0)});
    auto result = kruskal_wallis(groups);
    CHECK(result.statistic == doctest::Approx(deviation_form_h(groups)).epsilon(1e-9));
    CHECK(result.df == k - 1);
  }
}

TEST_CASE("two-group comparison nearly matches the rank-sum approximation") {
  Rng rng(999);
  for (int trial = 0; trial < 20; ++trial) {
    Sample a{"a", random_values(rng, rng.next_int(6, 12), false)};
    Sample b{"b", random_values(rng, rng.next_int(6, 12), false)};
    auto kw = kruskal_wallis({a, b});
    auto mwu = mann_whitney_u(a, b, MwuMethod::normal_approx);
    // They differ only by the 0.5 continuity correction, which moves z by
    // 0.5/sigma and the two-sided p by at most 2*phi(0)*0.5/sigma.
    double n_a = double(a.values.size()), n_b = double(b.values.size());
    double sigma = std::sqrt(n_a * n_b * (n_a + n_b + 1.0) / 12.0);
    CHECK(std::abs(*kw.p_value - *mwu.p_value) <= 0.4 / sigma);
  }
}

TEST_CASE("two-group H equals the squared rank-sum z-score") {
  Rng rng(271);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a_values = random_values(rng, rng.next_int(4, 9), true);
    std::vector<double> b_values = random_values(rng, rng.next_int(4, 9), true);
    auto kw = kruskal_wallis({{"a", a_values}, {"b", b_values}});

    // z from the tie-corrected normal form, no continuity correction.
    std::vector<double> pooled = a_values;
    pooled.insert(pooled.end(), b_values.begin(), b_values.end());
    auto ranks = counting_ranks(pooled);
    double n1 = double(a_values.size()), n2 = double(b_values.size());
    double n = n1 + n2;
    double r1 = 0.0;
    for (std::size_t i = 0; i < a_values.size(); ++i) r1 += ranks[i];
    double u1 = r1 - n1 * (n1 + 1) / 2.0;
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_sum = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      double t = double(j - i);
      tie_sum += t * t * t - t;
      i = j;
    }
    double variance = n1 * n2 / 12.0 * ((n + 1) - tie_sum / (n * (n - 1)));
    if (variance == 0.0) {
      CHECK(kw.statistic == 0.0);
      continue;
    }
    double z = (u1 - n1 * n2 / 2.0) / std::sqrt(variance);
    CHECK(kw.statistic == doctest::Approx(z * z).epsilon(1e-9));
  }
}

TEST_CASE("pairwise comparison finds nothing on identical groups") {
  std::vector<Sample> groups = {{"a", {1, 2, 3, 4}}, {"b", {1, 2, 3, 4}},
                                {"c", {1, 2, 3, 4}}};
  auto result = tukey_hsd(groups, 0.05);
  REQUIRE(result.pairwise.size() == 3);
  for (const auto& pair : result.pairwise) CHECK_FALSE(pair.significant);
  CHECK_FALSE(result.p_value.has_value());
}

TEST_CASE("pairwise comparison flags far-separated groups") {
  std::vector<Sample> groups = {{"low", {1, 2, 3, 4, 5}},
                                {"mid", {101, 102, 103, 104, 105}},
                                {"high", {201, 202, 203, 204, 205}}};
  auto result = tukey_hsd(groups, 0.05);
  REQUIRE(result.pairwise.size() == 3);
  for (const auto& pair : result.pairwise) CHECK(pair.significant);
  // Mean ranks: low 3, mid 8, high 13.
  for (const auto& pair : result.pairwise) {
    if (pair.group_a == "low" && pair.group_b == "high")
      CHECK(pair.difference == doctest::Approx(-10.0));
  }
}

TEST_CASE("pairwise comparison separates only the shifted group") {
  std::vector<Sample> groups = {{"a", {1, 2, 3, 4, 5, 6}}, {"b", {1, 2, 3, 4, 5, 6}},
                                {"far", {100, 101, 102, 103, 104, 105}}};
  auto result = tukey_hsd(groups, 0.05);
  for (const auto& pair : result.pairwise) {
    bool involves_far = pair.group_a == "far" || pair.group_b == "far";
    CHECK(pair.significant == involves_far);
  }
}

TEST_CASE("pairwise comparison validates alpha") {
  std::vector<Sample> groups = {{"a", {1, 2, 3}}, {"b", {4, 5, 6}}};
  CHECK_THROWS_AS((void)tukey_hsd(groups, 1.5), DomainError);
  CHECK_THROWS_AS((void)tukey_hsd(groups, -0.1), DomainError);
  CHECK_THROWS_AS((void)tukey_hsd(groups, 0.10), DomainError);  // not tabulated
  CHECK_NOTHROW((void)tukey_hsd(groups, 0.01));
}

TEST_CASE("chi-squared upper tail matches closed forms") {
  CHECK(chi_squared_sf(0.0, 3) == 1.0);
  // df = 2: the tail is exp(-x/2), so x = 2 ln 2 gives exactly one half.
  CHECK(chi_squared_sf(2.0 * std::log(2.0), 2) == doctest::Approx(0.5).epsilon(1e-12));
  // df = 4 deep tail, the acceptance-grade reference point.
  double tail = chi_squared_sf(51.6, 4);
  CHECK(tail > 1.7e-10 / 1.1);
  CHECK(tail < 1.7e-10 * 1.1);
}

TEST_CASE("chi-squared upper tail matches the recurrence oracle") {
  for (int df : {1, 2, 3, 4, 5, 8, 9, 12, 20}) {
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 60.0}) {
      double expected = recurrence_chi2_sf(x, df);
      CHECK(chi_squared_sf(x, df) ==
            doctest::Approx(expected).epsilon(1e-10).scale(expected));
    }
  }
}

TEST_CASE("normal upper tail hits the standard quantiles") {
  CHECK(normal_sf(0.0) == doctest::Approx(0.5));
  CHECK(normal_sf(1.959963985) == doctest::Approx(0.025).epsilon(1e-8));
  CHECK(normal_sf(-1.0) + normal_sf(1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("studentized range critical values match published tables") {
  // Classic table entries (alpha, k, df) -> q.
  CHECK(studentized_range_critical(0.05, 3, 20) == doctest::Approx(3.58).epsilon(0.005));
  CHECK(studentized_range_critical(0.05, 2, 120) == doctest::Approx(2.80).epsilon(0.005));
  CHECK(studentized_range_critical(0.01, 4, 30) == doctest::Approx(4.80).epsilon(0.005));
  // Interpolated df lands between its bracketing rows.
  double at_15 = studentized_range_critical(0.05, 3, 15);
  double at_20 = studentized_range_critical(0.05, 3, 20);
  double at_17 = studentized_range_critical(0.05, 3, 17);
  CHECK(at_17 < at_15);
  CHECK(at_17 > at_20);
  // Small df clamps to the first tabulated row.
  CHECK(studentized_range_critical(0.05, 3, 4) ==
        doctest::Approx(studentized_range_critical(0.05, 3, 10)));
  CHECK_THROWS_AS((void)studentized_range_critical(0.05, 11, 20), DomainError);
  CHECK_THROWS_AS((void)studentized_range_critical(0.5, 3, 20), DomainError);
}
