#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "audit/experiment.hpp"
#include "audit/io.hpp"
#include "audit/platform.hpp"
#include "audit/stats.hpp"

namespace audit::report {

// Seven-number description of a score or metadata distribution.
struct GroupSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

GroupSummary summarize(std::vector<double> values);  // DomainError on empty input

// Equal-width histogram over the score range [-1, +1].
struct FrequencyTable {
  std::vector<double> edges;        // bins + 1 boundaries
  std::vector<std::size_t> counts;  // per bin; scores of exactly +1 land in the last
};

FrequencyTable frequency_table(const std::vector<double>& scores, int bins);

// One scored page, flattened for tabular output.
struct ScoredPage {
  int day = 0;                // 0 for off-protocol sweep pages
  std::string account_id;     // empty for sweep pages
  std::string activity;       // empty for sweep pages
  std::string treatment;      // empty for the control account and sweep pages
  std::string capture_label;  // "serp" for search pages, else the homepage label
  std::string query;          // empty for homepages
  std::string kind;           // "serp" | "federated"
  double score = 0.0;
  std::size_t result_count = 0;     // scoreable results (total items for homepages)
  std::size_t component_count = 0;  // homepages only
  std::string page_id;
};

// Everything the audit run supports concluding, one research question at a
// time. Tests that a run cannot support (a group missing, not enough data)
// carry a NaN statistic, no p-value, and an explanation in notes.
struct AnalysisReport {
  // Does the chosen ranking algorithm change how much misinformation the
  // result page carries? Only present when the run captured the sweep.
  bool algorithm_sweep_present = false;
  stats::TestResult algorithm_kw;
  stats::TestResult algorithm_tukey;
  // algorithm -> stance label -> per-rank result counts (index = rank - 1).
  std::map<std::string, std::map<std::string, std::vector<std::size_t>>>
      algorithm_rank_counts;

  // Does the stance of the query predict the stance of the results?
  stats::TestResult query_stance_kw;
  stats::TestResult query_stance_tukey;

  // How do ratings and popularity differ across result stances?
  std::map<std::string, GroupSummary> search_avg_rating_by_stance;
  std::map<std::string, GroupSummary> search_num_ratings_by_stance;
  std::map<std::string, GroupSummary> homepage_avg_rating_by_stance;
  std::map<std::string, GroupSummary> homepage_num_ratings_by_stance;

  // Does the kind of profile-building activity matter? (treatment accounts)
  stats::TestResult activity_serp_kw;
  stats::TestResult activity_serp_tukey;
  stats::TestResult activity_fserp_kw;  // after-search homepages
  stats::TestResult activity_fserp_tukey;

  // Does the stance of the built profile matter? (treatment accounts)
  stats::TestResult treatment_serp_kw;
  stats::TestResult treatment_serp_tukey;
  stats::TestResult treatment_fserp_kw;  // all homepage captures
  stats::TestResult treatment_fserp_tukey;

  // History-free control account, for reference.
  std::optional<GroupSummary> control_serp;
  std::optional<GroupSummary> control_fserp;

  std::vector<ScoredPage> serp_scores;      // protocol searches, then sweep pages
  std::vector<ScoredPage> homepage_scores;  // protocol homepage captures
  std::vector<std::string> undefined_pages;  // page ids with no defined score
};

// Scores every captured page against the catalog annotations and runs the
// research-question tests. DataError when any captured item id is missing
// from the catalog (an annotation gap), listing the offending ids.
AnalysisReport analyze(const experiment::RunLog& log, const platform::Catalog& catalog);

// Deterministic serializations: equal reports produce byte-equal files.
io::json report_to_json(const AnalysisReport& report);
void save_report_json(const AnalysisReport& report, const std::string& path);

// "day,account,activity,treatment,capture_label,query,score" — one row per
// scored page, protocol pages only.
void save_scores_csv(const AnalysisReport& report, const std::string& path);

// One JSON record per scored page (sweep included), keyed by page_id.
void save_score_records(const AnalysisReport& report, const std::string& path);

void save_frequency_csv(const FrequencyTable& table, const std::string& path);

}  // namespace audit::report
