#include "audit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <utility>

#include "audit/errors.hpp"
#include "audit/scoring.hpp"

namespace audit::report {
namespace {

double round4(double value) {
  double rounded = std::round(value * 1e4) / 1e4;
  if (rounded == 0.0) rounded = 0.0;  // normalize -0
  return rounded;
}

std::string stance_label(int stance) {
  switch (stance) {
    case 1: return "pro";
    case 0: return "neutral";
    case -1: return "anti";
  }
  throw DomainError("invalid stance " + std::to_string(stance));
}

const std::vector<std::string> kStanceOrder = {"pro", "neutral", "anti"};
const std::vector<std::string> kTreatmentOrder = {"pro", "neutral", "anti", "mix"};
const std::vector<std::string> kActivityOrder = {"browse", "wishlist", "cart"};

std::vector<std::string> algorithm_order() {
  std::vector<std::string> order;
  for (SearchAlgorithm algorithm : kAllSearchAlgorithms)
    order.emplace_back(to_string(algorithm));
  return order;
}

std::vector<stats::Sample> ordered_samples(
    const std::map<std::string, std::vector<double>>& by_label,
    const std::vector<std::string>& order) {
  std::vector<stats::Sample> samples;
  for (const auto& label : order) {
    auto it = by_label.find(label);
    if (it != by_label.end() && !it->second.empty())
      samples.push_back({label, it->second});
  }
  return samples;
}

stats::TestResult not_computed(stats::TestKind kind, const std::string& reason) {
  stats::TestResult result;
  result.test = kind;
  result.statistic = std::numeric_limits<double>::quiet_NaN();
  result.notes = "not computed: " + reason;
  return result;
}

bool is_computed(const stats::TestResult& result) {
  return !std::isnan(result.statistic);
}

stats::TestResult run_kw(const std::vector<stats::Sample>& samples) {
  if (samples.size() < 2)
    return not_computed(stats::TestKind::kruskal_wallis,
                        "needs at least two non-empty groups");
  return stats::kruskal_wallis(samples);
}

stats::TestResult run_tukey(const std::vector<stats::Sample>& samples,
                            double alpha = 0.05) {
  if (samples.size() < 2)
    return not_computed(stats::TestKind::tukey_hsd,
                        "needs at least two non-empty groups");
  if (samples.size() > 10)
    return not_computed(stats::TestKind::tukey_hsd,
                        "critical values tabulated for at most 10 groups");
  std::size_t total = 0;
  for (const auto& sample : samples) total += sample.values.size();
  if (total <= samples.size())
    return not_computed(stats::TestKind::tukey_hsd, "no residual degrees of freedom");
  return stats::tukey_hsd(samples, alpha);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string escaped = "\"";
  for (char c : field) {
    if (c == '"') escaped += '"';
    escaped += c;
  }
  escaped += '"';
  return escaped;
}

std::string format_score(double score) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", round4(score));
  return buffer;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

// --- page re-scoring against the catalog -----------------------------------

struct Rescored {
  bool defined = false;
  double score = 0.0;
  std::size_t result_count = 0;
  std::size_t component_count = 0;
  std::vector<scoring::RankedResult> results;  // scoreable results, SERPs only
};

std::vector<scoring::RankedResult> rescore_results(
    const std::vector<scoring::RankedResult>& captured, const platform::Catalog& catalog) {
  std::vector<std::pair<std::string, corpus::AnnotationClass>> ranked;
  ranked.reserve(captured.size());
  for (const auto& result : captured)
    ranked.emplace_back(result.item_id, catalog.at(result.item_id).stance_class);
  return scoring::to_scoreable_results(ranked);
}

Rescored rescore_serp(const scoring::SerpPage& page, const platform::Catalog& catalog) {
  Rescored rescored;
  rescored.results = rescore_results(page.results, catalog);
  rescored.result_count = rescored.results.size();
  if (rescored.results.empty()) return rescored;
  scoring::SerpPage rebuilt{page.query, rescored.results, page.algorithm, page.captured_at};
  rescored.score = scoring::serp_ms(rebuilt);
  rescored.defined = true;
  return rescored;
}

Rescored rescore_homepage(const scoring::FederatedPage& page,
                          const platform::Catalog& catalog) {
  Rescored rescored;
  scoring::FederatedPage rebuilt;
  rebuilt.captured_at = page.captured_at;
  rebuilt.capture_label = page.capture_label;
  for (const auto& component : page.components) {
    auto items = rescore_results(component.items, catalog);
    rescored.result_count += items.size();
    if (items.empty()) continue;  // a fully excluded component drops out
    rebuilt.components.push_back(
        {component.heading, int(rebuilt.components.size()) + 1, std::move(items)});
  }
  rescored.component_count = rebuilt.components.size();
  if (rebuilt.components.empty()) return rescored;
  rescored.score = scoring::fserp_ms(rebuilt);
  rescored.defined = true;
  return rescored;
}

std::string serp_page_id(int day, const std::string& account, const std::string& query) {
  return "d" + std::to_string(day) + "/" + account + "/serp/" + query;
}

std::string homepage_page_id(int day, const std::string& account, CaptureLabel label) {
  return "d" + std::to_string(day) + "/" + account + "/" + std::string(to_string(label));
}

std::string sweep_page_id(const scoring::SerpPage& page) {
  return "sweep/" + std::string(to_string(page.algorithm)) + "/" + page.query;
}

// --- JSON rendering ----------------------------------------------------------

io::json summary_to_json(const GroupSummary& summary) {
  return io::json{{"count", summary.count},   {"mean", round4(summary.mean)},
                  {"min", round4(summary.min)}, {"q25", round4(summary.q25)},
                  {"median", round4(summary.median)}, {"q75", round4(summary.q75)},
                  {"max", round4(summary.max)}};
}

io::json summaries_to_json(const std::map<std::string, GroupSummary>& by_label) {
  io::json object = io::json::object();
  for (const auto& label : kStanceOrder) {
    auto it = by_label.find(label);
    if (it != by_label.end()) object[label] = summary_to_json(it->second);
  }
  return object;
}

io::json test_to_json(const stats::TestResult& result) {
  if (!is_computed(result)) {
    return io::json{{"computed", false},
                    {"test", std::string(to_string(result.test))},
                    {"notes", result.notes}};
  }
  io::json object{{"computed", true},
                  {"test", std::string(to_string(result.test))},
                  {"statistic", round4(result.statistic)}};
  object["df"] = result.df ? io::json(*result.df) : io::json(nullptr);
  object["p_value"] = result.p_value ? io::json(*result.p_value) : io::json(nullptr);
  io::json means = io::json::object();
  for (const auto& [label, mean] : result.group_means) means[label] = round4(mean);
  object["group_means"] = std::move(means);
  if (!result.pairwise.empty()) {
    io::json pairs = io::json::array();
    for (const auto& pair : result.pairwise) {
      pairs.push_back(io::json{{"a", pair.group_a},
                               {"b", pair.group_b},
                               {"mean_rank_difference", round4(pair.difference)},
                               {"significant", pair.significant}});
    }
    object["pairwise"] = std::move(pairs);
  }
  object["summary"] = result.summary();
  if (!result.notes.empty()) object["notes"] = result.notes;
  return object;
}

io::json page_row_to_json(const ScoredPage& page) {
  io::json row{{"page_id", page.page_id},
               {"kind", page.kind},
               {"day", page.day},
               {"account", page.account_id},
               {"activity", page.activity},
               {"treatment", page.treatment},
               {"capture_label", page.capture_label},
               {"query", page.query},
               {"score", round4(page.score)},
               {"results", page.result_count}};
  if (page.kind == "federated") row["components"] = page.component_count;
  return row;
}

}  // namespace

GroupSummary summarize(std::vector<double> values) {
  if (values.empty()) throw DomainError("summarize: empty sample");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    // Linear interpolation between order statistics (the common "type 7").
    double h = p * double(values.size() - 1);
    std::size_t lo = std::size_t(h);
    if (lo + 1 >= values.size()) return values.back();
    double frac = h - double(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
  };
  GroupSummary summary;
  summary.count = values.size();
  double total = 0.0;
  for (double v : values) total += v;
  summary.mean = total / double(values.size());
  summary.min = values.front();
  summary.q25 = quantile(0.25);
  summary.median = quantile(0.5);
  summary.q75 = quantile(0.75);
  summary.max = values.back();
  return summary;
}

FrequencyTable frequency_table(const std::vector<double>& scores, int bins) {
  if (bins < 1) throw DomainError("frequency_table: bins must be >= 1");
  FrequencyTable table;
  table.edges.reserve(std::size_t(bins) + 1);
  for (int i = 0; i <= bins; ++i)
    table.edges.push_back(-1.0 + 2.0 * double(i) / double(bins));
  table.counts.assign(std::size_t(bins), 0);
  for (double score : scores) {
    if (score < -1.0 || score > 1.0)
      throw DomainError("frequency_table: score " + std::to_string(score) +
                        " outside [-1, 1]");
    int index = int(std::floor((score + 1.0) / 2.0 * double(bins)));
    index = std::clamp(index, 0, bins - 1);
    ++table.counts[std::size_t(index)];
  }
  return table;
}

AnalysisReport analyze(const experiment::RunLog& log, const platform::Catalog& catalog) {
  experiment::validate_run_log(log);

  std::map<std::string, const experiment::AccountSpec*> accounts;
  for (const auto& account : log.plan.accounts)
    accounts.emplace(account.account_id, &account);
  std::map<std::string, int> query_stance;
  for (const auto& query : log.plan.queries) query_stance.emplace(query.text, query.stance);

  // Annotation gaps: every captured item id must resolve against the catalog.
  std::set<std::string> missing;
  auto note_missing = [&](const std::vector<scoring::RankedResult>& results) {
    for (const auto& result : results)
      if (!catalog.find(result.item_id)) missing.insert(result.item_id);
  };
  for (const auto& capture : log.serps) note_missing(capture.page.results);
  for (const auto& capture : log.homepages)
    for (const auto& component : capture.page.components) note_missing(component.items);
  for (const auto& page : log.algorithm_sweep) note_missing(page.results);
  if (!missing.empty()) {
    std::string listed;
    std::size_t shown = 0;
    for (const auto& item_id : missing) {
      if (shown == 20) break;
      listed += (shown ? ", " : "") + item_id;
      ++shown;
    }
    if (missing.size() > shown)
      listed += ", and " + std::to_string(missing.size() - shown) + " more";
    throw DataError("annotation gap: " + std::to_string(missing.size()) +
                    " captured item ids are not in the catalog: " + listed);
  }

  AnalysisReport report;

  std::map<std::string, std::vector<double>> by_query_stance;
  std::map<std::string, std::vector<double>> serp_by_activity;
  std::map<std::string, std::vector<double>> serp_by_treatment;
  std::map<std::string, std::vector<double>> fserp_after_by_activity;
  std::map<std::string, std::vector<double>> fserp_by_treatment;
  std::vector<double> control_serp_scores;
  std::vector<double> control_fserp_scores;
  std::map<std::string, std::vector<double>> search_ratings, search_popularity;
  std::map<std::string, std::vector<double>> home_ratings, home_popularity;

  for (const auto& capture : log.serps) {
    const auto* account = accounts.at(capture.account_id);
    auto stance_it = query_stance.find(capture.page.query);
    if (stance_it == query_stance.end())
      throw DataError("search page for query '" + capture.page.query +
                      "' which is not in the plan");

    ScoredPage row;
    row.day = capture.day;
    row.account_id = capture.account_id;
    row.activity = std::string(to_string(account->activity));
    row.treatment =
        account->treatment ? std::string(to_string(account->treatment->name)) : "";
    row.capture_label = "serp";
    row.query = capture.page.query;
    row.kind = "serp";
    row.page_id = serp_page_id(capture.day, capture.account_id, capture.page.query);

    Rescored rescored = rescore_serp(capture.page, catalog);
    for (const auto& result : rescored.results) {
      const auto& item = catalog.at(result.item_id);
      const std::string label = stance_label(result.stance);
      search_ratings[label].push_back(item.avg_rating);
      search_popularity[label].push_back(double(item.num_ratings));
    }
    if (!rescored.defined) {
      report.undefined_pages.push_back(row.page_id);
      continue;
    }
    row.score = rescored.score;
    row.result_count = rescored.result_count;
    report.serp_scores.push_back(row);

    by_query_stance[stance_label(stance_it->second)].push_back(rescored.score);
    if (account->activity != experiment::Activity::search_only) {
      serp_by_activity[row.activity].push_back(rescored.score);
      serp_by_treatment[row.treatment].push_back(rescored.score);
    } else {
      control_serp_scores.push_back(rescored.score);
    }
  }

  for (const auto& capture : log.homepages) {
    const auto* account = accounts.at(capture.account_id);
    ScoredPage row;
    row.day = capture.day;
    row.account_id = capture.account_id;
    row.activity = std::string(to_string(account->activity));
    row.treatment =
        account->treatment ? std::string(to_string(account->treatment->name)) : "";
    row.capture_label = std::string(to_string(capture.page.capture_label));
    row.kind = "federated";
    row.page_id =
        homepage_page_id(capture.day, capture.account_id, capture.page.capture_label);

    Rescored rescored = rescore_homepage(capture.page, catalog);
    for (const auto& component : capture.page.components) {
      for (const auto& result : rescore_results(component.items, catalog)) {
        const auto& item = catalog.at(result.item_id);
        const std::string label = stance_label(result.stance);
        home_ratings[label].push_back(item.avg_rating);
        home_popularity[label].push_back(double(item.num_ratings));
      }
    }
    if (!rescored.defined) {
      report.undefined_pages.push_back(row.page_id);
      continue;
    }
    row.score = rescored.score;
    row.result_count = rescored.result_count;
    row.component_count = rescored.component_count;
    report.homepage_scores.push_back(row);

    if (account->activity != experiment::Activity::search_only) {
      fserp_by_treatment[row.treatment].push_back(rescored.score);
      if (capture.page.capture_label == CaptureLabel::after_search)
        fserp_after_by_activity[row.activity].push_back(rescored.score);
    } else {
      control_fserp_scores.push_back(rescored.score);
    }
  }

  // Off-protocol algorithm sweep, when captured.
  report.algorithm_sweep_present = !log.algorithm_sweep.empty();
  if (report.algorithm_sweep_present) {
    std::map<std::string, std::vector<double>> by_algorithm;
    for (const auto& page : log.algorithm_sweep) {
      const std::string algorithm{to_string(page.algorithm)};
      Rescored rescored = rescore_serp(page, catalog);
      for (const auto& result : rescored.results) {
        auto& counts = report.algorithm_rank_counts[algorithm][stance_label(result.stance)];
        if (counts.size() < std::size_t(result.rank)) counts.resize(std::size_t(result.rank), 0);
        ++counts[std::size_t(result.rank) - 1];
      }
      if (!rescored.defined) {
        report.undefined_pages.push_back(sweep_page_id(page));
        continue;
      }
      by_algorithm[algorithm].push_back(rescored.score);

      ScoredPage row;
      row.capture_label = "serp";
      row.query = page.query;
      row.kind = "serp";
      row.score = rescored.score;
      row.result_count = rescored.result_count;
      row.page_id = sweep_page_id(page);
      report.serp_scores.push_back(row);
    }
    auto samples = ordered_samples(by_algorithm, algorithm_order());
    report.algorithm_kw = run_kw(samples);
    report.algorithm_tukey = run_tukey(samples);
  } else {
    report.algorithm_kw =
        not_computed(stats::TestKind::kruskal_wallis, "no algorithm sweep in the run log");
    report.algorithm_tukey =
        not_computed(stats::TestKind::tukey_hsd, "no algorithm sweep in the run log");
  }

  {
    auto samples = ordered_samples(by_query_stance, kStanceOrder);
    report.query_stance_kw = run_kw(samples);
    report.query_stance_tukey = run_tukey(samples);
  }
  {
    auto samples = ordered_samples(serp_by_activity, kActivityOrder);
    report.activity_serp_kw = run_kw(samples);
    report.activity_serp_tukey = run_tukey(samples);
  }
  {
    auto samples = ordered_samples(fserp_after_by_activity, kActivityOrder);
    report.activity_fserp_kw = run_kw(samples);
    report.activity_fserp_tukey = run_tukey(samples);
  }
  {
    auto samples = ordered_samples(serp_by_treatment, kTreatmentOrder);
    report.treatment_serp_kw = run_kw(samples);
    report.treatment_serp_tukey = run_tukey(samples);
  }
  {
    auto samples = ordered_samples(fserp_by_treatment, kTreatmentOrder);
    report.treatment_fserp_kw = run_kw(samples);
    report.treatment_fserp_tukey = run_tukey(samples);
  }

  auto summarize_groups = [](const std::map<std::string, std::vector<double>>& by_label) {
    std::map<std::string, GroupSummary> summaries;
    for (const auto& [label, values] : by_label)
      if (!values.empty()) summaries.emplace(label, summarize(values));
    return summaries;
  };
  report.search_avg_rating_by_stance = summarize_groups(search_ratings);
  report.search_num_ratings_by_stance = summarize_groups(search_popularity);
  report.homepage_avg_rating_by_stance = summarize_groups(home_ratings);
  report.homepage_num_ratings_by_stance = summarize_groups(home_popularity);

  if (!control_serp_scores.empty()) report.control_serp = summarize(control_serp_scores);
  if (!control_fserp_scores.empty())
    report.control_fserp = summarize(control_fserp_scores);

  return report;
}

io::json report_to_json(const AnalysisReport& report) {
  io::json document;

  std::size_t sweep_rows = 0;
  for (const auto& row : report.serp_scores)
    if (row.account_id.empty()) ++sweep_rows;
  document["pages"] = io::json{{"searches", report.serp_scores.size() - sweep_rows},
                               {"homepages", report.homepage_scores.size()},
                               {"sweep", sweep_rows},
                               {"undefined", report.undefined_pages}};

  io::json algorithms{{"present", report.algorithm_sweep_present}};
  algorithms["kruskal_wallis"] = test_to_json(report.algorithm_kw);
  algorithms["tukey"] = test_to_json(report.algorithm_tukey);
  io::json rank_counts = io::json::object();
  for (const auto& [algorithm, by_stance] : report.algorithm_rank_counts) {
    io::json per_stance = io::json::object();
    for (const auto& label : kStanceOrder) {
      auto it = by_stance.find(label);
      if (it != by_stance.end()) per_stance[label] = it->second;
    }
    rank_counts[algorithm] = std::move(per_stance);
  }
  algorithms["rank_counts"] = std::move(rank_counts);
  document["ranking_algorithms"] = std::move(algorithms);

  document["query_stance"] = io::json{{"kruskal_wallis", test_to_json(report.query_stance_kw)},
                                      {"tukey", test_to_json(report.query_stance_tukey)}};

  document["result_metadata"] = io::json{
      {"search",
       io::json{{"avg_rating", summaries_to_json(report.search_avg_rating_by_stance)},
                {"num_ratings", summaries_to_json(report.search_num_ratings_by_stance)}}},
      {"homepage",
       io::json{{"avg_rating", summaries_to_json(report.homepage_avg_rating_by_stance)},
                {"num_ratings",
                 summaries_to_json(report.homepage_num_ratings_by_stance)}}}};

  document["activity"] = io::json{
      {"search", io::json{{"kruskal_wallis", test_to_json(report.activity_serp_kw)},
                          {"tukey", test_to_json(report.activity_serp_tukey)}}},
      {"homepage_after_search",
       io::json{{"kruskal_wallis", test_to_json(report.activity_fserp_kw)},
                {"tukey", test_to_json(report.activity_fserp_tukey)}}}};

  document["treatment"] = io::json{
      {"search", io::json{{"kruskal_wallis", test_to_json(report.treatment_serp_kw)},
                          {"tukey", test_to_json(report.treatment_serp_tukey)}}},
      {"homepage", io::json{{"kruskal_wallis", test_to_json(report.treatment_fserp_kw)},
                            {"tukey", test_to_json(report.treatment_fserp_tukey)}}}};

  document["control"] = io::json{
      {"search",
       report.control_serp ? summary_to_json(*report.control_serp) : io::json(nullptr)},
      {"homepage", report.control_fserp ? summary_to_json(*report.control_fserp)
                                        : io::json(nullptr)}};

  io::json serp_rows = io::json::array();
  for (const auto& row : report.serp_scores) serp_rows.push_back(page_row_to_json(row));
  io::json homepage_rows = io::json::array();
  for (const auto& row : report.homepage_scores)
    homepage_rows.push_back(page_row_to_json(row));
  document["scores"] =
      io::json{{"search_pages", std::move(serp_rows)},
               {"homepage_pages", std::move(homepage_rows)}};
  return document;
}

void save_report_json(const AnalysisReport& report, const std::string& path) {
  open_out(path) << report_to_json(report).dump(2) << '\n';
}

void save_scores_csv(const AnalysisReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "day,account,activity,treatment,capture_label,query,score\n";
  auto write_row = [&](const ScoredPage& row) {
    out << row.day << ',' << csv_escape(row.account_id) << ','
        << csv_escape(row.activity) << ',' << csv_escape(row.treatment) << ','
        << csv_escape(row.capture_label) << ',' << csv_escape(row.query) << ','
        << format_score(row.score) << '\n';
  };
  for (const auto& row : report.serp_scores)
    if (!row.account_id.empty()) write_row(row);
  for (const auto& row : report.homepage_scores) write_row(row);
}

void save_score_records(const AnalysisReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  auto write_record = [&](const ScoredPage& row) {
    io::json record{{"page_id", row.page_id},
                    {"kind", row.kind},
                    {"score", round4(row.score)},
                    {"n", row.result_count}};
    record["m"] = row.kind == "federated" ? io::json(row.component_count) : io::json(nullptr);
    record["capture_label"] =
        row.kind == "federated" ? io::json(row.capture_label) : io::json(nullptr);
    out << record.dump() << '\n';
  };
  for (const auto& row : report.serp_scores) write_record(row);
  for (const auto& row : report.homepage_scores) write_record(row);
}

void save_frequency_csv(const FrequencyTable& table, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "bin_start,bin_end,count\n";
  char buffer[64];
  for (std::size_t i = 0; i < table.counts.size(); ++i) {
    std::snprintf(buffer, sizeof buffer, "%.6g,%.6g,", table.edges[i], table.edges[i + 1]);
    out << buffer << table.counts[i] << '\n';
  }
}

}  // namespace audit::report
