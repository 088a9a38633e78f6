#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "audit/catalog_gen.hpp"
#include "audit/errors.hpp"
#include "audit/experiment.hpp"
#include "audit/report.hpp"

using namespace audit;
using namespace audit::report;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("audit_report_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// One query per stance: the generated list is a neutral block, then pro, then
// anti, so a plain prefix would be single-stance.
std::vector<corpus::AnnotatedQuery> mixed_queries(
    const std::vector<corpus::AnnotatedQuery>& all) {
  return {all[0], all[9], all[19]};
}

struct RunFixture {
  platform::GeneratedFixture generated = platform::generate_fixture({});
  platform::PersonalizationConfig config;
  std::vector<corpus::AnnotatedQuery> queries = mixed_queries(generated.queries);
  experiment::RunLog log;

  RunFixture() {
    auto treatments =
        experiment::select_treatments(generated.catalog, config, generated.queries);
    experiment::PlanOverrides overrides;
    overrides.days = 1;
    auto plan = experiment::build_plan(treatments, queries, overrides);
    platform::SimulatedMarketplace marketplace(generated.catalog, config);
    experiment::VirtualClock clock;
    log = experiment::run_protocol(plan, marketplace, clock);
    log.algorithm_sweep =
        experiment::capture_algorithm_sweep(generated.catalog, config, queries);
  }
};

}  // namespace

TEST_CASE("summarize reports the seven-number description") {
  auto summary = summarize({4.0, 1.0, 3.0, 2.0});
  CHECK(summary.count == 4);
  CHECK(summary.mean == doctest::Approx(2.5));
  CHECK(summary.min == doctest::Approx(1.0));
  CHECK(summary.q25 == doctest::Approx(1.75));
  CHECK(summary.median == doctest::Approx(2.5));
  CHECK(summary.q75 == doctest::Approx(3.25));
  CHECK(summary.max == doctest::Approx(4.0));

  auto single = summarize({5.0});
  CHECK(single.count == 1);
  CHECK(single.min == 5.0);
  CHECK(single.q25 == 5.0);
  CHECK(single.median == 5.0);
  CHECK(single.q75 == 5.0);
  CHECK(single.max == 5.0);

  CHECK_THROWS_AS((void)summarize({}), DomainError);
}

TEST_CASE("frequency table splits the score range into equal bins") {
  auto table = frequency_table({-1.0, 1.0}, 2);
  REQUIRE(table.counts.size() == 2);
  CHECK(table.counts[0] == 1);
  CHECK(table.counts[1] == 1);
  REQUIRE(table.edges.size() == 3);
  CHECK(table.edges[0] == doctest::Approx(-1.0));
  CHECK(table.edges[1] == doctest::Approx(0.0));
  CHECK(table.edges[2] == doctest::Approx(1.0));

  // 201 evenly spaced scores; only the closing bin includes its upper edge.
  std::vector<double> grid;
  for (int k = 0; k <= 200; ++k) grid.push_back((k - 100) / 100.0);
  auto fine = frequency_table(grid, 4);
  REQUIRE(fine.counts.size() == 4);
  CHECK(fine.counts[0] == 50);
  CHECK(fine.counts[1] == 50);
  CHECK(fine.counts[2] == 50);
  CHECK(fine.counts[3] == 51);

  CHECK_THROWS_AS((void)frequency_table({0.0}, 0), DomainError);
  CHECK_THROWS_AS((void)frequency_table({1.5}, 2), DomainError);
}

TEST_CASE("analysis scores every captured page exactly once") {
  RunFixture fixture;
  auto report = analyze(fixture.log, fixture.generated.catalog);

  const std::size_t total_pages = fixture.log.serps.size() +
                                  fixture.log.homepages.size() +
                                  fixture.log.algorithm_sweep.size();
  CHECK(fixture.log.serps.size() == 13 * 3);
  CHECK(fixture.log.homepages.size() == 13 + 13 + 12);
  CHECK(fixture.log.algorithm_sweep.size() == 5 * 3);
  CHECK(report.serp_scores.size() + report.homepage_scores.size() +
            report.undefined_pages.size() ==
        total_pages);

  CHECK(report.algorithm_sweep_present);
  CHECK(report.algorithm_kw.p_value.has_value());
  CHECK(report.query_stance_kw.p_value.has_value());
  CHECK(report.treatment_serp_kw.p_value.has_value());
  CHECK(report.treatment_fserp_kw.p_value.has_value());
  CHECK(report.activity_serp_kw.p_value.has_value());
  CHECK(report.activity_fserp_kw.p_value.has_value());

  REQUIRE(report.control_serp.has_value());
  CHECK(report.control_serp->count == 3);
  REQUIRE(report.control_fserp.has_value());
  CHECK(report.control_fserp->count == 2);
  // The history-free homepage is pure popularity: all off-topic, score zero.
  CHECK(report.control_fserp->min == 0.0);
  CHECK(report.control_fserp->max == 0.0);

  CHECK(!report.search_avg_rating_by_stance.empty());
  CHECK(!report.homepage_num_ratings_by_stance.empty());
  CHECK(report.algorithm_rank_counts.count("featured") == 1);
}

TEST_CASE("scored pages carry their provenance ids") {
  RunFixture fixture;
  auto report = analyze(fixture.log, fixture.generated.catalog);

  REQUIRE(!report.serp_scores.empty());
  const auto& first = report.serp_scores.front();
  CHECK(first.page_id == "d1/acct-browse-anti/serp/" + fixture.queries[0].text);
  CHECK(first.kind == "serp");
  CHECK(first.capture_label == "serp");
  CHECK(first.activity == "browse");
  CHECK(first.treatment == "anti");

  REQUIRE(!report.homepage_scores.empty());
  const auto& home = report.homepage_scores.front();
  CHECK(home.page_id == "d1/acct-browse-anti/after-action");
  CHECK(home.kind == "federated");
  CHECK(home.component_count >= 1);

  const auto& sweep = report.serp_scores.back();
  CHECK(sweep.page_id.rfind("sweep/", 0) == 0);
  CHECK(sweep.account_id.empty());
  CHECK(sweep.day == 0);
}

TEST_CASE("a stance-free catalog yields all-zero scores and a flat test") {
  RunFixture fixture;
  auto items = fixture.generated.catalog.items();
  for (auto& item : items) item.stance_class = corpus::AnnotationClass(0);
  platform::Catalog neutral_catalog(std::move(items));

  std::vector<experiment::Treatment> treatments;
  const auto names = {experiment::TreatmentName::pro, experiment::TreatmentName::neutral,
                      experiment::TreatmentName::anti, experiment::TreatmentName::mix};
  std::size_t cursor = 0;
  for (auto name : names) {
    experiment::Treatment treatment;
    treatment.name = name;
    for (int i = 0; i < experiment::kTreatmentSize; ++i)
      treatment.items.push_back(neutral_catalog.items()[cursor++].item_id);
    treatments.push_back(std::move(treatment));
  }
  experiment::PlanOverrides overrides;
  overrides.days = 1;
  std::vector<corpus::AnnotatedQuery> queries = {fixture.generated.queries[0],
                                                 fixture.generated.queries[9]};
  auto plan = experiment::build_plan(treatments, queries, overrides);
  platform::SimulatedMarketplace marketplace(neutral_catalog,
                                             platform::PersonalizationConfig{});
  experiment::VirtualClock clock;
  auto log = experiment::run_protocol(plan, marketplace, clock);

  auto report = analyze(log, neutral_catalog);
  CHECK(report.undefined_pages.empty());
  for (const auto& row : report.serp_scores) CHECK(row.score == 0.0);
  for (const auto& row : report.homepage_scores) CHECK(row.score == 0.0);
  CHECK(report.treatment_fserp_kw.statistic == 0.0);
  REQUIRE(report.treatment_fserp_kw.p_value.has_value());
  CHECK(*report.treatment_fserp_kw.p_value == doctest::Approx(1.0));
}

TEST_CASE("analysis rejects captures that reference unannotated items") {
  RunFixture fixture;
  const std::string removed = fixture.log.serps.front().page.results.front().item_id;
  std::vector<platform::Item> kept;
  for (const auto& item : fixture.generated.catalog.items())
    if (item.item_id != removed) kept.push_back(item);
  platform::Catalog gappy(std::move(kept));

  try {
    (void)analyze(fixture.log, gappy);
    FAIL("expected DataError");
  } catch (const DataError& error) {
    std::string what = error.what();
    CHECK(what.find("annotation gap") != std::string::npos);
    CHECK(what.find(removed) != std::string::npos);
  }
}

TEST_CASE("the rendered report is byte-stable") {
  RunFixture fixture;
  auto one = report_to_json(analyze(fixture.log, fixture.generated.catalog));
  auto two = report_to_json(analyze(fixture.log, fixture.generated.catalog));
  CHECK(one.dump() == two.dump());

  for (const char* key : {"pages", "ranking_algorithms", "query_stance",
                          "result_metadata", "activity", "treatment", "control",
                          "scores"})
    CHECK(one.contains(key));
}

TEST_CASE("score tables land on disk in the documented shapes") {
  RunFixture fixture;
  auto report = analyze(fixture.log, fixture.generated.catalog);
  TempDir dir;

  save_scores_csv(report, dir.file("scores.csv"));
  auto lines = read_lines(dir.file("scores.csv"));
  REQUIRE(!lines.empty());
  CHECK(lines[0] == "day,account,activity,treatment,capture_label,query,score");
  std::size_t protocol_serps = 0;
  for (const auto& row : report.serp_scores)
    if (!row.account_id.empty()) ++protocol_serps;
  CHECK(lines.size() == 1 + protocol_serps + report.homepage_scores.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
    // Scores print with four decimals.
    auto dot = line.rfind('.');
    REQUIRE(dot != std::string::npos);
    CHECK(line.size() - dot - 1 == 4);
  }

  save_score_records(report, dir.file("records.jsonl"));
  auto records = read_lines(dir.file("records.jsonl"));
  CHECK(records.size() == report.serp_scores.size() + report.homepage_scores.size());
  std::set<std::string> ids;
  for (const auto& record : records) {
    auto parsed = io::json::parse(record);
    ids.insert(parsed.at("page_id").get<std::string>());
  }
  CHECK(ids.size() == records.size());

  save_frequency_csv(frequency_table({-1.0, 0.0, 1.0}, 2), dir.file("freq.csv"));
  auto freq = read_lines(dir.file("freq.csv"));
  REQUIRE(freq.size() == 3);
  CHECK(freq[0] == "bin_start,bin_end,count");
  CHECK(freq[1] == "-1,0,1");   // only -1 falls below zero
  CHECK(freq[2] == "0,1,2");    // 0 opens the bin, +1 closes the range

  save_report_json(report, dir.file("report.json"));
  auto reread = io::json::parse(std::ifstream(dir.file("report.json")));
  CHECK(reread.at("pages").at("searches").get<std::size_t>() == protocol_serps);
}
