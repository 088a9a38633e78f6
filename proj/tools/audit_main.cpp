// Command-line front end for the audit pipeline:
//   curate       assemble and shortlist a query corpus from suggestion fixtures
//   gen-catalog  generate the synthetic marketplace fixture
//   run          execute the multi-account protocol against the platform
//   analyze      score a run log and emit the analysis document
//   report       write the full report bundle (tables + histograms)
//
// Exit codes: 0 success, 2 configuration/usage error, 3 data error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "audit/catalog_gen.hpp"
#include "audit/corpus.hpp"
#include "audit/errors.hpp"
#include "audit/experiment.hpp"
#include "audit/io.hpp"
#include "audit/platform.hpp"
#include "audit/report.hpp"

namespace fs = std::filesystem;
using namespace audit;

namespace {

struct CurateArgs {
  std::string topic;
  std::vector<std::string> seeds;
  std::vector<std::string> trend_files;
  std::vector<std::string> autocomplete_files;
  std::vector<std::string> manual_files;
  std::string stopwords_file;
  int max_words = 4;
  std::string out;
};

int run_curate(const CurateArgs& args) {
  std::vector<std::unique_ptr<corpus::FileSuggestionProvider>> owned;
  for (const auto& path : args.trend_files)
    owned.push_back(std::make_unique<corpus::FileSuggestionProvider>("trends:" + path, path));
  for (const auto& path : args.autocomplete_files)
    owned.push_back(
        std::make_unique<corpus::FileSuggestionProvider>("autocomplete:" + path, path));
  for (const auto& path : args.manual_files)
    owned.push_back(std::make_unique<corpus::FileSuggestionProvider>("manual:" + path, path));
  std::vector<const corpus::SuggestionProvider*> providers;
  for (const auto& provider : owned) providers.push_back(provider.get());

  auto candidates = corpus::curate_queries(providers, args.topic, args.seeds);

  corpus::ShortlistOptions options;
  options.max_words = args.max_words;
  if (args.stopwords_file.empty()) {
    options.stopwords = corpus::default_stopwords();
  } else {
    std::ifstream in(args.stopwords_file);
    if (!in) throw ConfigError("cannot read '" + args.stopwords_file + "'");
    std::string word;
    while (std::getline(in, word)) {
      word = trim(word);
      if (!word.empty()) options.stopwords.insert(to_lower(word));
    }
  }
  auto shortlisted = corpus::shortlist(candidates, options);
  io::save_query_candidates(shortlisted, args.out);
  std::cout << "curated " << shortlisted.size() << " queries (from "
            << candidates.size() << " candidates) -> " << args.out << "\n";
  return 0;
}

struct GenCatalogArgs {
  platform::CatalogGenOptions options;
  std::string out;
  std::string queries_out;
  std::string plan_out;
};

int run_gen_catalog(const GenCatalogArgs& args) {
  auto fixture = platform::generate_fixture(args.options);
  io::save_catalog(fixture.catalog, args.out);
  std::cout << "catalog: " << fixture.catalog.size() << " items -> " << args.out << "\n";
  if (!args.queries_out.empty()) {
    io::save_annotated_queries(fixture.queries, args.queries_out);
    std::cout << "queries: " << fixture.queries.size() << " -> " << args.queries_out << "\n";
  }
  if (!args.plan_out.empty()) {
    experiment::ExperimentPlan defaults;
    io::json plan{{"days", defaults.days},
                  {"activity_time", format_clock_time(defaults.activity_time)},
                  {"search_time", format_clock_time(defaults.search_time)},
                  {"inter_search_gap_minutes", defaults.inter_search_gap},
                  {"carry_over_threshold_minutes", defaults.carry_over_threshold},
                  {"queries", io::json::array()},
                  {"personalization", io::config_to_json(platform::PersonalizationConfig{})}};
    for (const auto& query : fixture.queries)
      plan["queries"].push_back(io::json{{"text", query.text}, {"stance", query.stance}});
    std::ofstream out(args.plan_out, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + args.plan_out + "'");
    out << plan.dump(2) << '\n';
    std::cout << "plan: -> " << args.plan_out << "\n";
  }
  return 0;
}

struct RunArgs {
  std::string plan_path;
  std::string catalog_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool no_sweep = false;
};

int run_run(const RunArgs& args) {
  platform::Catalog catalog = io::load_catalog(args.catalog_path);
  io::PlanFile plan_file = io::load_plan_file(args.plan_path);
  if (plan_file.queries.empty())
    throw ConfigError("plan '" + args.plan_path + "' supplies no queries");

  platform::PersonalizationConfig config =
      plan_file.personalization.value_or(platform::PersonalizationConfig{});
  if (args.seed) config.rng_seed = *args.seed;
  platform::validate_config(config);

  experiment::ExperimentPlan plan;
  if (plan_file.accounts.empty()) {
    auto treatments = experiment::select_treatments(catalog, config, plan_file.queries,
                                                    config.search_page_size);
    plan = experiment::build_plan(treatments, plan_file.queries, plan_file.overrides);
  } else {
    plan.accounts = plan_file.accounts;
    plan.queries = plan_file.queries;
    const auto& overrides = plan_file.overrides;
    if (overrides.days) plan.days = *overrides.days;
    if (overrides.activity_time) plan.activity_time = *overrides.activity_time;
    if (overrides.search_time) plan.search_time = *overrides.search_time;
    if (overrides.inter_search_gap) plan.inter_search_gap = *overrides.inter_search_gap;
    if (overrides.carry_over_threshold)
      plan.carry_over_threshold = *overrides.carry_over_threshold;
    experiment::validate_plan(plan);
  }

  platform::SimulatedMarketplace marketplace(catalog, config);
  experiment::VirtualClock clock;
  experiment::RunLog log = experiment::run_protocol(plan, marketplace, clock);
  if (!args.no_sweep)
    log.algorithm_sweep = experiment::capture_algorithm_sweep(
        catalog, config, plan.queries, config.search_page_size);

  io::save_run_log(log, args.out_dir);
  io::save_personalization_config(config, (fs::path(args.out_dir) / "config.json").string());
  std::cout << "run complete: " << log.serps.size() << " search pages, "
            << log.homepages.size() << " homepage captures, "
            << log.algorithm_sweep.size() << " sweep pages -> " << args.out_dir << "\n";
  return 0;
}

struct AnalyzeArgs {
  std::string runlog_dir;
  std::string catalog_path;
  std::string out;
  std::string format = "json";
};

int run_analyze(const AnalyzeArgs& args) {
  experiment::RunLog log = io::load_run_log(args.runlog_dir);
  platform::Catalog catalog = io::load_catalog(args.catalog_path);
  report::AnalysisReport analysis = report::analyze(log, catalog);
  if (args.format == "json") {
    report::save_report_json(analysis, args.out);
  } else {
    report::save_scores_csv(analysis, args.out);
  }
  std::cout << "analysis (" << args.format << ") -> " << args.out << "\n";
  return 0;
}

struct ReportArgs {
  std::string runlog_dir;
  std::string catalog_path;
  std::string out_dir;
  std::string format = "csv";
  int bins = 20;
};

int run_report(const ReportArgs& args) {
  experiment::RunLog log = io::load_run_log(args.runlog_dir);
  platform::Catalog catalog = io::load_catalog(args.catalog_path);
  report::AnalysisReport analysis = report::analyze(log, catalog);

  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) throw ConfigError("cannot create directory '" + args.out_dir + "': " + ec.message());
  const fs::path root(args.out_dir);

  report::save_report_json(analysis, (root / "report.json").string());

  std::vector<double> serp_scores, homepage_scores;
  for (const auto& row : analysis.serp_scores) serp_scores.push_back(row.score);
  for (const auto& row : analysis.homepage_scores) homepage_scores.push_back(row.score);
  auto serp_table = report::frequency_table(serp_scores, args.bins);
  auto homepage_table = report::frequency_table(homepage_scores, args.bins);

  if (args.format == "csv") {
    report::save_scores_csv(analysis, (root / "scores.csv").string());
    report::save_frequency_csv(serp_table, (root / "serp_score_frequency.csv").string());
    report::save_frequency_csv(homepage_table,
                               (root / "homepage_score_frequency.csv").string());
  } else {
    report::save_score_records(analysis, (root / "score_records.jsonl").string());
    auto table_to_json = [](const report::FrequencyTable& table) {
      return io::json{{"edges", table.edges}, {"counts", table.counts}};
    };
    std::ofstream out(root / "frequencies.json", std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write frequencies.json");
    out << io::json{{"search_pages", table_to_json(serp_table)},
                    {"homepage_pages", table_to_json(homepage_table)}}
               .dump(2)
        << '\n';
  }
  std::cout << "report bundle (" << args.format << ") -> " << args.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Misinformation audit pipeline for ranked-results platforms"};
  app.require_subcommand(1);

  CurateArgs curate_args;
  auto* curate = app.add_subcommand("curate", "Assemble and shortlist the query corpus");
  curate->add_option("--topic", curate_args.topic, "Topic the corpus is about")->required();
  curate->add_option("--seeds", curate_args.seeds, "Seed terms for autocomplete expansion")
      ->required();
  curate->add_option("--trends", curate_args.trend_files, "Trend-topic fixture (JSONL)");
  curate->add_option("--autocomplete", curate_args.autocomplete_files,
                     "Autocomplete fixture (JSONL)");
  curate->add_option("--manual", curate_args.manual_files, "Manually curated fixture (JSONL)");
  curate->add_option("--stopwords", curate_args.stopwords_file,
                     "Stopword list, one word per line (defaults to the built-in set)");
  curate->add_option("--max-words", curate_args.max_words, "Longest query kept, in words")
      ->check(CLI::PositiveNumber);
  curate->add_option("--out", curate_args.out, "Output JSONL path")->required();

  GenCatalogArgs gen_args;
  auto* gen = app.add_subcommand("gen-catalog", "Generate the synthetic marketplace fixture");
  gen->add_option("--seed", gen_args.options.seed, "Generator seed");
  gen->add_option("--pro-items", gen_args.options.pro_items, "Promoting items");
  gen->add_option("--neutral-items", gen_args.options.neutral_items, "Neutral items");
  gen->add_option("--anti-items", gen_args.options.anti_items, "Opposing items");
  gen->add_option("--distractor-items", gen_args.options.distractor_items,
                  "Off-topic items");
  gen->add_option("--query-count", gen_args.options.query_count, "Queries to generate");
  gen->add_option("--out", gen_args.out, "Catalog JSONL path")->required();
  gen->add_option("--queries-out", gen_args.queries_out, "Annotated query JSONL path");
  gen->add_option("--plan-out", gen_args.plan_out, "Default plan JSON path");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Execute the audit protocol");
  run->add_option("--plan", run_args.plan_path, "Plan JSON path")->required();
  run->add_option("--catalog", run_args.catalog_path, "Catalog JSONL path")->required();
  run->add_option("--seed", run_args.seed, "Override the run seed");
  run->add_option("--out", run_args.out_dir, "Run log output directory")->required();
  run->add_flag("--no-sweep", run_args.no_sweep, "Skip the ranking-algorithm sweep");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Score a run log and run the tests");
  analyze->add_option("--runlog", analyze_args.runlog_dir, "Run log directory")->required();
  analyze->add_option("--catalog", analyze_args.catalog_path, "Catalog JSONL path")
      ->required();
  analyze->add_option("--out", analyze_args.out, "Output path")->required();
  analyze->add_option("--format", analyze_args.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Write the full report bundle");
  report_cmd->add_option("--runlog", report_args.runlog_dir, "Run log directory")->required();
  report_cmd->add_option("--catalog", report_args.catalog_path, "Catalog JSONL path")
      ->required();
  report_cmd->add_option("--out", report_args.out_dir, "Output directory")->required();
  report_cmd->add_option("--format", report_args.format, "Tabular output format")
      ->check(CLI::IsMember({"csv", "json"}));
  report_cmd->add_option("--bins", report_args.bins, "Histogram bins")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::CallForAllHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return 2;
  }

  try {
    if (curate->parsed()) return run_curate(curate_args);
    if (gen->parsed()) return run_gen_catalog(gen_args);
    if (run->parsed()) return run_run(run_args);
    if (analyze->parsed()) return run_analyze(analyze_args);
    if (report_cmd->parsed()) return run_report(report_args);
  } catch (const ConfigError& error) {
    std::cerr << "config error: " << error.what() << "\n";
    return 2;
  } catch (const AuditError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 3;
  } catch (const std::exception& error) {
    std::cerr << "unexpected error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
