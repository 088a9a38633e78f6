#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "audit/io.hpp"

// Exercises the installed command-line binary end to end. The binary path is
// injected by the build so the test always drives the freshly built tool.
#ifndef AUDIT_CLI_BIN
#error "AUDIT_CLI_BIN must point at the audit binary"
#endif

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("audit_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const TempDir& dir, const std::string& args) {
  const std::string log = dir.file("cli_output.txt");
  const std::string command =
      std::string(AUDIT_CLI_BIN) + " " + args + " > '" + log + "' 2>&1";
  int raw = std::system(command.c_str());
  REQUIRE(raw != -1);
  if (!WIFEXITED(raw)) return -1;
  return WEXITSTATUS(raw);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

std::size_t line_count(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

// Shrinks the generated 14-day plan to a one-day, nine-query run with three
// queries of each stance (the generated list is grouped by stance). Fewer
// queries starve treatment selection: the pooled search results stop
// surfacing twelve items per stance.
constexpr std::size_t kSmallPlanQueries = 9;

void shrink_plan(const std::string& path) {
  auto plan = audit::io::json::parse(std::ifstream(path));
  plan["days"] = 1;
  audit::io::json queries = audit::io::json::array();
  for (std::size_t block : {std::size_t(0), std::size_t(9), std::size_t(19)})
    for (std::size_t offset = 0; offset < kSmallPlanQueries / 3; ++offset)
      queries.push_back(plan["queries"][block + offset]);
  plan["queries"] = std::move(queries);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << plan.dump(2) << '\n';
}

}  // namespace

TEST_CASE("the pipeline runs end to end from the command line") {
  TempDir dir;

  CHECK(run_cli(dir, "gen-catalog --seed 5 --out " + dir.file("catalog.jsonl") +
                         " --queries-out " + dir.file("queries.jsonl") +
                         " --plan-out " + dir.file("plan.json")) == 0);
  REQUIRE(fs::exists(dir.file("catalog.jsonl")));
  REQUIRE(fs::exists(dir.file("plan.json")));
  CHECK(line_count(dir.file("catalog.jsonl")) == 72 + 72 + 72 + 90 + 2 + 2);
  CHECK(line_count(dir.file("queries.jsonl")) == 29);

  shrink_plan(dir.file("plan.json"));

  CHECK(run_cli(dir, "run --plan " + dir.file("plan.json") + " --catalog " +
                         dir.file("catalog.jsonl") + " --seed 7 --out " +
                         dir.file("runlog")) == 0);
  REQUIRE(fs::exists(dir.file("runlog/plan.json")));
  REQUIRE(fs::exists(dir.file("runlog/pages.jsonl")));
  REQUIRE(fs::exists(dir.file("runlog/events.jsonl")));
  REQUIRE(fs::exists(dir.file("runlog/sweep.jsonl")));
  REQUIRE(fs::exists(dir.file("runlog/config.json")));
  CHECK(line_count(dir.file("runlog/pages.jsonl")) ==
        13 * kSmallPlanQueries + (13 + 13 + 12));
  CHECK(line_count(dir.file("runlog/sweep.jsonl")) == 5 * kSmallPlanQueries);

  CHECK(run_cli(dir, "analyze --runlog " + dir.file("runlog") + " --catalog " +
                         dir.file("catalog.jsonl") + " --out " +
                         dir.file("report.json")) == 0);
  auto report = audit::io::json::parse(std::ifstream(dir.file("report.json")));
  CHECK(report.at("pages").at("homepages").get<int>() == 13 + 13 + 12);
  CHECK(report.at("ranking_algorithms").at("present").get<bool>());

  CHECK(run_cli(dir, "analyze --runlog " + dir.file("runlog") + " --catalog " +
                         dir.file("catalog.jsonl") + " --format csv --out " +
                         dir.file("scores.csv")) == 0);
  std::ifstream csv(dir.file("scores.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "day,account,activity,treatment,capture_label,query,score");

  CHECK(run_cli(dir, "report --runlog " + dir.file("runlog") + " --catalog " +
                         dir.file("catalog.jsonl") + " --format csv --bins 8 --out " +
                         dir.file("bundle")) == 0);
  CHECK(fs::exists(dir.file("bundle/report.json")));
  CHECK(fs::exists(dir.file("bundle/scores.csv")));
  CHECK(fs::exists(dir.file("bundle/serp_score_frequency.csv")));
  CHECK(fs::exists(dir.file("bundle/homepage_score_frequency.csv")));
  CHECK(line_count(dir.file("bundle/serp_score_frequency.csv")) == 1 + 8);

  CHECK(run_cli(dir, "report --runlog " + dir.file("runlog") + " --catalog " +
                         dir.file("catalog.jsonl") + " --format json --out " +
                         dir.file("bundle_json")) == 0);
  CHECK(fs::exists(dir.file("bundle_json/report.json")));
  CHECK(fs::exists(dir.file("bundle_json/score_records.jsonl")));
  CHECK(fs::exists(dir.file("bundle_json/frequencies.json")));
}

TEST_CASE("equal seeds reproduce the run log byte for byte") {
  TempDir dir;
  REQUIRE(run_cli(dir, "gen-catalog --seed 11 --out " + dir.file("catalog.jsonl") +
                           " --plan-out " + dir.file("plan.json")) == 0);
  shrink_plan(dir.file("plan.json"));

  for (const char* out : {"run_a", "run_b"})
    REQUIRE(run_cli(dir, "run --plan " + dir.file("plan.json") + " --catalog " +
                             dir.file("catalog.jsonl") + " --seed 3 --out " +
                             dir.file(out)) == 0);
  CHECK(slurp(dir.file("run_a/pages.jsonl")) == slurp(dir.file("run_b/pages.jsonl")));
  CHECK(slurp(dir.file("run_a/events.jsonl")) == slurp(dir.file("run_b/events.jsonl")));
  CHECK(slurp(dir.file("run_a/sweep.jsonl")) == slurp(dir.file("run_b/sweep.jsonl")));

  // A different seed reshuffles the mixed treatment, so the logs diverge.
  REQUIRE(run_cli(dir, "run --plan " + dir.file("plan.json") + " --catalog " +
                           dir.file("catalog.jsonl") + " --seed 4 --out " +
                           dir.file("run_c")) == 0);
  CHECK(slurp(dir.file("run_a/events.jsonl")) != slurp(dir.file("run_c/events.jsonl")));
}

TEST_CASE("curate shortlists suggestion fixtures") {
  TempDir dir;
  {
    std::ofstream fixture(dir.file("manual.jsonl"));
    fixture << R"({"text": "vaccine safety", "source": "manual"})" << "\n"
            << R"({"text": "Vaccine Safety", "source": "manual"})" << "\n"
            << R"({"text": "vaccines", "source": "manual"})" << "\n"
            << R"({"text": "the long history of vaccines in modern medicine", "source": "manual"})"
            << "\n";
  }
  CHECK(run_cli(dir, "curate --topic vaccines --seeds vaccine --manual " +
                         dir.file("manual.jsonl") + " --out " +
                         dir.file("curated.jsonl")) == 0);
  CHECK(line_count(dir.file("curated.jsonl")) == 2);
}

TEST_CASE("usage errors exit with the configuration code") {
  TempDir dir;
  CHECK(run_cli(dir, "") == 2);                       // no subcommand
  CHECK(run_cli(dir, "frobnicate") == 2);             // unknown subcommand
  CHECK(run_cli(dir, "run --plan p.json") == 2);      // missing required flags
  CHECK(run_cli(dir, "analyze --runlog x --catalog y --out z --format xml") == 2);
  CHECK(run_cli(dir, "--help") == 0);
  CHECK(run_cli(dir, "gen-catalog --help") == 0);

  // A plan path that does not exist is a configuration problem.
  CHECK(run_cli(dir, "run --plan " + dir.file("missing.json") + " --catalog " +
                         dir.file("missing.jsonl") + " --out " + dir.file("out")) == 2);
}

TEST_CASE("malformed data exits with the data code") {
  TempDir dir;
  REQUIRE(run_cli(dir, "gen-catalog --seed 5 --out " + dir.file("catalog.jsonl") +
                           " --plan-out " + dir.file("plan.json")) == 0);
  shrink_plan(dir.file("plan.json"));

  {
    std::ofstream bad(dir.file("bad_catalog.jsonl"));
    bad << R"({"item_id": "B000000001", "title": "x", "stance_class": 9,)"
        << R"( "avg_rating": 4.0, "num_ratings": 10, "price": 5.0,)"
        << R"( "arrival_day": 1, "relevance_terms": ["vaccine"]})" << "\n";
  }
  CHECK(run_cli(dir, "run --plan " + dir.file("plan.json") + " --catalog " +
                         dir.file("bad_catalog.jsonl") + " --out " +
                         dir.file("out")) == 3);

  {
    std::ofstream garbled(dir.file("garbled.jsonl"));
    garbled << "{not json at all\n";
  }
  CHECK(run_cli(dir, "run --plan " + dir.file("plan.json") + " --catalog " +
                         dir.file("garbled.jsonl") + " --out " + dir.file("out")) == 3);
}
