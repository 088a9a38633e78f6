#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "audit/corpus.hpp"
#include "audit/experiment.hpp"
#include "audit/platform.hpp"

// Serialization of every artifact the pipeline reads or writes. Conventions:
// record streams are line-delimited JSON, single documents are pretty-printed
// JSON, and key order is fixed so equal inputs produce byte-equal files.
// A file that cannot be opened raises ConfigError; a file whose contents are
// malformed raises DataError naming the file and line.
namespace audit::io {

using json = nlohmann::ordered_json;

// --- catalog: one item per line -------------------------------------------
platform::Catalog load_catalog(const std::string& path);
void save_catalog(const platform::Catalog& catalog, const std::string& path);

// --- stance-annotated queries: {"text", "stance"} per line -----------------
std::vector<corpus::AnnotatedQuery> load_annotated_queries(const std::string& path);
void save_annotated_queries(const std::vector<corpus::AnnotatedQuery>& queries,
                            const std::string& path);

// --- raw query candidates: {"text", "source", "seed"?} per line ------------
std::vector<corpus::QueryCandidate> load_query_candidates(const std::string& path);
void save_query_candidates(const std::vector<corpus::QueryCandidate>& candidates,
                           const std::string& path);

// --- ranking / personalization knobs ---------------------------------------
json config_to_json(const platform::PersonalizationConfig& config);
platform::PersonalizationConfig config_from_json(const json& document);
platform::PersonalizationConfig load_personalization_config(const std::string& path);
void save_personalization_config(const platform::PersonalizationConfig& config,
                                 const std::string& path);

// --- experiment plan --------------------------------------------------------
json plan_to_json(const experiment::ExperimentPlan& plan);
experiment::ExperimentPlan plan_from_json(const json& document);

// A plan as supplied to the CLI: schedule overrides, the query list (inline
// or via "queries_file", resolved relative to the plan file), optional
// ranking knobs, and optionally pre-assigned accounts. When `accounts` is
// empty the runner selects treatments from the platform itself.
struct PlanFile {
  experiment::PlanOverrides overrides;
  std::vector<corpus::AnnotatedQuery> queries;
  std::optional<platform::PersonalizationConfig> personalization;
  std::vector<experiment::AccountSpec> accounts;
};

PlanFile load_plan_file(const std::string& path);

// --- run log ----------------------------------------------------------------
// Directory layout: plan.json, pages.jsonl, events.jsonl, sweep.jsonl
// (present only when an algorithm sweep was captured).
void save_run_log(const experiment::RunLog& log, const std::string& dir);
experiment::RunLog load_run_log(const std::string& dir);

}  // namespace audit::io
