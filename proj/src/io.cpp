#include "audit/io.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <utility>

#include "audit/errors.hpp"

namespace fs = std::filesystem;

namespace audit::io {
namespace {

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  return in;
}

// Streams a JSONL file record by record; the callback gets 1-based line
// numbers for error messages. Blank lines are skipped.
void for_each_record(const std::string& path,
                     const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in = open_for_read(path);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const nlohmann::json::exception& error) {
      throw DataError(path + ":" + std::to_string(line_number) + ": " + error.what());
    }
    try {
      fn(line_number, record);
    } catch (const nlohmann::json::exception& error) {
      throw DataError(path + ":" + std::to_string(line_number) + ": " + error.what());
    } catch (const DomainError& error) {
      throw DataError(path + ":" + std::to_string(line_number) + ": " + error.what());
    }
  }
}

json load_document(const std::string& path) {
  std::ifstream in = open_for_read(path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& error) {
    throw DataError(path + ": " + error.what());
  }
}

// json exceptions escaping a single-document parse become DataErrors too.
template <class Fn>
auto guarded(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& error) {
    throw DataError(path + ": " + error.what());
  } catch (const DomainError& error) {
    throw DataError(path + ": " + error.what());
  }
}

json item_to_json(const platform::Item& item) {
  return json{{"item_id", item.item_id},
              {"title", item.title},
              {"stance_class", item.stance_class.raw()},
              {"avg_rating", item.avg_rating},
              {"num_ratings", item.num_ratings},
              {"price", item.price},
              {"arrival_day", item.arrival_day},
              {"relevance_terms", item.relevance_terms}};
}

platform::Item item_from_json(const json& record) {
  platform::Item item;
  item.item_id = record.at("item_id").get<std::string>();
  item.title = record.at("title").get<std::string>();
  item.stance_class = corpus::AnnotationClass(record.at("stance_class").get<int>());
  item.avg_rating = record.at("avg_rating").get<double>();
  item.num_ratings = record.at("num_ratings").get<int>();
  item.price = record.at("price").get<double>();
  item.arrival_day = record.at("arrival_day").get<int>();
  item.relevance_terms = record.at("relevance_terms").get<std::vector<std::string>>();
  return item;
}

json results_to_json(const std::vector<scoring::RankedResult>& results) {
  json array = json::array();
  for (const auto& result : results) {
    array.push_back(json{{"item_id", result.item_id},
                         {"rank", result.rank},
                         {"stance", result.stance}});
  }
  return array;
}

std::vector<scoring::RankedResult> results_from_json(const json& array) {
  std::vector<scoring::RankedResult> results;
  for (const auto& entry : array) {
    results.push_back({entry.at("item_id").get<std::string>(),
                       entry.at("rank").get<int>(), entry.at("stance").get<int>()});
  }
  return results;
}

json serp_to_json(const scoring::SerpPage& page) {
  return json{{"query", page.query},
              {"algorithm", std::string(to_string(page.algorithm))},
              {"captured_at", page.captured_at},
              {"results", results_to_json(page.results)}};
}

scoring::SerpPage serp_from_json(const json& record) {
  auto results = results_from_json(record.at("results"));
  // Re-validate rank structure on the way in; the size cap applied at capture
  // time is whatever the plan used, so only structure is checked here.
  int limit = std::max<int>(scoring::kDefaultPageLimit, int(results.size()));
  return scoring::make_serp_page(record.at("query").get<std::string>(),
                                 parse_search_algorithm(record.at("algorithm").get<std::string>()),
                                 record.at("captured_at").get<VirtualTime>(),
                                 std::move(results), limit);
}

json federated_to_json(const scoring::FederatedPage& page) {
  json components = json::array();
  for (const auto& component : page.components) {
    components.push_back(json{{"heading", component.heading},
                              {"rank", component.rank},
                              {"items", results_to_json(component.items)}});
  }
  return json{{"label", std::string(to_string(page.capture_label))},
              {"captured_at", page.captured_at},
              {"components", std::move(components)}};
}

scoring::FederatedPage federated_from_json(const json& record) {
  std::vector<scoring::RecComponent> components;
  for (const auto& entry : record.at("components")) {
    components.push_back(scoring::make_component(entry.at("heading").get<std::string>(),
                                                 entry.at("rank").get<int>(),
                                                 results_from_json(entry.at("items"))));
  }
  return scoring::make_federated_page(
      std::move(components), record.at("captured_at").get<VirtualTime>(),
      parse_capture_label(record.at("label").get<std::string>()));
}

json treatment_to_json(const experiment::Treatment& treatment) {
  return json{{"name", std::string(to_string(treatment.name))},
              {"items", treatment.items}};
}

experiment::Treatment treatment_from_json(const json& record) {
  return {experiment::parse_treatment_name(record.at("name").get<std::string>()),
          record.at("items").get<std::vector<std::string>>()};
}

json account_to_json(const experiment::AccountSpec& account) {
  json record{{"account_id", account.account_id},
              {"activity", std::string(to_string(account.activity))}};
  if (account.treatment) record["treatment"] = treatment_to_json(*account.treatment);
  return record;
}

experiment::AccountSpec account_from_json(const json& record) {
  experiment::AccountSpec account;
  account.account_id = record.at("account_id").get<std::string>();
  account.activity = experiment::parse_activity(record.at("activity").get<std::string>());
  if (record.contains("treatment"))
    account.treatment = treatment_from_json(record.at("treatment"));
  return account;
}

json queries_to_json(const std::vector<corpus::AnnotatedQuery>& queries) {
  json array = json::array();
  for (const auto& query : queries)
    array.push_back(json{{"text", query.text}, {"stance", query.stance}});
  return array;
}

std::vector<corpus::AnnotatedQuery> queries_from_json(const json& array) {
  std::vector<corpus::AnnotatedQuery> queries;
  for (const auto& entry : array) {
    corpus::AnnotatedQuery query{entry.at("text").get<std::string>(),
                                 entry.at("stance").get<int>()};
    corpus::validate_annotated_query(query);
    queries.push_back(std::move(query));
  }
  return queries;
}

}  // namespace

platform::Catalog load_catalog(const std::string& path) {
  std::vector<platform::Item> items;
  for_each_record(path, [&](std::size_t, const json& record) {
    items.push_back(item_from_json(record));
  });
  try {
    return platform::Catalog(std::move(items));
  } catch (const DataError& error) {
    throw DataError(path + ": " + error.what());
  }
}

void save_catalog(const platform::Catalog& catalog, const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (const auto& item : catalog.items()) out << item_to_json(item).dump() << '\n';
}

std::vector<corpus::AnnotatedQuery> load_annotated_queries(const std::string& path) {
  std::vector<corpus::AnnotatedQuery> queries;
  for_each_record(path, [&](std::size_t, const json& record) {
    corpus::AnnotatedQuery query{record.at("text").get<std::string>(),
                                 record.at("stance").get<int>()};
    corpus::validate_annotated_query(query);
    queries.push_back(std::move(query));
  });
  return queries;
}

void save_annotated_queries(const std::vector<corpus::AnnotatedQuery>& queries,
                            const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (const auto& query : queries)
    out << json{{"text", query.text}, {"stance", query.stance}}.dump() << '\n';
}

std::vector<corpus::QueryCandidate> load_query_candidates(const std::string& path) {
  std::vector<corpus::QueryCandidate> candidates;
  for_each_record(path, [&](std::size_t, const json& record) {
    corpus::QueryCandidate candidate;
    candidate.text = record.at("text").get<std::string>();
    candidate.source = corpus::parse_query_source(record.at("source").get<std::string>());
    if (record.contains("seed") && !record.at("seed").is_null())
      candidate.seed = record.at("seed").get<std::string>();
    candidates.push_back(std::move(candidate));
  });
  return candidates;
}

void save_query_candidates(const std::vector<corpus::QueryCandidate>& candidates,
                           const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (const auto& candidate : candidates) {
    json record{{"text", candidate.text},
                {"source", std::string(to_string(candidate.source))}};
    if (candidate.seed) record["seed"] = *candidate.seed;
    out << record.dump() << '\n';
  }
}

json config_to_json(const platform::PersonalizationConfig& config) {
  return json{{"relevance_weight", config.relevance_weight},
              {"rating_weight", config.rating_weight},
              {"search_personalization_weight", config.search_personalization_weight},
              {"homepage_bubble_weight", config.homepage_bubble_weight},
              {"rng_seed", config.rng_seed},
              {"search_page_size", config.search_page_size},
              {"component_count", config.component_count},
              {"component_size", config.component_size},
              {"component_headings", config.component_headings}};
}

platform::PersonalizationConfig config_from_json(const json& document) {
  platform::PersonalizationConfig config;
  auto read_double = [&](const char* key, double& field) {
    if (document.contains(key)) field = document.at(key).get<double>();
  };
  auto read_int = [&](const char* key, int& field) {
    if (document.contains(key)) field = document.at(key).get<int>();
  };
  read_double("relevance_weight", config.relevance_weight);
  read_double("rating_weight", config.rating_weight);
  read_double("search_personalization_weight", config.search_personalization_weight);
  read_double("homepage_bubble_weight", config.homepage_bubble_weight);
  if (document.contains("rng_seed"))
    config.rng_seed = document.at("rng_seed").get<std::uint64_t>();
  read_int("search_page_size", config.search_page_size);
  read_int("component_count", config.component_count);
  read_int("component_size", config.component_size);
  if (document.contains("component_headings"))
    config.component_headings =
        document.at("component_headings").get<std::vector<std::string>>();
  platform::validate_config(config);
  return config;
}

platform::PersonalizationConfig load_personalization_config(const std::string& path) {
  return guarded(path, [&] { return config_from_json(load_document(path)); });
}

void save_personalization_config(const platform::PersonalizationConfig& config,
                                 const std::string& path) {
  open_for_write(path) << config_to_json(config).dump(2) << '\n';
}

json plan_to_json(const experiment::ExperimentPlan& plan) {
  json accounts = json::array();
  for (const auto& account : plan.accounts) accounts.push_back(account_to_json(account));
  return json{{"days", plan.days},
              {"activity_time", format_clock_time(plan.activity_time)},
              {"search_time", format_clock_time(plan.search_time)},
              {"inter_search_gap_minutes", plan.inter_search_gap},
              {"carry_over_threshold_minutes", plan.carry_over_threshold},
              {"queries", queries_to_json(plan.queries)},
              {"accounts", std::move(accounts)}};
}

experiment::ExperimentPlan plan_from_json(const json& document) {
  experiment::ExperimentPlan plan;
  if (document.contains("days")) plan.days = document.at("days").get<int>();
  if (document.contains("activity_time"))
    plan.activity_time = parse_clock_time(document.at("activity_time").get<std::string>());
  if (document.contains("search_time"))
    plan.search_time = parse_clock_time(document.at("search_time").get<std::string>());
  if (document.contains("inter_search_gap_minutes"))
    plan.inter_search_gap = document.at("inter_search_gap_minutes").get<int>();
  if (document.contains("carry_over_threshold_minutes"))
    plan.carry_over_threshold = document.at("carry_over_threshold_minutes").get<int>();
  if (document.contains("queries"))
    plan.queries = queries_from_json(document.at("queries"));
  if (document.contains("accounts"))
    for (const auto& entry : document.at("accounts"))
      plan.accounts.push_back(account_from_json(entry));
  return plan;
}

PlanFile load_plan_file(const std::string& path) {
  return guarded(path, [&] {
    json document = load_document(path);
    PlanFile plan_file;
    auto read_override = [&](const char* key, std::optional<int>& field) {
      if (document.contains(key)) field = document.at(key).get<int>();
    };
    read_override("days", plan_file.overrides.days);
    if (document.contains("activity_time"))
      plan_file.overrides.activity_time =
          parse_clock_time(document.at("activity_time").get<std::string>());
    if (document.contains("search_time"))
      plan_file.overrides.search_time =
          parse_clock_time(document.at("search_time").get<std::string>());
    read_override("inter_search_gap_minutes", plan_file.overrides.inter_search_gap);
    read_override("carry_over_threshold_minutes", plan_file.overrides.carry_over_threshold);

    if (document.contains("queries") && document.contains("queries_file"))
      throw DataError("plan supplies both 'queries' and 'queries_file'");
    if (document.contains("queries")) {
      plan_file.queries = queries_from_json(document.at("queries"));
    } else if (document.contains("queries_file")) {
      fs::path queries_path(document.at("queries_file").get<std::string>());
      if (queries_path.is_relative())
        queries_path = fs::path(path).parent_path() / queries_path;
      plan_file.queries = load_annotated_queries(queries_path.string());
    }

    if (document.contains("personalization"))
      plan_file.personalization = config_from_json(document.at("personalization"));
    if (document.contains("accounts"))
      for (const auto& entry : document.at("accounts"))
        plan_file.accounts.push_back(account_from_json(entry));
    return plan_file;
  });
}

void save_run_log(const experiment::RunLog& log, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory '" + dir + "': " + ec.message());
  const fs::path root(dir);

  open_for_write((root / "plan.json").string()) << plan_to_json(log.plan).dump(2) << '\n';

  {
    std::ofstream out = open_for_write((root / "pages.jsonl").string());
    for (const auto& capture : log.serps) {
      json record{{"kind", "serp"}, {"day", capture.day}, {"account", capture.account_id}};
      record.update(serp_to_json(capture.page));
      out << record.dump() << '\n';
    }
    for (const auto& capture : log.homepages) {
      json record{{"kind", "federated"},
                  {"day", capture.day},
                  {"account", capture.account_id}};
      record.update(federated_to_json(capture.page));
      out << record.dump() << '\n';
    }
  }

  {
    std::ofstream out = open_for_write((root / "events.jsonl").string());
    for (const auto& action : log.actions) {
      out << json{{"day", action.day},
                  {"time", action.time},
                  {"account", action.account_id},
                  {"action", action.action},
                  {"target", action.target}}
                 .dump()
          << '\n';
    }
  }

  const fs::path sweep_path = root / "sweep.jsonl";
  if (log.algorithm_sweep.empty()) {
    fs::remove(sweep_path, ec);  // stale sweep from a previous run
  } else {
    std::ofstream out = open_for_write(sweep_path.string());
    for (const auto& page : log.algorithm_sweep) out << serp_to_json(page).dump() << '\n';
  }
}

experiment::RunLog load_run_log(const std::string& dir) {
  const fs::path root(dir);
  experiment::RunLog log;

  const std::string plan_path = (root / "plan.json").string();
  log.plan = guarded(plan_path, [&] { return plan_from_json(load_document(plan_path)); });

  for_each_record((root / "pages.jsonl").string(), [&](std::size_t, const json& record) {
    const std::string kind = record.at("kind").get<std::string>();
    const int day = record.at("day").get<int>();
    const std::string account = record.at("account").get<std::string>();
    if (kind == "serp") {
      log.serps.push_back({day, account, serp_from_json(record)});
    } else if (kind == "federated") {
      log.homepages.push_back({day, account, federated_from_json(record)});
    } else {
      throw DomainError("unknown page kind '" + kind + "'");
    }
  });

  for_each_record((root / "events.jsonl").string(), [&](std::size_t, const json& record) {
    log.actions.push_back({record.at("day").get<int>(),
                           record.at("time").get<VirtualTime>(),
                           record.at("account").get<std::string>(),
                           record.at("action").get<std::string>(),
                           record.at("target").get<std::string>()});
  });

  if (fs::exists(root / "sweep.jsonl")) {
    for_each_record((root / "sweep.jsonl").string(), [&](std::size_t, const json& record) {
      log.algorithm_sweep.push_back(serp_from_json(record));
    });
  }
  return log;
}

}  // namespace audit::io
