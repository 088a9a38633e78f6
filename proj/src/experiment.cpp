#include "audit/experiment.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "audit/errors.hpp"

namespace audit::experiment {

std::string_view to_string(Activity activity) {
  switch (activity) {
    case Activity::search_only: return "search-only";
    case Activity::browse: return "browse";
    case Activity::wishlist: return "wishlist";
    case Activity::cart: return "cart";
  }
  throw DomainError("invalid activity value");
}

Activity parse_activity(std::string_view text) {
  if (text == "search-only") return Activity::search_only;
  if (text == "browse") return Activity::browse;
  if (text == "wishlist") return Activity::wishlist;
  if (text == "cart") return Activity::cart;
  throw DomainError("unknown activity: '" + std::string(text) + "'");
}

std::string_view to_string(TreatmentName name) {
  switch (name) {
    case TreatmentName::pro: return "pro";
    case TreatmentName::neutral: return "neutral";
    case TreatmentName::anti: return "anti";
    case TreatmentName::mix: return "mix";
  }
  throw DomainError("invalid treatment value");
}

TreatmentName parse_treatment_name(std::string_view text) {
  if (text == "pro") return TreatmentName::pro;
  if (text == "neutral") return TreatmentName::neutral;
  if (text == "anti") return TreatmentName::anti;
  if (text == "mix") return TreatmentName::mix;
  throw DomainError("unknown treatment: '" + std::string(text) + "'");
}

namespace {

constexpr Activity kGridActivities[] = {Activity::browse, Activity::wishlist,
                                        Activity::cart};
constexpr TreatmentName kGridTreatments[] = {TreatmentName::pro, TreatmentName::neutral,
                                             TreatmentName::anti, TreatmentName::mix};

std::string plan_error(const std::string& detail) {
  return "invalid plan: " + detail;
}

}  // namespace

void validate_plan(const ExperimentPlan& plan) {
  if (plan.accounts.size() != 13)
    throw ConfigError(plan_error("expected 13 accounts, got " +
                                 std::to_string(plan.accounts.size())));

  std::set<std::string> ids;
  std::map<std::pair<Activity, TreatmentName>, int> grid;
  int controls = 0;
  for (const auto& account : plan.accounts) {
    if (account.account_id.empty())
      throw ConfigError(plan_error("account with empty id"));
    if (!ids.insert(account.account_id).second)
      throw ConfigError(plan_error("duplicate account id '" + account.account_id + "'"));
    if (account.activity == Activity::search_only) {
      ++controls;
      if (account.treatment)
        throw ConfigError(plan_error("search-only account '" + account.account_id +
                                     "' must not carry a treatment"));
      continue;
    }
    if (!account.treatment)
      throw ConfigError(plan_error("account '" + account.account_id +
                                   "' needs a treatment"));
    const Treatment& t = *account.treatment;
    if (int(t.items.size()) != kTreatmentSize)
      throw ConfigError(plan_error("account '" + account.account_id + "' treatment has " +
                                   std::to_string(t.items.size()) + " items, expected " +
                                   std::to_string(kTreatmentSize)));
    std::set<std::string> unique_items(t.items.begin(), t.items.end());
    if (unique_items.size() != t.items.size())
      throw ConfigError(plan_error("account '" + account.account_id +
                                   "' treatment repeats an item"));
    ++grid[{account.activity, t.name}];
  }
  if (controls != 1)
    throw ConfigError(plan_error("expected exactly one search-only account, got " +
                                 std::to_string(controls)));
  for (Activity activity : kGridActivities) {
    for (TreatmentName name : kGridTreatments) {
      int count = grid[{activity, name}];
      if (count != 1)
        throw ConfigError(plan_error("cell " + std::string(to_string(activity)) + "/" +
                                     std::string(to_string(name)) + " appears " +
                                     std::to_string(count) + " times, expected 1"));
    }
  }

  if (plan.queries.empty()) throw ConfigError(plan_error("no queries"));
  std::set<std::string> query_texts;
  for (const auto& query : plan.queries) {
    corpus::validate_annotated_query(query);
    if (!query_texts.insert(query.text).second)
      throw ConfigError(plan_error("duplicate query '" + query.text + "'"));
  }

  if (plan.days < 1) throw ConfigError(plan_error("days must be at least 1"));
  if (plan.activity_time < 0 || plan.activity_time >= kMinutesPerDay)
    throw ConfigError(plan_error("activity_time outside the day"));
  if (plan.search_time < 0 || plan.search_time >= kMinutesPerDay)
    throw ConfigError(plan_error("search_time outside the day"));
  if (plan.activity_time >= plan.search_time)
    throw ConfigError(plan_error("activity block must precede the search block"));
  if (plan.carry_over_threshold < 0)
    throw ConfigError(plan_error("carry_over_threshold must be non-negative"));
  if (plan.inter_search_gap < 1)
    throw ConfigError(plan_error("inter_search_gap must be positive"));
  if (plan.inter_search_gap < plan.carry_over_threshold)
    throw ConfigError(plan_error(
        "inter_search_gap " + std::to_string(plan.inter_search_gap) +
        " is under the carry-over threshold of " +
        std::to_string(plan.carry_over_threshold) + " minutes"));
  const int last_search =
      plan.search_time + (int(plan.queries.size()) - 1) * plan.inter_search_gap;
  if (last_search >= kMinutesPerDay)
    throw ConfigError(plan_error("query sweep runs past the end of the day"));
}

void validate_run_log(const RunLog& log) {
  const auto& plan = log.plan;
  validate_plan(plan);
  const std::size_t n_accounts = plan.accounts.size();
  const std::size_t n_queries = plan.queries.size();
  const std::size_t days = std::size_t(plan.days);

  std::set<std::string> account_ids;
  std::size_t active_accounts = 0;
  for (const auto& account : plan.accounts) {
    account_ids.insert(account.account_id);
    if (account.activity != Activity::search_only) ++active_accounts;
  }

  const std::size_t expected_serps = n_accounts * days * n_queries;
  if (log.serps.size() != expected_serps)
    throw DataError("run log holds " + std::to_string(log.serps.size()) +
                    " search pages, expected " + std::to_string(expected_serps));

  std::map<std::pair<std::string, int>, std::size_t> serp_counts;
  for (const auto& capture : log.serps) {
    if (capture.day < 1 || capture.day > plan.days)
      throw DataError("search page captured on day " + std::to_string(capture.day) +
                      ", outside the plan");
    if (!account_ids.count(capture.account_id))
      throw DataError("search page for unknown account '" + capture.account_id + "'");
    ++serp_counts[{capture.account_id, capture.day}];
  }
  for (const auto& [key, count] : serp_counts) {
    if (count != n_queries)
      throw DataError("account '" + key.first + "' day " + std::to_string(key.second) +
                      " has " + std::to_string(count) + " search pages, expected " +
                      std::to_string(n_queries));
  }
  if (serp_counts.size() != n_accounts * days)
    throw DataError("search pages missing for some account days");

  const std::size_t expected_pages =
      2 * n_accounts * days + active_accounts * days;
  if (log.homepages.size() != expected_pages)
    throw DataError("run log holds " + std::to_string(log.homepages.size()) +
                    " homepage captures, expected " + std::to_string(expected_pages));
  std::map<std::tuple<std::string, int, CaptureLabel>, std::size_t> page_counts;
  for (const auto& capture : log.homepages) {
    if (capture.day < 1 || capture.day > plan.days)
      throw DataError("homepage captured on day " + std::to_string(capture.day) +
                      ", outside the plan");
    if (!account_ids.count(capture.account_id))
      throw DataError("homepage for unknown account '" + capture.account_id + "'");
    ++page_counts[{capture.account_id, capture.day, capture.page.capture_label}];
  }
  for (const auto& account : plan.accounts) {
    for (int day = 1; day <= plan.days; ++day) {
      auto expect_one = [&](CaptureLabel label) {
        auto it = page_counts.find({account.account_id, day, label});
        std::size_t count = it == page_counts.end() ? 0 : it->second;
        if (count != 1)
          throw DataError("account '" + account.account_id + "' day " +
                          std::to_string(day) + " has " + std::to_string(count) + " " +
                          std::string(to_string(label)) +
                          " homepage captures, expected 1");
      };
      expect_one(CaptureLabel::before_search);
      expect_one(CaptureLabel::after_search);
      if (account.activity != Activity::search_only)
        expect_one(CaptureLabel::after_action);
    }
  }
}

void VirtualClock::advance_to(VirtualTime t) {
  if (t < now_)
    throw DomainError("clock cannot move backwards (now " + format_virtual_time(now_) +
                      ", requested " + format_virtual_time(t) + ")");
  now_ = t;
}

std::vector<Treatment> select_treatments(const platform::Catalog& catalog,
                                         const platform::PersonalizationConfig& config,
                                         const std::vector<corpus::AnnotatedQuery>& queries,
                                         int top_k,
                                         std::optional<std::uint64_t> seed) {
  if (queries.empty())
    throw ConfigError("treatment selection needs at least one query");

  // Pool the unique items the platform actually surfaces for the query list,
  // in first-seen order.
  platform::UserState probe;
  probe.account_id = "treatment-probe";
  std::set<std::string> seen;
  std::vector<std::pair<std::string, int>> pooled;  // (item_id, stance)
  VirtualTime t = 0;
  for (const auto& query : queries) {
    auto page = platform::search(catalog, query.text, SearchAlgorithm::featured, probe,
                                 config, top_k, t);
    t += 20;
    for (const auto& result : page.results) {
      if (seen.insert(result.item_id).second)
        pooled.emplace_back(result.item_id, result.stance);
    }
  }

  auto most_rated = [&](int stance, const char* label) {
    std::vector<std::string> group;
    for (const auto& [item_id, item_stance] : pooled)
      if (item_stance == stance) group.push_back(item_id);
    std::sort(group.begin(), group.end(), [&](const std::string& a, const std::string& b) {
      int ra = catalog.at(a).num_ratings;
      int rb = catalog.at(b).num_ratings;
      if (ra != rb) return ra > rb;
      return a < b;
    });
    if (int(group.size()) < kTreatmentSize)
      throw DataError("insufficient corpus: stance '" + std::string(label) +
                      "' has only " + std::to_string(group.size()) +
                      " pooled search results, need " + std::to_string(kTreatmentSize));
    group.resize(std::size_t(kTreatmentSize));
    return group;
  };

  std::vector<Treatment> treatments;
  treatments.push_back({TreatmentName::pro, most_rated(1, "pro")});
  treatments.push_back({TreatmentName::neutral, most_rated(0, "neutral")});
  treatments.push_back({TreatmentName::anti, most_rated(-1, "anti")});

  std::vector<std::string> mixed;
  for (const auto& treatment : treatments)
    mixed.insert(mixed.end(), treatment.items.begin(),
                 treatment.items.begin() + kTreatmentSize / 3);
  Rng rng(seed.value_or(config.rng_seed));
  rng.shuffle(mixed);
  treatments.push_back({TreatmentName::mix, std::move(mixed)});
  return treatments;
}

ExperimentPlan build_plan(const std::vector<Treatment>& treatments,
                          const std::vector<corpus::AnnotatedQuery>& queries,
                          const PlanOverrides& overrides) {
  std::map<TreatmentName, const Treatment*> by_name;
  for (const auto& treatment : treatments) {
    if (!by_name.emplace(treatment.name, &treatment).second)
      throw ConfigError("duplicate treatment '" +
                        std::string(to_string(treatment.name)) + "'");
  }

  ExperimentPlan plan;
  plan.queries = queries;
  if (overrides.days) plan.days = *overrides.days;
  if (overrides.activity_time) plan.activity_time = *overrides.activity_time;
  if (overrides.search_time) plan.search_time = *overrides.search_time;
  if (overrides.inter_search_gap) plan.inter_search_gap = *overrides.inter_search_gap;
  if (overrides.carry_over_threshold)
    plan.carry_over_threshold = *overrides.carry_over_threshold;

  for (Activity activity : kGridActivities) {
    for (TreatmentName name : kGridTreatments) {
      auto it = by_name.find(name);
      if (it == by_name.end())
        throw ConfigError("missing treatment '" + std::string(to_string(name)) + "'");
      AccountSpec account;
      account.account_id = "acct-" + std::string(to_string(activity)) + "-" +
                           std::string(to_string(name));
      account.activity = activity;
      account.treatment = *it->second;
      plan.accounts.push_back(std::move(account));
    }
  }
  plan.accounts.push_back({"acct-search-only", Activity::search_only, std::nullopt});

  validate_plan(plan);
  return plan;
}

namespace {

enum class Op { browse, wishlist, cart, after_action, before_search, search, after_search };

struct Event {
  VirtualTime time;
  std::size_t account_index;
  int step;
  Op op;
  std::size_t arg;  // treatment item index or query index
};

}  // namespace

RunLog run_protocol(const ExperimentPlan& plan, platform::PlatformAdapter& adapter,
                    Clock& clock) {
  validate_plan(plan);
  for (const auto& account : plan.accounts) adapter.register_account(account.account_id);

  RunLog log;
  log.plan = plan;
  const int n_queries = int(plan.queries.size());

  for (int day = 1; day <= plan.days; ++day) {
    const VirtualTime base = VirtualTime(day - 1) * kMinutesPerDay;
    clock.advance_to(base);
    adapter.begin_day(day);

    std::vector<Event> events;
    for (std::size_t ai = 0; ai < plan.accounts.size(); ++ai) {
      const AccountSpec& account = plan.accounts[ai];
      int step = 0;
      if (account.activity != Activity::search_only) {
        Op op = account.activity == Activity::browse ? Op::browse
                : account.activity == Activity::wishlist ? Op::wishlist
                                                         : Op::cart;
        for (std::size_t j = 0; j < account.treatment->items.size(); ++j)
          events.push_back({base + plan.activity_time, ai, step++, op, j});
        events.push_back({base + plan.activity_time, ai, step++, Op::after_action, 0});
      }
      events.push_back({base + plan.search_time, ai, step++, Op::before_search, 0});
      for (int q = 0; q < n_queries; ++q) {
        events.push_back({base + plan.search_time + VirtualTime(q) * plan.inter_search_gap,
                          ai, step++, Op::search, std::size_t(q)});
      }
      const VirtualTime last =
          base + plan.search_time + VirtualTime(n_queries - 1) * plan.inter_search_gap;
      events.push_back({last, ai, step++, Op::after_search, 0});
    }
    std::sort(events.begin(), events.end(), [&](const Event& a, const Event& b) {
      if (a.time != b.time) return a.time < b.time;
      const std::string& ida = plan.accounts[a.account_index].account_id;
      const std::string& idb = plan.accounts[b.account_index].account_id;
      if (ida != idb) return ida < idb;
      return a.step < b.step;
    });

    for (const Event& event : events) {
      const AccountSpec& account = plan.accounts[event.account_index];
      clock.advance_to(event.time);
      try {
        switch (event.op) {
          case Op::browse:
          case Op::wishlist:
          case Op::cart: {
            const std::string& item_id = account.treatment->items[event.arg];
            if (event.op == Op::browse)
              adapter.browse(account.account_id, item_id);
            else if (event.op == Op::wishlist)
              adapter.add_to_wishlist(account.account_id, item_id);
            else
              adapter.add_to_cart(account.account_id, item_id);
            log.actions.push_back({day, event.time, account.account_id,
                                   std::string(to_string(account.activity)), item_id});
            break;
          }
          case Op::after_action:
          case Op::before_search:
          case Op::after_search: {
            CaptureLabel label = event.op == Op::after_action ? CaptureLabel::after_action
                                 : event.op == Op::before_search
                                     ? CaptureLabel::before_search
                                     : CaptureLabel::after_search;
            auto page = adapter.homepage(account.account_id, label, event.time);
            log.homepages.push_back({day, account.account_id, std::move(page)});
            break;
          }
          case Op::search: {
            const std::string& query = plan.queries[event.arg].text;
            auto page = adapter.search(account.account_id, query,
                                       SearchAlgorithm::featured, event.time);
            log.serps.push_back({day, account.account_id, std::move(page)});
            log.actions.push_back(
                {day, event.time, account.account_id, "search", query});
            break;
          }
        }
      } catch (const AuditError& error) {
        throw DataError("protocol failed on day " + std::to_string(day) + ", account '" +
                        account.account_id + "', step " + std::to_string(event.step) +
                        ": " + error.what());
      }
    }
  }

  validate_run_log(log);
  return log;
}

std::vector<scoring::SerpPage> capture_algorithm_sweep(
    const platform::Catalog& catalog, const platform::PersonalizationConfig& config,
    const std::vector<corpus::AnnotatedQuery>& queries, int top_k) {
  if (queries.empty())
    throw ConfigError("algorithm sweep needs at least one query");
  platform::UserState probe;
  probe.account_id = "sweep-probe";
  std::vector<scoring::SerpPage> pages;
  pages.reserve(std::size(kAllSearchAlgorithms) * queries.size());
  VirtualTime t = 0;
  for (SearchAlgorithm algorithm : kAllSearchAlgorithms) {
    for (const auto& query : queries) {
      pages.push_back(
          platform::search(catalog, query.text, algorithm, probe, config, top_k, t));
      t += 20;
    }
  }
  return pages;
}

}  // namespace audit::experiment
