#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "audit/common.hpp"
#include "audit/corpus.hpp"
#include "audit/platform.hpp"
#include "audit/scoring.hpp"

namespace audit::experiment {

// Daily profile-building activity an account performs on its treatment items.
enum class Activity { search_only, browse, wishlist, cart };

// Which stance mix the treatment items are drawn from.
enum class TreatmentName { pro, neutral, anti, mix };

std::string_view to_string(Activity activity);
Activity parse_activity(std::string_view text);  // DomainError on unknown label
std::string_view to_string(TreatmentName name);
TreatmentName parse_treatment_name(std::string_view text);

inline constexpr int kTreatmentSize = 12;

struct Treatment {
  TreatmentName name;
  std::vector<std::string> items;  // exactly kTreatmentSize item ids
};

struct AccountSpec {
  std::string account_id;
  Activity activity;
  std::optional<Treatment> treatment;  // absent iff activity == search_only
};

// The full audit protocol: a 3x4 grid of activity x treatment accounts plus
// one history-free control, each running the same daily schedule of one
// activity block and one query sweep, for `days` consecutive days.
struct ExperimentPlan {
  std::vector<AccountSpec> accounts;
  std::vector<corpus::AnnotatedQuery> queries;
  int days = 14;
  int activity_time = 9 * 60;      // minutes from midnight, homepage follows
  int search_time = 11 * 60;       // first query; homepage captured just before
  int inter_search_gap = 20;       // minutes between consecutive queries
  int carry_over_threshold = 11;   // minimum spacing that avoids query bleed
};

struct PlanOverrides {
  std::optional<int> days;
  std::optional<int> activity_time;
  std::optional<int> search_time;
  std::optional<int> inter_search_gap;
  std::optional<int> carry_over_threshold;
};

// ConfigError when the plan is not a well-formed protocol: 13 accounts
// covering the grid exactly once each, 12-item treatments, non-empty unique
// queries, and a daily schedule that fits in one day with searches spaced at
// least carry_over_threshold minutes apart.
void validate_plan(const ExperimentPlan& plan);

struct ActionRecord {
  int day = 0;
  VirtualTime time = 0;
  std::string account_id;
  std::string action;  // "browse" | "wishlist" | "cart" | "search"
  std::string target;  // item id or query text
};

struct SerpCapture {
  int day = 0;
  std::string account_id;
  scoring::SerpPage page;
};

struct HomepageCapture {
  int day = 0;
  std::string account_id;
  scoring::FederatedPage page;
};

struct RunLog {
  ExperimentPlan plan;
  std::vector<ActionRecord> actions;
  std::vector<SerpCapture> serps;
  std::vector<HomepageCapture> homepages;
  // Off-protocol reference sweep: every search algorithm run over the query
  // list by a fresh history-free account. Optional.
  std::vector<scoring::SerpPage> algorithm_sweep;
};

// DataError unless the capture counts match the plan exactly: one SERP per
// account/day/query, before- and after-search homepages for every account
// day, and an after-action homepage for every non-control account day.
void validate_run_log(const RunLog& log);

// Virtual scheduler clock; the protocol only ever moves it forward.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual VirtualTime now() const = 0;
  virtual void advance_to(VirtualTime t) = 0;  // DomainError on moving backwards
};

class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(VirtualTime start = 0) : now_(start) {}
  VirtualTime now() const override { return now_; }
  void advance_to(VirtualTime t) override;

 private:
  VirtualTime now_;
};

// Picks the four 12-item treatment pools from what the platform actually
// surfaces: run every query as a featured search, pool the unique results,
// group them by stance, and take the most-rated dozen per stance. The mix
// pool takes the top four of each stance group, shuffled with `seed`
// (defaults to config.rng_seed). DataError when a stance group is too small.
std::vector<Treatment> select_treatments(const platform::Catalog& catalog,
                                         const platform::PersonalizationConfig& config,
                                         const std::vector<corpus::AnnotatedQuery>& queries,
                                         int top_k = 20,
                                         std::optional<std::uint64_t> seed = std::nullopt);

// Assembles the 13-account plan from the four treatments, naming accounts
// "acct-<activity>-<treatment>" plus "acct-search-only".
ExperimentPlan build_plan(const std::vector<Treatment>& treatments,
                          const std::vector<corpus::AnnotatedQuery>& queries,
                          const PlanOverrides& overrides = {});

// Executes the plan against the platform day by day. Each day, in virtual-
// time order: every non-control account performs its activity on its 12
// treatment items and captures its homepage; later every account captures
// its homepage, runs the full query sweep (one SERP per query), and captures
// its homepage again. Returns the complete run log, already validated.
RunLog run_protocol(const ExperimentPlan& plan, platform::PlatformAdapter& adapter,
                    Clock& clock);

// One SERP per (algorithm, query) pair for a fresh history-free account, for
// comparing orderings side by side. Off-protocol: no day schedule, no state
// carried into any plan account.
std::vector<scoring::SerpPage> capture_algorithm_sweep(
    const platform::Catalog& catalog, const platform::PersonalizationConfig& config,
    const std::vector<corpus::AnnotatedQuery>& queries, int top_k = 20);

}  // namespace audit::experiment
