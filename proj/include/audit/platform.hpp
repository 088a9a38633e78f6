#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "audit/common.hpp"
#include "audit/corpus.hpp"
#include "audit/errors.hpp"
#include "audit/scoring.hpp"

namespace audit::platform {

// One sellable item. stance_class carries the six-class annotation; items of
// class 3/4 live in the catalog like any other but drop out of scored pages.
struct Item {
  std::string item_id;
  std::string title;
  corpus::AnnotationClass stance_class{2};
  double avg_rating = 0.0;  // in [1, 5] whenever num_ratings > 0
  int num_ratings = 0;
  double price = 0.0;
  int arrival_day = 0;  // days since the marketplace opened; larger = newer
  std::vector<std::string> relevance_terms;
};

void validate_item(const Item& item);  // DataError on out-of-range fields

class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<Item> items);  // DataError on duplicate ids

  const std::vector<Item>& items() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

  const Item* find(const std::string& item_id) const;
  const Item& at(const std::string& item_id) const;  // NotFoundError

  // log1p of the largest num_ratings; popularity normalization anchor.
  double log_popularity_cap() const { return log_popularity_cap_; }

  // The item's relevance terms, lowercased, deduplicated, sorted. The item
  // must belong to this catalog.
  const std::vector<std::string>& sorted_terms(const Item& item) const;

 private:
  std::vector<Item> items_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::string>> sorted_terms_;
  double log_popularity_cap_ = 0.0;
};

// Everything the platform remembers about one account. Histories only ever
// grow during a run; the daily browser reset never touches them.
struct UserState {
  std::string account_id;
  std::vector<std::pair<std::string, VirtualTime>> search_history;
  std::vector<std::string> browsing_history;
  std::vector<std::string> wish_list;
  std::vector<std::string> cart;
};

struct PersonalizationConfig {
  // Weight of account history in the featured search ranking. Zero (the
  // paper-faithful default) makes search output identical for all accounts.
  double search_personalization_weight = 0.0;
  // Weight of history similarity in homepage recommendations ("filter
  // bubble" strength). Zero makes the homepage history-blind.
  double homepage_bubble_weight = 1.5;
  double rating_weight = 1.0;
  double relevance_weight = 2.0;
  std::uint64_t rng_seed = 1;

  int search_page_size = 20;
  int component_count = 3;  // homepage components (m)
  int component_size = 20;  // items per component (k)
  std::vector<std::string> component_headings = {
      "Based on your recent browsing",
      "Customers also explored",
      "Trending on the marketplace",
  };
};

void validate_config(const PersonalizationConfig& config);  // ConfigError

// Mean similarity between an item and the account's history items (union of
// browsing, wish list, and cart, deduplicated): half Jaccard overlap of
// relevance terms, half stance match. 0 for an empty history. Ignores
// search_history entirely.
double history_similarity(const Catalog& catalog, const Item& item, const UserState& user);

// Items whose relevance terms overlap the query tokens.
std::vector<const Item*> match_items(const Catalog& catalog,
                                     const std::vector<std::string>& query_tokens);

// "Featured" ordering: relevance_weight * query-token overlap
// + rating_weight * (avg_rating * log(1 + num_ratings), normalized to [0,1]
// against the catalog maximum)
// + search_personalization_weight * history_similarity.
// Ties broken by item_id ascending; with all weights zero this is exactly
// item_id order.
std::vector<const Item*> rank_featured(const Catalog& catalog, std::vector<const Item*> matched,
                                       const std::vector<std::string>& query_tokens,
                                       const UserState& user,
                                       const PersonalizationConfig& config);

// Runs one search: match, order by the requested algorithm, cut to top_k,
// drop class-3/4 items with rank recompaction, and append the query to the
// account's search history.
scoring::SerpPage search(const Catalog& catalog, const std::string& query,
                         SearchAlgorithm algorithm, UserState& user,
                         const PersonalizationConfig& config, int top_k, VirtualTime now);

// Builds the account homepage: every catalog item is scored as
// popularity + homepage_bubble_weight * history_similarity, the top
// component_count * component_size items are dealt into components in score
// order, and class-3/4 items are excluded with rank recompaction (components
// that end up empty are dropped and the rest re-ranked). An account with no
// history gets the popularity-only page; search history never matters.
scoring::FederatedPage homepage(const Catalog& catalog, const UserState& user,
                                const PersonalizationConfig& config, int component_count,
                                int component_size, VirtualTime now, CaptureLabel label);

// Profile-building actions. Wish-listing and carting an item also records a
// visit to its detail page, so those histories are supersets of plain
// browsing. NotFoundError on an unknown item id.
void browse(const Catalog& catalog, UserState& user, const std::string& item_id);
void add_to_wishlist(const Catalog& catalog, UserState& user, const std::string& item_id);
void add_to_cart(const Catalog& catalog, UserState& user, const std::string& item_id);

// What the audit protocol drives. Implementations must be deterministic for
// a fixed action sequence.
class PlatformAdapter {
 public:
  virtual ~PlatformAdapter() = default;
  virtual void register_account(const std::string& account_id) = 0;
  // Daily browser reset: per-day session state goes, account histories stay.
  virtual void begin_day(int day) = 0;
  virtual scoring::SerpPage search(const std::string& account_id, const std::string& query,
                                   SearchAlgorithm algorithm, VirtualTime now) = 0;
  virtual scoring::FederatedPage homepage(const std::string& account_id, CaptureLabel label,
                                          VirtualTime now) = 0;
  virtual void browse(const std::string& account_id, const std::string& item_id) = 0;
  virtual void add_to_wishlist(const std::string& account_id, const std::string& item_id) = 0;
  virtual void add_to_cart(const std::string& account_id, const std::string& item_id) = 0;
};

// The reference audit target: a deterministic in-process marketplace. One
// logical state machine; account drivers go through a serialized command
// interface, so interleaved callers observe a single consistent ordering.
class SimulatedMarketplace final : public PlatformAdapter {
 public:
  SimulatedMarketplace(Catalog catalog, PersonalizationConfig config);

  const Catalog& catalog() const { return catalog_; }
  const PersonalizationConfig& config() const { return config_; }
  const UserState& account(const std::string& account_id) const;

  void register_account(const std::string& account_id) override;
  void begin_day(int day) override;
  scoring::SerpPage search(const std::string& account_id, const std::string& query,
                           SearchAlgorithm algorithm, VirtualTime now) override;
  scoring::FederatedPage homepage(const std::string& account_id, CaptureLabel label,
                                  VirtualTime now) override;
  void browse(const std::string& account_id, const std::string& item_id) override;
  void add_to_wishlist(const std::string& account_id, const std::string& item_id) override;
  void add_to_cart(const std::string& account_id, const std::string& item_id) override;

 private:
  UserState& account_mut(const std::string& account_id);

  mutable std::mutex mutex_;
  Catalog catalog_;
  PersonalizationConfig config_;
  std::map<std::string, UserState> accounts_;
  int current_day_ = 0;
};

}  // namespace audit::platform
