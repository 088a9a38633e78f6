#include "audit/platform.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace audit::platform {

void validate_item(const Item& item) {
  if (trim(item.item_id).empty()) throw DataError("item with empty id");
  if (item.num_ratings < 0) {
    throw DataError("item '" + item.item_id + "': num_ratings is negative");
  }
  if (item.num_ratings > 0 && (item.avg_rating < 1.0 || item.avg_rating > 5.0)) {
    throw DataError("item '" + item.item_id + "': avg_rating " +
                    std::to_string(item.avg_rating) + " outside [1,5]");
  }
  if (!(item.price >= 0.0)) throw DataError("item '" + item.item_id + "': negative price");
  if (item.arrival_day < 0) throw DataError("item '" + item.item_id + "': negative arrival_day");
}

Catalog::Catalog(std::vector<Item> items) : items_(std::move(items)) {
  sorted_terms_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    validate_item(items_[i]);
    if (!index_.emplace(items_[i].item_id, i).second) {
      throw DataError("duplicate item id '" + items_[i].item_id + "' in catalog");
    }
    std::vector<std::string> terms;
    terms.reserve(items_[i].relevance_terms.size());
    for (const std::string& t : items_[i].relevance_terms) terms.push_back(to_lower(t));
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    sorted_terms_.push_back(std::move(terms));
    log_popularity_cap_ = std::max(log_popularity_cap_, std::log1p(items_[i].num_ratings));
  }
}

const Item* Catalog::find(const std::string& item_id) const {
  const auto it = index_.find(item_id);
  return it == index_.end() ? nullptr : &items_[it->second];
}

const Item& Catalog::at(const std::string& item_id) const {
  const Item* item = find(item_id);
  if (item == nullptr) throw NotFoundError("no item '" + item_id + "' in catalog");
  return *item;
}

const std::vector<std::string>& Catalog::sorted_terms(const Item& item) const {
  const std::size_t idx = static_cast<std::size_t>(&item - items_.data());
  if (idx >= items_.size()) throw DomainError("sorted_terms: item not from this catalog");
  return sorted_terms_[idx];
}

void validate_config(const PersonalizationConfig& config) {
  const auto check_weight = [](double w, const char* name) {
    if (!(std::isfinite(w) && w >= 0.0)) {
      throw ConfigError(std::string("personalization config: ") + name +
                        " must be finite and >= 0");
    }
  };
  check_weight(config.search_personalization_weight, "search_personalization_weight");
  check_weight(config.homepage_bubble_weight, "homepage_bubble_weight");
  check_weight(config.rating_weight, "rating_weight");
  check_weight(config.relevance_weight, "relevance_weight");
  if (config.search_page_size < 1 || config.component_count < 1 || config.component_size < 1) {
    throw ConfigError("personalization config: page and component sizes must be >= 1");
  }
  if (config.component_headings.empty()) {
    throw ConfigError("personalization config: needs at least one component heading");
  }
}

namespace {

double jaccard_sorted(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t i = 0, j = 0, both = 0;
  while (i < a.size() && j < b.size()) {
    const int cmp = a[i].compare(b[j]);
    if (cmp == 0) {
      ++both;
      ++i;
      ++j;
    } else if (cmp < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(both) / static_cast<double>(a.size() + b.size() - both);
}

// History items resolved once per page so candidate scoring stays cheap.
struct HistoryProfile {
  std::vector<const std::vector<std::string>*> term_sets;
  std::vector<std::optional<int>> stances;

  static HistoryProfile of(const Catalog& catalog, const UserState& user) {
    HistoryProfile profile;
    std::set<std::string> seen;
    const auto add = [&](const std::string& id) {
      if (!seen.insert(id).second) return;
      const Item& item = catalog.at(id);
      profile.term_sets.push_back(&catalog.sorted_terms(item));
      profile.stances.push_back(corpus::normalize_annotation(item.stance_class));
    };
    for (const std::string& id : user.browsing_history) add(id);
    for (const std::string& id : user.wish_list) add(id);
    for (const std::string& id : user.cart) add(id);
    return profile;
  }

  bool empty() const { return term_sets.empty(); }

  double similarity(const std::vector<std::string>& item_terms,
                    std::optional<int> item_stance) const {
    if (term_sets.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < term_sets.size(); ++i) {
      acc += 0.5 * jaccard_sorted(item_terms, *term_sets[i]);
      if (item_stance && stances[i] && *item_stance == *stances[i]) acc += 0.5;
    }
    return acc / static_cast<double>(term_sets.size());
  }
};

double popularity_score(const Item& item, double cap) {
  return cap > 0.0 ? std::log1p(item.num_ratings) / cap : 0.0;
}

double rating_score(const Item& item, double cap) {
  if (item.num_ratings <= 0 || cap <= 0.0) return 0.0;
  return (item.avg_rating / 5.0) * (std::log1p(item.num_ratings) / cap);
}

void sort_by_key_then_id(std::vector<const Item*>& items,
                         double (*key)(const Item&), bool descending) {
  std::sort(items.begin(), items.end(), [&](const Item* a, const Item* b) {
    const double ka = key(*a), kb = key(*b);
    if (ka != kb) return descending ? ka > kb : ka < kb;
    return a->item_id < b->item_id;
  });
}

}  // namespace

double history_similarity(const Catalog& catalog, const Item& item, const UserState& user) {
  const HistoryProfile profile = HistoryProfile::of(catalog, user);
  return profile.similarity(catalog.sorted_terms(item),
                            corpus::normalize_annotation(item.stance_class));
}

std::vector<const Item*> match_items(const Catalog& catalog,
                                     const std::vector<std::string>& query_tokens) {
  std::vector<const Item*> matched;
  for (const Item& item : catalog.items()) {
    const std::vector<std::string>& terms = catalog.sorted_terms(item);
    for (const std::string& token : query_tokens) {
      if (std::binary_search(terms.begin(), terms.end(), token)) {
        matched.push_back(&item);
        break;
      }
    }
  }
  return matched;
}

std::vector<const Item*> rank_featured(const Catalog& catalog, std::vector<const Item*> matched,
                                       const std::vector<std::string>& query_tokens,
                                       const UserState& user,
                                       const PersonalizationConfig& config) {
  std::vector<std::string> unique_tokens = query_tokens;
  std::sort(unique_tokens.begin(), unique_tokens.end());
  unique_tokens.erase(std::unique(unique_tokens.begin(), unique_tokens.end()),
                      unique_tokens.end());

  const bool personalized = config.search_personalization_weight > 0.0;
  const HistoryProfile profile =
      personalized ? HistoryProfile::of(catalog, user) : HistoryProfile{};
  const double cap = catalog.log_popularity_cap();

  std::vector<std::pair<double, const Item*>> scored;
  scored.reserve(matched.size());
  for (const Item* item : matched) {
    const std::vector<std::string>& terms = catalog.sorted_terms(*item);
    int overlap = 0;
    for (const std::string& token : unique_tokens) {
      overlap += std::binary_search(terms.begin(), terms.end(), token);
    }
    const double relevance =
        unique_tokens.empty() ? 0.0
                              : static_cast<double>(overlap) / unique_tokens.size();
    double score = config.relevance_weight * relevance + config.rating_weight * rating_score(*item, cap);
    if (personalized && !profile.empty()) {
      score += config.search_personalization_weight *
               profile.similarity(terms, corpus::normalize_annotation(item->stance_class));
    }
    scored.emplace_back(score, item);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->item_id < b.second->item_id;
  });
  for (std::size_t i = 0; i < scored.size(); ++i) matched[i] = scored[i].second;
  return matched;
}

scoring::SerpPage search(const Catalog& catalog, const std::string& query,
                         SearchAlgorithm algorithm, UserState& user,
                         const PersonalizationConfig& config, int top_k, VirtualTime now) {
  if (top_k < 1) throw DomainError("search: top_k must be >= 1");
  if (catalog.empty()) throw DomainError("search: catalog is empty");

  const std::vector<std::string> tokens = tokenize_lower(query);
  std::vector<const Item*> matched = match_items(catalog, tokens);

  switch (algorithm) {
    case SearchAlgorithm::featured:
      matched = rank_featured(catalog, std::move(matched), tokens, user, config);
      break;
    case SearchAlgorithm::avg_customer_review:
      sort_by_key_then_id(matched, [](const Item& i) { return i.avg_rating; }, true);
      break;
    case SearchAlgorithm::price_ascending:
      sort_by_key_then_id(matched, [](const Item& i) { return i.price; }, false);
      break;
    case SearchAlgorithm::price_descending:
      sort_by_key_then_id(matched, [](const Item& i) { return i.price; }, true);
      break;
    case SearchAlgorithm::newest_arrivals:
      sort_by_key_then_id(
          matched, [](const Item& i) { return static_cast<double>(i.arrival_day); }, true);
      break;
  }

  if (static_cast<int>(matched.size()) > top_k) matched.resize(top_k);

  std::vector<std::pair<std::string, corpus::AnnotationClass>> ranked;
  ranked.reserve(matched.size());
  for (const Item* item : matched) ranked.emplace_back(item->item_id, item->stance_class);

  scoring::SerpPage page = scoring::make_serp_page(query, algorithm, now,
                                                   scoring::to_scoreable_results(ranked), top_k);
  user.search_history.emplace_back(query, now);
  return page;
}

scoring::FederatedPage homepage(const Catalog& catalog, const UserState& user,
                                const PersonalizationConfig& config, int component_count,
                                int component_size, VirtualTime now, CaptureLabel label) {
  if (component_count < 1) throw DomainError("homepage: component_count must be >= 1");
  if (component_size < 1) throw DomainError("homepage: component_size must be >= 1");
  if (catalog.empty()) throw DomainError("homepage: catalog is empty");

  const bool has_history =
      !(user.browsing_history.empty() && user.wish_list.empty() && user.cart.empty());
  const double beta = config.homepage_bubble_weight;
  // beta == 0 must reproduce the history-free page exactly, so the profile
  // only enters through the weighted similarity term; no candidate is ever
  // excluded for having been seen.
  const HistoryProfile profile =
      (has_history && beta > 0.0) ? HistoryProfile::of(catalog, user) : HistoryProfile{};
  const double cap = catalog.log_popularity_cap();

  std::vector<std::pair<double, const Item*>> scored;
  scored.reserve(catalog.size());
  for (const Item& item : catalog.items()) {
    double score = popularity_score(item, cap);
    if (!profile.empty()) {
      score += beta * profile.similarity(catalog.sorted_terms(item),
                                         corpus::normalize_annotation(item.stance_class));
    }
    scored.emplace_back(score, &item);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->item_id < b.second->item_id;
  });

  const std::size_t want = static_cast<std::size_t>(component_count) * component_size;
  if (scored.size() > want) scored.resize(want);

  std::vector<scoring::RecComponent> components;
  const auto& headings = config.component_headings;
  std::size_t offset = 0;
  int slot = 0;
  while (offset < scored.size() && static_cast<int>(components.size()) < component_count) {
    const std::size_t take = std::min<std::size_t>(component_size, scored.size() - offset);
    std::vector<std::pair<std::string, corpus::AnnotationClass>> ranked;
    ranked.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
      ranked.emplace_back(scored[offset + i].second->item_id,
                          scored[offset + i].second->stance_class);
    }
    offset += take;
    std::vector<scoring::RankedResult> items = scoring::to_scoreable_results(ranked);
    const std::string heading = headings[slot % headings.size()];
    ++slot;
    if (items.empty()) continue;  // fully excluded block: drop it, re-rank the rest
    components.push_back(scoring::make_component(
        heading, static_cast<int>(components.size()) + 1, std::move(items)));
  }
  return scoring::make_federated_page(std::move(components), now, label);
}

void browse(const Catalog& catalog, UserState& user, const std::string& item_id) {
  catalog.at(item_id);
  user.browsing_history.push_back(item_id);
}

void add_to_wishlist(const Catalog& catalog, UserState& user, const std::string& item_id) {
  catalog.at(item_id);
  user.browsing_history.push_back(item_id);
  user.wish_list.push_back(item_id);
}

void add_to_cart(const Catalog& catalog, UserState& user, const std::string& item_id) {
  catalog.at(item_id);
  user.browsing_history.push_back(item_id);
  user.cart.push_back(item_id);
}

SimulatedMarketplace::SimulatedMarketplace(Catalog catalog, PersonalizationConfig config)
    : catalog_(std::move(catalog)), config_(std::move(config)) {
  validate_config(config_);
  if (catalog_.empty()) throw ConfigError("simulated marketplace: catalog is empty");
}

const UserState& SimulatedMarketplace::account(const std::string& account_id) const {
  std::lock_guard lock(mutex_);
  const auto it = accounts_.find(account_id);
  if (it == accounts_.end()) throw NotFoundError("no account '" + account_id + "'");
  return it->second;
}

UserState& SimulatedMarketplace::account_mut(const std::string& account_id) {
  const auto it = accounts_.find(account_id);
  if (it == accounts_.end()) throw NotFoundError("no account '" + account_id + "'");
  return it->second;
}

void SimulatedMarketplace::register_account(const std::string& account_id) {
  std::lock_guard lock(mutex_);
  if (trim(account_id).empty()) throw ConfigError("register_account: empty account id");
  if (!accounts_.emplace(account_id, UserState{account_id, {}, {}, {}, {}}).second) {
    throw ConfigError("register_account: '" + account_id + "' already exists");
  }
}

void SimulatedMarketplace::begin_day(int day) {
  std::lock_guard lock(mutex_);
  if (day < 1) throw DomainError("begin_day: day must be >= 1");
  // Fresh browser, same accounts: session state would reset here; the
  // account histories deliberately persist.
  current_day_ = day;
}

scoring::SerpPage SimulatedMarketplace::search(const std::string& account_id,
                                               const std::string& query,
                                               SearchAlgorithm algorithm, VirtualTime now) {
  std::lock_guard lock(mutex_);
  return platform::search(catalog_, query, algorithm, account_mut(account_id), config_,
                          config_.search_page_size, now);
}

scoring::FederatedPage SimulatedMarketplace::homepage(const std::string& account_id,
                                                      CaptureLabel label, VirtualTime now) {
  std::lock_guard lock(mutex_);
  return platform::homepage(catalog_, account_mut(account_id), config_, config_.component_count,
                            config_.component_size, now, label);
}

void SimulatedMarketplace::browse(const std::string& account_id, const std::string& item_id) {
  std::lock_guard lock(mutex_);
  platform::browse(catalog_, account_mut(account_id), item_id);
}

void SimulatedMarketplace::add_to_wishlist(const std::string& account_id,
                                           const std::string& item_id) {
  std::lock_guard lock(mutex_);
  platform::add_to_wishlist(catalog_, account_mut(account_id), item_id);
}

void SimulatedMarketplace::add_to_cart(const std::string& account_id,
                                       const std::string& item_id) {
  std::lock_guard lock(mutex_);
  platform::add_to_cart(catalog_, account_mut(account_id), item_id);
}

}  // namespace audit::platform
