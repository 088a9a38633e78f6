#include "audit/catalog_gen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "audit/errors.hpp"

namespace audit::platform {
namespace {

// Vocabulary that titles and relevance terms are assembled from. Stance
// pools are disjoint from each other and from the distractor pool, so term
// overlap between items of different stances comes only from the shared
// topic words.
const std::vector<std::string> kTopicVariants = {"vaccination", "immunization",
                                                 "shot", "shots"};
const std::vector<std::string> kProTerms = {
    "truth",    "exposed", "dangers", "coverup", "deception", "illusion",
    "hoax",     "toxins",  "injury",  "secrets", "hidden",    "agenda"};
const std::vector<std::string> kAntiTerms = {
    "facts",    "evidence", "safety",  "debunked", "myths",   "protection",
    "medicine", "doctors",  "trusted", "proven",   "science", "immunology"};
const std::vector<std::string> kNeutralTerms = {
    "history", "handbook", "schedule", "guide",     "record",
    "research", "overview", "basics",   "reference", "timeline"};
const std::vector<std::string> kDistractorTerms = {
    "kitchen",  "blender", "novel",   "mystery", "headphones",
    "gaming",   "puzzle",  "camera",  "backpack", "lamp",
    "charger",  "desk",    "thermos", "sneakers", "journal",
    "garden",   "toolkit", "speaker", "monitor",  "keyboard"};
const std::vector<std::string> kTitleNouns = {
    "Handbook", "Report", "Files", "Chronicle", "Papers", "Primer", "Letters"};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = char(s[0] - 'a' + 'A');
  return s;
}

std::string fresh_item_id(Rng& rng, std::set<std::string>& used) {
  static const char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  for (;;) {
    std::string id = "B";
    for (int i = 0; i < 9; ++i) id += alphabet[rng.next_below(36)];
    if (used.insert(id).second) return id;
  }
}

double uniform_money(Rng& rng, double lo, double hi) {
  return std::round(rng.next_in(lo, hi) * 100.0) / 100.0;
}

double uniform_rating(Rng& rng, double lo, double hi) {
  double r = std::round(rng.next_in(lo, hi) * 10.0) / 10.0;
  return std::clamp(r, 1.0, 5.0);
}

// Two distinct terms from the pool, order preserved.
std::vector<std::string> pick_two(Rng& rng, const std::vector<std::string>& pool) {
  int a = rng.next_below(pool.size());
  int b = rng.next_below(pool.size() - 1);
  if (b >= a) ++b;
  return {pool[a], pool[b]};
}

struct StanceProfile {
  int raw_class;
  const std::vector<std::string>* pool;
  int ratings_lo, ratings_hi;
  double rating_lo, rating_hi;
};

Item make_topic_item(Rng& rng, std::set<std::string>& used,
                     const StanceProfile& profile) {
  Item item;
  item.item_id = fresh_item_id(rng, used);
  item.stance_class = corpus::AnnotationClass(profile.raw_class);
  auto picked = pick_two(rng, *profile.pool);
  const std::string& variant = kTopicVariants[rng.next_below(kTopicVariants.size())];
  item.title = capitalize(picked[0]) + " " + capitalize(picked[1]) +
               ": a Vaccine " + kTitleNouns[rng.next_below(kTitleNouns.size())];
  item.relevance_terms = {"vaccine", "vaccines", variant, picked[0], picked[1]};
  item.num_ratings = rng.next_int(profile.ratings_lo, profile.ratings_hi);
  item.avg_rating = uniform_rating(rng, profile.rating_lo, profile.rating_hi);
  item.price = uniform_money(rng, 3.0, 80.0);
  item.arrival_day = rng.next_int(0, 3650);
  return item;
}

Item make_distractor_item(Rng& rng, std::set<std::string>& used) {
  Item item;
  item.item_id = fresh_item_id(rng, used);
  item.stance_class = corpus::AnnotationClass(2);
  auto picked = pick_two(rng, kDistractorTerms);
  item.title = capitalize(picked[0]) + " " + capitalize(picked[1]) + " Set";
  item.relevance_terms = {picked[0], picked[1]};
  item.num_ratings = rng.next_int(5000, 20000);
  item.avg_rating = uniform_rating(rng, 3.5, 5.0);
  item.price = uniform_money(rng, 3.0, 80.0);
  item.arrival_day = rng.next_int(0, 3650);
  return item;
}

}  // namespace

GeneratedFixture generate_fixture(const CatalogGenOptions& options) {
  if (options.pro_items < 0 || options.neutral_items < 0 ||
      options.anti_items < 0 || options.distractor_items < 0 ||
      options.non_english_items < 0 || options.removed_items < 0) {
    throw ConfigError("catalog generation: item counts must be non-negative");
  }
  const int max_queries = 2 + int(kNeutralTerms.size()) + int(kProTerms.size()) +
                          int(kAntiTerms.size());
  if (options.query_count < 1 || options.query_count > max_queries) {
    throw ConfigError("catalog generation: query_count must be in [1, " +
                      std::to_string(max_queries) + "]");
  }

  Rng rng(options.seed);
  std::set<std::string> used_ids;
  std::vector<Item> items;
  items.reserve(size_t(options.pro_items + options.neutral_items +
                       options.anti_items + options.distractor_items +
                       options.non_english_items + options.removed_items));

  const StanceProfile pro{1, &kProTerms, 200, 800, 4.3, 5.0};
  const StanceProfile neutral{0, &kNeutralTerms, 500, 1500, 3.8, 4.4};
  const StanceProfile anti{-1, &kAntiTerms, 50, 400, 3.5, 4.3};
  // Unscorable entries reuse stance vocabulary so they show up in raw search
  // results and exercise the exclusion path.
  const StanceProfile non_english{3, &kNeutralTerms, 50, 1000, 3.0, 5.0};
  const StanceProfile removed{4, &kProTerms, 50, 1000, 3.0, 5.0};

  for (int i = 0; i < options.pro_items; ++i)
    items.push_back(make_topic_item(rng, used_ids, pro));
  for (int i = 0; i < options.neutral_items; ++i)
    items.push_back(make_topic_item(rng, used_ids, neutral));
  for (int i = 0; i < options.anti_items; ++i)
    items.push_back(make_topic_item(rng, used_ids, anti));
  for (int i = 0; i < options.distractor_items; ++i)
    items.push_back(make_distractor_item(rng, used_ids));
  for (int i = 0; i < options.non_english_items; ++i)
    items.push_back(make_topic_item(rng, used_ids, non_english));
  for (int i = 0; i < options.removed_items; ++i)
    items.push_back(make_topic_item(rng, used_ids, removed));

  // Queries: roughly a third per stance, remainder to the misinformation
  // poles. Stance-specific query terms are all distinct, so every query
  // reaches a different slice of the catalog.
  const int base = options.query_count / 3;
  const int rem = options.query_count % 3;
  const int n_pro = base + (rem > 0 ? 1 : 0);
  const int n_anti = base + (rem > 1 ? 1 : 0);
  const int n_neutral = base;

  std::vector<corpus::AnnotatedQuery> queries;
  queries.reserve(size_t(options.query_count));
  for (int i = 0; i < n_neutral; ++i) {
    if (i == 0)
      queries.push_back({"vaccines", 0});
    else if (i == 1)
      queries.push_back({"vaccination", 0});
    else
      queries.push_back({"vaccine " + kNeutralTerms[size_t(i - 2)], 0});
  }
  for (int i = 0; i < n_pro; ++i)
    queries.push_back({"vaccine " + kProTerms[size_t(i)], 1});
  for (int i = 0; i < n_anti; ++i)
    queries.push_back({"vaccine " + kAntiTerms[size_t(i)], -1});

  return {Catalog(std::move(items)), std::move(queries)};
}

}  // namespace audit::platform
