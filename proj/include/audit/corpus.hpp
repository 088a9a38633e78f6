#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "audit/errors.hpp"

namespace audit::corpus {

enum class QuerySource { trend_topic, autocomplete, manual };

std::string_view to_string(QuerySource source);
QuerySource parse_query_source(std::string_view text);

// A query string as returned by a suggestion provider, before curation.
struct QueryCandidate {
  std::string text;
  QuerySource source = QuerySource::manual;
  std::optional<std::string> seed;  // the seed that produced it, if any
};

// A curated query with its human-assigned stance (-1, 0, +1).
struct AnnotatedQuery {
  std::string text;
  int stance = 0;
};

void validate_annotated_query(const AnnotatedQuery& query);  // DomainError

// Six-class item annotation:
//   -1  opposes the misinformation
//    0  neutral treatment of the topic
//   +1  promotes the misinformation
//    2  unrelated to the topic
//    3  not in English, never assessed
//    4  gone from the platform by annotation time
class AnnotationClass {
 public:
  explicit AnnotationClass(int raw);  // DomainError outside {-1,0,1,2,3,4}
  int raw() const { return raw_; }
  friend bool operator==(AnnotationClass, AnnotationClass) = default;

 private:
  int raw_;
};

// Collapses the six classes onto the three-point stance scale. Classes 3 and
// 4 have no stance and map to nullopt; their items drop out of scored pages.
std::optional<int> normalize_annotation(AnnotationClass cls) noexcept;

// Source of query suggestions for a topic. Implementations must be
// deterministic for fixed inputs.
class SuggestionProvider {
 public:
  virtual ~SuggestionProvider() = default;
  virtual std::string name() const = 0;
  virtual std::vector<QueryCandidate> suggest(const std::string& topic,
                                              const std::vector<std::string>& seeds) const = 0;
};

// Provider backed by a line-delimited JSON fixture of {text, source, seed}
// records. Trend-topic and manual records are always returned; autocomplete
// records are returned only when their seed is among the requested seeds.
class FileSuggestionProvider final : public SuggestionProvider {
 public:
  FileSuggestionProvider(std::string name, std::string path);
  std::string name() const override { return name_; }
  std::vector<QueryCandidate> suggest(const std::string& topic,
                                      const std::vector<std::string>& seeds) const override;

 private:
  std::string name_;
  std::string path_;
};

// Unions provider suggestions in provider order, deduplicating on
// case-insensitive text while keeping the first occurrence.
// ConfigError when no providers or no seeds are supplied, or when a provider
// fixture cannot be read.
std::vector<QueryCandidate> curate_queries(const std::vector<const SuggestionProvider*>& providers,
                                           const std::string& topic,
                                           const std::vector<std::string>& seeds);

// Light plural/suffix stemmer: berries -> berry, boxes -> box,
// vaccines -> vaccine; words ending in "ss" are left alone.
std::string stem_token(const std::string& token);

const std::set<std::string>& default_stopwords();

struct ShortlistOptions {
  int max_words = 4;  // queries with more whitespace tokens are dropped
  std::set<std::string> stopwords;
  // Token normalizer used for near-duplicate detection; two candidates
  // collide when their stopword-filtered, normalized token sequences are
  // equal. Defaults to stem_token. Swap in a stricter matcher if needed.
  std::function<std::string(const std::string&)> stem;
};

// Drops over-long queries, exact duplicates, and stem-equal variants,
// preserving first-seen order. Idempotent.
std::vector<QueryCandidate> shortlist(const std::vector<QueryCandidate>& candidates,
                                      const ShortlistOptions& options);
std::vector<QueryCandidate> shortlist(const std::vector<QueryCandidate>& candidates,
                                      const std::set<std::string>& stopwords);

}  // namespace audit::corpus
