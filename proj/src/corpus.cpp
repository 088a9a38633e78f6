#include "audit/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "audit/common.hpp"

namespace audit::corpus {

using json = nlohmann::json;

std::string_view to_string(QuerySource source) {
  switch (source) {
    case QuerySource::trend_topic:
      return "trend-topic";
    case QuerySource::autocomplete:
      return "autocomplete";
    case QuerySource::manual:
      return "manual";
  }
  throw DomainError("unknown query source");
}

QuerySource parse_query_source(std::string_view text) {
  if (text == "trend-topic") return QuerySource::trend_topic;
  if (text == "autocomplete") return QuerySource::autocomplete;
  if (text == "manual") return QuerySource::manual;
  throw DomainError("unknown query source: '" + std::string(text) + "'");
}

void validate_annotated_query(const AnnotatedQuery& query) {
  if (trim(query.text).empty()) throw DomainError("annotated query has empty text");
  if (!is_valid_stance(query.stance)) {
    throw DomainError("query '" + query.text + "' has stance " + std::to_string(query.stance) +
                      ", expected -1, 0, or 1");
  }
}

AnnotationClass::AnnotationClass(int raw) : raw_(raw) {
  if (raw < -1 || raw > 4) {
    throw DomainError("annotation class " + std::to_string(raw) + " outside {-1..4}");
  }
}

std::optional<int> normalize_annotation(AnnotationClass cls) noexcept {
  switch (cls.raw()) {
    case -1:
      return -1;
    case 0:
      return 0;
    case 1:
      return 1;
    case 2:
      return 0;  // unrelated items read as neutral
    default:
      return std::nullopt;  // 3 = not assessed, 4 = gone
  }
}

FileSuggestionProvider::FileSuggestionProvider(std::string name, std::string path)
    : name_(std::move(name)), path_(std::move(path)) {}

std::vector<QueryCandidate> FileSuggestionProvider::suggest(
    const std::string& /*topic implied by the fixture*/,
    const std::vector<std::string>& seeds) const {
  std::ifstream in(path_);
  if (!in) {
    throw ConfigError("suggestion provider '" + name_ + "': cannot open fixture '" + path_ + "'");
  }
  std::vector<QueryCandidate> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError("suggestion provider '" + name_ + "': bad record at " + path_ + ":" +
                        std::to_string(line_no) + ": " + e.what());
    }
    QueryCandidate cand;
    cand.text = record.at("text").get<std::string>();
    cand.source = parse_query_source(record.value("source", "manual"));
    if (record.contains("seed") && !record["seed"].is_null()) {
      cand.seed = record["seed"].get<std::string>();
    }
    if (cand.source == QuerySource::autocomplete) {
      const bool wanted =
          cand.seed.has_value() &&
          std::find(seeds.begin(), seeds.end(), *cand.seed) != seeds.end();
      if (!wanted) continue;
    }
    out.push_back(std::move(cand));
  }
  return out;
}

std::vector<QueryCandidate> curate_queries(const std::vector<const SuggestionProvider*>& providers,
                                           const std::string& topic,
                                           const std::vector<std::string>& seeds) {
  if (providers.empty()) throw ConfigError("curate_queries: no suggestion providers configured");
  if (seeds.empty()) throw ConfigError("curate_queries: seed list is empty");
  std::vector<QueryCandidate> out;
  std::set<std::string> seen;
  for (const SuggestionProvider* provider : providers) {
    if (provider == nullptr) throw ConfigError("curate_queries: null provider");
    for (QueryCandidate& cand : provider->suggest(topic, seeds)) {
      const std::string key = to_lower(trim(cand.text));
      if (key.empty()) {
        throw DataError("provider '" + provider->name() + "' produced an empty query text");
      }
      if (seen.insert(key).second) out.push_back(std::move(cand));
    }
  }
  return out;
}

std::string stem_token(const std::string& token) {
  std::string t = to_lower(token);
  if (t.size() > 4 && t.ends_with("ies")) {
    t.erase(t.size() - 3);
    t += 'y';
    return t;
  }
  if (t.ends_with("ss")) return t;
  if (t.size() > 4 && (t.ends_with("ches") || t.ends_with("shes") || t.ends_with("xes") ||
                       t.ends_with("zes"))) {
    t.erase(t.size() - 2);
    return t;
  }
  if (t.size() > 3 && t.ends_with('s')) t.pop_back();
  return t;
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",  "and", "are", "about", "at",  "be",  "by",   "can", "did",
      "do",   "does", "for", "how", "in",   "is",  "my",  "not",  "of",  "on",
      "or",   "the", "to",  "was", "were",  "what", "why", "with",
  };
  return words;
}

namespace {

std::string dedup_signature(const std::string& text, const ShortlistOptions& options,
                            const std::function<std::string(const std::string&)>& stem) {
  std::string sig;
  for (const std::string& word : tokenize_lower(text)) {
    if (options.stopwords.contains(word)) continue;
    sig += stem(word);
    sig += '\x1f';
  }
  return sig;
}

}  // namespace

std::vector<QueryCandidate> shortlist(const std::vector<QueryCandidate>& candidates,
                                      const ShortlistOptions& options) {
  if (options.max_words < 1) throw DomainError("shortlist: max_words must be >= 1");
  const auto stem = options.stem ? options.stem : stem_token;
  std::vector<QueryCandidate> kept;
  std::set<std::string> seen;
  for (const QueryCandidate& cand : candidates) {
    if (static_cast<int>(tokenize_lower(cand.text).size()) > options.max_words) continue;
    if (seen.insert(dedup_signature(cand.text, options, stem)).second) kept.push_back(cand);
  }
  return kept;
}

std::vector<QueryCandidate> shortlist(const std::vector<QueryCandidate>& candidates,
                                      const std::set<std::string>& stopwords) {
  ShortlistOptions options;
  options.stopwords = stopwords;
  return shortlist(candidates, options);
}

}  // namespace audit::corpus
