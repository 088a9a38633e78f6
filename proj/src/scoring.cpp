#include "audit/scoring.hpp"

namespace audit::scoring {

namespace {

void check_ranked(const std::vector<RankedResult>& results, const char* what) {
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].rank != static_cast<int>(i) + 1) {
      throw DomainError(std::string(what) + ": ranks must be contiguous 1..n, got " +
                        std::to_string(results[i].rank) + " at position " + std::to_string(i + 1));
    }
    if (!is_valid_stance(results[i].stance)) {
      throw DomainError(std::string(what) + ": result '" + results[i].item_id +
                        "' has stance " + std::to_string(results[i].stance));
    }
  }
}

double weighted_stance_mean(const std::vector<RankedResult>& results) {
  const double n = static_cast<double>(results.size());
  double acc = 0.0;
  for (const RankedResult& r : results) acc += r.stance * (n - r.rank + 1);
  return acc / (n * (n + 1) / 2.0);
}

}  // namespace

SerpPage make_serp_page(std::string query, SearchAlgorithm algorithm, VirtualTime captured_at,
                        std::vector<RankedResult> results, int max_results) {
  if (max_results < 1) throw DomainError("make_serp_page: max_results must be >= 1");
  if (static_cast<int>(results.size()) > max_results) {
    throw DomainError("make_serp_page: " + std::to_string(results.size()) +
                      " results exceed the page limit of " + std::to_string(max_results));
  }
  check_ranked(results, "make_serp_page");
  return SerpPage{std::move(query), std::move(results), algorithm, captured_at};
}

RecComponent make_component(std::string heading, int rank, std::vector<RankedResult> items) {
  if (rank < 1) throw DomainError("make_component: rank must be >= 1");
  check_ranked(items, "make_component");
  return RecComponent{std::move(heading), rank, std::move(items)};
}

FederatedPage make_federated_page(std::vector<RecComponent> components, VirtualTime captured_at,
                                  CaptureLabel label) {
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].rank != static_cast<int>(i) + 1) {
      throw DomainError("make_federated_page: component ranks must be contiguous 1..m");
    }
    check_ranked(components[i].items, "make_federated_page");
  }
  return FederatedPage{std::move(components), captured_at, label};
}

std::vector<RankedResult> to_scoreable_results(
    const std::vector<std::pair<std::string, corpus::AnnotationClass>>& ranked) {
  std::vector<RankedResult> out;
  out.reserve(ranked.size());
  for (const auto& [item_id, cls] : ranked) {
    const std::optional<int> stance = corpus::normalize_annotation(cls);
    if (!stance) continue;  // class 3/4: no stance, excluded from scoring
    out.push_back(RankedResult{item_id, static_cast<int>(out.size()) + 1, *stance});
  }
  return out;
}

double serp_ms(const SerpPage& page) {
  if (page.results.empty()) {
    throw UndefinedScoreError("serp_ms: page for query '" + page.query +
                              "' has no scoreable results");
  }
  return weighted_stance_mean(page.results);
}

double fserp_ms(const FederatedPage& page) {
  if (page.components.empty()) {
    throw UndefinedScoreError("fserp_ms: page has no components");
  }
  const double m = static_cast<double>(page.components.size());
  double acc = 0.0;
  for (const RecComponent& comp : page.components) {
    if (comp.items.empty()) {
      throw UndefinedScoreError("fserp_ms: component '" + comp.heading + "' is empty");
    }
    acc += weighted_stance_mean(comp.items) * (m - comp.rank + 1);
  }
  return acc / (m * (m + 1) / 2.0);
}

}  // namespace audit::scoring
