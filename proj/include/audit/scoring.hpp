#pragma once

#include <string>
#include <utility>
#include <vector>

#include "audit/common.hpp"
#include "audit/corpus.hpp"
#include "audit/errors.hpp"

namespace audit::scoring {

inline constexpr int kDefaultPageLimit = 20;

// One retained result on a scoreable page. Results annotated as class 3 or 4
// never appear here: they are dropped at page construction and the survivors
// re-ranked 1..n (see to_scoreable_results).
struct RankedResult {
  std::string item_id;
  int rank = 0;    // 1-based position after exclusion
  int stance = 0;  // -1, 0, +1
};

// A captured ranked-results page.
struct SerpPage {
  std::string query;
  std::vector<RankedResult> results;  // ranks exactly 1..n, n <= page limit
  SearchAlgorithm algorithm = SearchAlgorithm::featured;
  VirtualTime captured_at = 0;
};

// One ranked block of a recommendation page ("component"), e.g. a carousel.
struct RecComponent {
  std::string heading;
  int rank = 0;  // 1-based position of the component on the page
  std::vector<RankedResult> items;
};

// A captured homepage: an ordered federation of recommendation components.
struct FederatedPage {
  std::vector<RecComponent> components;  // component ranks exactly 1..m
  VirtualTime captured_at = 0;
  CaptureLabel capture_label = CaptureLabel::after_action;
};

// Validating constructors; DomainError on non-contiguous ranks, invalid
// stances, or an oversize page.
SerpPage make_serp_page(std::string query, SearchAlgorithm algorithm, VirtualTime captured_at,
                        std::vector<RankedResult> results, int max_results = kDefaultPageLimit);
RecComponent make_component(std::string heading, int rank, std::vector<RankedResult> items);
FederatedPage make_federated_page(std::vector<RecComponent> components, VirtualTime captured_at,
                                  CaptureLabel label);

// Turns a raw ranked capture (item id + annotation class, best rank first)
// into a scoreable result list: classes 3/4 drop out, the rest get their
// normalized stance, and ranks are recompacted to 1..n.
std::vector<RankedResult> to_scoreable_results(
    const std::vector<std::pair<std::string, corpus::AnnotationClass>>& ranked);

// Rank-weighted stance score of a results page, in [-1, +1]: each result
// contributes stance * (n - rank + 1), normalized by n(n+1)/2 so that an
// all-promoting page scores +1 and an all-opposing page -1.
// UndefinedScoreError on an empty page.
double serp_ms(const SerpPage& page);

// Federated extension for component pages: each component contributes its
// own rank-weighted stance score, weighted by (m - i + 1) for component rank
// i and normalized by m(m+1)/2. UndefinedScoreError when the page has no
// components or any component is empty.
double fserp_ms(const FederatedPage& page);

}  // namespace audit::scoring
