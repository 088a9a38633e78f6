#pragma once

#include <cstdint>

#include "audit/corpus.hpp"
#include "audit/platform.hpp"

namespace audit::platform {

// Knobs for the synthetic marketplace fixture. The defaults are sized so the
// default audit protocol is well-posed: every stance pool is deep enough to
// pick 12 treatment items from search results, and the distractor pool is
// deep enough (>= component_count * component_size) that a history-free
// homepage is built entirely from topic-neutral items.
struct CatalogGenOptions {
  int pro_items = 72;       // class +1
  int neutral_items = 72;   // class 0
  int anti_items = 72;      // class -1
  int distractor_items = 90;  // class 2, dominate global popularity
  int non_english_items = 2;  // class 3, surface in raw results, never scored
  int removed_items = 2;      // class 4
  int query_count = 29;       // split across pro/neutral/anti stances
  std::uint64_t seed = 1;
};

struct GeneratedFixture {
  Catalog catalog;
  std::vector<corpus::AnnotatedQuery> queries;
};

// Deterministic under seed. The fixture plants the relationships the audit
// is meant to detect: query stance correlates with result stance through
// stance-specific vocabulary; pro-misinformation items carry higher average
// ratings than anti items; neutral items are the most-rated of the three
// stances; and off-topic distractors dwarf everything in popularity.
GeneratedFixture generate_fixture(const CatalogGenOptions& options);

}  // namespace audit::platform
