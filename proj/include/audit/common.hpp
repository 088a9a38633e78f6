#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "audit/errors.hpp"

namespace audit {

// Simulation time, expressed in whole minutes since the start of the run.
// Day 1 spans [0, 1440), day 2 [1440, 2880), and so on.
using VirtualTime = std::int64_t;

inline constexpr VirtualTime kMinutesPerDay = 24 * 60;

std::string format_virtual_time(VirtualTime t);  // "day 3 11:40"

// "09:00" -> 540. Throws DomainError on anything that is not strict HH:MM.
int parse_clock_time(const std::string& hhmm);
std::string format_clock_time(int minutes_from_midnight);

// Homepage capture checkpoints taken during a protocol day.
enum class CaptureLabel { after_action, before_search, after_search };

std::string_view to_string(CaptureLabel label);
CaptureLabel parse_capture_label(std::string_view text);

// The five result orderings offered by the marketplace search UI.
enum class SearchAlgorithm {
  featured,
  avg_customer_review,
  price_ascending,
  price_descending,
  newest_arrivals,
};

inline constexpr SearchAlgorithm kAllSearchAlgorithms[] = {
    SearchAlgorithm::featured,         SearchAlgorithm::avg_customer_review,
    SearchAlgorithm::price_ascending,  SearchAlgorithm::price_descending,
    SearchAlgorithm::newest_arrivals,
};

std::string_view to_string(SearchAlgorithm algorithm);
SearchAlgorithm parse_search_algorithm(std::string_view text);  // DomainError on unknown label

// Normalized stance of an item or query: -1 opposes misinformation,
// 0 is neutral, +1 promotes it.
constexpr bool is_valid_stance(int stance) {
  return stance == -1 || stance == 0 || stance == 1;
}

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

// Splits on whitespace and lowercases; no other normalization.
std::vector<std::string> tokenize_lower(std::string_view text);

// Deterministic RNG wrapper. mt19937_64's output stream is pinned by the
// standard; the std:: distributions are not, so draws are hand-rolled to keep
// runs reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Unbiased draw from [0, bound) via rejection sampling.
  std::uint64_t next_below(std::uint64_t bound);

  double next_unit();  // [0, 1)
  double next_in(double lo, double hi);
  int next_int(int lo, int hi);  // inclusive on both ends

  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[next_below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace audit
