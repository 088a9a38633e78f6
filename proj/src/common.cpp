#include "audit/common.hpp"

#include <cctype>
#include <cstdio>

namespace audit {

std::string format_virtual_time(VirtualTime t) {
  const long day = static_cast<long>(t / kMinutesPerDay) + 1;
  const int within = static_cast<int>(t % kMinutesPerDay);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "day %ld %02d:%02d", day, within / 60, within % 60);
  return buf;
}

int parse_clock_time(const std::string& hhmm) {
  int h = 0, m = 0;
  char tail = 0;
  if (std::sscanf(hhmm.c_str(), "%2d:%2d%c", &h, &m, &tail) != 2 || hhmm.size() != 5 ||
      h < 0 || h > 23 || m < 0 || m > 59) {
    throw DomainError("not a valid HH:MM clock time: '" + hhmm + "'");
  }
  return h * 60 + m;
}

std::string format_clock_time(int minutes_from_midnight) {
  if (minutes_from_midnight < 0 || minutes_from_midnight >= kMinutesPerDay) {
    throw DomainError("clock time out of range: " + std::to_string(minutes_from_midnight));
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes_from_midnight / 60,
                minutes_from_midnight % 60);
  return buf;
}

std::string_view to_string(CaptureLabel label) {
  switch (label) {
    case CaptureLabel::after_action:
      return "after-action";
    case CaptureLabel::before_search:
      return "before-search";
    case CaptureLabel::after_search:
      return "after-search";
  }
  throw DomainError("unknown capture label");
}

CaptureLabel parse_capture_label(std::string_view text) {
  if (text == "after-action") return CaptureLabel::after_action;
  if (text == "before-search") return CaptureLabel::before_search;
  if (text == "after-search") return CaptureLabel::after_search;
  throw DomainError("unknown capture label: '" + std::string(text) + "'");
}

std::string_view to_string(SearchAlgorithm algorithm) {
  switch (algorithm) {
    case SearchAlgorithm::featured:
      return "featured";
    case SearchAlgorithm::avg_customer_review:
      return "avg_customer_review";
    case SearchAlgorithm::price_ascending:
      return "price_ascending";
    case SearchAlgorithm::price_descending:
      return "price_descending";
    case SearchAlgorithm::newest_arrivals:
      return "newest_arrivals";
  }
  throw DomainError("unknown search algorithm");
}

SearchAlgorithm parse_search_algorithm(std::string_view text) {
  for (SearchAlgorithm a : kAllSearchAlgorithms) {
    if (to_string(a) == text) return a;
  }
  throw DomainError("unknown search algorithm: '" + std::string(text) + "'");
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view text) {
  std::size_t begin = 0, end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

std::vector<std::string> tokenize_lower(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.push_back(to_lower(text.substr(start, i - start)));
  }
  return tokens;
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  if (bound < 2) return 0;
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % bound;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

double Rng::next_unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

int Rng::next_int(int lo, int hi) {
  if (hi < lo) throw DomainError("next_int: empty range");
  return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo) + 1));
}

}  // namespace audit
