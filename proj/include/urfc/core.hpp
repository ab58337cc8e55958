#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace urfc {

inline constexpr int kNumCategories = 9;

// Fixed taxonomy order; index <-> name is stable across runs.
const std::array<std::string_view, kNumCategories>& category_names();
int category_index(std::string_view name);  // throws std::invalid_argument on unknown name
std::string_view category_name(int index);  // throws std::out_of_range

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;
  bool operator==(const Date&) const = default;
};

// Proleptic Gregorian day count (days since 1970-01-01).
long days_from_civil(const Date& d);
Date civil_from_days(long z);
Date parse_iso_date(std::string_view s);      // "YYYY-MM-DD"
Date parse_compact_date(std::string_view s);  // "YYYYMMDD"
std::string format_iso_date(const Date& d);
std::string format_compact_date(const Date& d);

// 182-day (26-week) observation window; day offsets are relative to start,
// weekday = offset mod 7 (the synthetic generator starts on a Monday).
struct CalendarWindow {
  Date start{2018, 10, 1};
  int num_days = 182;

  int weeks() const { return (num_days + 6) / 7; }
  // -1 when the date falls outside the window.
  int day_offset(const Date& d) const;
};

// week = floor(d/7), weekday = d mod 7; throws std::out_of_range outside [0, num_days).
std::pair<int, int> day_offset_to_week_weekday(int day_offset, const CalendarWindow& window);

struct VisitEvent {
  int day = 0;   // offset within the window
  int hour = 0;  // [0, 24)
  auto operator<=>(const VisitEvent&) const = default;
};

// One region's visit records: user -> sorted, de-duplicated events.
struct VisitLog {
  std::string region_id;
  std::map<std::string, std::vector<VisitEvent>> visits;

  std::size_t total_events() const;
  bool empty() const { return visits.empty(); }
};

// weeks x 7 x 24 visit-count tensor.
struct TemporalTensor {
  int weeks = 26;
  std::vector<std::int64_t> counts;  // weeks*7*24, row-major (week, weekday, hour)

  explicit TemporalTensor(int n_weeks = 26)
      : weeks(n_weeks), counts(static_cast<std::size_t>(n_weeks) * 7 * 24, 0) {}

  std::int64_t& at(int w, int k, int h) {
    return counts[(static_cast<std::size_t>(w) * 7 + k) * 24 + h];
  }
  std::int64_t at(int w, int k, int h) const {
    return counts[(static_cast<std::size_t>(w) * 7 + k) * 24 + h];
  }
  std::int64_t total() const;
};

TemporalTensor build_temporal_tensor(const VisitLog& log, const CalendarWindow& window);

struct RegionRecord {
  std::string region_id;
  int label = -1;  // -1 = unlabeled test region
  std::string visit_path;
  std::string image_path;
  int fold = -1;  // assigned for labeled records only

  bool labeled() const { return label >= 0; }
};

}  // namespace urfc
