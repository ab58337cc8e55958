#include "urfc/core.hpp"

#include <charconv>
#include <cstdio>

namespace urfc {

const std::array<std::string_view, kNumCategories>& category_names() {
  static const std::array<std::string_view, kNumCategories> names = {
      "Res", "Sch", "Ind", "Rail", "Air", "Park", "Shop", "Adm", "Hos"};
  return names;
}

int category_index(std::string_view name) {
  const auto& names = category_names();
  for (int i = 0; i < kNumCategories; ++i) {
    if (names[i] == name) return i;
  }
  throw std::invalid_argument("unknown category name: " + std::string(name));
}

std::string_view category_name(int index) {
  if (index < 0 || index >= kNumCategories) {
    throw std::out_of_range("category index out of range: " + std::to_string(index));
  }
  return category_names()[index];
}

// Howard Hinnant's civil-days algorithm.
long days_from_civil(const Date& d) {
  int y = d.year;
  const unsigned m = static_cast<unsigned>(d.month);
  const unsigned day = static_cast<unsigned>(d.day);
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

Date civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned day = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(day)};
}

namespace {

int parse_int_strict(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not an integer: " + std::string(s));
  }
  return value;
}

bool valid_date(const Date& d) {
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return false;
  return civil_from_days(days_from_civil(d)) == d;
}

}  // namespace

Date parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
    throw std::invalid_argument("bad ISO date: " + std::string(s));
  }
  Date d{parse_int_strict(s.substr(0, 4)), parse_int_strict(s.substr(5, 2)),
         parse_int_strict(s.substr(8, 2))};
  if (!valid_date(d)) throw std::invalid_argument("invalid date: " + std::string(s));
  return d;
}

Date parse_compact_date(std::string_view s) {
  if (s.size() != 8) throw std::invalid_argument("bad compact date: " + std::string(s));
  Date d{parse_int_strict(s.substr(0, 4)), parse_int_strict(s.substr(4, 2)),
         parse_int_strict(s.substr(6, 2))};
  if (!valid_date(d)) throw std::invalid_argument("invalid date: " + std::string(s));
  return d;
}

std::string format_iso_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

std::string format_compact_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d%02d%02d", d.year, d.month, d.day);
  return buf;
}

int CalendarWindow::day_offset(const Date& d) const {
  const long off = days_from_civil(d) - days_from_civil(start);
  if (off < 0 || off >= num_days) return -1;
  return static_cast<int>(off);
}

std::pair<int, int> day_offset_to_week_weekday(int day_offset, const CalendarWindow& window) {
  if (day_offset < 0 || day_offset >= window.num_days) {
    throw std::out_of_range("day offset outside window: " + std::to_string(day_offset));
  }
  return {day_offset / 7, day_offset % 7};
}

std::size_t VisitLog::total_events() const {
  std::size_t n = 0;
  for (const auto& [user, events] : visits) n += events.size();
  return n;
}

std::int64_t TemporalTensor::total() const {
  std::int64_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

TemporalTensor build_temporal_tensor(const VisitLog& log, const CalendarWindow& window) {
  TemporalTensor tensor(window.weeks());
  for (const auto& [user, events] : log.visits) {
    for (const auto& e : events) {
      auto [w, k] = day_offset_to_week_weekday(e.day, window);
      ++tensor.at(w, k, e.hour);
    }
  }
  return tensor;
}

}  // namespace urfc
