#include <doctest.h>

#include "urfc/core.hpp"

using namespace urfc;

TEST_CASE("category name/index round trip") {
  CHECK(category_index("Res") == 0);
  CHECK(category_index("Hos") == 8);
  for (int c = 0; c < kNumCategories; ++c) {
    CHECK(category_index(std::string(category_name(c))) == c);
  }
  CHECK_THROWS_AS(category_index("Mall"), std::invalid_argument);
  CHECK_THROWS_AS(category_name(9), std::out_of_range);
}

TEST_CASE("day offset to week/weekday") {
  const CalendarWindow window;
  CHECK(day_offset_to_week_weekday(0, window) == std::pair{0, 0});
  CHECK(day_offset_to_week_weekday(181, window) == std::pair{25, 6});
  CHECK(day_offset_to_week_weekday(9, window) == std::pair{1, 2});
  CHECK_THROWS_AS(day_offset_to_week_weekday(182, window), std::out_of_range);
  CHECK_THROWS_AS(day_offset_to_week_weekday(-1, window), std::out_of_range);
}

TEST_CASE("calendar bijection over the whole window") {
  const CalendarWindow window;
  for (int d = 0; d < window.num_days; ++d) {
    const auto [w, k] = day_offset_to_week_weekday(d, window);
    CHECK(7 * w + k == d);
  }
}

TEST_CASE("date parsing and offsets") {
  const CalendarWindow window;  // starts 2018-10-01
  CHECK(window.day_offset(parse_compact_date("20181001")) == 0);
  CHECK(window.day_offset(parse_compact_date("20181010")) == 9);
  CHECK(window.day_offset(parse_compact_date("20190331")) == 181);
  CHECK(window.day_offset(parse_compact_date("20190401")) == -1);
  CHECK(window.day_offset(parse_compact_date("20180930")) == -1);
  CHECK_THROWS_AS(parse_compact_date("20181301"), std::invalid_argument);
  CHECK_THROWS_AS(parse_compact_date("20180230"), std::invalid_argument);
  CHECK(format_iso_date(parse_iso_date("2018-10-01")) == "2018-10-01");
}

TEST_CASE("temporal tensor placement and mass") {
  const CalendarWindow window;
  VisitLog log;
  log.region_id = "r";

  SUBCASE("single event") {
    log.visits["u1"] = {{0, 9}};
    const auto t = build_temporal_tensor(log, window);
    CHECK(t.at(0, 0, 9) == 1);
    CHECK(t.total() == 1);
  }
  SUBCASE("two users on day 8 hour 7") {
    log.visits["u1"] = {{8, 7}};
    log.visits["u2"] = {{8, 7}};
    const auto t = build_temporal_tensor(log, window);
    CHECK(t.at(1, 1, 7) == 2);
    CHECK(t.total() == 2);
  }
  SUBCASE("empty log") {
    const auto t = build_temporal_tensor(log, window);
    CHECK(t.total() == 0);
  }
  SUBCASE("mass equals event count") {
    log.visits["u1"] = {{0, 1}, {3, 5}, {180, 23}};
    log.visits["u2"] = {{77, 12}};
    const auto t = build_temporal_tensor(log, window);
    CHECK(static_cast<std::size_t>(t.total()) == log.total_events());
  }
}
