#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "urfc/ingest.hpp"

using namespace urfc;

namespace {
VisitLog parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_visit_file(in, CalendarWindow{}, "r");
}
}  // namespace

TEST_CASE("minimal well-formed line") {
  const auto log = parse_text("U001\t20181001&09|10\n");
  REQUIRE(log.visits.size() == 1);
  const auto& events = log.visits.at("U001");
  REQUIRE(events.size() == 2);
  CHECK(events[0] == VisitEvent{0, 9});
  CHECK(events[1] == VisitEvent{0, 10});
}

TEST_CASE("empty input yields empty log") {
  CHECK(parse_text("").visits.empty());
  CHECK(parse_text("").total_events() == 0);
}

TEST_CASE("multi-date groups and duplicates") {
  const auto log = parse_text("U001\t20181001&09|09|10,20181002&00\n");
  CHECK(log.total_events() == 3);  // duplicate (0,9) collapsed
  CHECK(log.visits.at("U001")[2] == VisitEvent{1, 0});
}

TEST_CASE("malformed lines carry line numbers") {
  SUBCASE("hour out of range") {
    try {
      parse_text("U001\t20181001&25\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 1);
    }
  }
  SUBCASE("missing tab") {
    try {
      parse_text("U001 20181001&09\nU002\t20181001&09|bad\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 1);
    }
  }
  SUBCASE("bad hour on line 2") {
    try {
      parse_text("U001\t20181001&09\nU002\t20181001&9x\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 2);
    }
  }
  SUBCASE("bad date") {
    CHECK_THROWS_AS(parse_text("U001\t2018100&09\n"), ParseError);
    CHECK_THROWS_AS(parse_text("U001\t20181301&09\n"), ParseError);
  }
  SUBCASE("date outside window is a range error") {
    try {
      parse_text("U001\t20190501&09\n");
      FAIL("expected RangeError");
    } catch (const RangeError& e) {
      CHECK(e.line == 1);
    }
  }
}

TEST_CASE("canonical round trip on random logs") {
  const CalendarWindow window;
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 25; ++iter) {
    VisitLog log;
    log.region_id = "r";
    const int n_users = 1 + static_cast<int>(rng() % 8);
    for (int u = 0; u < n_users; ++u) {
      auto& events = log.visits["U" + std::to_string(rng() % 20)];
      const int n = 1 + static_cast<int>(rng() % 30);
      for (int e = 0; e < n; ++e) {
        events.push_back({static_cast<int>(rng() % 182), static_cast<int>(rng() % 24)});
      }
      std::sort(events.begin(), events.end());
      events.erase(std::unique(events.begin(), events.end()), events.end());
    }
    const std::string text = serialize_visit_log(log, window);
    std::istringstream in(text);
    const auto reparsed = parse_visit_file(in, window, "r");
    CHECK(reparsed.visits == log.visits);
    CHECK(serialize_visit_log(reparsed, window) == text);
  }
}

TEST_CASE("streaming parse of a 100k-line file stays memory-bounded") {
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "urfc_stream_test.txt";
  {
    std::ofstream out(path);
    for (int i = 0; i < 100000; ++i) {
      out << "U" << i << "\t20181001&09|10,20181002&11\n";
    }
  }
  auto rss_kb = [] {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("VmRSS:", 0) == 0) return std::stol(line.substr(6));
    }
    return -1L;
  };
  const long before = rss_kb();
  std::ifstream in(path);
  const auto log = parse_visit_file(in, CalendarWindow{}, "big");
  const long after = rss_kb();
  CHECK(log.visits.size() == 100000);
  CHECK(log.total_events() == 300000);
  // ~300k events plus user keys is a few tens of MB; far below the ~8MB/line
  // it would take to buffer the corpus.
  CHECK(after - before < 200 * 1024);
  fs::remove(path);
}

TEST_CASE("dataset manifest loading and stratified folds") {
  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "urfc_manifest_test";
  fs::create_directories(root);
  auto write_manifest = [&](const std::string& body) {
    std::ofstream out(root / "manifest.csv");
    out << "region_id,label,visit_path,image_path\n" << body;
  };

  SUBCASE("10 regions, 9 labeled, k=5") {
    std::string body;
    for (int c = 0; c < 9; ++c) {
      body += "r" + std::to_string(c) + "," + std::string(category_name(c)) + ",v.txt,i.png\n";
    }
    body += "t0,,v.txt,i.png\n";
    write_manifest(body);
    const auto ds = load_dataset(root, root / "manifest.csv", 5, 7);
    CHECK(ds.records.size() == 10);
    CHECK(ds.training_indices().size() == 9);
    CHECK(ds.test_indices().size() == 1);
    std::array<int, 5> fold_counts{};
    for (auto i : ds.training_indices()) ++fold_counts[ds.records[i].fold];
    for (int f = 0; f < 5; ++f) CHECK(fold_counts[f] >= 1);

    const auto ds2 = load_dataset(root, root / "manifest.csv", 5, 7);
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      CHECK(ds.records[i].fold == ds2.records[i].fold);
    }
  }
  SUBCASE("duplicate region id rejected") {
    write_manifest("r0,Res,v.txt,i.png\nr0,Sch,v.txt,i.png\n");
    CHECK_THROWS(load_dataset(root, root / "manifest.csv", 5, 7));
  }
  SUBCASE("unknown label rejected") {
    write_manifest("r0,Mall,v.txt,i.png\n");
    CHECK_THROWS_AS(load_dataset(root, root / "manifest.csv", 5, 7), std::invalid_argument);
  }
  SUBCASE("k_folds below 2 rejected") {
    write_manifest("r0,Res,v.txt,i.png\n");
    CHECK_THROWS_AS(load_dataset(root, root / "manifest.csv", 1, 7), std::invalid_argument);
  }
  fs::remove_all(root);
}
