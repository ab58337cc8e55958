#include "urfc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

namespace urfc {

namespace {

int parse_hour(std::string_view s, int line_no) {
  if (s.empty() || s.size() > 2) throw ParseError(line_no, "bad hour field '" + std::string(s) + "'");
  int h = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), h);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line_no, "bad hour field '" + std::string(s) + "'");
  }
  if (h < 0 || h >= 24) throw ParseError(line_no, "hour out of range: " + std::string(s));
  return h;
}

}  // namespace

VisitLog parse_visit_file(std::istream& in, const CalendarWindow& window, std::string region_id) {
  VisitLog log;
  log.region_id = std::move(region_id);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "missing tab separator");
    const std::string user = line.substr(0, tab);
    if (user.empty()) throw ParseError(line_no, "empty user id");
    auto& events = log.visits[user];

    std::string_view rest = std::string_view(line).substr(tab + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string_view group =
          rest.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      const auto amp = group.find('&');
      if (amp == std::string_view::npos) throw ParseError(line_no, "missing '&' in date group");
      Date date;
      try {
        date = parse_compact_date(group.substr(0, amp));
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, e.what());
      }
      const int day = window.day_offset(date);
      if (day < 0) {
        throw RangeError(line_no, "date outside window: " + format_compact_date(date));
      }
      std::string_view hours = group.substr(amp + 1);
      if (hours.empty()) throw ParseError(line_no, "empty hour list");
      std::size_t hpos = 0;
      while (hpos <= hours.size()) {
        const auto bar = hours.find('|', hpos);
        const std::string_view hs = hours.substr(
            hpos, bar == std::string_view::npos ? std::string_view::npos : bar - hpos);
        events.push_back({day, parse_hour(hs, line_no)});
        if (bar == std::string_view::npos) break;
        hpos = bar + 1;
      }
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  for (auto& [user, events] : log.visits) {
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
  }
  return log;
}

VisitLog parse_visit_file(const std::filesystem::path& path, const CalendarWindow& window,
                          std::string region_id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open visit file: " + path.string());
  if (region_id.empty()) region_id = path.stem().string();
  return parse_visit_file(in, window, std::move(region_id));
}

std::string serialize_visit_log(const VisitLog& log, const CalendarWindow& window) {
  const long start = days_from_civil(window.start);
  std::string out;
  for (const auto& [user, events] : log.visits) {
    out += user;
    out += '\t';
    int prev_day = -1;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& e = events[i];
      if (e.day != prev_day) {
        if (prev_day >= 0) out += ',';
        out += format_compact_date(civil_from_days(start + e.day));
        out += '&';
        prev_day = e.day;
      } else {
        out += '|';
      }
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%02d", e.hour);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<std::size_t> DatasetIndex::training_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].labeled()) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> DatasetIndex::test_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].labeled()) out.push_back(i);
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    fields.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return fields;
}

}  // namespace

DatasetIndex load_dataset(const std::filesystem::path& root,
                          const std::filesystem::path& manifest_path, int k_folds,
                          std::uint64_t seed) {
  if (k_folds < 2) throw std::invalid_argument("k_folds must be >= 2");
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path.string());

  DatasetIndex ds;
  ds.root = root;
  ds.window = load_window(root);
  ds.k_folds = k_folds;
  ds.seed = seed;

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty manifest");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "region_id,label,visit_path,image_path") {
    throw std::runtime_error("bad manifest header: " + line);
  }
  std::map<std::string, bool> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": expected 4 fields");
    }
    RegionRecord rec;
    rec.region_id = fields[0];
    rec.label = fields[1].empty() ? -1 : category_index(fields[1]);
    rec.visit_path = fields[2];
    rec.image_path = fields[3];
    if (seen.count(rec.region_id)) {
      throw std::runtime_error("duplicate region_id: " + rec.region_id);
    }
    seen[rec.region_id] = true;
    ds.records.push_back(std::move(rec));
  }

  // Stratified folds: shuffle each category deterministically, then round-robin
  // with a counter carried across categories so every fold fills.
  std::vector<std::vector<std::size_t>> by_cat(kNumCategories);
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (ds.records[i].labeled()) by_cat[ds.records[i].label].push_back(i);
  }
  std::size_t counter = 0;
  for (int c = 0; c < kNumCategories; ++c) {
    auto& idx = by_cat[c];
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return ds.records[a].region_id < ds.records[b].region_id;
    });
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(c));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) {
      ds.records[i].fold = static_cast<int>(counter++ % static_cast<std::size_t>(k_folds));
    }
  }
  return ds;
}

CalendarWindow load_window(const std::filesystem::path& root) {
  CalendarWindow window;
  const auto path = root / "window.json";
  std::ifstream in(path);
  if (!in) return window;
  nlohmann::json j;
  in >> j;
  window.start = parse_iso_date(j.at("start_date").get<std::string>());
  window.num_days = j.at("num_days").get<int>();
  return window;
}

void save_window(const std::filesystem::path& root, const CalendarWindow& window) {
  nlohmann::json j;
  j["start_date"] = format_iso_date(window.start);
  j["num_days"] = window.num_days;
  std::ofstream out(root / "window.json");
  out << j.dump(2) << "\n";
}

}  // namespace urfc
