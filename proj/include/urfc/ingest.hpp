#pragma once

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "urfc/core.hpp"

namespace urfc {

// Malformed line content (bad date, hour out of range, missing tab).
struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

// Well-formed line whose date falls outside the calendar window.
struct RangeError : std::runtime_error {
  int line;
  RangeError(int line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

// Visit file line format: USER_ID<TAB>YYYYMMDD&hh|hh,YYYYMMDD&hh|hh...
// Streams line by line; memory is proportional to the parsed log, not the input.
VisitLog parse_visit_file(std::istream& in, const CalendarWindow& window,
                          std::string region_id = "");
VisitLog parse_visit_file(const std::filesystem::path& path, const CalendarWindow& window,
                          std::string region_id = "");

// Canonical form: users sorted lexically, dates ascending, zero-padded hours ascending.
std::string serialize_visit_log(const VisitLog& log, const CalendarWindow& window);

struct DatasetIndex {
  std::filesystem::path root;
  CalendarWindow window;
  std::vector<RegionRecord> records;
  int k_folds = 5;
  std::uint64_t seed = 0;

  std::vector<std::size_t> training_indices() const;
  std::vector<std::size_t> test_indices() const;
  std::filesystem::path visit_path(const RegionRecord& r) const { return root / r.visit_path; }
  std::filesystem::path image_path(const RegionRecord& r) const { return root / r.image_path; }
};

// Manifest: CSV with header region_id,label,visit_path,image_path (empty label = test region).
// Fold assignment is stratified per category: deterministic shuffle by seed, then round-robin.
DatasetIndex load_dataset(const std::filesystem::path& root,
                          const std::filesystem::path& manifest_path, int k_folds,
                          std::uint64_t seed);

// Reads <root>/window.json when present, otherwise the default window.
CalendarWindow load_window(const std::filesystem::path& root);
void save_window(const std::filesystem::path& root, const CalendarWindow& window);

}  // namespace urfc
