#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "urfc/core.hpp"

namespace urfc {

inline constexpr int kStatDim = 45;        // f_S
inline constexpr int kActivityCols = 5;    // N_A
inline constexpr int kActivityDim = kNumCategories * kActivityCols;  // flattened f_A = 45
inline constexpr int kGraphDim = kNumCategories * kStatDim;          // flattened f_G = 405
inline constexpr int kMultiDim = kStatDim + kActivityDim + kGraphDim;  // 495

// f_S layout:
//   [0] total events  [1] unique users  [2] active days
//   [3..6] mean/std/max/min events per user (population std)
//   [7..10] mean/std/min/max visit hour
//   [11..34] 24-bin hour histogram (sums to 1, all-zero when empty)
//   [35..41] 7-bin weekday histogram
//   [42] weekend ratio (weekday 5-6)  [43] work-hour ratio [9,17)  [44] night ratio [0,6)
std::vector<double> extract_statistical(const VisitLog& log);

// Condensed per-(user, region) visit summary used by A(u) and f_G.
struct RegionVisitSummary {
  std::string region_id;
  int label = -1;
  int events = 0;
  int distinct_days = 0;
  long hour_sum = 0;
  int weekend_events = 0;
};

// Global inverted index over labeled training regions only.
struct UserIndex {
  std::map<std::string, std::vector<RegionVisitSummary>> users;  // region lists sorted by id
  std::map<std::string, int> region_labels;
};

UserIndex build_user_index(const std::vector<std::pair<const VisitLog*, int>>& labeled_logs);

// A(u): 9x5 row-major; row c = [distinct regions, total events, distinct active days,
// mean visit hour (0 if none), weekend ratio (0 if none)] over the user's regions of
// category c, skipping exclude_region. Unknown user -> zero matrix.
std::vector<double> user_activity_profile(const std::string& user_id, const UserIndex& index,
                                          const std::optional<std::string>& exclude_region = {});

// f_A = mean of A(u) over all users in the log (self_region excluded per user),
// denominator exactly |U_i|; empty log -> zero vector.
std::vector<double> extract_user_activity(const VisitLog& log, const UserIndex& index,
                                          const std::string& self_region);

// f_G: related set = union of indexed regions over the log's users, minus self_region;
// row c = mean f_S over related regions of category c (zero row when none).
using StatStore = std::map<std::string, std::vector<double>>;
std::vector<double> extract_region_graph(const VisitLog& log, const UserIndex& index,
                                         const StatStore& stat_store,
                                         const std::string& self_region);

// Concatenation f_S | f_A | f_G -> 495 dims; throws on dimension mismatch.
std::vector<double> concat_multidim(const std::vector<double>& f_s,
                                    const std::vector<double>& f_a,
                                    const std::vector<double>& f_g);

// CSV: header region_id,f0..f{D-1}. Binary: "URFCFB01" magic, u32 rows, u32 cols,
// then rows*cols little-endian doubles.
void write_features_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                        const std::vector<std::vector<double>>& rows);
void write_features_binary(const std::filesystem::path& path, const std::vector<std::string>& ids,
                           const std::vector<std::vector<double>>& rows);
std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_features_binary(
    const std::filesystem::path& path);

}  // namespace urfc
