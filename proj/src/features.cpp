#include "urfc/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

namespace urfc {

std::vector<double> extract_statistical(const VisitLog& log) {
  std::vector<double> f(kStatDim, 0.0);
  const double total = static_cast<double>(log.total_events());
  if (total == 0) return f;

  const double n_users = static_cast<double>(log.visits.size());
  std::set<int> days;
  double hour_sum = 0, hour_sq = 0;
  int hour_min = 24, hour_max = -1;
  double per_user_sum = 0, per_user_sq = 0;
  double per_user_max = 0, per_user_min = total + 1;
  double weekend = 0, work = 0, night = 0;
  std::array<double, 24> hour_hist{};
  std::array<double, 7> weekday_hist{};

  for (const auto& [user, events] : log.visits) {
    const double n = static_cast<double>(events.size());
    per_user_sum += n;
    per_user_sq += n * n;
    per_user_max = std::max(per_user_max, n);
    per_user_min = std::min(per_user_min, n);
    for (const auto& e : events) {
      days.insert(e.day);
      hour_sum += e.hour;
      hour_sq += static_cast<double>(e.hour) * e.hour;
      hour_min = std::min(hour_min, e.hour);
      hour_max = std::max(hour_max, e.hour);
      ++hour_hist[e.hour];
      const int weekday = e.day % 7;
      ++weekday_hist[weekday];
      if (weekday >= 5) ++weekend;
      if (e.hour >= 9 && e.hour < 17) ++work;
      if (e.hour < 6) ++night;
    }
  }

  const double mean_per_user = per_user_sum / n_users;
  const double var_per_user = std::max(0.0, per_user_sq / n_users - mean_per_user * mean_per_user);
  const double mean_hour = hour_sum / total;
  const double var_hour = std::max(0.0, hour_sq / total - mean_hour * mean_hour);

  f[0] = total;
  f[1] = n_users;
  f[2] = static_cast<double>(days.size());
  f[3] = mean_per_user;
  f[4] = std::sqrt(var_per_user);
  f[5] = per_user_max;
  f[6] = per_user_min;
  f[7] = mean_hour;
  f[8] = std::sqrt(var_hour);
  f[9] = hour_min;
  f[10] = hour_max;
  for (int h = 0; h < 24; ++h) f[11 + h] = hour_hist[h] / total;
  for (int k = 0; k < 7; ++k) f[35 + k] = weekday_hist[k] / total;
  f[42] = weekend / total;
  f[43] = work / total;
  f[44] = night / total;
  return f;
}

UserIndex build_user_index(const std::vector<std::pair<const VisitLog*, int>>& labeled_logs) {
  UserIndex index;
  for (const auto& [log, label] : labeled_logs) {
    if (label < 0 || label >= kNumCategories) {
      throw std::invalid_argument("unlabeled region in user index: " + log->region_id);
    }
    index.region_labels[log->region_id] = label;
    for (const auto& [user, events] : log->visits) {
      if (events.empty()) continue;
      RegionVisitSummary s;
      s.region_id = log->region_id;
      s.label = label;
      s.events = static_cast<int>(events.size());
      std::set<int> days;
      for (const auto& e : events) {
        days.insert(e.day);
        s.hour_sum += e.hour;
        if (e.day % 7 >= 5) ++s.weekend_events;
      }
      s.distinct_days = static_cast<int>(days.size());
      index.users[user].push_back(std::move(s));
    }
  }
  for (auto& [user, regions] : index.users) {
    std::sort(regions.begin(), regions.end(),
              [](const auto& a, const auto& b) { return a.region_id < b.region_id; });
  }
  return index;
}

std::vector<double> user_activity_profile(const std::string& user_id, const UserIndex& index,
                                          const std::optional<std::string>& exclude_region) {
  std::vector<double> profile(kActivityDim, 0.0);
  const auto it = index.users.find(user_id);
  if (it == index.users.end()) return profile;

  struct Acc {
    int regions = 0;
    long events = 0;
    long days = 0;
    long hour_sum = 0;
    long weekend = 0;
  };
  std::array<Acc, kNumCategories> acc{};
  for (const auto& s : it->second) {
    if (exclude_region && s.region_id == *exclude_region) continue;
    auto& a = acc[s.label];
    ++a.regions;
    a.events += s.events;
    a.days += s.distinct_days;
    a.hour_sum += s.hour_sum;
    a.weekend += s.weekend_events;
  }
  for (int c = 0; c < kNumCategories; ++c) {
    const auto& a = acc[c];
    double* row = profile.data() + c * kActivityCols;
    row[0] = a.regions;
    row[1] = static_cast<double>(a.events);
    row[2] = static_cast<double>(a.days);
    row[3] = a.events > 0 ? static_cast<double>(a.hour_sum) / static_cast<double>(a.events) : 0.0;
    row[4] = a.events > 0 ? static_cast<double>(a.weekend) / static_cast<double>(a.events) : 0.0;
  }
  return profile;
}

std::vector<double> extract_user_activity(const VisitLog& log, const UserIndex& index,
                                          const std::string& self_region) {
  std::vector<double> f(kActivityDim, 0.0);
  if (log.visits.empty()) return f;
  for (const auto& [user, events] : log.visits) {
    const auto profile = user_activity_profile(user, index, self_region);
    for (int i = 0; i < kActivityDim; ++i) f[i] += profile[i];
  }
  const double n = static_cast<double>(log.visits.size());
  for (auto& v : f) v /= n;
  return f;
}

std::vector<double> extract_region_graph(const VisitLog& log, const UserIndex& index,
                                         const StatStore& stat_store,
                                         const std::string& self_region) {
  std::set<std::string> related;
  for (const auto& [user, events] : log.visits) {
    const auto it = index.users.find(user);
    if (it == index.users.end()) continue;
    for (const auto& s : it->second) {
      if (s.region_id != self_region) related.insert(s.region_id);
    }
  }

  std::vector<double> f(kGraphDim, 0.0);
  std::array<int, kNumCategories> counts{};
  for (const auto& rid : related) {
    const int label = index.region_labels.at(rid);
    const auto it = stat_store.find(rid);
    if (it == stat_store.end()) {
      throw std::runtime_error("stat store missing related region: " + rid);
    }
    double* row = f.data() + label * kStatDim;
    for (int i = 0; i < kStatDim; ++i) row[i] += it->second[i];
    ++counts[label];
  }
  for (int c = 0; c < kNumCategories; ++c) {
    if (counts[c] == 0) continue;
    double* row = f.data() + c * kStatDim;
    for (int i = 0; i < kStatDim; ++i) row[i] /= counts[c];
  }
  return f;
}

std::vector<double> concat_multidim(const std::vector<double>& f_s,
                                    const std::vector<double>& f_a,
                                    const std::vector<double>& f_g) {
  if (f_s.size() != kStatDim || f_a.size() != kActivityDim || f_g.size() != kGraphDim) {
    throw std::invalid_argument("concat_multidim: block dimension mismatch");
  }
  std::vector<double> out;
  out.reserve(kMultiDim);
  out.insert(out.end(), f_s.begin(), f_s.end());
  out.insert(out.end(), f_a.begin(), f_a.end());
  out.insert(out.end(), f_g.begin(), f_g.end());
  return out;
}

void write_features_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                        const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::size_t dim = rows.empty() ? 0 : rows[0].size();
  out << "region_id";
  for (std::size_t i = 0; i < dim; ++i) out << ",f" << i;
  out << "\n";
  out.precision(17);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << ids[r];
    for (double v : rows[r]) out << "," << v;
    out << "\n";
  }
}

namespace {
constexpr char kFeatureMagic[8] = {'U', 'R', 'F', 'C', 'F', 'B', '0', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(buf, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw std::runtime_error("truncated feature file");
  return buf[0] | (buf[1] << 8) | (buf[2] << 16) | (static_cast<std::uint32_t>(buf[3]) << 24);
}
}  // namespace

void write_features_binary(const std::filesystem::path& path, const std::vector<std::string>& ids,
                           const std::vector<std::vector<double>>& rows) {
  static_assert(std::endian::native == std::endian::little);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kFeatureMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(rows.size()));
  put_u32(out, static_cast<std::uint32_t>(rows.empty() ? 0 : rows[0].size()));
  for (const auto& id : ids) {
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  for (const auto& row : rows) {
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
}

std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_features_binary(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kFeatureMagic, 8) != 0) {
    throw std::runtime_error("bad feature file magic: " + path.string());
  }
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t cols = get_u32(in);
  std::vector<std::string> ids(rows);
  for (auto& id : ids) {
    const std::uint32_t len = get_u32(in);
    id.resize(len);
    in.read(id.data(), len);
  }
  std::vector<std::vector<double>> data(rows, std::vector<double>(cols));
  for (auto& row : data) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(cols * sizeof(double)));
  }
  if (!in) throw std::runtime_error("truncated feature file: " + path.string());
  return {std::move(ids), std::move(data)};
}

}  // namespace urfc
