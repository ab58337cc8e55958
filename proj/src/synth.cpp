#include "urfc/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>

#include "urfc/branches.hpp"
#include "urfc/ingest.hpp"

namespace urfc {

namespace {

double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double next_gaussian(std::mt19937_64& rng) {
  // Box-Muller; fixed algorithm keeps output identical across platforms.
  double u1 = next_unit(rng);
  while (u1 <= 1e-12) u1 = next_unit(rng);
  const double u2 = next_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

int next_below(std::mt19937_64& rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

template <std::size_t N>
std::array<double, N> normalized(std::array<double, N> w) {
  double sum = 0.0;
  for (double v : w) sum += v;
  for (auto& v : w) v /= sum;
  return w;
}

template <std::size_t N>
std::array<double, N> mix_uniform(const std::array<double, N>& p, double noise) {
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = (1.0 - noise) * p[i] + noise / N;
  return out;
}

template <std::size_t N>
int sample_discrete(const std::array<double, N>& p, std::mt19937_64& rng) {
  double u = next_unit(rng);
  for (std::size_t i = 0; i + 1 < N; ++i) {
    u -= p[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(N - 1);
}

struct CategorySignature {
  std::array<double, 24> hours;
  std::array<double, 7> weekdays;
  std::array<double, 3> tint;  // offset from mid-gray per channel
};

std::array<double, 24> hour_profile(std::initializer_list<std::pair<int, double>> peaks,
                                    double floor = 0.05) {
  std::array<double, 24> p;
  p.fill(floor);
  for (const auto& [h, w] : peaks) p[h] += w;
  return normalized(p);
}

const std::array<CategorySignature, kNumCategories>& signatures() {
  static const auto sigs = [] {
    std::array<CategorySignature, kNumCategories> s;
    // Res: home hours, all days.
    s[0] = {hour_profile({{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}, {6, 1.5}, {7, 1.5},
                          {18, 1.5}, {19, 2}, {20, 2}, {21, 2}, {22, 1.5}, {23, 1}}),
            normalized<7>({1, 1, 1, 1, 1, 1.1, 1.1}),
            {40, -20, -20}};
    // Sch: class hours, weekdays.
    s[1] = {hour_profile({{8, 2}, {9, 2}, {10, 2}, {11, 2}, {12, 1}, {13, 2}, {14, 2}, {15, 2},
                          {16, 1.5}, {17, 1}}),
            normalized<7>({1, 1, 1, 1, 1, 0.1, 0.1}),
            {-20, 40, -20}};
    // Ind: shifts with commute peaks, weekdays.
    s[2] = {hour_profile({{6, 1}, {7, 2}, {8, 2.5}, {9, 1.5}, {10, 1.5}, {11, 1.5}, {13, 1.5},
                          {14, 1.5}, {15, 1.5}, {16, 2}, {17, 2.5}, {18, 1.5}, {19, 1}}),
            normalized<7>({1, 1, 1, 1, 1, 0.3, 0.2}),
            {-20, -20, 40}};
    // Rail: commute double peak, all days.
    s[3] = {hour_profile({{6, 1}, {7, 2.5}, {8, 3}, {9, 1.5}, {12, 1}, {16, 1.5}, {17, 2.5},
                          {18, 3}, {19, 2}, {20, 1}, {21, 1}, {22, 0.5}}),
            normalized<7>({1, 1, 1, 1, 1.2, 1.1, 1}),
            {40, 40, -20}};
    // Air: broad near-flat daytime, all days.
    s[4] = {hour_profile({{5, 1}, {6, 1}, {7, 1}, {8, 1}, {9, 1}, {10, 1}, {11, 1}, {12, 1},
                          {13, 1}, {14, 1}, {15, 1}, {16, 1}, {17, 1}, {18, 1}, {19, 1}, {20, 1},
                          {21, 1}, {22, 1}},
                         0.2),
            normalized<7>({1, 1, 1, 1, 1, 1, 1}),
            {40, -20, 40}};
    // Park: daylight, weekend heavy.
    s[5] = {hour_profile({{8, 1}, {9, 1.5}, {10, 2}, {11, 2}, {12, 1.5}, {13, 1.5}, {14, 2},
                          {15, 2}, {16, 2}, {17, 1.5}, {18, 1}}),
            normalized<7>({0.6, 0.6, 0.6, 0.6, 0.8, 2.5, 2.5}),
            {-20, 40, 40}};
    // Shop: late morning through evening, weekend lean.
    s[6] = {hour_profile({{10, 1}, {11, 1.5}, {12, 1.5}, {13, 1.5}, {14, 1.5}, {15, 1.5},
                          {16, 1.5}, {17, 2}, {18, 2.5}, {19, 2.5}, {20, 2.5}, {21, 2}, {22, 1}}),
            normalized<7>({0.8, 0.8, 0.8, 0.8, 1.2, 1.8, 1.8}),
            {55, 15, -30}};
    // Adm: office hours, weekdays only.
    s[7] = {hour_profile({{8, 1.5}, {9, 2.5}, {10, 2.5}, {11, 2}, {14, 2.5}, {15, 2.5}, {16, 2},
                          {17, 1}}),
            normalized<7>({1, 1, 1, 1, 1, 0.05, 0.05}),
            {-35, 10, 55}};
    // Hos: morning-heavy daytime, all days.
    s[8] = {hour_profile({{7, 1.5}, {8, 2.5}, {9, 3}, {10, 3}, {11, 2}, {14, 1.5}, {15, 1.5},
                          {16, 1}, {17, 0.5}, {18, 0.5}}),
            normalized<7>({1.1, 1.1, 1.1, 1.1, 1.1, 0.7, 0.7}),
            {15, 55, 15}};
    // Pull office-like and leisure-like categories toward their group mean:
    // their temporal profiles become hard to tell apart, so the community
    // structure behind f_A / f_G is what separates them.
    const auto blend_group = [&s](std::initializer_list<int> group, double toward_mean) {
      std::array<double, 24> mean_h{};
      std::array<double, 7> mean_w{};
      for (int c : group) {
        for (int i = 0; i < 24; ++i) mean_h[i] += s[c].hours[i] / group.size();
        for (int i = 0; i < 7; ++i) mean_w[i] += s[c].weekdays[i] / group.size();
      }
      for (int c : group) {
        for (int i = 0; i < 24; ++i) {
          s[c].hours[i] = toward_mean * mean_h[i] + (1.0 - toward_mean) * s[c].hours[i];
        }
        for (int i = 0; i < 7; ++i) {
          s[c].weekdays[i] = toward_mean * mean_w[i] + (1.0 - toward_mean) * s[c].weekdays[i];
        }
      }
    };
    blend_group({1, 2, 7, 8}, 0.92);  // Sch, Ind, Adm, Hos
    blend_group({5, 6}, 0.92);        // Park, Shop
    return s;
  }();
  return sigs;
}

Image make_region_image(int category, double noise, std::mt19937_64& rng) {
  const auto& tint = signatures()[category].tint;
  // Region-level color jitter keeps channel means overlapping between
  // categories, so the image branch stays the weakest of the three.
  std::array<double, 3> base;
  for (int c = 0; c < 3; ++c) {
    base[c] = 128.0 + tint[c] * (1.0 - noise) + next_gaussian(rng) * 30.0;
  }
  Image image;
  image.width = 100;
  image.height = 100;
  image.rgb.resize(100 * 100 * 3);
  for (std::size_t px = 0; px < static_cast<std::size_t>(100) * 100; ++px) {
    for (int c = 0; c < 3; ++c) {
      const double v = base[c] + next_gaussian(rng) * 45.0;
      image.rgb[px * 3 + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return image;
}

}  // namespace

void SynthConfig::validate() const {
  if (train_per_category < 1) throw std::invalid_argument("train_per_category must be >= 1");
  if (test_per_category < 0) throw std::invalid_argument("test_per_category must be >= 0");
  if (n_users < 1) throw std::invalid_argument("n_users must be >= 1");
  if (noise < 0.0 || noise > 1.0) throw std::invalid_argument("noise must be in [0, 1]");
}

void generate_dataset(const SynthConfig& config, const std::filesystem::path& out_root) {
  config.validate();
  std::filesystem::create_directories(out_root / "visits");
  std::filesystem::create_directories(out_root / "images");
  save_window(out_root, config.window);

  std::mt19937_64 user_rng(config.seed * 0x9e3779b97f4a7c15ULL + 1);
  // Each user belongs to 1-3 home categories; visitors of a region are drawn
  // from its category's community with probability 1 - noise.
  std::vector<std::vector<int>> user_homes(static_cast<std::size_t>(config.n_users));
  std::vector<std::vector<int>> users_by_cat(kNumCategories);
  for (int u = 0; u < config.n_users; ++u) {
    const int n_homes = 1 + next_below(user_rng, 3);
    auto& homes = user_homes[u];
    while (static_cast<int>(homes.size()) < n_homes) {
      const int c = next_below(user_rng, kNumCategories);
      if (std::find(homes.begin(), homes.end(), c) == homes.end()) homes.push_back(c);
    }
    for (int c : homes) users_by_cat[c].push_back(u);
  }

  std::ofstream manifest(out_root / "manifest.csv");
  if (!manifest) throw std::runtime_error("cannot write to " + out_root.string());
  manifest << "region_id,label,visit_path,image_path\n";
  std::ofstream truth(out_root / "truth.csv");
  truth << "region_id,label\n";

  const int weeks = config.window.weeks();
  std::uint64_t region_counter = 0;
  for (int cat = 0; cat < kNumCategories; ++cat) {
    const auto hour_p = mix_uniform(signatures()[cat].hours, config.noise);
    const auto weekday_p = mix_uniform(signatures()[cat].weekdays, config.noise);
    const int total = config.train_per_category + config.test_per_category;
    for (int r = 0; r < total; ++r) {
      const bool is_test = r >= config.train_per_category;
      std::string name(category_name(cat));
      std::transform(name.begin(), name.end(), name.begin(), ::tolower);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%s_%s_%03d", is_test ? "t" : "r", name.c_str(),
                    is_test ? r - config.train_per_category : r);
      const std::string region_id = buf;

      std::mt19937_64 rng(config.seed * 0x9e3779b97f4a7c15ULL + 100 + region_counter++);
      VisitLog log;
      log.region_id = region_id;
      const int n_visitors = 25 + next_below(rng, 16);
      for (int v = 0; v < n_visitors; ++v) {
        int user;
        if (next_unit(rng) < config.noise || users_by_cat[cat].empty()) {
          user = next_below(rng, config.n_users);
        } else {
          user = users_by_cat[cat][next_below(rng, static_cast<int>(users_by_cat[cat].size()))];
        }
        char uid[32];
        std::snprintf(uid, sizeof(uid), "U%05d", user);
        auto& events = log.visits[uid];
        const int n_events = 8 + next_below(rng, 25);
        for (int e = 0; e < n_events; ++e) {
          const int weekday = sample_discrete(weekday_p, rng);
          const int week = next_below(rng, weeks);
          const int day = std::min(week * 7 + weekday, config.window.num_days - 1);
          events.push_back({day, sample_discrete(hour_p, rng)});
        }
        std::sort(events.begin(), events.end());
        events.erase(std::unique(events.begin(), events.end()), events.end());
      }

      const std::string visit_path = "visits/" + region_id + ".txt";
      const std::string image_path = "images/" + region_id + ".png";
      std::ofstream visit_out(out_root / visit_path);
      visit_out << serialize_visit_log(log, config.window);
      write_png(out_root / image_path, make_region_image(cat, config.noise, rng));

      manifest << region_id << "," << (is_test ? "" : std::string(category_name(cat))) << ","
               << visit_path << "," << image_path << "\n";
      if (is_test) truth << region_id << "," << category_name(cat) << "\n";
    }
  }
}

}  // namespace urfc
