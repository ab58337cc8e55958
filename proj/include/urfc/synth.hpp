#pragma once

#include <cstdint>
#include <filesystem>

#include "urfc/core.hpp"

namespace urfc {

// Synthetic stand-in for the (proprietary) competition data. Regions draw
// visitors from per-category user communities and events from per-category
// hour/weekday signatures; images are category-tinted noise rasters.
// noise = 0 keeps the full signal, noise = 1 flattens signatures, visitor
// communities and image tint to uniform.
struct SynthConfig {
  int train_per_category = 100;
  int test_per_category = 25;
  int n_users = 2000;
  CalendarWindow window;
  double noise = 0.3;
  std::uint64_t seed = 42;

  void validate() const;
};

// Writes manifest.csv, truth.csv (labels of the held-out test regions),
// window.json, visits/<region_id>.txt and images/<region_id>.png.
// Deterministic: the same config yields a byte-identical tree.
void generate_dataset(const SynthConfig& config, const std::filesystem::path& out_root);

}  // namespace urfc
