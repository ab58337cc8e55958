#pragma once

#include <filesystem>
#include <vector>

#include "urfc/fusion.hpp"
#include "urfc/ingest.hpp"

namespace urfc {

// A dataset pulled into memory with per-region branch features, aligned with
// index.records.
struct LoadedDataset {
  DatasetIndex index;
  std::vector<VisitLog> logs;
  std::vector<std::vector<double>> image_features;
  std::vector<std::vector<double>> temporal_features;
};

LoadedDataset load_and_featurize(const std::filesystem::path& root,
                                 const std::filesystem::path& manifest, int k_folds,
                                 std::uint64_t seed);

// Views over the labeled records of a loaded dataset.
TrainInputs training_inputs(const LoadedDataset& data);

}  // namespace urfc
