#include "urfc/pipeline.hpp"

namespace urfc {

LoadedDataset load_and_featurize(const std::filesystem::path& root,
                                 const std::filesystem::path& manifest, int k_folds,
                                 std::uint64_t seed) {
  LoadedDataset data;
  data.index = load_dataset(root, manifest, k_folds, seed);
  const int n = static_cast<int>(data.index.records.size());
  data.logs.resize(n);
  data.image_features.resize(n);
  data.temporal_features.resize(n);
  std::vector<std::string> errors(n);
  parallel_for(n, [&](int i) {
    const auto& rec = data.index.records[i];
    try {
      data.logs[i] =
          parse_visit_file(data.index.visit_path(rec), data.index.window, rec.region_id);
      data.temporal_features[i] =
          extract_temporal_feature(build_temporal_tensor(data.logs[i], data.index.window));
      data.image_features[i] = extract_image_feature(read_png(data.index.image_path(rec)));
    } catch (const std::exception& e) {
      errors[i] = "region " + rec.region_id + ": " + e.what();
    }
  });
  for (const auto& err : errors) {
    if (!err.empty()) throw std::runtime_error(err);
  }
  return data;
}

TrainInputs training_inputs(const LoadedDataset& data) {
  TrainInputs inputs;
  for (std::size_t i = 0; i < data.index.records.size(); ++i) {
    const auto& rec = data.index.records[i];
    if (!rec.labeled()) continue;
    inputs.region_ids.push_back(rec.region_id);
    inputs.labels.push_back(rec.label);
    inputs.folds.push_back(rec.fold);
    inputs.logs.push_back(&data.logs[i]);
    inputs.image_features.push_back(data.image_features[i]);
    inputs.temporal_features.push_back(data.temporal_features[i]);
  }
  return inputs;
}

}  // namespace urfc
