#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "urfc/branches.hpp"
#include "urfc/core.hpp"
#include "urfc/features.hpp"
#include "urfc/gbdt.hpp"

namespace urfc {

inline constexpr int kFusionDim = 3 * kNumCategories;  // branch order I, T, M

// Per-region training inputs, aligned across all vectors.
struct TrainInputs {
  std::vector<std::string> region_ids;
  std::vector<int> labels;
  std::vector<int> folds;
  std::vector<const VisitLog*> logs;
  std::vector<std::vector<double>> image_features;     // 31-dim each
  std::vector<std::vector<double>> temporal_features;  // 199-dim each
};

struct FusedModel {
  BranchModel image;
  BranchModel temporal;
  BranchModel multi;
  GbdtModel fusion;  // 27-dim input, order I | T | M
  // Feature context needed at inference: the full-data user index plus the
  // statistical features of every training region.
  UserIndex index;
  StatStore stat_store;
  CalendarWindow window;
  int k_folds = 5;
  std::uint64_t seed = 0;
  int layout_version = 1;
};

// Stacked decision fusion: per fold, branch models trained on the other folds
// predict that fold, producing an N x 27 out-of-fold matrix that trains the
// fusion head; final branch models are retrained on everything. The user
// index behind f_A / f_G is rebuilt per fold from the training folds only.
// With strict_classes set, a fold whose training side misses a class errors
// out; otherwise a warning goes to stderr.
FusedModel train_fused(const TrainInputs& inputs, const GbdtParams& branch_params,
                       const GbdtParams& fusion_params, int k_folds, bool strict_classes = false,
                       std::vector<std::vector<double>>* oof_out = nullptr);

struct FusedPrediction {
  int label = 0;
  std::vector<double> fused;       // 9
  std::vector<double> p_image;     // 9
  std::vector<double> p_temporal;  // 9
  std::vector<double> p_multi;     // 9
};

FusedPrediction predict_fused(const FusedModel& model, const VisitLog& log,
                              const std::vector<double>& image_feature,
                              const std::vector<double>& temporal_feature);

// On-disk layout: branch_i.json, branch_t.json, branch_m.json, fusion.json,
// context.json (user index + stat store + window), manifest.json (metadata).
void save_fused(const FusedModel& model, const std::filesystem::path& dir);
FusedModel load_fused(const std::filesystem::path& dir);

}  // namespace urfc
