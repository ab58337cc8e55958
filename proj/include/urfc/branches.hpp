#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "urfc/core.hpp"
#include "urfc/gbdt.hpp"

namespace urfc {

inline constexpr int kImageDim = 31;
inline constexpr int kTemporalDim = 199;

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  std::uint8_t channel(int x, int y, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

// 31 dims: per-channel mean and population std (6), per-channel 8-bin
// intensity histogram (24), mean gradient magnitude of the Rec. 601
// grayscale via central differences with replicated borders (1).
// Requires exactly 100x100 RGB.
std::vector<double> extract_image_feature(const Image& image);

// 199 dims: week-averaged 7x24 day-hour matrix (168), normalized hour
// marginal (24), normalized weekday marginal (7); zero tensor -> zeros.
std::vector<double> extract_temporal_feature(const TemporalTensor& tensor);

enum class BranchKind { Image, Temporal, Multi };

int branch_dim(BranchKind kind);
const char* branch_name(BranchKind kind);

struct BranchModel {
  BranchKind kind = BranchKind::Multi;
  GbdtModel model;
};

BranchModel train_branch(BranchKind kind, const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const GbdtParams& params);
std::vector<double> predict_branch(const BranchModel& model, const std::vector<double>& feature);

}  // namespace urfc
