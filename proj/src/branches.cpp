#include "urfc/branches.hpp"

#include "urfc/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <png.h>

namespace urfc {

Image read_png(const std::filesystem::path& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("cannot open image: " + path.string());
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  Image image;
  if (png_image_begin_read_from_stdio(&png, fp)) {
    png.format = PNG_FORMAT_RGB;
    image.width = static_cast<int>(png.width);
    image.height = static_cast<int>(png.height);
    image.rgb.resize(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, image.rgb.data(), 0, nullptr)) {
      std::fclose(fp);
      throw std::runtime_error("undecodable PNG: " + path.string() + ": " + png.message);
    }
  } else {
    std::fclose(fp);
    throw std::runtime_error("undecodable PNG: " + path.string() + ": " + png.message);
  }
  std::fclose(fp);
  return image;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.rgb.data(), 0, nullptr)) {
    throw std::runtime_error("cannot write PNG: " + path.string() + ": " + png.message);
  }
}

std::vector<double> extract_image_feature(const Image& image) {
  if (image.width != 100 || image.height != 100 ||
      image.rgb.size() != static_cast<std::size_t>(100) * 100 * 3) {
    throw std::invalid_argument("image must be 100x100 RGB, got " + std::to_string(image.width) +
                                "x" + std::to_string(image.height));
  }
  const int w = image.width, h = image.height;
  const double n_pixels = static_cast<double>(w) * h;

  std::vector<double> f(kImageDim, 0.0);
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0, sq = 0.0;
    std::array<double, 8> hist{};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = image.channel(x, y, c);
        sum += v;
        sq += v * v;
        ++hist[static_cast<int>(v) / 32];
      }
    }
    const double mean = sum / n_pixels;
    f[c * 2] = mean;
    f[c * 2 + 1] = std::sqrt(std::max(0.0, sq / n_pixels - mean * mean));
    for (int b = 0; b < 8; ++b) f[6 + c * 8 + b] = hist[b] / n_pixels;
  }

  auto gray = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return 0.299 * image.channel(x, y, 0) + 0.587 * image.channel(x, y, 1) +
           0.114 * image.channel(x, y, 2);
  };
  double grad_sum = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (gray(x + 1, y) - gray(x - 1, y)) / 2.0;
      const double gy = (gray(x, y + 1) - gray(x, y - 1)) / 2.0;
      grad_sum += std::sqrt(gx * gx + gy * gy);
    }
  }
  f[30] = grad_sum / n_pixels;
  return f;
}

std::vector<double> extract_temporal_feature(const TemporalTensor& tensor) {
  std::vector<double> f(kTemporalDim, 0.0);
  const double total = static_cast<double>(tensor.total());
  for (int k = 0; k < 7; ++k) {
    for (int h = 0; h < 24; ++h) {
      std::int64_t sum = 0;
      for (int w = 0; w < tensor.weeks; ++w) sum += tensor.at(w, k, h);
      f[k * 24 + h] = static_cast<double>(sum) / tensor.weeks;
      if (total > 0) {
        f[168 + h] += static_cast<double>(sum) / total;
        f[192 + k] += static_cast<double>(sum) / total;
      }
    }
  }
  return f;
}

int branch_dim(BranchKind kind) {
  switch (kind) {
    case BranchKind::Image: return kImageDim;
    case BranchKind::Temporal: return kTemporalDim;
    case BranchKind::Multi: return kMultiDim;
  }
  throw std::logic_error("bad branch kind");
}

const char* branch_name(BranchKind kind) {
  switch (kind) {
    case BranchKind::Image: return "I";
    case BranchKind::Temporal: return "T";
    case BranchKind::Multi: return "M";
  }
  throw std::logic_error("bad branch kind");
}

BranchModel train_branch(BranchKind kind, const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const GbdtParams& params) {
  const int dim = branch_dim(kind);
  for (const auto& row : features) {
    if (static_cast<int>(row.size()) != dim) {
      throw std::invalid_argument(std::string("branch ") + branch_name(kind) + " expects " +
                                  std::to_string(dim) + "-dim features, got " +
                                  std::to_string(row.size()));
    }
  }
  return {kind, fit_gbdt(features, labels, kNumCategories, params)};
}

std::vector<double> predict_branch(const BranchModel& model, const std::vector<double>& feature) {
  if (static_cast<int>(feature.size()) != branch_dim(model.kind)) {
    throw std::invalid_argument(std::string("branch ") + branch_name(model.kind) + " expects " +
                                std::to_string(branch_dim(model.kind)) + "-dim features, got " +
                                std::to_string(feature.size()));
  }
  return model.model.predict_proba(feature);
}

}  // namespace urfc
