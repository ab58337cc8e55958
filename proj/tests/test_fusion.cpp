#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "urfc/fusion.hpp"

using namespace urfc;

namespace {

struct Fixture {
  std::vector<VisitLog> logs;     // train logs (stable storage)
  std::vector<VisitLog> test_logs;
  TrainInputs inputs;
  std::vector<int> test_labels;
  std::vector<std::vector<double>> test_image, test_temporal;
};

// Each category has a beacon user visiting all of its training regions, so
// f_A / f_G are near one-hot in category space; image and temporal features
// are constant (uninformative).
Fixture beacon_fixture(int train_per_cat, int test_per_cat, int k_folds) {
  Fixture fx;
  const std::vector<double> flat_image(kImageDim, 0.5);
  const std::vector<double> flat_temporal(kTemporalDim, 0.25);
  int counter = 0;
  for (int c = 0; c < kNumCategories; ++c) {
    for (int r = 0; r < train_per_cat + test_per_cat; ++r) {
      VisitLog log;
      log.region_id = (r < train_per_cat ? "r" : "t") + std::to_string(c) + "_" + std::to_string(r);
      log.visits["B" + std::to_string(c)] = {{0, 8}, {1, 9}, {2, 10}};
      log.visits["solo" + std::to_string(counter)] = {{3, 11}};
      ++counter;
      if (r < train_per_cat) {
        fx.logs.push_back(std::move(log));
        fx.inputs.region_ids.push_back(fx.logs.back().region_id);
        fx.inputs.labels.push_back(c);
        fx.inputs.folds.push_back((r + c) % k_folds);
        fx.inputs.image_features.push_back(flat_image);
        fx.inputs.temporal_features.push_back(flat_temporal);
      } else {
        fx.test_logs.push_back(std::move(log));
        fx.test_labels.push_back(c);
        fx.test_image.push_back(flat_image);
        fx.test_temporal.push_back(flat_temporal);
      }
    }
  }
  for (const auto& log : fx.logs) fx.inputs.logs.push_back(&log);
  return fx;
}

GbdtParams fast_params() {
  GbdtParams p;
  p.n_rounds = 15;
  return p;
}

}  // namespace

TEST_CASE("oracle M branch with uninformative I/T dominates held-out accuracy") {
  auto fx = beacon_fixture(20, 5, 5);
  const auto model = train_fused(fx.inputs, fast_params(), fast_params(), 5);
  int correct = 0;
  for (std::size_t i = 0; i < fx.test_logs.size(); ++i) {
    const auto pred = predict_fused(model, fx.test_logs[i], fx.test_image[i], fx.test_temporal[i]);
    correct += pred.label == fx.test_labels[i];
    double sum = 0.0;
    for (double v : pred.fused) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
  CHECK(static_cast<double>(correct) / fx.test_logs.size() >= 0.95);
}

TEST_CASE("no information in, chance accuracy out") {
  // Identical logs everywhere: every branch sees constant features.
  auto fx = beacon_fixture(10, 3, 5);
  for (auto& log : fx.logs) {
    log.visits.clear();
    log.visits["shared"] = {{0, 8}};
  }
  for (auto& log : fx.test_logs) {
    log.visits.clear();
    log.visits["shared"] = {{0, 8}};
  }
  const auto model = train_fused(fx.inputs, fast_params(), fast_params(), 5);
  int correct = 0;
  for (std::size_t i = 0; i < fx.test_logs.size(); ++i) {
    const auto pred = predict_fused(model, fx.test_logs[i], fx.test_image[i], fx.test_temporal[i]);
    correct += pred.label == fx.test_labels[i];
  }
  const double acc = static_cast<double>(correct) / fx.test_logs.size();
  CHECK(acc <= 1.0 / 9 + 0.05);  // majority-class rate on balanced labels
}

TEST_CASE("leave-one-out stacking completes") {
  auto fx = beacon_fixture(2, 0, 18);  // 18 training regions, k = N
  for (std::size_t i = 0; i < fx.inputs.folds.size(); ++i) {
    fx.inputs.folds[i] = static_cast<int>(i);
  }
  std::vector<std::vector<double>> oof;
  GbdtParams p = fast_params();
  p.n_rounds = 3;
  p.min_samples_leaf = 1;
  train_fused(fx.inputs, p, p, 18, false, &oof);
  REQUIRE(oof.size() == 18);
  for (const auto& row : oof) {
    REQUIRE(row.size() == static_cast<std::size_t>(kFusionDim));
    for (int b = 0; b < 3; ++b) {
      double sum = 0.0;
      for (int c = 0; c < kNumCategories; ++c) sum += row[b * kNumCategories + c];
      CHECK(sum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("poisoning a held-out fold's labels leaves its OOF rows bit-identical") {
  auto fx = beacon_fixture(10, 0, 5);
  std::vector<std::vector<double>> oof_clean;
  train_fused(fx.inputs, fast_params(), fast_params(), 5, false, &oof_clean);

  const int poisoned_fold = 2;
  auto poisoned = fx.inputs;
  for (std::size_t i = 0; i < poisoned.labels.size(); ++i) {
    if (poisoned.folds[i] == poisoned_fold) {
      poisoned.labels[i] = (poisoned.labels[i] + 4) % kNumCategories;
    }
  }
  std::vector<std::vector<double>> oof_poisoned;
  train_fused(poisoned, fast_params(), fast_params(), 5, false, &oof_poisoned);

  for (std::size_t i = 0; i < oof_clean.size(); ++i) {
    if (fx.inputs.folds[i] != poisoned_fold) continue;
    CHECK(oof_clean[i] == oof_poisoned[i]);  // bitwise
  }
}

TEST_CASE("strict class check") {
  auto fx = beacon_fixture(2, 0, 5);
  // Concentrate one category in a single fold so other folds miss it.
  for (std::size_t i = 0; i < fx.inputs.labels.size(); ++i) {
    if (fx.inputs.labels[i] == 0) fx.inputs.folds[i] = 0;
  }
  GbdtParams p = fast_params();
  p.n_rounds = 2;
  p.min_samples_leaf = 1;
  CHECK_THROWS_AS(train_fused(fx.inputs, p, p, 5, /*strict_classes=*/true),
                  std::runtime_error);
  CHECK_NOTHROW(train_fused(fx.inputs, p, p, 5, /*strict_classes=*/false));
}

TEST_CASE("fusion head preserves unanimous votes and accepts any probability emitter") {
  // Stub branches: arbitrary feature -> probability-vector mappings.
  auto stub = [](int cls, double confidence) {
    std::vector<double> p(kNumCategories, (1.0 - confidence) / (kNumCategories - 1));
    p[cls] = confidence;
    return p;
  };
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 450; ++i) {
    const int cls = i % kNumCategories;
    std::vector<double> row;
    for (int b = 0; b < 3; ++b) {
      const auto p = stub(cls, 0.7 + 0.25 * (rng() % 100) / 100.0);
      row.insert(row.end(), p.begin(), p.end());
    }
    X.push_back(std::move(row));
    y.push_back(cls);
  }
  GbdtParams params;
  params.n_rounds = 30;
  const auto head = fit_gbdt(X, y, kNumCategories, params);

  for (int c = 0; c < kNumCategories; ++c) {
    std::vector<double> row;
    for (int b = 0; b < 3; ++b) {
      const auto p = stub(c, 1.0);  // exact one-hot agreement
      row.insert(row.end(), p.begin(), p.end());
    }
    CHECK(head.predict_label(row) == c);
  }
}

TEST_CASE("predict_fused is deterministic and save/load preserves predictions") {
  namespace fs = std::filesystem;
  auto fx = beacon_fixture(6, 2, 3);
  GbdtParams p = fast_params();
  p.n_rounds = 5;
  auto model = train_fused(fx.inputs, p, p, 3);
  model.window = CalendarWindow{};

  const auto a = predict_fused(model, fx.test_logs[0], fx.test_image[0], fx.test_temporal[0]);
  const auto b = predict_fused(model, fx.test_logs[0], fx.test_image[0], fx.test_temporal[0]);
  CHECK(a.label == b.label);
  CHECK(a.fused == b.fused);
  CHECK(a.p_image == b.p_image);
  CHECK(a.p_multi == b.p_multi);

  const auto dir = fs::temp_directory_path() / "urfc_fused_test";
  fs::remove_all(dir);
  save_fused(model, dir);
  const auto loaded = load_fused(dir);
  for (std::size_t i = 0; i < fx.test_logs.size(); ++i) {
    const auto x = predict_fused(model, fx.test_logs[i], fx.test_image[i], fx.test_temporal[i]);
    const auto z = predict_fused(loaded, fx.test_logs[i], fx.test_image[i], fx.test_temporal[i]);
    CHECK(x.label == z.label);
    CHECK(x.fused == z.fused);
  }
  fs::remove_all(dir);
}
