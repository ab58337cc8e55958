#include "urfc/fusion.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

namespace urfc {

namespace {

std::vector<double> multi_feature(const VisitLog& log, const std::vector<double>& f_s,
                                  const UserIndex& index, const StatStore& stat_store) {
  return concat_multidim(f_s, extract_user_activity(log, index, log.region_id),
                         extract_region_graph(log, index, stat_store, log.region_id));
}

void check_classes(const std::vector<int>& labels, const std::vector<std::size_t>& rows, int fold,
                   bool strict) {
  std::set<int> present;
  for (auto i : rows) present.insert(labels[i]);
  for (int c = 0; c < kNumCategories; ++c) {
    if (!present.count(c)) {
      const std::string msg = "fold " + std::to_string(fold) + " training set has no class " +
                              std::string(category_name(c));
      if (strict) throw std::runtime_error(msg);
      std::cerr << "warning: " << msg << "\n";
    }
  }
}

}  // namespace

FusedModel train_fused(const TrainInputs& inputs, const GbdtParams& branch_params,
                       const GbdtParams& fusion_params, int k_folds, bool strict_classes,
                       std::vector<std::vector<double>>* oof_out) {
  const std::size_t n = inputs.region_ids.size();
  if (n == 0) throw std::invalid_argument("no training regions");
  if (k_folds < 2) throw std::invalid_argument("k_folds must be >= 2");
  if (inputs.labels.size() != n || inputs.folds.size() != n || inputs.logs.size() != n ||
      inputs.image_features.size() != n || inputs.temporal_features.size() != n) {
    throw std::invalid_argument("train inputs are not aligned");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (inputs.folds[i] < 0 || inputs.folds[i] >= k_folds) {
      throw std::invalid_argument("fold id out of range for region " + inputs.region_ids[i]);
    }
  }

  // f_S is label-free and fold-invariant; compute once.
  std::vector<std::vector<double>> stats(n);
  parallel_for(static_cast<int>(n),
               [&](int i) { stats[i] = extract_statistical(*inputs.logs[i]); });

  std::vector<std::vector<double>> oof(n, std::vector<double>(kFusionDim, 0.0));

  for (int fold = 0; fold < k_folds; ++fold) {
    std::vector<std::size_t> train_rows, val_rows;
    for (std::size_t i = 0; i < n; ++i) {
      (inputs.folds[i] == fold ? val_rows : train_rows).push_back(i);
    }
    if (val_rows.empty()) continue;
    if (train_rows.empty()) {
      throw std::runtime_error("fold " + std::to_string(fold) + " leaves no training data");
    }
    check_classes(inputs.labels, train_rows, fold, strict_classes);

    // Label-dependent context from the training folds only.
    std::vector<std::pair<const VisitLog*, int>> labeled;
    StatStore stat_store;
    for (auto i : train_rows) {
      labeled.emplace_back(inputs.logs[i], inputs.labels[i]);
      stat_store[inputs.region_ids[i]] = stats[i];
    }
    const UserIndex index = build_user_index(labeled);

    std::vector<std::vector<double>> x_image, x_temporal, x_multi;
    std::vector<int> y;
    for (auto i : train_rows) {
      x_image.push_back(inputs.image_features[i]);
      x_temporal.push_back(inputs.temporal_features[i]);
      x_multi.push_back(multi_feature(*inputs.logs[i], stats[i], index, stat_store));
      y.push_back(inputs.labels[i]);
    }
    const BranchModel b_image = train_branch(BranchKind::Image, x_image, y, branch_params);
    const BranchModel b_temporal = train_branch(BranchKind::Temporal, x_temporal, y, branch_params);
    const BranchModel b_multi = train_branch(BranchKind::Multi, x_multi, y, branch_params);

    for (auto i : val_rows) {
      const auto p_i = predict_branch(b_image, inputs.image_features[i]);
      const auto p_t = predict_branch(b_temporal, inputs.temporal_features[i]);
      const auto p_m = predict_branch(
          b_multi, multi_feature(*inputs.logs[i], stats[i], index, stat_store));
      auto& row = oof[i];
      std::copy(p_i.begin(), p_i.end(), row.begin());
      std::copy(p_t.begin(), p_t.end(), row.begin() + kNumCategories);
      std::copy(p_m.begin(), p_m.end(), row.begin() + 2 * kNumCategories);
    }
  }

  FusedModel model;
  model.fusion = fit_gbdt(oof, inputs.labels, kNumCategories, fusion_params);
  if (oof_out) *oof_out = oof;

  // Final branch models on all training data, with the full-data index.
  std::vector<std::pair<const VisitLog*, int>> labeled_all;
  for (std::size_t i = 0; i < n; ++i) {
    labeled_all.emplace_back(inputs.logs[i], inputs.labels[i]);
    model.stat_store[inputs.region_ids[i]] = stats[i];
  }
  model.index = build_user_index(labeled_all);

  std::vector<std::vector<double>> x_multi(n);
  parallel_for(static_cast<int>(n), [&](int i) {
    x_multi[i] = multi_feature(*inputs.logs[i], stats[i], model.index, model.stat_store);
  });
  model.image = train_branch(BranchKind::Image, inputs.image_features, inputs.labels, branch_params);
  model.temporal =
      train_branch(BranchKind::Temporal, inputs.temporal_features, inputs.labels, branch_params);
  model.multi = train_branch(BranchKind::Multi, x_multi, inputs.labels, branch_params);
  model.k_folds = k_folds;
  model.seed = branch_params.seed;
  return model;
}

FusedPrediction predict_fused(const FusedModel& model, const VisitLog& log,
                              const std::vector<double>& image_feature,
                              const std::vector<double>& temporal_feature) {
  FusedPrediction out;
  out.p_image = predict_branch(model.image, image_feature);
  out.p_temporal = predict_branch(model.temporal, temporal_feature);
  out.p_multi = predict_branch(
      model.multi,
      multi_feature(log, extract_statistical(log), model.index, model.stat_store));

  std::vector<double> stacked;
  stacked.reserve(kFusionDim);
  stacked.insert(stacked.end(), out.p_image.begin(), out.p_image.end());
  stacked.insert(stacked.end(), out.p_temporal.begin(), out.p_temporal.end());
  stacked.insert(stacked.end(), out.p_multi.begin(), out.p_multi.end());
  out.fused = model.fusion.predict_proba(stacked);
  out.label = 0;
  for (int c = 1; c < kNumCategories; ++c) {
    if (out.fused[c] > out.fused[out.label]) out.label = c;
  }
  return out;
}

namespace {
constexpr const char* kFusedMagic = "urfc-fused";
constexpr int kFusedVersion = 1;
}  // namespace

void save_fused(const FusedModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  model.image.model.save(dir / "branch_i.json");
  model.temporal.model.save(dir / "branch_t.json");
  model.multi.model.save(dir / "branch_m.json");
  model.fusion.save(dir / "fusion.json");

  nlohmann::json ctx;
  ctx["window"] = {{"start_date", format_iso_date(model.window.start)},
                   {"num_days", model.window.num_days}};
  ctx["region_labels"] = model.index.region_labels;
  ctx["stat_store"] = model.stat_store;
  nlohmann::json users = nlohmann::json::object();
  for (const auto& [user, regions] : model.index.users) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : regions) {
      list.push_back({s.region_id, s.label, s.events, s.distinct_days, s.hour_sum,
                      s.weekend_events});
    }
    users[user] = std::move(list);
  }
  ctx["users"] = std::move(users);
  std::ofstream ctx_out(dir / "context.json");
  ctx_out << ctx.dump() << "\n";

  nlohmann::json manifest;
  manifest["format"] = kFusedMagic;
  manifest["version"] = kFusedVersion;
  manifest["layout_version"] = model.layout_version;
  manifest["k_folds"] = model.k_folds;
  manifest["seed"] = model.seed;
  manifest["branch_order"] = {"I", "T", "M"};
  nlohmann::json cats = nlohmann::json::array();
  for (int c = 0; c < kNumCategories; ++c) cats.push_back(std::string(category_name(c)));
  manifest["categories"] = std::move(cats);
  manifest["files"] = {"branch_i.json", "branch_t.json", "branch_m.json", "fusion.json",
                       "context.json"};
  std::ofstream man_out(dir / "manifest.json");
  man_out << manifest.dump(2) << "\n";
}

FusedModel load_fused(const std::filesystem::path& dir) {
  std::ifstream man_in(dir / "manifest.json");
  if (!man_in) throw std::runtime_error("cannot open model manifest in " + dir.string());
  nlohmann::json manifest;
  man_in >> manifest;
  if (manifest.at("format") != kFusedMagic) throw std::runtime_error("not a fused model directory");
  if (manifest.at("version").get<int>() != kFusedVersion) {
    throw std::runtime_error("unsupported fused model version");
  }

  FusedModel model;
  model.k_folds = manifest.at("k_folds").get<int>();
  model.seed = manifest.at("seed").get<std::uint64_t>();
  model.layout_version = manifest.at("layout_version").get<int>();
  model.image = {BranchKind::Image, GbdtModel::load(dir / "branch_i.json")};
  model.temporal = {BranchKind::Temporal, GbdtModel::load(dir / "branch_t.json")};
  model.multi = {BranchKind::Multi, GbdtModel::load(dir / "branch_m.json")};
  model.fusion = GbdtModel::load(dir / "fusion.json");

  std::ifstream ctx_in(dir / "context.json");
  if (!ctx_in) throw std::runtime_error("cannot open model context in " + dir.string());
  nlohmann::json ctx;
  ctx_in >> ctx;
  model.window.start = parse_iso_date(ctx.at("window").at("start_date").get<std::string>());
  model.window.num_days = ctx.at("window").at("num_days").get<int>();
  model.index.region_labels = ctx.at("region_labels").get<std::map<std::string, int>>();
  model.stat_store = ctx.at("stat_store").get<StatStore>();
  for (const auto& [user, list] : ctx.at("users").items()) {
    auto& regions = model.index.users[user];
    for (const auto& item : list) {
      RegionVisitSummary s;
      s.region_id = item.at(0).get<std::string>();
      s.label = item.at(1).get<int>();
      s.events = item.at(2).get<int>();
      s.distinct_days = item.at(3).get<int>();
      s.hour_sum = item.at(4).get<long>();
      s.weekend_events = item.at(5).get<int>();
      regions.push_back(std::move(s));
    }
  }
  return model;
}

}  // namespace urfc
