#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "urfc/metrics.hpp"
#include "urfc/pipeline.hpp"
#include "urfc/synth.hpp"

namespace {

using namespace urfc;

struct CommonOpts {
  std::string root;
  std::string manifest;
  int folds = 5;
  std::uint64_t seed = 42;
  int threads = 1;
};

void add_dataset_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--root", opts.root, "dataset root directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--manifest", opts.manifest, "manifest CSV (default <root>/manifest.csv)");
  cmd->add_option("--folds", opts.folds, "number of cross-validation folds")->check(CLI::Range(2, 10000));
  cmd->add_option("--seed", opts.seed, "root random seed");
  cmd->add_option("--threads", opts.threads, "maximum worker threads")->check(CLI::PositiveNumber);
}

std::string manifest_path(const CommonOpts& opts) {
  return opts.manifest.empty() ? opts.root + "/manifest.csv" : opts.manifest;
}

void add_gbdt_options(CLI::App* cmd, GbdtParams& params) {
  cmd->add_option("--rounds", params.n_rounds, "boosting rounds")->check(CLI::PositiveNumber);
  cmd->add_option("--learning-rate", params.learning_rate, "shrinkage per round");
  cmd->add_option("--max-depth", params.max_depth, "maximum tree depth");
  cmd->add_option("--min-leaf", params.min_samples_leaf, "minimum samples per leaf");
  cmd->add_option("--subsample", params.subsample, "row subsample fraction per round");
}

int run_synth(const SynthConfig& config, const std::string& out) {
  generate_dataset(config, out);
  std::cout << "wrote synthetic dataset to " << out << "\n";
  return 0;
}

int run_ingest(const CommonOpts& opts) {
  const auto data = load_and_featurize(opts.root, manifest_path(opts), opts.folds, opts.seed);
  std::size_t events = 0, labeled = 0;
  for (std::size_t i = 0; i < data.logs.size(); ++i) {
    events += data.logs[i].total_events();
    if (data.index.records[i].labeled()) ++labeled;
  }
  std::cout << "regions: " << data.logs.size() << " (" << labeled << " labeled)\n"
            << "visit events: " << events << "\n"
            << "window: " << format_iso_date(data.index.window.start) << " + "
            << data.index.window.num_days << " days\n";
  return 0;
}

int run_features(const CommonOpts& opts, const std::string& only, const std::string& out,
                 bool binary) {
  const auto data = load_and_featurize(opts.root, manifest_path(opts), opts.folds, opts.seed);
  const auto train_idx = data.index.training_indices();

  UserIndex index;
  StatStore stat_store;
  std::vector<std::vector<double>> stats(data.logs.size());
  for (std::size_t i = 0; i < data.logs.size(); ++i) stats[i] = extract_statistical(data.logs[i]);
  if (only == "activity" || only == "graph" || only == "multi") {
    std::vector<std::pair<const VisitLog*, int>> labeled;
    for (auto i : train_idx) {
      labeled.emplace_back(&data.logs[i], data.index.records[i].label);
      stat_store[data.index.records[i].region_id] = stats[i];
    }
    index = build_user_index(labeled);
  }

  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < data.logs.size(); ++i) {
    const auto& rec = data.index.records[i];
    ids.push_back(rec.region_id);
    if (only == "stat") {
      rows.push_back(stats[i]);
    } else if (only == "activity") {
      rows.push_back(extract_user_activity(data.logs[i], index, rec.region_id));
    } else if (only == "graph") {
      rows.push_back(extract_region_graph(data.logs[i], index, stat_store, rec.region_id));
    } else if (only == "multi") {
      rows.push_back(concat_multidim(
          stats[i], extract_user_activity(data.logs[i], index, rec.region_id),
          extract_region_graph(data.logs[i], index, stat_store, rec.region_id)));
    } else if (only == "temporal") {
      rows.push_back(data.temporal_features[i]);
    } else if (only == "image") {
      rows.push_back(data.image_features[i]);
    }
  }
  if (binary) {
    write_features_binary(out, ids, rows);
  } else {
    write_features_csv(out, ids, rows);
  }
  std::cout << "wrote " << rows.size() << " x " << (rows.empty() ? 0 : rows[0].size())
            << " feature matrix to " << out << "\n";
  return 0;
}

int run_train(const CommonOpts& opts, const GbdtParams& params, const std::string& model_dir,
              bool strict_classes) {
  auto data = load_and_featurize(opts.root, manifest_path(opts), opts.folds, opts.seed);
  const auto inputs = training_inputs(data);
  GbdtParams fusion_params = params;
  fusion_params.seed = params.seed + 1;
  auto model = train_fused(inputs, params, fusion_params, opts.folds, strict_classes);
  model.window = data.index.window;

  // Out-of-fold accuracy of the fusion head's own training matrix is not a
  // validation number; report per-branch OOF accuracy instead.
  save_fused(model, model_dir);
  std::cout << "trained fused model on " << inputs.region_ids.size() << " regions, saved to "
            << model_dir << "\n";
  return 0;
}

int run_predict(const CommonOpts& opts, const std::string& model_dir, const std::string& out,
                bool all_regions) {
  const auto model = load_fused(model_dir);
  const auto data = load_and_featurize(opts.root, manifest_path(opts), opts.folds, opts.seed);

  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot write " + out);
  csv << "region_id,label";
  for (const char* prefix : {"p", "i_p", "t_p", "m_p"}) {
    for (int c = 0; c < kNumCategories; ++c) csv << "," << prefix << c;
  }
  csv << "\n";
  csv.precision(17);

  std::size_t count = 0;
  for (std::size_t i = 0; i < data.logs.size(); ++i) {
    const auto& rec = data.index.records[i];
    if (!all_regions && rec.labeled()) continue;
    const auto pred =
        predict_fused(model, data.logs[i], data.image_features[i], data.temporal_features[i]);
    csv << rec.region_id << "," << category_name(pred.label);
    for (const auto* vec : {&pred.fused, &pred.p_image, &pred.p_temporal, &pred.p_multi}) {
      for (double v : *vec) csv << "," << v;
    }
    csv << "\n";
    ++count;
  }
  std::cout << "wrote " << count << " predictions to " << out << "\n";
  return 0;
}

std::map<std::string, std::string> read_label_csv(const std::string& path,
                                                  const std::string& label_col) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    header.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  std::size_t label_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_col) label_idx = i;
  }
  if (header.empty() || header[0] != "region_id" || label_idx == header.size()) {
    throw std::runtime_error(path + ": expected columns region_id and " + label_col);
  }
  std::map<std::string, std::string> labels;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      fields.push_back(
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (fields.size() <= label_idx) throw std::runtime_error(path + ": short row");
    labels[fields[0]] = fields[label_idx];
  }
  return labels;
}

int run_eval(const std::string& pred_path, const std::string& truth_path, const std::string& out,
             const std::string& scope_name) {
  const auto pred = read_label_csv(pred_path, "label");
  const auto truth = read_label_csv(truth_path, "label");
  if (pred.size() != truth.size()) {
    throw std::runtime_error("prediction/truth size mismatch: " + std::to_string(pred.size()) +
                             " vs " + std::to_string(truth.size()));
  }
  std::vector<int> y_true, y_pred;
  for (const auto& [rid, label] : truth) {
    const auto it = pred.find(rid);
    if (it == pred.end()) throw std::runtime_error("no prediction for region " + rid);
    y_true.push_back(category_index(label));
    y_pred.push_back(category_index(it->second));
  }
  const auto scope = scope_name == "all" ? F1Scope::AllClasses : F1Scope::PresentClasses;
  const auto result = evaluate(y_true, y_pred, kNumCategories, scope);
  std::cout << format_confusion(result.confusion) << "accuracy: " << result.accuracy
            << "\nkappa: " << result.kappa << "\nmacro_f1: " << result.macro_f1 << "\n";
  if (!out.empty()) {
    std::ofstream report(out);
    report << report_json(result) << "\n";
    std::cout << "report written to " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"urban region function recognition pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags win");

  SynthConfig synth_config;
  std::string synth_out, start_date;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--train-per-cat", synth_config.train_per_category, "training regions per category");
  synth_cmd->add_option("--test-per-cat", synth_config.test_per_category, "test regions per category");
  synth_cmd->add_option("--users", synth_config.n_users, "number of users");
  synth_cmd->add_option("--noise", synth_config.noise, "signal flattening in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--seed", synth_config.seed, "generator seed");
  synth_cmd->add_option("--days", synth_config.window.num_days, "window length in days");
  synth_cmd->add_option("--start-date", start_date, "window start (YYYY-MM-DD)");

  CommonOpts ingest_opts;
  auto* ingest_cmd = app.add_subcommand("ingest", "parse and validate a dataset");
  add_dataset_options(ingest_cmd, ingest_opts);

  CommonOpts feat_opts;
  std::string feat_only = "stat", feat_out = "features.csv";
  bool feat_binary = false;
  auto* feat_cmd = app.add_subcommand("features", "extract feature matrices");
  add_dataset_options(feat_cmd, feat_opts);
  feat_cmd->add_option("--only", feat_only, "feature family")
      ->check(CLI::IsMember({"stat", "activity", "graph", "multi", "temporal", "image"}));
  feat_cmd->add_option("--out", feat_out, "output file");
  feat_cmd->add_flag("--binary", feat_binary, "write the binary block format instead of CSV");

  CommonOpts train_opts;
  GbdtParams train_params;
  std::string train_model_dir = "model";
  bool strict_classes = false;
  auto* train_cmd = app.add_subcommand("train", "train the fused model with OOF stacking");
  add_dataset_options(train_cmd, train_opts);
  add_gbdt_options(train_cmd, train_params);
  train_cmd->add_option("--model-dir", train_model_dir, "output model directory");
  train_cmd->add_flag("--strict-classes", strict_classes,
                      "error (instead of warn) when a fold misses a class");

  CommonOpts pred_opts;
  std::string pred_model_dir = "model", pred_out = "predictions.csv";
  bool pred_all = false;
  auto* pred_cmd = app.add_subcommand("predict", "predict region categories");
  add_dataset_options(pred_cmd, pred_opts);
  pred_cmd->add_option("--model-dir", pred_model_dir, "trained model directory")
      ->check(CLI::ExistingDirectory);
  pred_cmd->add_option("--out", pred_out, "output CSV");
  pred_cmd->add_flag("--all", pred_all, "predict labeled regions too");

  std::string eval_pred, eval_truth, eval_out, eval_scope = "present";
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
  eval_cmd->add_option("--pred", eval_pred, "predictions CSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--truth", eval_truth, "truth CSV (region_id,label)")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "JSON report path");
  eval_cmd->add_option("--scope", eval_scope, "macro-F1 class scope")
      ->check(CLI::IsMember({"present", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth_cmd) {
      if (!start_date.empty()) synth_config.window.start = parse_iso_date(start_date);
      return run_synth(synth_config, synth_out);
    }
    if (*ingest_cmd) {
      set_max_threads(ingest_opts.threads);
      return run_ingest(ingest_opts);
    }
    if (*feat_cmd) {
      set_max_threads(feat_opts.threads);
      return run_features(feat_opts, feat_only, feat_out, feat_binary);
    }
    if (*train_cmd) {
      set_max_threads(train_opts.threads);
      train_params.seed = train_opts.seed;
      return run_train(train_opts, train_params, train_model_dir, strict_classes);
    }
    if (*pred_cmd) {
      set_max_threads(pred_opts.threads);
      return run_predict(pred_opts, pred_model_dir, pred_out, pred_all);
    }
    if (*eval_cmd) return run_eval(eval_pred, eval_truth, eval_out, eval_scope);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
