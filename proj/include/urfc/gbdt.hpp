#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace urfc {

struct GbdtParams {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 4;
  int min_samples_leaf = 5;
  double min_gain = 1e-6;
  double subsample = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 = leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(std::span<const double> x) const;
};

// Multiclass softmax boosting: one regression tree per class per round,
// fitted to g = p_c - 1[y=c], h = p_c(1-p_c); leaf = -sum(g)/(sum(h)+eps) * lr.
class GbdtModel {
 public:
  GbdtModel() = default;
  GbdtModel(int n_classes, int n_features) : n_classes_(n_classes), n_features_(n_features) {}

  int n_classes() const { return n_classes_; }
  int n_features() const { return n_features_; }
  int n_rounds() const { return static_cast<int>(rounds_.size()); }

  std::vector<double> raw_scores(std::span<const double> x) const;
  std::vector<double> predict_proba(std::span<const double> x) const;
  int predict_label(std::span<const double> x) const;  // argmax, ties -> lowest index

  void save(const std::filesystem::path& path) const;
  static GbdtModel load(const std::filesystem::path& path);
  std::string to_json_string() const;
  static GbdtModel from_json_string(const std::string& text);

  // Per-round training log-loss, recorded during fit.
  const std::vector<double>& training_loss() const { return loss_curve_; }

  friend GbdtModel fit_gbdt(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                            int n_classes, const GbdtParams& params);

 private:
  int n_classes_ = 0;
  int n_features_ = 0;
  std::vector<std::vector<Tree>> rounds_;  // rounds_[r][class]
  std::vector<double> loss_curve_;
};

GbdtModel fit_gbdt(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   int n_classes, const GbdtParams& params);

// Analytic softmax gradient/hessian for one sample, exposed for verification.
void softmax_gradient(std::span<const double> scores, int label, int cls, double& g, double& h);
double multiclass_log_loss(std::span<const double> scores, int label);
std::vector<double> softmax(std::span<const double> scores);

// Global cap on worker threads used by fit and the pipeline (default: 1).
void set_max_threads(int n);
int max_threads();

// Runs f(i) for i in [0, n); results must not depend on execution order.
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace urfc
