#pragma once

#include <span>
#include <string>
#include <vector>

#include "urfc/core.hpp"

namespace urfc {

struct ConfusionMatrix {
  int n_classes = kNumCategories;
  std::vector<long> cells;  // row = true class, col = predicted

  explicit ConfusionMatrix(int n = kNumCategories)
      : n_classes(n), cells(static_cast<std::size_t>(n) * n, 0) {}

  long& at(int truth, int pred) { return cells[static_cast<std::size_t>(truth) * n_classes + pred]; }
  long at(int truth, int pred) const {
    return cells[static_cast<std::size_t>(truth) * n_classes + pred];
  }
  long total() const;
};

enum class F1Scope { PresentClasses, AllClasses };

struct EvalResult {
  double accuracy = 0.0;
  double kappa = 0.0;
  double macro_f1 = 0.0;
  ConfusionMatrix confusion;
};

// accuracy = trace/N; kappa = (p_o - p_e)/(1 - p_e), 0 when p_e = 1;
// macro F1 = mean of per-class 2PR/(P+R), 0/0 -> 0.
EvalResult evaluate(std::span<const int> y_true, std::span<const int> y_pred,
                    int n_classes = kNumCategories, F1Scope scope = F1Scope::PresentClasses);

double macro_f1_scope(const ConfusionMatrix& cm, F1Scope scope);

// Aligned text table with category names, for eyeballing confusions.
std::string format_confusion(const ConfusionMatrix& cm);
std::string report_json(const EvalResult& result);

}  // namespace urfc
