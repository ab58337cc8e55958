#include "urfc/metrics.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace urfc {

long ConfusionMatrix::total() const {
  long n = 0;
  for (long c : cells) n += c;
  return n;
}

EvalResult evaluate(std::span<const int> y_true, std::span<const int> y_pred, int n_classes,
                    F1Scope scope) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("y_true/y_pred length mismatch");
  if (y_true.empty()) throw std::invalid_argument("empty evaluation input");

  EvalResult result;
  result.confusion = ConfusionMatrix(n_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 || y_pred[i] >= n_classes) {
      throw std::invalid_argument("label out of range at position " + std::to_string(i));
    }
    ++result.confusion.at(y_true[i], y_pred[i]);
  }

  const double n = static_cast<double>(y_true.size());
  long trace = 0;
  double pe = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    trace += result.confusion.at(c, c);
    long row = 0, col = 0;
    for (int j = 0; j < n_classes; ++j) {
      row += result.confusion.at(c, j);
      col += result.confusion.at(j, c);
    }
    pe += static_cast<double>(row) * static_cast<double>(col) / (n * n);
  }
  result.accuracy = static_cast<double>(trace) / n;
  result.kappa = pe >= 1.0 ? 0.0 : (result.accuracy - pe) / (1.0 - pe);
  result.macro_f1 = macro_f1_scope(result.confusion, scope);
  return result;
}

double macro_f1_scope(const ConfusionMatrix& cm, F1Scope scope) {
  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < cm.n_classes; ++c) {
    long tp = cm.at(c, c);
    long row = 0, col = 0;
    for (int j = 0; j < cm.n_classes; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    const bool present = row > 0 || col > 0;
    if (scope == F1Scope::PresentClasses && !present) continue;
    double f1 = 0.0;
    if (col > 0 && row > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(col);
      const double recall = static_cast<double>(tp) / static_cast<double>(row);
      if (precision + recall > 0.0) f1 = 2.0 * precision * recall / (precision + recall);
    }
    sum += f1;
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("no classes in macro F1 scope");
  return sum / counted;
}

std::string format_confusion(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "true\\pred";
  for (int c = 0; c < cm.n_classes; ++c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%7s",
                  cm.n_classes == kNumCategories ? std::string(category_name(c)).c_str()
                                                 : std::to_string(c).c_str());
    out << buf;
  }
  out << "\n";
  for (int r = 0; r < cm.n_classes; ++r) {
    char head[16];
    std::snprintf(head, sizeof(head), "%-9s",
                  cm.n_classes == kNumCategories ? std::string(category_name(r)).c_str()
                                                 : std::to_string(r).c_str());
    out << head;
    for (int c = 0; c < cm.n_classes; ++c) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%7ld", cm.at(r, c));
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

std::string report_json(const EvalResult& result) {
  nlohmann::json j;
  j["accuracy"] = result.accuracy;
  j["kappa"] = result.kappa;
  j["macro_f1"] = result.macro_f1;
  j["n_samples"] = result.confusion.total();
  std::vector<std::vector<long>> rows;
  for (int r = 0; r < result.confusion.n_classes; ++r) {
    std::vector<long> row;
    for (int c = 0; c < result.confusion.n_classes; ++c) row.push_back(result.confusion.at(r, c));
    rows.push_back(std::move(row));
  }
  j["confusion"] = rows;
  return j.dump(2);
}

}  // namespace urfc
