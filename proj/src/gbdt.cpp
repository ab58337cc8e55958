#include "urfc/gbdt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <thread>

#include <json.hpp>

namespace urfc {

namespace {
std::atomic<int> g_max_threads{1};
constexpr double kHessianEps = 1e-9;
}  // namespace

void set_max_threads(int n) { g_max_threads.store(std::max(1, n)); }
int max_threads() { return g_max_threads.load(); }

void parallel_for(int n, const std::function<void(int)>& f) {
  const int workers = std::min(max_threads(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

void GbdtParams::validate() const {
  if (n_rounds < 1) throw std::invalid_argument("n_rounds must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw std::invalid_argument("learning_rate must be in (0, 1]");
  }
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
  if (!(subsample > 0.0 && subsample <= 1.0)) {
    throw std::invalid_argument("subsample must be in (0, 1]");
  }
}

double Tree::predict(std::span<const double> x) const {
  int node = 0;
  while (nodes[node].feature >= 0) {
    const auto& nd = nodes[node];
    node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[node].value;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  const double m = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& v : p) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

double multiclass_log_loss(std::span<const double> scores, int label) {
  const double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - m);
  return m + std::log(sum) - scores[label];
}

void softmax_gradient(std::span<const double> scores, int label, int cls, double& g, double& h) {
  const auto p = softmax(scores);
  g = p[cls] - (label == cls ? 1.0 : 0.0);
  h = p[cls] * (1.0 - p[cls]);
}

std::vector<double> GbdtModel::raw_scores(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_features_) {
    throw std::invalid_argument("feature dimension mismatch: got " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(n_features_));
  }
  std::vector<double> scores(static_cast<std::size_t>(n_classes_), 0.0);
  for (const auto& round : rounds_) {
    for (int c = 0; c < n_classes_; ++c) scores[c] += round[c].predict(x);
  }
  return scores;
}

std::vector<double> GbdtModel::predict_proba(std::span<const double> x) const {
  return softmax(raw_scores(x));
}

int GbdtModel::predict_label(std::span<const double> x) const {
  const auto p = predict_proba(x);
  int best = 0;
  for (int c = 1; c < n_classes_; ++c) {
    if (p[c] > p[best]) best = c;
  }
  return best;
}

namespace {

// Permutation-invariant row key: rows with identical content hash identically,
// making tie order in split scans independent of input row order.
std::uint64_t row_content_key(const std::vector<double>& row, int label) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  mix(row.data(), row.size() * sizeof(double));
  mix(&label, sizeof(label));
  return h;
}

// Builds one tree over feature-major columns. Per-feature sorted row lists
// are partitioned in place with segment bounds per node, so building does
// not allocate per node. rows and the sorted lists stay in a canonical,
// permutation-invariant order: accumulation order (and thus bits) never
// depends on the caller's row ordering.
struct TreeBuilder {
  const std::vector<std::vector<double>>& cols;  // cols[f][row]
  const std::vector<double>& g;
  const std::vector<double>& h;
  const GbdtParams& params;
  int n_features;
  std::vector<std::vector<int>>& orders;  // per-feature sorted node rows
  std::vector<int>& rows;                 // canonical order
  std::vector<int> scratch;
  std::vector<TreeNode> nodes;

  int build(int s, int e, int depth) {
    double g_total = 0.0, h_total = 0.0;
    for (int pos = s; pos < e; ++pos) {
      g_total += g[rows[pos]];
      h_total += h[rows[pos]];
    }
    const int n = e - s;

    int best_feature = -1;
    double best_gain = params.min_gain;
    double best_threshold = 0.0;
    if (depth < params.max_depth && n >= 2 * params.min_samples_leaf) {
      const double parent_score = g_total * g_total / (h_total + kHessianEps);
      // Features ascending, thresholds ascending, strict >: exact gain ties
      // resolve to the lowest feature index, then the lowest threshold.
      for (int f = 0; f < n_features; ++f) {
        const auto& col = cols[f];
        const auto& order = orders[f];
        double gl = 0.0, hl = 0.0;
        for (int pos = s; pos + 1 < e; ++pos) {
          const int i = order[pos];
          gl += g[i];
          hl += h[i];
          const double v = col[i];
          const double v_next = col[order[pos + 1]];
          if (v == v_next) continue;
          const int left = pos + 1 - s;
          if (left < params.min_samples_leaf || n - left < params.min_samples_leaf) continue;
          const double gr = g_total - gl;
          const double hr = h_total - hl;
          const double gain =
              gl * gl / (hl + kHessianEps) + gr * gr / (hr + kHessianEps) - parent_score;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = f;
            best_threshold = v + (v_next - v) / 2.0;
          }
        }
      }
    }

    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (best_feature < 0) {
      nodes[id].value = -g_total / (h_total + kHessianEps) * params.learning_rate;
      return id;
    }

    const auto& split_col = cols[best_feature];
    auto goes_left = [&](int i) { return split_col[i] <= best_threshold; };
    auto partition_segment = [&](std::vector<int>& order) {
      int nl = 0, nr = 0;
      for (int pos = s; pos < e; ++pos) {
        const int i = order[pos];
        if (goes_left(i)) {
          order[s + nl++] = i;
        } else {
          scratch[nr++] = i;
        }
      }
      std::copy(scratch.begin(), scratch.begin() + nr, order.begin() + s + nl);
      return nl;
    };
    const int n_left = partition_segment(rows);
    for (int f = 0; f < n_features; ++f) partition_segment(orders[f]);

    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    nodes[id].left = build(s, s + n_left, depth + 1);
    nodes[id].right = build(s + n_left, e, depth + 1);
    return id;
  }
};

}  // namespace

GbdtModel fit_gbdt(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   int n_classes, const GbdtParams& params) {
  params.validate();
  if (X.empty()) throw std::invalid_argument("empty training set");
  if (X.size() != y.size()) throw std::invalid_argument("X/y size mismatch");
  const int n = static_cast<int>(X.size());
  const int n_features = static_cast<int>(X[0].size());
  for (const auto& row : X) {
    if (static_cast<int>(row.size()) != n_features) {
      throw std::invalid_argument("ragged feature matrix");
    }
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
    }
  }
  for (int label : y) {
    if (label < 0 || label >= n_classes) throw std::invalid_argument("label out of range");
  }

  std::vector<std::uint64_t> keys(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) keys[i] = row_content_key(X[i], y[i]);

  // Feature-major copy keeps split scans within one small column.
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(n_features),
                                        std::vector<double>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < n_features; ++f) cols[f][i] = X[i][f];
  }

  // Canonical row order, and per-feature presorted orders keyed by
  // (value, content key) so the result is permutation invariant.
  std::vector<int> canonical(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) canonical[i] = i;
  std::sort(canonical.begin(), canonical.end(),
            [&](int a, int b) { return std::tie(keys[a], a) < std::tie(keys[b], b); });

  std::vector<std::vector<int>> presorted(static_cast<std::size_t>(n_features));
  parallel_for(n_features, [&](int f) {
    auto& order = presorted[f];
    order = canonical;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::tie(cols[f][a], keys[a]) < std::tie(cols[f][b], keys[b]);
    });
  });

  GbdtModel model(n_classes, n_features);
  std::vector<double> scores(static_cast<std::size_t>(n) * n_classes, 0.0);
  const int n_sampled = std::max(1, static_cast<int>(params.subsample * n));

  for (int round = 0; round < params.n_rounds; ++round) {
    std::vector<char> in_sample(static_cast<std::size_t>(n), 1);
    if (n_sampled < n) {
      std::vector<int> pool = canonical;
      std::mt19937_64 rng(params.seed + static_cast<std::uint64_t>(round) * 0x9e3779b97f4a7c15ULL);
      std::shuffle(pool.begin(), pool.end(), rng);
      std::fill(in_sample.begin(), in_sample.end(), 0);
      for (int i = 0; i < n_sampled; ++i) in_sample[pool[i]] = 1;
    }

    std::vector<std::vector<double>> probs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      probs[i] = softmax(std::span<const double>(scores.data() + i * n_classes,
                                                 static_cast<std::size_t>(n_classes)));
    }

    std::vector<Tree> class_trees(static_cast<std::size_t>(n_classes));
    parallel_for(n_classes, [&](int c) {
      std::vector<double> g(static_cast<std::size_t>(n)), hess(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const double p = probs[i][c];
        g[i] = p - (y[i] == c ? 1.0 : 0.0);
        hess[i] = p * (1.0 - p);
      }
      std::vector<int> rows;
      rows.reserve(static_cast<std::size_t>(n_sampled));
      for (int i : canonical) {
        if (in_sample[i]) rows.push_back(i);
      }
      std::vector<std::vector<int>> orders(static_cast<std::size_t>(n_features));
      for (int f = 0; f < n_features; ++f) {
        if (n_sampled < n) {
          orders[f].reserve(static_cast<std::size_t>(n_sampled));
          for (int i : presorted[f]) {
            if (in_sample[i]) orders[f].push_back(i);
          }
        } else {
          orders[f] = presorted[f];
        }
      }
      TreeBuilder builder{cols, g,  hess, params, n_features, orders, rows,
                          std::vector<int>(static_cast<std::size_t>(n_sampled)),
                          {}};
      builder.build(0, static_cast<int>(rows.size()), 0);
      class_trees[c].nodes = std::move(builder.nodes);
    });

    parallel_for(n, [&](int i) {
      for (int c = 0; c < n_classes; ++c) {
        scores[static_cast<std::size_t>(i) * n_classes + c] += class_trees[c].predict(X[i]);
      }
    });
    model.rounds_.push_back(std::move(class_trees));

    // Sum in canonical row order so the recorded curve (and hence the
    // serialized model) is invariant to the caller's row permutation.
    double loss = 0.0;
    for (int i : canonical) {
      loss += multiclass_log_loss(std::span<const double>(scores.data() + i * n_classes,
                                                          static_cast<std::size_t>(n_classes)),
                                  y[i]);
    }
    model.loss_curve_.push_back(loss / n);
  }
  return model;
}

namespace {
constexpr const char* kModelMagic = "urfc-gbdt";
constexpr int kModelVersion = 1;
}  // namespace

std::string GbdtModel::to_json_string() const {
  nlohmann::json j;
  j["magic"] = kModelMagic;
  j["version"] = kModelVersion;
  j["n_classes"] = n_classes_;
  j["n_features"] = n_features_;
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& round : rounds_) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& tree : round) {
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto& nd : tree.nodes) {
        nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.value});
      }
      classes.push_back(std::move(nodes));
    }
    rounds.push_back(std::move(classes));
  }
  j["rounds"] = std::move(rounds);
  j["training_loss"] = loss_curve_;
  return j.dump();
}

GbdtModel GbdtModel::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("corrupt model file: ") + e.what());
  }
  if (!j.contains("magic") || j["magic"] != kModelMagic) {
    throw std::runtime_error("not a gbdt model file (bad magic)");
  }
  if (j.at("version").get<int>() != kModelVersion) {
    throw std::runtime_error("unsupported model version");
  }
  GbdtModel m(j.at("n_classes").get<int>(), j.at("n_features").get<int>());
  for (const auto& round : j.at("rounds")) {
    std::vector<Tree> classes;
    for (const auto& tree_json : round) {
      Tree tree;
      for (const auto& nd : tree_json) {
        TreeNode node;
        node.feature = nd.at(0).get<int>();
        node.threshold = nd.at(1).get<double>();
        node.left = nd.at(2).get<int>();
        node.right = nd.at(3).get<int>();
        node.value = nd.at(4).get<double>();
        if (node.feature >= m.n_features_) {
          throw std::runtime_error("corrupt model: split feature out of range");
        }
        tree.nodes.push_back(node);
      }
      classes.push_back(std::move(tree));
    }
    if (static_cast<int>(classes.size()) != m.n_classes_) {
      throw std::runtime_error("corrupt model: wrong tree count in round");
    }
    m.rounds_.push_back(std::move(classes));
  }
  if (j.contains("training_loss")) {
    m.loss_curve_ = j["training_loss"].get<std::vector<double>>();
  }
  return m;
}

void GbdtModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path.string());
  out << to_json_string() << "\n";
}

GbdtModel GbdtModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace urfc
