#include "habgate/models/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace habgate::models {

double gini(std::size_t n_open, std::size_t n_closed) {
  const double n = static_cast<double>(n_open + n_closed);
  if (n == 0.0) return 0.0;
  const double p = static_cast<double>(n_closed) / n;
  return 2.0 * p * (1.0 - p);
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i];
}

Status DecisionTree::predict(std::span<const double> row) const {
  const auto& leaf = leaf_for(row);
  return leaf.n_closed >= leaf.n_open ? Status::Closed : Status::Open;
}

ForestVotes ForestModel::votes(std::span<const double> row) const {
  ForestVotes v;
  for (const auto& t : trees) {
    if (t.predict(row) == Status::Closed) {
      ++v.closed;
    } else {
      ++v.open;
    }
  }
  return v;
}

Status ForestModel::predict(std::span<const double> row) const {
  auto v = votes(row);
  return v.closed >= v.open ? Status::Closed : Status::Open;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double child_impurity = 0.0;  // n_left * g_left + n_right * g_right
  std::size_t n_left_open = 0, n_left_closed = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dense& x, std::span<const Status> y, int max_features, Rng& rng)
      : x_(x), y_(y), max_features_(max_features), rng_(rng), features_(x.n_cols) {
    std::iota(features_.begin(), features_.end(), 0);
  }

  DecisionTree grow(std::vector<std::size_t> samples, std::vector<double>& importance) {
    samples_ = std::move(samples);
    root_n_ = static_cast<double>(samples_.size());
    DecisionTree tree;
    struct Pending {
      std::size_t node, begin, end;
    };
    std::vector<Pending> stack;
    tree.nodes.push_back(make_leaf(0, samples_.size()));
    stack.push_back({0, 0, samples_.size()});
    while (!stack.empty()) {
      Pending p = stack.back();
      stack.pop_back();
      TreeNode& node = tree.nodes[p.node];
      if (node.n_open == 0 || node.n_closed == 0) continue;
      auto split = best_split(p.begin, p.end, node.n_open, node.n_closed);
      if (split.feature < 0) continue;

      auto mid_it = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(p.begin),
                                   samples_.begin() + static_cast<std::ptrdiff_t>(p.end), [&](std::size_t s) {
                                     return x_.at(s, static_cast<std::size_t>(split.feature)) <= split.threshold;
                                   });
      std::size_t mid = static_cast<std::size_t>(mid_it - samples_.begin());

      const double n_node = static_cast<double>(p.end - p.begin);
      const double decrease = n_node * gini(node.n_open, node.n_closed) - split.child_impurity;
      importance[static_cast<std::size_t>(split.feature)] += decrease / root_n_;

      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back(make_leaf(p.begin, mid));
      tree.nodes.push_back(make_leaf(mid, p.end));
      TreeNode& parent = tree.nodes[p.node];
      parent.feature = split.feature;
      parent.threshold = split.threshold;
      parent.left = left;
      parent.right = left + 1;
      stack.push_back({static_cast<std::size_t>(left + 1), mid, p.end});
      stack.push_back({static_cast<std::size_t>(left), p.begin, mid});
    }
    return tree;
  }

 private:
  TreeNode make_leaf(std::size_t begin, std::size_t end) const {
    TreeNode n;
    for (std::size_t i = begin; i < end; ++i) {
      if (y_[samples_[i]] == Status::Closed) {
        ++n.n_closed;
      } else {
        ++n.n_open;
      }
    }
    return n;
  }

  Split best_split(std::size_t begin, std::size_t end, std::size_t n_open, std::size_t n_closed) {
    Split best;
    double best_impurity = std::numeric_limits<double>::infinity();
    const std::size_t n = end - begin;
    int evaluated = 0;
    // Lazy Fisher-Yates over features; constant features do not count
    // toward max_features.
    for (std::size_t k = 0; k < features_.size() && evaluated < max_features_; ++k) {
      std::size_t j = k + static_cast<std::size_t>(rng_.below(features_.size() - k));
      std::swap(features_[k], features_[j]);
      const std::size_t f = features_[k];

      values_.clear();
      for (std::size_t i = begin; i < end; ++i) {
        std::size_t s = samples_[i];
        values_.push_back({x_.at(s, f), y_[s] == Status::Closed});
      }
      std::sort(values_.begin(), values_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (values_.front().first == values_.back().first) continue;
      ++evaluated;

      std::size_t left_open = 0, left_closed = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        if (values_[i].second) {
          ++left_closed;
        } else {
          ++left_open;
        }
        if (values_[i].first == values_[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        const double impurity = static_cast<double>(nl) * gini(left_open, left_closed) +
                                static_cast<double>(nr) * gini(n_open - left_open, n_closed - left_closed);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best.feature = static_cast<int>(f);
          double t = 0.5 * (values_[i].first + values_[i + 1].first);
          if (t >= values_[i + 1].first) t = values_[i].first;
          best.threshold = t;
          best.child_impurity = impurity;
          best.n_left_open = left_open;
          best.n_left_closed = left_closed;
        }
      }
    }
    return best;
  }

  const Dense& x_;
  std::span<const Status> y_;
  int max_features_;
  Rng& rng_;
  std::vector<std::size_t> features_;
  std::vector<std::size_t> samples_;
  std::vector<std::pair<double, bool>> values_;
  double root_n_ = 1.0;
};

}  // namespace

ForestModel fit_forest(const Dense& x, std::span<const Status> y, const ForestOptions& options, std::uint64_t seed) {
  if (x.n_rows == 0) throw Error(ErrorKind::TrainTooSmall, "random forest needs at least one training row");
  if (y.size() != x.n_rows) throw Error(ErrorKind::InvalidArgument, "label count does not match rows");
  if (options.n_trees < 1) throw Error(ErrorKind::InvalidArgument, "n_trees must be positive");

  const std::size_t d = x.n_cols;
  int max_features = options.max_features > 0
                         ? options.max_features
                         : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  max_features = std::min<int>(max_features, static_cast<int>(std::max<std::size_t>(d, 1)));

  ForestModel model;
  model.n_features = d;
  model.trees.resize(static_cast<std::size_t>(options.n_trees));
  std::vector<std::vector<double>> per_tree_importance(model.trees.size(), std::vector<double>(d, 0.0));

  auto grow_one = [&](std::size_t t) {
    Rng rng(mix_seed(seed, t));
    std::vector<std::size_t> samples(x.n_rows);
    if (options.bootstrap) {
      for (auto& s : samples) s = static_cast<std::size_t>(rng.below(x.n_rows));
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    TreeBuilder builder(x, y, max_features, rng);
    model.trees[t] = builder.grow(std::move(samples), per_tree_importance[t]);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(model.trees.size())));
  if (threads == 1) {
    for (std::size_t t = 0; t < model.trees.size(); ++t) grow_one(t);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t t = w; t < model.trees.size(); t += threads) grow_one(t);
      });
    }
  }

  model.importance.assign(d, 0.0);
  for (const auto& imp : per_tree_importance)
    for (std::size_t f = 0; f < d; ++f) model.importance[f] += imp[f];
  for (auto& v : model.importance) v /= static_cast<double>(model.trees.size());
  return model;
}

}  // namespace habgate::models
