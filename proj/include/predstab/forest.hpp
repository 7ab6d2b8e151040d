#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "predstab/dataset.hpp"
#include "predstab/errors.hpp"
#include "predstab/rng.hpp"

namespace predstab {

struct ForestOptions {
  int n_trees = 500;
  int mtry = 0;  // 0 = floor(sqrt(P)), at least 1
  int min_node = 10;
};

namespace detail {

// Flat binary tree. Leaves carry the event proportion of the training rows
// that reached them.
struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0.0;  // goes left when x <= threshold
  std::int32_t left = -1, right = -1;
  double prob = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict_row(const Dataset& ds, std::size_t i) const {
    std::int32_t cur = 0;
    while (nodes[static_cast<std::size_t>(cur)].feature >= 0) {
      const auto& nd = nodes[static_cast<std::size_t>(cur)];
      cur = ds.x(i, static_cast<std::size_t>(nd.feature)) <= nd.threshold
                ? nd.left
                : nd.right;
    }
    return nodes[static_cast<std::size_t>(cur)].prob;
  }
};

// mtry distinct feature indices via partial Fisher-Yates.
inline void sample_features(std::size_t p, std::size_t mtry, Rng& rng,
                            std::vector<std::size_t>& pool,
                            std::vector<std::size_t>& out) {
  pool.resize(p);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  out.clear();
  for (std::size_t k = 0; k < mtry; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(p - k));
    std::swap(pool[k], pool[j]);
    out.push_back(pool[k]);
  }
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

// Best Gini split over the candidate features. Decrease is measured as the
// gain in sum over children of (events_c)^2/n_c + (nonevents_c)^2/n_c,
// which orders splits identically to Gini impurity reduction.
inline SplitChoice best_split(const Dataset& ds, const std::vector<std::size_t>& rows,
                              const std::vector<std::size_t>& features,
                              std::vector<std::pair<double, int>>& scratch) {
  SplitChoice best;
  const double n = static_cast<double>(rows.size());
  double total_events = 0.0;
  for (const std::size_t r : rows) total_events += ds.outcome[r];
  const double parent_score =
      (total_events * total_events + (n - total_events) * (n - total_events)) / n;

  for (const std::size_t f : features) {
    scratch.clear();
    for (const std::size_t r : rows) scratch.emplace_back(ds.x(r, f), ds.outcome[r]);
    std::sort(scratch.begin(), scratch.end());
    if (scratch.front().first == scratch.back().first) continue;

    double left_n = 0.0, left_e = 0.0;
    for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
      left_n += 1.0;
      left_e += scratch[i].second;
      if (scratch[i].first == scratch[i + 1].first) continue;
      const double right_n = n - left_n;
      const double right_e = total_events - left_e;
      const double score =
          (left_e * left_e + (left_n - left_e) * (left_n - left_e)) / left_n +
          (right_e * right_e + (right_n - right_e) * (right_n - right_e)) / right_n;
      const double decrease = score - parent_score;
      if (decrease > best.decrease + 1e-12) {
        best.found = true;
        best.feature = f;
        best.threshold = scratch[i].first + 0.5 * (scratch[i + 1].first - scratch[i].first);
        best.decrease = decrease;
      }
    }
  }
  return best;
}

inline Tree grow_tree(const Dataset& ds, const ForestOptions& opts, std::size_t mtry,
                      Rng& rng) {
  Tree tree;
  // bootstrap sample of row indices
  std::vector<std::size_t> rows(ds.n_rows);
  for (auto& r : rows) r = static_cast<std::size_t>(rng.below(ds.n_rows));

  std::vector<std::size_t> pool, features;
  std::vector<std::pair<double, int>> scratch;

  struct Work {
    std::vector<std::size_t> rows;
    std::int32_t node;
  };
  tree.nodes.emplace_back();
  std::vector<Work> stack;
  stack.push_back({std::move(rows), 0});

  while (!stack.empty()) {
    Work wk = std::move(stack.back());
    stack.pop_back();
    auto& node = tree.nodes[static_cast<std::size_t>(wk.node)];

    std::size_t events = 0;
    for (const std::size_t r : wk.rows) events += static_cast<std::size_t>(ds.outcome[r]);
    node.prob = static_cast<double>(events) / static_cast<double>(wk.rows.size());

    const bool pure = events == 0 || events == wk.rows.size();
    if (pure || wk.rows.size() < static_cast<std::size_t>(opts.min_node)) continue;

    sample_features(ds.n_cols, mtry, rng, pool, features);
    const SplitChoice split = best_split(ds, wk.rows, features, scratch);
    if (!split.found) continue;

    std::vector<std::size_t> left_rows, right_rows;
    for (const std::size_t r : wk.rows)
      (ds.x(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);

    const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const auto right_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto& nd = tree.nodes[static_cast<std::size_t>(wk.node)];  // revalidate
    nd.feature = static_cast<int>(split.feature);
    nd.threshold = split.threshold;
    nd.left = left_id;
    nd.right = right_id;
    stack.push_back({std::move(right_rows), right_id});
    stack.push_back({std::move(left_rows), left_id});
  }
  return tree;
}

}  // namespace detail

struct ForestFit {
  std::vector<detail::Tree> trees;
  std::size_t mtry = 0;
  int min_node = 0;

  // Mean over trees of the terminal-node event proportion (unclamped).
  double predict_row(const Dataset& ds, std::size_t i) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict_row(ds, i);
    return sum / static_cast<double>(trees.size());
  }

  std::size_t total_nodes() const {
    std::size_t n = 0;
    for (const auto& t : trees) n += t.nodes.size();
    return n;
  }
};

// Bagged CART probability forest: each tree grown on a with-replacement
// resample, splits chosen by Gini reduction over mtry sampled features.
// Tree t draws from its own stream derived from the fit stream, so the
// ensemble is reproducible independent of growth order.
inline ForestFit fit_random_forest(const Dataset& ds, const ForestOptions& opts,
                                   Rng& rng) {
  if (opts.n_trees < 1) throw InvalidInput("forest: n_trees must be at least 1");
  if (opts.min_node < 1) throw InvalidInput("forest: min_node must be at least 1");
  ForestFit fit;
  fit.mtry = opts.mtry > 0
                 ? std::min<std::size_t>(static_cast<std::size_t>(opts.mtry), ds.n_cols)
                 : std::max<std::size_t>(
                       1, static_cast<std::size_t>(
                              std::floor(std::sqrt(static_cast<double>(ds.n_cols)))));
  fit.min_node = opts.min_node;

  const std::uint64_t forest_seed = rng.next_u64();
  fit.trees.reserve(static_cast<std::size_t>(opts.n_trees));
  for (int t = 0; t < opts.n_trees; ++t) {
    Rng tree_rng(derive_seed(forest_seed, static_cast<std::uint64_t>(t)));
    fit.trees.push_back(detail::grow_tree(ds, opts, fit.mtry, tree_rng));
  }
  return fit;
}

}  // namespace predstab
