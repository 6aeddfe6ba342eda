#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "l0cert/noise.hpp"
#include "l0cert/rational.hpp"

namespace l0cert {

// Binary decision tree over binary inputs (K = 1), with every feature used at
// most once anywhere in the tree. The once-only constraint is what makes the
// exact adversary below a simple budget-splitting DP: subtrees read disjoint
// coordinates, so their worst cases compose.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  int left = -1;
  int right = -1;
  Rational leaf_value;  // probability of class 1 emitted at a leaf, in [0, 1]
};

struct Tree {
  NoiseParams params;  // K must be 1
  int max_depth = 0;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct TrainOptions {
  // Leaves emit the probability-weighted majority class by default; soft
  // leaves emit the exact weighted class-1 fraction instead.
  bool soft_leaves = false;
  // When below 1, each node scores only a random subset of the still-unused
  // features, keeping each independently with this probability (all of them
  // if the draw empties the list). Seeded and reproducible.
  double feature_fraction = 1.0;
  std::uint64_t seed = 0;
};

struct Dataset {
  int d = 0;
  std::vector<std::vector<std::uint8_t>> x;  // binary feature rows
  std::vector<int> y;                        // labels in {0, 1}
};

// CSV with one row per sample: label first, then d binary features. No header
// row. Malformed cells are reported with their line number.
Dataset load_dataset_csv(const std::filesystem::path& path);

// Greedy breadth-first training under the noise distribution: every sample
// reaches every node with a probability weight (product of alpha / beta per
// split on the path), candidate features are scored by the weighted Gini
// impurity of the induced children, ties go to the lowest feature index, and
// the weights are exact integers over the common denominator 100^depth so the
// argmin is exact. Splitting stops at max_depth, when no unused features
// remain, or when the labels are single-class.
Tree train(const Dataset& data, const NoiseParams& params, int max_depth,
           const TrainOptions& options = {});

// Exact probability that the smoothed tree votes class 1 at x: leaves return
// their value, an inner node on feature f mixes its children with weight
// alpha on the side x routes to and beta on the other (a node routes right
// when its feature reads 1).
Rational predict_prob(const Tree& tree, std::span<const std::uint8_t> x);

// adv[i][r]: minimum over adversaries flipping at most r of the coordinates
// read below node i of the class-1 probability emitted by i's subtree.
// adv[root][0] equals predict_prob. Computed bottom-up: an unflipped node
// splits its budget over the children; flipping the node's own feature costs
// one budget unit and swaps the mixture weights.
struct AdvTable {
  int r_max = 0;
  std::vector<std::vector<Rational>> adv;  // indexed [node][r]

  const std::vector<Rational>& root() const { return adv[0]; }
};

AdvTable dp_adversary(const Tree& tree, std::span<const std::uint8_t> x, int r_max);

// Maximum class-1 probability reachable with at most r flips, for each
// r = 0..r_max. Equal to one minus the minimizing adversary run on the tree
// with complemented leaves.
std::vector<Rational> dp_adversary_max(const Tree& tree, std::span<const std::uint8_t> x,
                                       int r_max);

// Text format:
//   # d=<int> K=<int> alpha_pct=<int> max_depth=<int> version=<string>
//   <id> <feature> <left> <right> <leaf_value>
// with feature/left/right equal to -1 and leaf_value "num/den" on leaves, and
// leaf_value "-" on inner nodes. Loading validates structure: ids contiguous
// from 0, exactly one parent per non-root node, no feature used twice, depth
// within max_depth, version match.
void save_tree(const Tree& tree, const std::filesystem::path& path);
Tree load_tree(const std::filesystem::path& path);

}  // namespace l0cert
