#include "l0cert/tree.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "l0cert/errors.hpp"
#include "l0cert/version.hpp"

namespace l0cert {

namespace {

void validate_tree_params(const NoiseParams& params) {
  validate(params);
  if (params.K != 1) throw validation_error("tree: only binary inputs (K = 1) are supported");
}

void check_input(const Tree& tree, std::span<const std::uint8_t> x) {
  if (static_cast<int>(x.size()) != tree.params.d)
    throw validation_error("tree: input has dimension " + std::to_string(x.size()) +
                           ", expected " + std::to_string(tree.params.d));
  for (auto v : x)
    if (v > 1) throw validation_error("tree: input features must be binary");
}

// Split weights of a node on feature f at input x: the right child gets alpha
// when x[f] = 1 and beta otherwise, the left child the opposite. Scaled by
// 100 these are the integers a = alpha_pct and b = 100 - alpha_pct.
struct SplitWeights {
  Rational toward;  // child the clean input routes to
  Rational away;
};

SplitWeights split_weights(const NoiseParams& params) {
  return {alpha(params), beta(params)};  // K = 1, so these sum to 1
}

// Per-node training state: which samples' integer weights (numerators over
// the shared denominator 100^depth) flow through this node.
struct PendingNode {
  int id;
  int depth;
  std::vector<mpz_class> w;
};

struct GiniScore {
  // Weighted Gini of a candidate split as the exact fraction n / (sr * sl).
  // Comparisons cross-multiply, so score ordering is exact.
  mpz_class n;
  mpz_class sr_sl;

  bool less_than(const GiniScore& o) const { return n * o.sr_sl < o.n * sr_sl; }
};

GiniScore score_split(const Dataset& data, const std::vector<mpz_class>& w, int feature,
                      long a, long b) {
  mpz_class s1r = 0, s0r = 0, s1l = 0, s0l = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool right = data.x[i][static_cast<std::size_t>(feature)] != 0;
    mpz_class wr = w[i] * (right ? a : b);
    mpz_class wl = w[i] * (right ? b : a);
    if (data.y[i] == 1) {
      s1r += wr;
      s1l += wl;
    } else {
      s0r += wr;
      s0l += wl;
    }
  }
  const mpz_class sr = s1r + s0r;
  const mpz_class sl = s1l + s0l;
  // sum_children weight * (1 - p1^2 - p0^2), over the common denominator:
  // sr*sl*(sr+sl) - sl*(s1r^2+s0r^2) - sr*(s1l^2+s0l^2) all over sr*sl.
  GiniScore score;
  score.n = sr * sl * (sr + sl) - sl * (s1r * s1r + s0r * s0r) - sr * (s1l * s1l + s0l * s0l);
  score.sr_sl = sr * sl;
  return score;
}

Rational leaf_value(const Dataset& data, const std::vector<mpz_class>& w, bool soft) {
  mpz_class s1 = 0, s0 = 0;
  for (std::size_t i = 0; i < w.size(); ++i) (data.y[i] == 1 ? s1 : s0) += w[i];
  if (soft) return Rational(s1, s1 + s0);
  return s1 > s0 ? Rational(1) : Rational(0);
}

}  // namespace

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("load_dataset_csv: cannot open " + path.string());
  Dataset data;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    std::vector<int> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      // trim ordinary whitespace
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      cell = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
      if (cell != "0" && cell != "1")
        throw validation_error("load_dataset_csv: cell '" + cell + "' is not 0/1 at " + where);
      cells.push_back(cell == "1");
    }
    if (cells.size() < 2)
      throw validation_error("load_dataset_csv: need a label and at least one feature at " +
                             where);
    if (data.d == 0) data.d = static_cast<int>(cells.size()) - 1;
    if (static_cast<int>(cells.size()) - 1 != data.d)
      throw validation_error("load_dataset_csv: inconsistent column count at " + where);
    data.y.push_back(cells[0]);
    data.x.emplace_back(cells.begin() + 1, cells.end());
  }
  if (data.x.empty()) throw validation_error("load_dataset_csv: no rows in " + path.string());
  return data;
}

Tree train(const Dataset& data, const NoiseParams& params, int max_depth,
           const TrainOptions& options) {
  validate_tree_params(params);
  if (max_depth < 0) throw validation_error("train: max_depth must be >= 0");
  if (data.x.empty() || data.y.size() != data.x.size())
    throw validation_error("train: empty dataset or label/feature size mismatch");
  if (data.d != params.d)
    throw validation_error("train: dataset dimension " + std::to_string(data.d) +
                           " does not match params.d " + std::to_string(params.d));
  for (const auto& row : data.x)
    if (static_cast<int>(row.size()) != data.d)
      throw validation_error("train: ragged feature rows");
  for (int label : data.y)
    if (label != 0 && label != 1) throw validation_error("train: labels must be 0/1");
  if (options.feature_fraction <= 0.0 || options.feature_fraction > 1.0)
    throw validation_error("train: feature_fraction outside (0, 1]");

  const long a = params.alpha_pct;
  const long b = 100 - params.alpha_pct;
  const bool single_class =
      std::all_of(data.y.begin(), data.y.end(), [&](int y) { return y == data.y[0]; });

  Tree tree;
  tree.params = params;
  tree.max_depth = max_depth;

  std::mt19937_64 rng(options.seed);
  std::vector<bool> used(static_cast<std::size_t>(data.d), false);

  tree.nodes.emplace_back();
  std::deque<PendingNode> queue;
  queue.push_back({0, 0, std::vector<mpz_class>(data.x.size(), mpz_class(1))});

  while (!queue.empty()) {
    PendingNode node = std::move(queue.front());
    queue.pop_front();

    std::vector<int> candidates;
    for (int f = 0; f < data.d; ++f)
      if (!used[f]) candidates.push_back(f);
    if (options.feature_fraction < 1.0 && !candidates.empty()) {
      // keep each candidate independently; an empty draw falls back to all
      const auto threshold =
          static_cast<std::uint64_t>(options.feature_fraction * 1000000.0);
      std::vector<int> kept;
      for (int f : candidates)
        if (rng() % 1000000 < threshold) kept.push_back(f);
      if (!kept.empty()) candidates = std::move(kept);
    }

    if (node.depth == max_depth || candidates.empty() || single_class) {
      tree.nodes[node.id].leaf_value = leaf_value(data, node.w, options.soft_leaves);
      continue;
    }

    int best = -1;
    GiniScore best_score;
    for (int f : candidates) {
      GiniScore s = score_split(data, node.w, f, a, b);
      if (best < 0 || s.less_than(best_score)) {
        best = f;
        best_score = std::move(s);
      }
    }
    used[best] = true;

    std::vector<mpz_class> wl(node.w.size()), wr(node.w.size());
    for (std::size_t i = 0; i < node.w.size(); ++i) {
      const bool right = data.x[i][static_cast<std::size_t>(best)] != 0;
      wr[i] = node.w[i] * (right ? a : b);
      wl[i] = node.w[i] * (right ? b : a);
    }

    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node.id].feature = best;
    tree.nodes[node.id].left = left_id;
    tree.nodes[node.id].right = right_id;
    queue.push_back({left_id, node.depth + 1, std::move(wl)});
    queue.push_back({right_id, node.depth + 1, std::move(wr)});
  }
  return tree;
}

Rational predict_prob(const Tree& tree, std::span<const std::uint8_t> x) {
  validate_tree_params(tree.params);
  check_input(tree, x);
  if (tree.nodes.empty()) throw validation_error("predict_prob: empty tree");

  const SplitWeights w = split_weights(tree.params);
  // post-order evaluation; children always have larger ids than their parent
  std::vector<Rational> value(tree.nodes.size());
  for (std::size_t i = tree.nodes.size(); i-- > 0;) {
    const TreeNode& n = tree.nodes[i];
    if (n.feature < 0) {
      value[i] = n.leaf_value;
      continue;
    }
    const bool goes_right = x[static_cast<std::size_t>(n.feature)] != 0;
    const Rational& toward = value[goes_right ? n.right : n.left];
    const Rational& away = value[goes_right ? n.left : n.right];
    value[i] = w.toward * toward + w.away * away;
  }
  return value[0];
}

AdvTable dp_adversary(const Tree& tree, std::span<const std::uint8_t> x, int r_max) {
  validate_tree_params(tree.params);
  check_input(tree, x);
  if (r_max < 0) throw validation_error("dp_adversary: r_max must be >= 0");
  if (tree.nodes.empty()) throw validation_error("dp_adversary: empty tree");

  const SplitWeights sw = split_weights(tree.params);
  AdvTable table;
  table.r_max = r_max;
  table.adv.assign(tree.nodes.size(), {});

  for (std::size_t i = tree.nodes.size(); i-- > 0;) {
    const TreeNode& n = tree.nodes[i];
    auto& row = table.adv[i];
    row.assign(static_cast<std::size_t>(r_max) + 1, Rational(0));
    if (n.feature < 0) {
      // a leaf reads nothing, so no budget can move it
      for (auto& v : row) v = n.leaf_value;
      continue;
    }
    const bool goes_right = x[static_cast<std::size_t>(n.feature)] != 0;
    const auto& toward = table.adv[goes_right ? n.right : n.left];
    const auto& away = table.adv[goes_right ? n.left : n.right];
    for (int r = 0; r <= r_max; ++r) {
      // feature kept: split the whole budget over the two subtrees
      Rational best = sw.toward * toward[0] + sw.away * away[static_cast<std::size_t>(r)];
      for (int k = 1; k <= r; ++k) {
        Rational v = sw.toward * toward[static_cast<std::size_t>(k)] +
                     sw.away * away[static_cast<std::size_t>(r - k)];
        if (v < best) best = v;
      }
      // feature flipped: one budget unit spent, mixture weights swap
      for (int k = 0; k <= r - 1; ++k) {
        Rational v = sw.away * toward[static_cast<std::size_t>(k)] +
                     sw.toward * away[static_cast<std::size_t>(r - 1 - k)];
        if (v < best) best = v;
      }
      row[static_cast<std::size_t>(r)] = std::move(best);
    }
  }
  return table;
}

std::vector<Rational> dp_adversary_max(const Tree& tree, std::span<const std::uint8_t> x,
                                       int r_max) {
  Tree complemented = tree;
  for (auto& n : complemented.nodes)
    if (n.feature < 0) n.leaf_value = Rational(1) - n.leaf_value;
  AdvTable table = dp_adversary(complemented, x, r_max);
  std::vector<Rational> out = table.root();
  for (auto& v : out) v = Rational(1) - v;
  return out;
}

void save_tree(const Tree& tree, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("save_tree: cannot open " + path.string());
  out << "# d=" << tree.params.d << " K=" << tree.params.K
      << " alpha_pct=" << tree.params.alpha_pct << " max_depth=" << tree.max_depth
      << " version=" << kVersion << "\n";
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& n = tree.nodes[i];
    out << i << ' ' << n.feature << ' ' << n.left << ' ' << n.right << ' ';
    if (n.feature < 0)
      out << n.leaf_value.num().get_str() << '/' << n.leaf_value.den().get_str();
    else
      out << '-';
    out << '\n';
  }
  if (!out) throw validation_error("save_tree: write failed for " + path.string());
}

Tree load_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("load_tree: cannot open " + path.string());

  Tree tree;
  bool header_seen = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (line[0] == '#') {
      if (header_seen) throw validation_error("load_tree: duplicate header at " + where);
      std::istringstream hs(line.substr(1));
      std::string tok, version;
      NoiseParams p;
      int max_depth = -1;
      while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        try {
          if (key == "d") p.d = std::stoi(val);
          else if (key == "K") p.K = std::stoi(val);
          else if (key == "alpha_pct") p.alpha_pct = std::stoi(val);
          else if (key == "max_depth") max_depth = std::stoi(val);
          else if (key == "version") version = val;
        } catch (const std::exception&) {
          throw validation_error("load_tree: bad header value at " + where);
        }
      }
      if (version != kVersion)
        throw validation_error("load_tree: version '" + version + "' does not match '" +
                               kVersion + "' at " + where);
      if (max_depth < 0) throw validation_error("load_tree: missing max_depth at " + where);
      validate_tree_params(p);
      tree.params = p;
      tree.max_depth = max_depth;
      header_seen = true;
      continue;
    }
    if (!header_seen) throw validation_error("load_tree: node before header at " + where);
    std::istringstream ns(line);
    long id, feature, left, right;
    std::string value;
    if (!(ns >> id >> feature >> left >> right >> value))
      throw validation_error("load_tree: malformed node record at " + where);
    if (id != static_cast<long>(tree.nodes.size()))
      throw validation_error("load_tree: node ids must be contiguous from 0 at " + where);
    TreeNode node;
    node.feature = static_cast<int>(feature);
    node.left = static_cast<int>(left);
    node.right = static_cast<int>(right);
    if (feature < 0) {
      if (left != -1 || right != -1)
        throw validation_error("load_tree: leaf with children at " + where);
      node.leaf_value = Rational::from_fraction_string(value);
      if (node.leaf_value.sign() < 0 || node.leaf_value > Rational(1))
        throw validation_error("load_tree: leaf value outside [0, 1] at " + where);
    } else {
      if (value != "-")
        throw validation_error("load_tree: inner node must carry '-' value at " + where);
    }
    tree.nodes.push_back(std::move(node));
  }
  if (!header_seen) throw validation_error("load_tree: missing header in " + path.string());
  if (tree.nodes.empty()) throw validation_error("load_tree: no nodes in " + path.string());

  // structural validation: one parent per non-root node, features unique and
  // in range, children in range, depth within the declared max_depth
  std::vector<int> parents(tree.nodes.size(), 0);
  std::vector<bool> feature_used(static_cast<std::size_t>(tree.params.d), false);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& n = tree.nodes[i];
    if (n.feature < 0) continue;
    if (n.feature >= tree.params.d)
      throw validation_error("load_tree: feature index " + std::to_string(n.feature) +
                             " outside 0..d-1");
    if (feature_used[static_cast<std::size_t>(n.feature)])
      throw validation_error("load_tree: feature " + std::to_string(n.feature) +
                             " used more than once");
    feature_used[static_cast<std::size_t>(n.feature)] = true;
    for (int child : {n.left, n.right}) {
      if (child < 0 || child >= static_cast<int>(tree.nodes.size()))
        throw validation_error("load_tree: child id out of range");
      ++parents[static_cast<std::size_t>(child)];
    }
  }
  if (parents[0] != 0) throw validation_error("load_tree: root must not be referenced");
  for (std::size_t i = 1; i < tree.nodes.size(); ++i)
    if (parents[i] != 1)
      throw validation_error("load_tree: node " + std::to_string(i) +
                             " referenced " + std::to_string(parents[i]) + " times");
  // depth check by walking down from the root
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    if (depth > tree.max_depth)
      throw validation_error("load_tree: tree deeper than declared max_depth");
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
    if (n.feature < 0) continue;
    if (n.left <= id || n.right <= id)
      throw validation_error("load_tree: children must have larger ids than their parent");
    stack.push_back({n.left, depth + 1});
    stack.push_back({n.right, depth + 1});
  }
  return tree;
}

}  // namespace l0cert
