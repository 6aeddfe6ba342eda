#include "l0cert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "l0cert/errors.hpp"

namespace l0cert {
namespace oracle {

namespace {

constexpr double kCap = 1e6;

// Number of grid points, as a double so oversize combinations just saturate.
double grid_size(const NoiseParams& params) {
  return std::pow(static_cast<double>(params.K + 1), static_cast<double>(params.d));
}

void check_grid_cap(const NoiseParams& params, const char* op) {
  if (grid_size(params) > kCap)
    throw unsupported_size_error(std::string(op) + ": grid (K+1)^d exceeds the cap of 1e6 points");
}

// Advances z through {0..K}^d like an odometer; returns false after the last
// point.
bool next_point(std::vector<int>& z, int K) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < K) {
      ++z[i];
      std::fill(z.begin(), z.begin() + static_cast<long>(i), 0);
      return true;
    }
  }
  return false;
}

// Canonical pair: x is all zeros, xbar has the first r coordinates at 1.
int dist_to_x(const std::vector<int>& z) {
  int u = 0;
  for (int v : z) u += v != 0;
  return u;
}

int dist_to_xbar(const std::vector<int>& z, int r) {
  int v = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const int want = static_cast<long>(i) < r ? 1 : 0;
    v += z[i] != want;
  }
  return v;
}

}  // namespace

RegionTable brute_regions(const NoiseParams& params, int r) {
  validate(params);
  if (r < 0 || r > params.d)
    throw validation_error("brute_regions: r outside 0..d");
  check_grid_cap(params, "brute_regions");

  std::map<std::pair<int, int>, long> counts;
  std::vector<int> z(static_cast<std::size_t>(params.d), 0);
  do {
    ++counts[{dist_to_x(z), dist_to_xbar(z, r)}];
  } while (next_point(z, params.K));

  RegionTable table{params, r, {}};
  for (const auto& [uv, count] : counts)
    table.entries.push_back({uv.first, uv.second, mpz_class(count)});

  // Sort by likelihood ratio (alpha/beta)^(v-u) descending, ties by (u, v)
  // ascending, comparing through GMP's own rational type.
  mpq_class ab(params.alpha_pct * static_cast<long>(params.K), 100 - params.alpha_pct);
  ab.canonicalize();
  auto ratio_of = [&ab](const RegionEntry& e) {
    mpq_class r1(1);
    const int t = e.v - e.u;
    for (int i = 0; i < std::abs(t); ++i) r1 *= ab;
    if (t < 0) r1 = 1 / r1;
    return r1;
  };
  std::sort(table.entries.begin(), table.entries.end(),
            [&](const RegionEntry& a, const RegionEntry& b) {
              const mpq_class ra = ratio_of(a), rb = ratio_of(b);
              const int cmp = ::cmp(ra, rb);
              if (cmp != 0) return cmp > 0;
              if (a.u != b.u) return a.u < b.u;
              return a.v < b.v;
            });
  return table;
}

Rational brute_rho(const NoiseParams& params, int r, const Rational& p) {
  validate(params);
  if (r < 0 || r > params.d) throw validation_error("brute_rho: r outside 0..d");
  check_grid_cap(params, "brute_rho");
  mpq_class pq(p.num(), p.den());
  pq.canonicalize();
  if (pq < 0 || pq > 1) throw validation_error("brute_rho: p outside [0, 1]");

  // per-coordinate likelihoods
  const mpq_class la(params.alpha_pct, 100);
  const mpq_class lb(100 - params.alpha_pct, 100L * params.K);

  struct PointMass {
    mpq_class lx;
    mpq_class lxbar;
  };
  std::vector<PointMass> points;
  points.reserve(static_cast<std::size_t>(grid_size(params)));
  std::vector<int> z(static_cast<std::size_t>(params.d), 0);
  do {
    const int u = dist_to_x(z);
    const int v = dist_to_xbar(z, r);
    PointMass pm{mpq_class(1), mpq_class(1)};
    for (int i = 0; i < u; ++i) pm.lx *= lb;
    for (int i = u; i < params.d; ++i) pm.lx *= la;
    for (int i = 0; i < v; ++i) pm.lxbar *= lb;
    for (int i = v; i < params.d; ++i) pm.lxbar *= la;
    points.push_back(std::move(pm));
  } while (next_point(z, params.K));

  // decreasing likelihood ratio = decreasing lx/lxbar, by cross multiplication
  std::sort(points.begin(), points.end(), [](const PointMass& a, const PointMass& b) {
    return ::cmp(a.lx * b.lxbar, b.lx * a.lxbar) > 0;
  });

  mpq_class acc_x(0), acc_xbar(0);
  for (const PointMass& pm : points) {
    if (acc_x + pm.lx < pq) {
      acc_x += pm.lx;
      acc_xbar += pm.lxbar;
      continue;
    }
    // last, possibly fractional point
    mpq_class rho = acc_xbar;
    if (pq > acc_x) rho += pm.lxbar * (pq - acc_x) / pm.lx;
    rho.canonicalize();
    return Rational(rho.get_num(), rho.get_den());
  }
  acc_xbar.canonicalize();
  return Rational(acc_xbar.get_num(), acc_xbar.get_den());
}

Rational brute_tree_predict(const Tree& tree, std::span<const std::uint8_t> x) {
  std::vector<int> features;
  for (const auto& n : tree.nodes)
    if (n.feature >= 0) features.push_back(n.feature);
  if (features.size() > 20 || std::pow(2.0, static_cast<double>(features.size())) > kCap)
    throw unsupported_size_error("brute_tree_predict: 2^(used features) exceeds the cap");
  if (static_cast<int>(x.size()) != tree.params.d)
    throw validation_error("brute_tree_predict: input dimension mismatch");

  const mpq_class la(tree.params.alpha_pct, 100);
  const mpq_class lb(100 - tree.params.alpha_pct, 100);

  auto eval_leaf_prob = [&](const std::vector<std::uint8_t>& assignment) {
    // walk the tree under the noisy values on the used coordinates
    int id = 0;
    while (tree.nodes[static_cast<std::size_t>(id)].feature >= 0) {
      const TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
      const auto it = std::find(features.begin(), features.end(), n.feature);
      const std::size_t slot = static_cast<std::size_t>(it - features.begin());
      id = assignment[slot] ? n.right : n.left;
    }
    const Rational& lv = tree.nodes[static_cast<std::size_t>(id)].leaf_value;
    mpq_class q(lv.num(), lv.den());
    q.canonicalize();
    return q;
  };

  mpq_class total(0);
  const std::size_t m = features.size();
  std::vector<std::uint8_t> assignment(m, 0);
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    mpq_class prob(1);
    for (std::size_t i = 0; i < m; ++i) {
      assignment[i] = (mask >> i) & 1u;
      prob *= assignment[i] == x[static_cast<std::size_t>(features[i])] ? la : lb;
    }
    total += prob * eval_leaf_prob(assignment);
  }
  total.canonicalize();
  return Rational(total.get_num(), total.get_den());
}

Rational brute_tree_adversary(const Tree& tree, std::span<const std::uint8_t> x, int r) {
  if (r < 0) throw validation_error("brute_tree_adversary: r must be >= 0");
  std::vector<int> features;
  for (const auto& n : tree.nodes)
    if (n.feature >= 0) features.push_back(n.feature);

  // count flip patterns sum_{j<=r} C(m, j) against the cap
  double patterns = 0.0, binom = 1.0;
  const int m = static_cast<int>(features.size());
  for (int j = 0; j <= std::min(r, m); ++j) {
    patterns += binom;
    binom = binom * (m - j) / (j + 1);
    if (patterns > kCap) break;
  }
  if (patterns > kCap)
    throw unsupported_size_error("brute_tree_adversary: flip pattern count exceeds the cap");

  std::vector<std::uint8_t> point(x.begin(), x.end());
  Rational best = predict_prob(tree, point);

  // recursive choice of up to r features to flip
  std::vector<int> chosen;
  auto recurse = [&](auto&& self, int start, int remaining) -> void {
    if (remaining == 0) return;
    for (int i = start; i < m; ++i) {
      const auto f = static_cast<std::size_t>(features[static_cast<std::size_t>(i)]);
      point[f] ^= 1u;
      const Rational v = predict_prob(tree, point);
      if (v < best) best = v;
      self(self, i + 1, remaining - 1);
      point[f] ^= 1u;
    }
  };
  recurse(recurse, 0, std::min(r, m));
  return best;
}

}  // namespace oracle
}  // namespace l0cert
