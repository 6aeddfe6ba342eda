#pragma once

#include <span>

#include "l0cert/regions.hpp"
#include "l0cert/solver.hpp"
#include "l0cert/tree.hpp"

namespace l0cert {
namespace oracle {

// Brute-force references. These recompute the quantities of the fast modules
// by direct enumeration, on purpose sharing none of their combinatorics: the
// region counter walks the whole grid, the worst-case bound greedily fills
// individual points, and the tree adversary tries every flip pattern. They
// exist to cross-check the fast paths in tests and diagnostics and refuse
// instances beyond hard size caps (unsupported_size_error).

// Region table built by enumerating all (K+1)^d grid points. Cap: (K+1)^d
// <= 1e6.
RegionTable brute_regions(const NoiseParams& params, int r);

// Worst-case retention probability by a greedy fill over per-point likelihood
// ratios, no region grouping. Cap: (K+1)^d <= 1e6.
Rational brute_rho(const NoiseParams& params, int r, const Rational& p);

// Exact smoothed class-1 probability by enumerating the joint values of the
// coordinates the tree reads. Cap: 2^(features used) <= 1e6.
Rational brute_tree_predict(const Tree& tree, std::span<const std::uint8_t> x);

// Minimum smoothed class-1 probability over every pattern of at most r flips
// of the coordinates the tree reads. Cap: number of patterns <= 1e6.
Rational brute_tree_adversary(const Tree& tree, std::span<const std::uint8_t> x, int r);

}  // namespace oracle
}  // namespace l0cert
