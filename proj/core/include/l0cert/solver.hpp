#pragma once

#include <optional>
#include <vector>

#include "l0cert/rational.hpp"
#include "l0cert/regions.hpp"

namespace l0cert {

struct CertTable;

// Likelihood ratio of a region, possibly infinite (mass only under x). A zero
// ratio is represented as a finite zero value.
struct RatioValue {
  bool infinite = false;
  Rational value;  // ignored when infinite

  int cmp(const RatioValue& o) const {
    if (infinite && o.infinite) return 0;
    if (infinite) return 1;
    if (o.infinite) return -1;
    return value.cmp(o.value);
  }
};

// One region reduced to what the worst-case program needs: its mass under the
// clean center x, its mass under the perturbed center xbar, and their ratio.
struct MassPair {
  Rational mass_x;
  Rational mass_xbar;
  RatioValue ratio;
};

// Optimal assignment behind a rho value: regions before the boundary are fully
// classified as the target class (g = 1), the boundary region fractionally,
// everything after not at all (g = 0).
struct Witness {
  std::vector<Rational> g;
  std::size_t boundary = 0;
};

struct RhoResult {
  Rational value;
  Witness witness;
};

// Region table reduced to solver input, preserving order.
std::vector<MassPair> mass_pairs(const RegionTable& table);

// Tight lower bound on the probability the smoothed classifier keeps its vote
// at xbar, given that the vote's probability at x is exactly p. Minimizes
// sum g_i * mass_xbar_i subject to sum g_i * mass_x_i = p, 0 <= g <= 1, which
// a greedy fill in decreasing ratio order solves exactly. Inputs must be
// sorted by ratio descending with both mass columns summing to 1, p in [0,1];
// anything else throws validation_error. The returned witness always satisfies
// the two mass identities exactly.
RhoResult rho(const std::vector<MassPair>& regions, const Rational& p);

// Exact inverse of the map p -> rho(p). Requires every ratio to be finite and
// positive, which makes rho a strictly increasing bijection of [0,1]; infinite
// or zero ratios throw validation_error. target in [0,1].
Rational rho_inverse(const std::vector<MassPair>& regions, const Rational& target);

// Largest radius r in the table with p strictly above the certification
// threshold for r, or nullopt (abstain) when p <= 1/2 fails even the r = 0
// row. Comparisons against the table's decimal rows are exact.
std::optional<int> certified_radius(const Rational& p, const CertTable& table);

}  // namespace l0cert
