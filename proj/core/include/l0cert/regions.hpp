#pragma once

#include <gmpxx.h>

#include <iosfwd>
#include <vector>

#include "l0cert/noise.hpp"
#include "l0cert/rational.hpp"

namespace l0cert {

// Canonical perturbed pair at radius r: x = (0,...,0) and xbar equal to x with
// the first r coordinates raised to level 1. By symmetry of the noise model,
// every pair at Hamming distance r is equivalent to this one, so certificates
// only ever need the canonical geometry.
//
// A region groups the points z at Hamming distance u from x and v from xbar.
// All points in a region share the likelihood ratio (alpha/beta)^(v-u), which
// is what makes the worst-case optimization tractable.
struct RegionEntry {
  int u = 0;
  int v = 0;
  mpz_class count;  // exact number of grid points in the region
};

// Entries sorted by likelihood ratio descending, ties by ascending u then v.
// Certificates are invariant under permutations within a tie class; the fixed
// order only makes tables and files reproducible.
struct RegionTable {
  NoiseParams params;
  int r = 0;
  std::vector<RegionEntry> entries;
};

// Exact region cardinality |L(u, v; r)|, computed by the closed-form sum over
// the split of the r differing and d-r agreeing coordinates. Symmetric in
// (u, v). Throws validation_error when r, u or v lie outside 0..d.
mpz_class cardinality(const NoiseParams& params, int r, int u, int v);

// All regions with nonzero cardinality for radius r, sorted as described on
// RegionTable. Requires 0 <= r <= d.
RegionTable build_region_table(const NoiseParams& params, int r);

enum class Side { x, xbar };

// Probability mass the noise centered on the given side assigns to the whole
// region: count * alpha^(d-h) * beta^h with h = u for side x and h = v for
// side xbar.
Rational region_mass(const RegionEntry& entry, const NoiseParams& params, Side side);

// Likelihood ratio (alpha/beta)^(v-u) of the region.
Rational likelihood_ratio(const RegionEntry& entry, const NoiseParams& params);

// Debug dump, one "u,v,count" line per entry in table order.
void dump_csv(const RegionTable& table, std::ostream& out);

}  // namespace l0cert
