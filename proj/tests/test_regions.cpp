#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "l0cert/errors.hpp"
#include "l0cert/oracle.hpp"
#include "l0cert/regions.hpp"

using l0cert::NoiseParams;
using l0cert::Rational;
using l0cert::RegionTable;
using l0cert::Side;

namespace {

mpz_class binom(int n, int k) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return out;
}

}  // namespace

TEST_CASE("cardinality hand examples") {
  // d = 2, K = 1, r = 1: u = v = 1 is impossible because flipping the one
  // differing coordinate changes exactly one of the distances by one, so u + v
  // always has the parity of r.
  CHECK(l0cert::cardinality({2, 1, 50}, 1, 1, 1) == 0);
  // With K = 2 the differing coordinate can move to a third level seen as a
  // change from both centers: exactly the point (2, 0).
  CHECK(l0cert::cardinality({2, 2, 50}, 1, 1, 1) == 1);
  // d = 1, K = 1, r = 1: the grid is {0, 1}; z = 1 has (u, v) = (1, 0) and
  // z = 0 has (0, 1).
  CHECK(l0cert::cardinality({1, 1, 80}, 1, 1, 0) == 1);
  CHECK(l0cert::cardinality({1, 1, 80}, 1, 0, 1) == 1);
  CHECK(l0cert::cardinality({1, 1, 80}, 1, 0, 0) == 0);
  CHECK(l0cert::cardinality({1, 1, 80}, 1, 1, 1) == 0);
  // r = 0 collapses to a single Hamming shell: u must equal v.
  CHECK(l0cert::cardinality({3, 2, 50}, 0, 2, 2) == binom(3, 2) * 4);
  CHECK(l0cert::cardinality({3, 2, 50}, 0, 2, 1) == 0);
}

TEST_CASE("cardinality input validation") {
  CHECK_THROWS_AS(l0cert::cardinality({2, 1, 50}, 3, 0, 0), l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::cardinality({2, 1, 50}, -1, 0, 0), l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::cardinality({2, 1, 50}, 1, 3, 0), l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::cardinality({2, 1, 50}, 1, 0, -1), l0cert::validation_error);
}

TEST_CASE("cardinality is symmetric in u and v") {
  const NoiseParams p{6, 3, 40};
  for (int r = 0; r <= 6; ++r)
    for (int u = 0; u <= 6; ++u)
      for (int v = 0; v <= u; ++v)
        CHECK(l0cert::cardinality(p, r, u, v) == l0cert::cardinality(p, r, v, u));
}

TEST_CASE("cardinality row sums count Hamming shells") {
  // Summing over v for fixed u must give the size of the Hamming shell around
  // x: C(d, u) * K^u. Summing everything gives the full grid (K+1)^d.
  for (const NoiseParams p : {NoiseParams{5, 1, 50}, NoiseParams{5, 2, 30}, NoiseParams{4, 3, 70}}) {
    for (int r = 0; r <= p.d; ++r) {
      mpz_class total = 0;
      for (int u = 0; u <= p.d; ++u) {
        mpz_class row = 0;
        for (int v = 0; v <= p.d; ++v) row += l0cert::cardinality(p, r, u, v);
        mpz_class shell = binom(p.d, u);
        for (int i = 0; i < u; ++i) shell *= p.K;
        CHECK(row == shell);
        total += row;
      }
      mpz_class grid = 1;
      for (int i = 0; i < p.d; ++i) grid *= p.K + 1;
      CHECK(total == grid);
    }
  }
}

TEST_CASE("region table matches brute enumeration") {
  for (const NoiseParams p : {NoiseParams{1, 1, 80}, NoiseParams{2, 2, 60}, NoiseParams{3, 1, 50},
                              NoiseParams{4, 2, 30}, NoiseParams{3, 3, 95}, NoiseParams{5, 2, 20}}) {
    for (int r = 0; r <= p.d; ++r) {
      const RegionTable fast = l0cert::build_region_table(p, r);
      const RegionTable brute = l0cert::oracle::brute_regions(p, r);
      REQUIRE(fast.entries.size() == brute.entries.size());
      for (std::size_t i = 0; i < fast.entries.size(); ++i) {
        CHECK(fast.entries[i].u == brute.entries[i].u);
        CHECK(fast.entries[i].v == brute.entries[i].v);
        CHECK(fast.entries[i].count == brute.entries[i].count);
      }
    }
  }
}

TEST_CASE("d 1 K 1 r 1 table layout") {
  const RegionTable t = l0cert::build_region_table({1, 1, 80}, 1);
  REQUIRE(t.entries.size() == 2);
  // alpha = 4/5 > beta = 1/5: ratio (alpha/beta)^(v-u) sorts (0,1) first
  CHECK(t.entries[0].u == 0);
  CHECK(t.entries[0].v == 1);
  CHECK(t.entries[0].count == 1);
  CHECK(t.entries[1].u == 1);
  CHECK(t.entries[1].v == 0);
  CHECK(t.entries[1].count == 1);
  CHECK(l0cert::region_mass(t.entries[0], t.params, Side::x) == Rational(4, 5));
  CHECK(l0cert::region_mass(t.entries[0], t.params, Side::xbar) == Rational(1, 5));
  CHECK(l0cert::likelihood_ratio(t.entries[0], t.params) == Rational(4));
  CHECK(l0cert::likelihood_ratio(t.entries[1], t.params) == Rational(1, 4));
}

TEST_CASE("table order is ratio descending with deterministic ties") {
  const NoiseParams p{4, 2, 60};
  const RegionTable t = l0cert::build_region_table(p, 2);
  for (std::size_t i = 1; i < t.entries.size(); ++i) {
    const Rational prev = l0cert::likelihood_ratio(t.entries[i - 1], p);
    const Rational cur = l0cert::likelihood_ratio(t.entries[i], p);
    CHECK(prev >= cur);
    if (prev == cur) {
      const auto& a = t.entries[i - 1];
      const auto& b = t.entries[i];
      CHECK((a.u < b.u || (a.u == b.u && a.v < b.v)));
    }
  }
  // alpha = beta at alpha_pct = 50, K = 1: every ratio is 1, order is pure
  // tie-break and the table is still well formed.
  const RegionTable flat = l0cert::build_region_table({3, 1, 50}, 1);
  for (const auto& e : flat.entries)
    CHECK(l0cert::likelihood_ratio(e, flat.params) == Rational(1));
  for (std::size_t i = 1; i < flat.entries.size(); ++i) {
    const auto& a = flat.entries[i - 1];
    const auto& b = flat.entries[i];
    CHECK((a.u < b.u || (a.u == b.u && a.v < b.v)));
  }
}

TEST_CASE("masses on each side sum to one") {
  for (const NoiseParams p : {NoiseParams{3, 2, 70}, NoiseParams{5, 1, 45}, NoiseParams{2, 4, 10}}) {
    for (int r = 0; r <= p.d; ++r) {
      const RegionTable t = l0cert::build_region_table(p, r);
      Rational sx, sb;
      for (const auto& e : t.entries) {
        sx += l0cert::region_mass(e, p, Side::x);
        sb += l0cert::region_mass(e, p, Side::xbar);
      }
      CHECK(sx == Rational(1));
      CHECK(sb == Rational(1));
    }
  }
}

TEST_CASE("csv dump golden") {
  const RegionTable t = l0cert::build_region_table({1, 1, 80}, 1);
  std::ostringstream out;
  l0cert::dump_csv(t, out);
  CHECK(out.str() == "u,v,count\n0,1,1\n1,0,1\n");
}

TEST_CASE("build rejects out of range radius") {
  CHECK_THROWS_AS(l0cert::build_region_table({3, 1, 50}, 4), l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::build_region_table({3, 1, 50}, -1), l0cert::validation_error);
}
