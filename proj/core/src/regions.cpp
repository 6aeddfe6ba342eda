#include "l0cert/regions.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "l0cert/errors.hpp"

namespace l0cert {

namespace {

std::vector<mpz_class> factorial_table(int n) {
  std::vector<mpz_class> fact(static_cast<std::size_t>(n) + 1);
  fact[0] = 1;
  for (int i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;
  return fact;
}

// Core of the cardinality formula. Counts points z with hamming_distance(x, z)
// = u and hamming_distance(xbar, z) = v by splitting z over the r coordinates
// where x and xbar disagree and the d-r where they agree. i is the number of
// agreeing coordinates moved off the common value; within the disagreeing
// block, j is the number of coordinates moved off both endpoint values, which
// the two distance constraints pin to j = u + v - 2i - r.
mpz_class cardinality_impl(const NoiseParams& params, int r, int u, int v,
                           const std::vector<mpz_class>& fact) {
  if (u > v) std::swap(u, v);
  const int d = params.d;
  const int K = params.K;
  const long i_lo = std::max(0, v - r);
  // (u + v - r) / 2 truncates toward zero, but for negative u + v - r the
  // range is empty regardless because i_hi < 0 <= i_lo.
  long i_hi = std::min({static_cast<long>(u), static_cast<long>(d - r),
                        static_cast<long>(u + v - r) / 2});
  if (i_lo > i_hi) return 0;
  if (K == 1) {
    // Only j = 0 survives the (K-1)^j factor, pinning i and the parity.
    if ((u + v - r) % 2 != 0) return 0;
    const long i = static_cast<long>(u + v - r) / 2;
    if (i < i_lo || i > i_hi) return 0;
    mpz_class term = fact[r];
    term /= fact[u - i];
    term /= fact[v - i];
    term *= fact[d - r];
    term /= fact[d - r - i];
    term /= fact[i];
    return term;
  }
  mpz_class total = 0;
  mpz_class term, binom;
  for (long i = i_lo; i <= i_hi; ++i) {
    const long j = u + v - 2 * i - r;
    if (j < 0) continue;
    // multinomial over the r disagreeing coordinates
    term = fact[r];
    term /= fact[u - i - j];
    term /= fact[v - i - j];
    term /= fact[j];
    if (j > 0) {
      mpz_class p;
      mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(K - 1),
                    static_cast<unsigned long>(j));
      term *= p;
    }
    // choose and recolor i of the d-r agreeing coordinates
    binom = fact[d - r];
    binom /= fact[d - r - i];
    binom /= fact[i];
    term *= binom;
    if (i > 0) {
      mpz_class p;
      mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(K),
                    static_cast<unsigned long>(i));
      term *= p;
    }
    total += term;
  }
  return total;
}

}  // namespace

mpz_class cardinality(const NoiseParams& params, int r, int u, int v) {
  validate(params);
  if (r < 0 || r > params.d)
    throw validation_error("cardinality: r=" + std::to_string(r) + " outside 0..d");
  if (u < 0 || u > params.d || v < 0 || v > params.d)
    throw validation_error("cardinality: (u, v) outside 0..d");
  return cardinality_impl(params, r, u, v, factorial_table(params.d));
}

RegionTable build_region_table(const NoiseParams& params, int r) {
  validate(params);
  if (r < 0 || r > params.d)
    throw validation_error("build_region_table: r=" + std::to_string(r) + " outside 0..d");
  const auto fact = factorial_table(params.d);

  RegionTable table{params, r, {}};
  for (int u = 0; u <= params.d; ++u) {
    for (int v = 0; v <= params.d; ++v) {
      mpz_class count = cardinality_impl(params, r, u, v, fact);
      if (count != 0) table.entries.push_back({u, v, std::move(count)});
    }
  }

  // Ratio (alpha/beta)^(v-u) orders by v-u when alpha > beta, but alpha can be
  // at or below beta (alpha_pct = 50, K = 1 makes every ratio 1), so sort on
  // the exact rational value.
  const Rational ab = alpha(params) / beta(params);
  std::sort(table.entries.begin(), table.entries.end(),
            [&ab](const RegionEntry& a, const RegionEntry& b) {
              const int cmp = ab.pow(a.v - a.u).cmp(ab.pow(b.v - b.u));
              if (cmp != 0) return cmp > 0;
              if (a.u != b.u) return a.u < b.u;
              return a.v < b.v;
            });
  return table;
}

Rational region_mass(const RegionEntry& entry, const NoiseParams& params, Side side) {
  const int h = side == Side::x ? entry.u : entry.v;
  return Rational(entry.count) * alpha(params).pow(params.d - h) * beta(params).pow(h);
}

Rational likelihood_ratio(const RegionEntry& entry, const NoiseParams& params) {
  return (alpha(params) / beta(params)).pow(entry.v - entry.u);
}

void dump_csv(const RegionTable& table, std::ostream& out) {
  out << "u,v,count\n";
  for (const auto& e : table.entries)
    out << e.u << ',' << e.v << ',' << e.count.get_str() << '\n';
}

}  // namespace l0cert
