#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "l0cert/noise.hpp"
#include "l0cert/rational.hpp"

namespace l0cert {

struct CertTableMeta {
  std::vector<double> row_seconds;  // wall time per computed row, by r
  std::string note;                 // fixed provenance note, see threshold.cpp
};

// Precomputed certification thresholds. rows[r] is a decimal string with
// precision_c fractional digits: the smallest decimal of that precision that
// upper-bounds the exact probability needed to certify radius r. A prediction
// certifies radius r iff its probability strictly exceeds rows[r]. Row 0 is
// always exactly 0.5.
struct CertTable {
  NoiseParams params;
  int precision_c = 20;
  std::vector<std::string> rows;  // index r = 0..r_max
  CertTableMeta meta;

  friend bool operator==(const CertTable& a, const CertTable& b) {
    return a.params.d == b.params.d && a.params.K == b.params.K &&
           a.params.alpha_pct == b.params.alpha_pct && a.precision_c == b.precision_c &&
           a.rows == b.rows;
  }
};

// Certification threshold for radius r, rounded up to precision_c decimal
// digits. The whole computation is integer-only: region masses are scaled by
// (100K)^d so they become exact big integers, the greedy sweep accumulates
// them against the halfway target, and the crossing region's residual is kept
// as an exact numerator/denominator pair. The result over-shoots the exact
// threshold by less than 10^-precision_c and never undershoots, so certifying
// against it is always sound. Requires 1 <= r <= d and precision_c >= 1.
std::string threshold_bigint(const NoiseParams& params, int r, int precision_c);

using ProgressFn = std::function<void(int r, double seconds)>;

// Rows 0..r_max. Rows are independent, so they are distributed over a pool of
// worker threads; the result is identical for every worker count. workers <= 0
// selects the hardware concurrency. The optional callback fires once per
// finished row.
CertTable build_cert_table(const NoiseParams& params, int r_max, int precision_c,
                           int workers = 1, const ProgressFn& progress = {});

// Text format, one file per table:
//   # d=<int> K=<int> alpha_pct=<int> c=<int> version=<string>
//   <r><TAB><decimal>
// Writing is byte-deterministic. Loading validates the header, the row format,
// contiguous radii from 0, row 0 equal to 0.5 and non-decreasing rows.
void save_table(const CertTable& table, const std::filesystem::path& path);
CertTable load_table(const std::filesystem::path& path);

// Same, then rejects tables whose header does not match the expected noise
// parameters.
CertTable load_table(const std::filesystem::path& path, const NoiseParams& expected);

// Exact value of rows[r].
Rational row_value(const CertTable& table, int r);

}  // namespace l0cert
