#include "l0cert/threshold.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "l0cert/errors.hpp"
#include "l0cert/regions.hpp"
#include "l0cert/version.hpp"

namespace l0cert {

namespace {

// Fixed provenance note embedded in saved tables: the sweep treats hitting the
// halfway target exactly as a crossing, and the crossing residual is kept as
// an exact fraction before the final round-up. Both choices are value-neutral
// (the exact threshold is continuous across the region boundary) but pinning
// them keeps files byte-reproducible.
constexpr const char* kTableNote = "crossing=at-equality residual=exact";

mpz_class pow_ui(unsigned long base, unsigned long exp) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), base, exp);
  return p;
}

std::string format_row(const mpz_class& units, int precision_c) {
  // units in [1, 10^c]; 10^c prints as "1." followed by zeros
  const mpz_class one = pow_ui(10, static_cast<unsigned long>(precision_c));
  std::string digits = units.get_str();
  if (units == one) return "1." + std::string(static_cast<std::size_t>(precision_c), '0');
  if (static_cast<int>(digits.size()) < precision_c)
    digits.insert(0, static_cast<std::size_t>(precision_c) - digits.size(), '0');
  return "0." + digits;
}

}  // namespace

std::string threshold_bigint(const NoiseParams& params, int r, int precision_c) {
  validate(params);
  if (r < 1 || r > params.d)
    throw validation_error("threshold_bigint: r=" + std::to_string(r) + " outside 1..d");
  if (precision_c < 1) throw validation_error("threshold_bigint: precision must be >= 1");

  const int d = params.d;
  const unsigned long K = static_cast<unsigned long>(params.K);
  // Integer-scaled noise weights: multiplying every point mass by (100K)^d
  // turns alpha into atil = K * alpha_pct and beta into btil = 100 - alpha_pct
  // per coordinate, with the masses on each side summing to (100K)^d.
  const unsigned long atil = K * static_cast<unsigned long>(params.alpha_pct);
  const unsigned long btil = static_cast<unsigned long>(100 - params.alpha_pct);

  std::vector<mpz_class> apow(static_cast<std::size_t>(d) + 1);
  std::vector<mpz_class> bpow(static_cast<std::size_t>(d) + 1);
  apow[0] = 1;
  bpow[0] = 1;
  for (int k = 1; k <= d; ++k) {
    apow[k] = apow[k - 1] * atil;
    bpow[k] = bpow[k - 1] * btil;
  }

  // Halfway target: half the scaled total mass, 50K * (100K)^(d-1).
  const mpz_class total = pow_ui(100 * K, static_cast<unsigned long>(d));
  const mpz_class target = total / 2;

  const RegionTable table = build_region_table(params, r);

  // Greedy sweep in decreasing ratio order. acc_x / acc_xbar are the scaled
  // masses of fully taken regions; the first region that lifts acc_xbar to
  // the target is the crossing.
  mpz_class acc_x = 0;
  mpz_class acc_xbar = 0;
  mpz_class num, den;
  bool crossed = false;
  for (const RegionEntry& e : table.entries) {
    const mpz_class mass_x = apow[d - e.u] * bpow[e.u] * e.count;
    const mpz_class mass_xbar = apow[d - e.v] * bpow[e.v] * e.count;
    if (acc_xbar + mass_xbar < target) {
      acc_x += mass_x;
      acc_xbar += mass_xbar;
      continue;
    }
    // Crossing region. The exact threshold in scaled units is
    //   acc_x + (target - acc_xbar) * mass_x / mass_xbar,
    // kept as a fraction num/den instead of rounding to whole region units;
    // rounding here would inflate the threshold by up to a full point mass,
    // which is far coarser than the decimal grid below.
    num = acc_x * mass_xbar + (target - acc_xbar) * mass_x;
    den = mass_xbar;
    crossed = true;
    break;
  }
  if (!crossed) throw std::logic_error("threshold_bigint: sweep missed the halfway target");

  // Round up to the decimal grid: the smallest units in [1, 10^c] with
  // num/den <= units * 10^-c * total. For c <= d the comparison stays in
  // integers via units * (10K)^c * (100K)^(d-c); a binary search keeps the
  // factors small. For c > d that split is impossible, so fall back to a
  // single ceiling division with the target scaled by 10^c.
  const unsigned long c = static_cast<unsigned long>(precision_c);
  mpz_class units;
  if (precision_c <= d) {
    const mpz_class step = pow_ui(10 * K, c) * pow_ui(100 * K, static_cast<unsigned long>(d) - c) * den;
    mpz_class lo = 1;
    mpz_class hi = pow_ui(10, c);
    while (lo < hi) {
      mpz_class mid = (lo + hi) / 2;
      if (mid * step >= num)
        hi = mid;
      else
        lo = mid + 1;
    }
    units = lo;
  } else {
    mpz_class scaled = num * pow_ui(10, c);
    mpz_class div = den * total;
    mpz_cdiv_q(units.get_mpz_t(), scaled.get_mpz_t(), div.get_mpz_t());
  }
  return format_row(units, precision_c);
}

CertTable build_cert_table(const NoiseParams& params, int r_max, int precision_c, int workers,
                           const ProgressFn& progress) {
  validate(params);
  if (r_max < 0 || r_max > params.d)
    throw validation_error("build_cert_table: r_max outside 0..d");
  if (precision_c < 1) throw validation_error("build_cert_table: precision must be >= 1");

  CertTable table;
  table.params = params;
  table.precision_c = precision_c;
  table.rows.assign(static_cast<std::size_t>(r_max) + 1, {});
  table.meta.row_seconds.assign(static_cast<std::size_t>(r_max) + 1, 0.0);
  table.meta.note = kTableNote;

  // r = 0 is the unperturbed pair: the threshold is exactly one half.
  table.rows[0] = "0." + ("5" + std::string(static_cast<std::size_t>(precision_c) - 1, '0'));

  if (r_max == 0) return table;

  int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min(n_workers, r_max);

  std::atomic<int> next{1};
  std::mutex mu;
  std::exception_ptr failure;

  auto run = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r > r_max) return;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        std::string row = threshold_bigint(params, r, precision_c);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard<std::mutex> lock(mu);
        table.rows[r] = std::move(row);
        table.meta.row_seconds[r] = secs;
        if (progress) progress(r, secs);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return table;
}

void save_table(const CertTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("save_table: cannot open " + path.string());
  out << "# d=" << table.params.d << " K=" << table.params.K
      << " alpha_pct=" << table.params.alpha_pct << " c=" << table.precision_c
      << " version=" << kVersion << "\n";
  out << "# " << kTableNote << "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) out << r << '\t' << table.rows[r] << '\n';
  if (!out) throw validation_error("save_table: write failed for " + path.string());
}

CertTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("load_table: cannot open " + path.string());

  CertTable table;
  std::string line;
  bool header_seen = false;
  int expected_r = 0;
  Rational prev_row;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      bool any_field = false;
      NoiseParams p;
      int c = 0;
      std::string version;
      while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        try {
          if (key == "d") p.d = std::stoi(val);
          else if (key == "K") p.K = std::stoi(val);
          else if (key == "alpha_pct") p.alpha_pct = std::stoi(val);
          else if (key == "c") c = std::stoi(val);
          else if (key == "version") version = val;
          else continue;
        } catch (const std::exception&) {
          throw validation_error("load_table: bad header value at " + where);
        }
        any_field = true;
      }
      if (!any_field) continue;  // free-form comment line
      if (header_seen) throw validation_error("load_table: duplicate header at " + where);
      if (version != kVersion)
        throw validation_error("load_table: version '" + version + "' does not match '" +
                               kVersion + "' at " + where);
      if (c < 1) throw validation_error("load_table: missing or invalid c at " + where);
      validate(p);
      table.params = p;
      table.precision_c = c;
      header_seen = true;
      continue;
    }
    if (!header_seen) throw validation_error("load_table: row before header at " + where);
    std::istringstream rs(line);
    int r = -1;
    std::string value;
    if (!(rs >> r >> value) || r != expected_r)
      throw validation_error("load_table: expected row r=" + std::to_string(expected_r) +
                             " at " + where);
    // value must be exactly "<0|1>.<c digits>"
    bool shape_ok = value.size() == static_cast<std::size_t>(table.precision_c) + 2 &&
                    (value[0] == '0' || value[0] == '1') && value[1] == '.';
    if (shape_ok)
      for (std::size_t i = 2; i < value.size(); ++i)
        shape_ok = shape_ok && value[i] >= '0' && value[i] <= '9';
    if (!shape_ok) throw validation_error("load_table: malformed row value at " + where);
    Rational row = Rational::from_decimal_string(value);
    if (r == 0 && row != Rational(1, 2))
      throw validation_error("load_table: row 0 must be exactly 0.5 at " + where);
    if (r > 0 && row < prev_row)
      throw validation_error("load_table: rows decrease at " + where);
    if (row > Rational(1)) throw validation_error("load_table: row above 1 at " + where);
    prev_row = row;
    table.rows.push_back(value);
    ++expected_r;
  }
  if (!header_seen) throw validation_error("load_table: missing header in " + path.string());
  if (table.rows.empty()) throw validation_error("load_table: no rows in " + path.string());
  if (static_cast<int>(table.rows.size()) - 1 > table.params.d)
    throw validation_error("load_table: rows exceed d in " + path.string());
  table.meta.note = kTableNote;
  return table;
}

CertTable load_table(const std::filesystem::path& path, const NoiseParams& expected) {
  CertTable table = load_table(path);
  if (table.params.d != expected.d || table.params.K != expected.K ||
      table.params.alpha_pct != expected.alpha_pct)
    throw validation_error("load_table: header (d=" + std::to_string(table.params.d) +
                           ", K=" + std::to_string(table.params.K) +
                           ", alpha_pct=" + std::to_string(table.params.alpha_pct) +
                           ") does not match expected (d=" + std::to_string(expected.d) +
                           ", K=" + std::to_string(expected.K) +
                           ", alpha_pct=" + std::to_string(expected.alpha_pct) + ")");
  return table;
}

Rational row_value(const CertTable& table, int r) {
  if (r < 0 || r >= static_cast<int>(table.rows.size()))
    throw validation_error("row_value: r outside table");
  return Rational::from_decimal_string(table.rows[static_cast<std::size_t>(r)]);
}

}  // namespace l0cert
