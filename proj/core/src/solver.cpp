#include "l0cert/solver.hpp"

#include <stdexcept>
#include <string>

#include "l0cert/errors.hpp"
#include "l0cert/threshold.hpp"

namespace l0cert {

namespace {

void validate_regions(const std::vector<MassPair>& regions, bool require_bijective) {
  if (regions.empty()) throw validation_error("solver: empty region list");
  Rational sum_x, sum_xbar;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const MassPair& m = regions[i];
    if (m.mass_x.sign() < 0 || m.mass_xbar.sign() < 0)
      throw validation_error("solver: negative region mass");
    if (m.mass_x.is_zero() && m.mass_xbar.is_zero())
      throw validation_error("solver: region with no mass on either side");
    // declared ratio has to match the masses it summarizes
    if (m.mass_xbar.is_zero()) {
      if (!m.ratio.infinite)
        throw validation_error("solver: zero mass_xbar requires an infinite ratio");
    } else if (m.ratio.infinite || m.ratio.value != m.mass_x / m.mass_xbar) {
      throw validation_error("solver: ratio does not equal mass_x / mass_xbar");
    }
    if (require_bijective && (m.ratio.infinite || m.ratio.value.sign() <= 0))
      throw validation_error("solver: not invertible with infinite or zero ratios");
    if (i > 0 && regions[i - 1].ratio.cmp(m.ratio) < 0)
      throw validation_error("solver: regions not sorted by ratio descending");
    sum_x += m.mass_x;
    sum_xbar += m.mass_xbar;
  }
  if (sum_x != Rational(1)) throw validation_error("solver: mass_x does not sum to 1");
  if (sum_xbar != Rational(1)) throw validation_error("solver: mass_xbar does not sum to 1");
}

}  // namespace

std::vector<MassPair> mass_pairs(const RegionTable& table) {
  std::vector<MassPair> out;
  out.reserve(table.entries.size());
  for (const auto& e : table.entries) {
    MassPair m;
    m.mass_x = region_mass(e, table.params, Side::x);
    m.mass_xbar = region_mass(e, table.params, Side::xbar);
    m.ratio = RatioValue{false, likelihood_ratio(e, table.params)};
    out.push_back(std::move(m));
  }
  return out;
}

RhoResult rho(const std::vector<MassPair>& regions, const Rational& p) {
  validate_regions(regions, false);
  if (p.sign() < 0 || p > Rational(1)) throw validation_error("rho: p outside [0, 1]");

  RhoResult res;
  res.witness.g.assign(regions.size(), Rational(0));

  Rational acc_x, acc_xbar;
  std::size_t h = 0;
  while (h < regions.size() && acc_x + regions[h].mass_x < p) {
    res.witness.g[h] = 1;
    acc_x += regions[h].mass_x;
    acc_xbar += regions[h].mass_xbar;
    ++h;
  }
  // acc_x sweeps up to 1 >= p, so the loop always stops inside the list unless
  // p lands exactly on the total of a full prefix.
  res.witness.boundary = h;
  res.value = acc_xbar;
  if (h < regions.size() && p > acc_x) {
    const MassPair& m = regions[h];
    const Rational fill = (p - acc_x) / m.mass_x;
    res.witness.g[h] = fill;
    res.value += fill * m.mass_xbar;
  }

  // The witness must reproduce p and rho exactly; any mismatch means the
  // greedy fill above is broken, so fail loudly rather than return a bogus
  // certificate.
  Rational check_x, check_xbar;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    check_x += res.witness.g[i] * regions[i].mass_x;
    check_xbar += res.witness.g[i] * regions[i].mass_xbar;
  }
  if (check_x != p || check_xbar != res.value)
    throw std::logic_error("rho: witness identities violated");
  return res;
}

Rational rho_inverse(const std::vector<MassPair>& regions, const Rational& target) {
  validate_regions(regions, true);
  if (target.sign() < 0 || target > Rational(1))
    throw validation_error("rho_inverse: target outside [0, 1]");

  Rational acc_x, acc_xbar;
  for (const MassPair& m : regions) {
    if (acc_xbar + m.mass_xbar < target) {
      acc_x += m.mass_x;
      acc_xbar += m.mass_xbar;
      continue;
    }
    // crossing region: rho grows at slope 1/ratio here, invert linearly
    return acc_x + (target - acc_xbar) * m.ratio.value;
  }
  return acc_x;  // target == 1 and the sweep consumed every region
}

std::optional<int> certified_radius(const Rational& p, const CertTable& table) {
  std::optional<int> radius;
  for (int r = 0; r < static_cast<int>(table.rows.size()); ++r) {
    if (p > row_value(table, r))
      radius = r;
    else
      break;  // rows are non-decreasing, nothing further can pass
  }
  return radius;
}

}  // namespace l0cert
