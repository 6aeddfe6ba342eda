#include "l0cert/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "l0cert/errors.hpp"
#include "l0cert/solver.hpp"

namespace l0cert {

namespace {

// Regularized incomplete beta I_x(a, b) by the continued fraction (modified
// Lentz), with the symmetry flip for fast convergence. Plenty for the 1e-12
// bisection tolerance below.
double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 3e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw std::runtime_error("beta_cf: continued fraction did not converge");
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

Rational predicted_probability(const PredictionRecord& rec, double confidence, int* predicted) {
  if (rec.p_exact) {
    const Rational& p1 = *rec.p_exact;
    const bool class1 = p1 > Rational(1, 2);
    *predicted = class1 ? 1 : 0;
    return class1 ? p1 : Rational(1) - p1;
  }
  *predicted = rec.predicted;
  return Rational::from_double(clopper_pearson_lower(rec.success_count, rec.n_samples, confidence));
}

double pair_score(double pos, double neg) {
  if (pos > neg) return 1.0;
  if (pos < neg) return 0.0;
  return 0.5;
}

double auc_with(const std::vector<AucInstance>& instances, const std::vector<char>& perturbed) {
  double sum = 0.0;
  long n = 0, m = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!instances[i].positive) continue;
    ++n;
    const double pos = perturbed[i] ? instances[i].score_adv : instances[i].score_clean;
    for (std::size_t j = 0; j < instances.size(); ++j) {
      if (instances[j].positive) continue;
      const double neg = perturbed[j] ? instances[j].score_adv : instances[j].score_clean;
      sum += pair_score(pos, neg);
    }
  }
  m = static_cast<long>(instances.size()) - n;
  if (n == 0 || m == 0) throw validation_error("adversarial_auc: need both classes");
  return sum / (static_cast<double>(n) * static_cast<double>(m));
}

}  // namespace

double clopper_pearson_lower(long success, long n, double confidence) {
  if (n <= 0) throw validation_error("clopper_pearson_lower: n must be positive");
  if (success < 0 || success > n)
    throw validation_error("clopper_pearson_lower: success outside 0..n");
  if (!(confidence > 0.0) || !(confidence < 1.0))
    throw validation_error("clopper_pearson_lower: confidence outside (0, 1)");
  if (success == 0) return 0.0;
  const double q = 1.0 - confidence;
  if (success == n) return std::pow(q, 1.0 / static_cast<double>(n));

  const double a = static_cast<double>(success);
  const double b = static_cast<double>(n - success + 1);
  double lo = 0.0, hi = 1.0;
  // I_x(a, b) is strictly increasing in x; stop at an interval below 1e-12
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (reg_inc_beta(a, b, mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<CertRow> certify_records(const std::vector<PredictionRecord>& records,
                                     const CertTable& table, double confidence) {
  std::vector<CertRow> rows;
  rows.reserve(records.size());
  for (const auto& rec : records) {
    CertRow row;
    row.id = rec.id;
    row.p_lower = predicted_probability(rec, confidence, &row.predicted);
    row.radius = certified_radius(row.p_lower, table);
    row.correct = row.predicted == rec.label;
    rows.push_back(std::move(row));
  }
  return rows;
}

double acc_at_r(const std::vector<PredictionRecord>& records, const CertTable& table, int r,
                double confidence) {
  if (records.empty()) throw validation_error("acc_at_r: no records");
  if (r < 0) throw validation_error("acc_at_r: r must be >= 0");
  long hits = 0;
  for (const CertRow& row : certify_records(records, table, confidence))
    if (row.correct && row.radius && *row.radius >= r) ++hits;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double mean_radius(const std::vector<PredictionRecord>& records, const CertTable& table,
                   double confidence) {
  if (records.empty()) throw validation_error("mean_radius: no records");
  double sum = 0.0;
  for (const CertRow& row : certify_records(records, table, confidence))
    if (row.correct && row.radius) sum += static_cast<double>(*row.radius);
  return sum / static_cast<double>(records.size());
}

double adversarial_auc(const std::vector<AucInstance>& instances, int k, AucMode mode) {
  if (instances.empty()) throw validation_error("adversarial_auc: no instances");
  if (k < 0) throw validation_error("adversarial_auc: k must be >= 0");
  if (k > static_cast<int>(instances.size()))
    throw validation_error("adversarial_auc: k exceeds the number of instances");
  for (const auto& inst : instances) {
    if (inst.positive && inst.score_adv > inst.score_clean)
      throw validation_error("adversarial_auc: a positive's adversarial score exceeds its clean score");
    if (!inst.positive && inst.score_adv < inst.score_clean)
      throw validation_error("adversarial_auc: a negative's adversarial score is below its clean score");
  }

  const std::size_t total = instances.size();
  std::vector<char> perturbed(total, 0);

  if (mode == AucMode::exhaustive) {
    if (total > 20)
      throw unsupported_size_error(
          "adversarial_auc: exhaustive mode handles at most 20 instances (" +
          std::to_string(total) + " given); use greedy mode");
    double best = auc_with(instances, perturbed);
    for (std::uint32_t mask = 1; mask < (1u << total); ++mask) {
      if (std::popcount(mask) > k) continue;
      for (std::size_t i = 0; i < total; ++i) perturbed[i] = (mask >> i) & 1u;
      best = std::min(best, auc_with(instances, perturbed));
    }
    return best;
  }

  // greedy: k rounds, each perturbing the instance with the largest drop
  double current = auc_with(instances, perturbed);
  for (int round = 0; round < k; ++round) {
    double best = current;
    int best_i = -1;
    for (std::size_t i = 0; i < total; ++i) {
      if (perturbed[i]) continue;
      perturbed[i] = 1;
      const double v = auc_with(instances, perturbed);
      perturbed[i] = 0;
      if (v < best) {
        best = v;
        best_i = static_cast<int>(i);
      }
    }
    if (best_i < 0) break;  // no strict improvement left
    perturbed[static_cast<std::size_t>(best_i)] = 1;
    current = best;
  }
  return current;
}

std::vector<PredictionRecord> ingest_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("ingest_predictions: cannot open " + path.string());
  std::vector<PredictionRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("ingest_predictions: bad JSON at " + where + ": " + e.what());
    }
    PredictionRecord rec;
    try {
      if (!j.is_object() || !j.contains("id") || !j.contains("label"))
        throw validation_error("record needs id and label");
      rec.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      rec.label = j["label"].get<int>();
      if (rec.label != 0 && rec.label != 1) throw validation_error("label must be 0/1");
      const bool has_counts = j.contains("success_count") || j.contains("n_samples") ||
                              j.contains("predicted");
      const bool has_exact = j.contains("p_exact");
      if (has_counts == has_exact)
        throw validation_error("record must carry either counts or p_exact, not both");
      if (has_exact) {
        rec.p_exact = Rational::from_fraction_string(j["p_exact"].get<std::string>());
        if (rec.p_exact->sign() < 0 || *rec.p_exact > Rational(1))
          throw validation_error("p_exact outside [0, 1]");
      } else {
        rec.predicted = j.at("predicted").get<int>();
        rec.success_count = j.at("success_count").get<long>();
        rec.n_samples = j.at("n_samples").get<long>();
        if (rec.predicted != 0 && rec.predicted != 1)
          throw validation_error("predicted must be 0/1");
        if (rec.n_samples <= 0) throw validation_error("n_samples must be positive");
        if (rec.success_count < 0 || rec.success_count > rec.n_samples)
          throw validation_error("success_count outside 0..n_samples");
      }
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("ingest_predictions: bad record at " + where + ": " + e.what());
    } catch (const validation_error& e) {
      throw validation_error("ingest_predictions: bad record at " + where + ": " + e.what());
    }
    records.push_back(std::move(rec));
  }
  std::sort(records.begin(), records.end(),
            [](const PredictionRecord& a, const PredictionRecord& b) { return a.id < b.id; });
  return records;
}

void write_predictions(const std::vector<PredictionRecord>& records, std::ostream& out) {
  for (const auto& rec : records) {
    nlohmann::json j;
    j["id"] = rec.id;
    j["label"] = rec.label;
    if (rec.p_exact) {
      j["p_exact"] = rec.p_exact->num().get_str() + "/" + rec.p_exact->den().get_str();
    } else {
      j["predicted"] = rec.predicted;
      j["success_count"] = rec.success_count;
      j["n_samples"] = rec.n_samples;
    }
    out << j.dump() << '\n';
  }
}

void write_report_csv(const std::vector<CertRow>& rows, std::ostream& out) {
  out << "id,p_lower,radius,correct\n";
  for (const auto& row : rows) {
    out << row.id << ',';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12f", row.p_lower.to_double());
    out << buf << ',';
    if (row.radius)
      out << *row.radius;
    else
      out << "abstain";
    out << ',' << (row.correct ? 1 : 0) << '\n';
  }
}

}  // namespace l0cert
