#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l0cert/rational.hpp"
#include "l0cert/threshold.hpp"

namespace l0cert {

// One test point's prediction, in one of two shapes. Sampled predictions carry
// the vote count for the predicted class out of n_samples noisy draws; exact
// predictions carry the class-1 probability as a rational and bypass
// estimation entirely (predicted class and its probability derive from it).
struct PredictionRecord {
  std::string id;
  int label = 0;
  int predicted = 0;          // meaningful for sampled records
  long success_count = 0;     // votes for the predicted class
  long n_samples = 0;
  std::optional<Rational> p_exact;  // class-1 probability, exact shape only
};

// One-sided lower confidence bound on a binomial proportion given success
// votes out of n: the 1-confidence quantile of Beta(success, n - success + 1),
// solved by bisection on the regularized incomplete beta to an absolute
// tolerance of 1e-12. success = 0 gives 0; success = n has the closed form
// (1 - confidence)^(1/n).
double clopper_pearson_lower(long success, long n, double confidence);

// Per-record certification against a threshold table. p_lower is the bound
// (or exact probability) for the predicted class; radius the certified radius
// at that bound, empty when the record abstains (p_lower <= 1/2).
struct CertRow {
  std::string id;
  int predicted = 0;
  Rational p_lower;
  std::optional<int> radius;
  bool correct = false;
};

std::vector<CertRow> certify_records(const std::vector<PredictionRecord>& records,
                                     const CertTable& table, double confidence = 0.999);

// Certified accuracy at radius r: the fraction of records whose prediction
// matches the label and whose certified radius reaches r. Abstentions count 0.
double acc_at_r(const std::vector<PredictionRecord>& records, const CertTable& table, int r,
                double confidence = 0.999);

// Mean certified radius with respect to the true labels: records predicted
// incorrectly or abstaining contribute 0.
double mean_radius(const std::vector<PredictionRecord>& records, const CertTable& table,
                   double confidence = 0.999);

// One scored instance for the adversarial AUC: its clean score, and its score
// after the strongest within-budget perturbation, which can only lower a
// positive's score and only raise a negative's.
struct AucInstance {
  bool positive = false;
  double score_clean = 0.0;
  double score_adv = 0.0;
};

enum class AucMode { exhaustive, greedy };

// Worst-case AUC when an adversary may perturb at most k of the instances.
// Pairs compare with ties worth 1/2. Exhaustive mode enumerates every subset
// of at most k instances and is exact, but refuses instances with more than
// 20 points; greedy mode perturbs the instance with the largest AUC drop, k
// times, and upper-bounds the true minimum.
double adversarial_auc(const std::vector<AucInstance>& instances, int k, AucMode mode);

// JSON-lines prediction dumps. Each line must be exactly one of
//   {"id": ..., "label": 0/1, "predicted": 0/1, "success_count": n, "n_samples": N}
//   {"id": ..., "label": 0/1, "p_exact": "num/den"}
// Errors carry the offending line number. Records are returned sorted by id.
std::vector<PredictionRecord> ingest_predictions(const std::filesystem::path& path);
void write_predictions(const std::vector<PredictionRecord>& records, std::ostream& out);

// Report CSV: header "id,p_lower,radius,correct", radius "abstain" when empty.
void write_report_csv(const std::vector<CertRow>& rows, std::ostream& out);

}  // namespace l0cert
