#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "l0cert/errors.hpp"
#include "l0cert/eval.hpp"
#include "l0cert/solver.hpp"
#include "l0cert/threshold.hpp"
#include "test_support.hpp"

using l0cert::AucInstance;
using l0cert::AucMode;
using l0cert::CertTable;
using l0cert::PredictionRecord;
using l0cert::Rational;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("l0cert_eval_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

PredictionRecord exact_record(std::string id, int label, Rational p1) {
  PredictionRecord rec;
  rec.id = std::move(id);
  rec.label = label;
  rec.p_exact = std::move(p1);
  return rec;
}

PredictionRecord counted_record(std::string id, int label, int predicted, long success,
                                long n) {
  PredictionRecord rec;
  rec.id = std::move(id);
  rec.label = label;
  rec.predicted = predicted;
  rec.success_count = success;
  rec.n_samples = n;
  return rec;
}

}  // namespace

TEST_CASE("clopper pearson closed forms") {
  // no successes pin the bound at zero; all successes have the closed form
  // (1 - confidence)^(1/n)
  CHECK(l0cert::clopper_pearson_lower(0, 100, 0.999) == 0.0);
  for (long n : {1L, 10L, 1000L})
    CHECK(l0cert::clopper_pearson_lower(n, n, 0.999) ==
          doctest::Approx(std::pow(0.001, 1.0 / static_cast<double>(n))).epsilon(1e-12));
  // n = 100000 all successes: the bound used throughout the sampled pipeline
  CHECK(l0cert::clopper_pearson_lower(100000, 100000, 0.999) ==
        doctest::Approx(std::pow(0.001, 1e-5)).epsilon(1e-12));
  CHECK(l0cert::clopper_pearson_lower(100000, 100000, 0.999) ==
        doctest::Approx(0.99993092483).epsilon(1e-9));
}

TEST_CASE("clopper pearson against the binomial tail") {
  // the bound is the 1-confidence quantile of Beta(k, n-k+1); recompute it
  // from the binomial tail identity plus bisection, sharing no code with the
  // continued fraction path
  for (const auto& [k, n] : std::vector<std::pair<long, long>>{
           {1, 10}, {5, 10}, {9, 10}, {50, 100}, {99, 100}, {720, 1000}, {999, 1000}}) {
    for (double conf : {0.9, 0.99, 0.999}) {
      const double lib = l0cert::clopper_pearson_lower(k, n, conf);
      const double ref = support::beta_quantile_reference(k, n - k + 1, 1.0 - conf);
      CHECK(lib == doctest::Approx(ref).epsilon(1e-9));
    }
  }
}

TEST_CASE("clopper pearson basic properties") {
  // monotone in successes, antitone in confidence, always below the MLE
  double prev = -1.0;
  for (long k = 0; k <= 20; ++k) {
    const double v = l0cert::clopper_pearson_lower(k, 20, 0.999);
    CHECK(v >= prev);
    if (k > 0) CHECK(v < static_cast<double>(k) / 20.0);
    prev = v;
  }
  CHECK(l0cert::clopper_pearson_lower(90, 100, 0.999) <
        l0cert::clopper_pearson_lower(90, 100, 0.9));
  CHECK_THROWS_AS(l0cert::clopper_pearson_lower(5, 0, 0.999), l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::clopper_pearson_lower(-1, 10, 0.999), l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::clopper_pearson_lower(11, 10, 0.999), l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::clopper_pearson_lower(5, 10, 0.0), l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::clopper_pearson_lower(5, 10, 1.0), l0cert::validation_error);
}

TEST_CASE("certification of exact records") {
  const CertTable table = l0cert::build_cert_table({4, 1, 80}, 4, 6);
  std::vector<PredictionRecord> records;
  records.push_back(exact_record("a", 1, Rational(9, 10)));   // class 1, p = 9/10
  records.push_back(exact_record("b", 0, Rational(1, 10)));   // class 0, p = 9/10
  records.push_back(exact_record("c", 1, Rational(2, 5)));    // predicts 0, wrong
  records.push_back(exact_record("d", 0, Rational(1, 2)));    // exactly 1/2: class 0, abstains
  const auto rows = l0cert::certify_records(records, table);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].predicted == 1);
  CHECK(rows[0].p_lower == Rational(9, 10));
  CHECK(rows[0].correct);
  CHECK(rows[1].predicted == 0);
  CHECK(rows[1].p_lower == Rational(9, 10));
  CHECK(rows[1].correct);
  CHECK(rows[0].radius == rows[1].radius);  // symmetric probabilities
  CHECK(rows[2].predicted == 0);
  CHECK(rows[2].p_lower == Rational(3, 5));
  CHECK(!rows[2].correct);
  CHECK(rows[3].predicted == 0);
  CHECK(rows[3].p_lower == Rational(1, 2));
  CHECK(!rows[3].radius.has_value());  // p = 1/2 certifies nothing
}

TEST_CASE("certification of sampled records uses the binomial bound") {
  const CertTable table = l0cert::build_cert_table({4, 1, 80}, 4, 6);
  std::vector<PredictionRecord> records;
  records.push_back(counted_record("s", 1, 1, 998, 1000));
  const auto rows = l0cert::certify_records(records, table, 0.999);
  REQUIRE(rows.size() == 1);
  const double expect = l0cert::clopper_pearson_lower(998, 1000, 0.999);
  CHECK(rows[0].p_lower.to_double() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rows[0].predicted == 1);
  // the bound, not the MLE, drives the radius
  CHECK(rows[0].p_lower < Rational(998, 1000));
}

TEST_CASE("accuracy at radius") {
  const CertTable table = l0cert::build_cert_table({4, 1, 80}, 4, 6);
  // thresholds: row 1 = 0.875, row 2+ higher. Build records straddling them.
  std::vector<PredictionRecord> records;
  records.push_back(exact_record("a", 1, Rational(99, 100)));  // certifies deep
  records.push_back(exact_record("b", 1, Rational(9, 10)));    // above row 1 only
  records.push_back(exact_record("c", 1, Rational(6, 10)));    // r = 0 only
  records.push_back(exact_record("d", 0, Rational(9, 10)));    // wrong prediction
  records.push_back(exact_record("e", 0, Rational(1, 2)));     // abstains
  const double n = 5.0;
  CHECK(l0cert::acc_at_r(records, table, 0) == doctest::Approx(3.0 / n));
  CHECK(l0cert::acc_at_r(records, table, 1) == doctest::Approx(2.0 / n));
  const auto rows = l0cert::certify_records(records, table);
  // row "a" reaches whatever radius 99/100 certifies; count it directly
  int deep = rows[0].radius.value_or(-1) >= 2 ? 1 : 0;
  CHECK(l0cert::acc_at_r(records, table, 2) == doctest::Approx(deep / n));
  CHECK_THROWS_AS(l0cert::acc_at_r({}, table, 0), l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::acc_at_r(records, table, -1), l0cert::validation_error);
}

TEST_CASE("mean certified radius") {
  const CertTable table = l0cert::build_cert_table({4, 1, 80}, 4, 20);
  std::vector<PredictionRecord> single;
  single.push_back(exact_record("a", 1, Rational(1)));  // p = 1 certifies r = 4
  CHECK(l0cert::mean_radius(single, table) == doctest::Approx(4.0));

  std::vector<PredictionRecord> mixed = single;
  mixed.push_back(exact_record("b", 0, Rational(1)));    // wrong: contributes 0
  mixed.push_back(exact_record("c", 1, Rational(1, 2))); // abstains: contributes 0
  CHECK(l0cert::mean_radius(mixed, table) == doctest::Approx(4.0 / 3.0));
  CHECK_THROWS_AS(l0cert::mean_radius({}, table), l0cert::validation_error);
}

TEST_CASE("adversarial auc hand example") {
  // two positives, two negatives, separable clean: AUC = 1
  std::vector<AucInstance> inst;
  inst.push_back({true, 0.9, 0.2});
  inst.push_back({true, 0.8, 0.1});
  inst.push_back({false, 0.3, 0.7});
  inst.push_back({false, 0.2, 0.6});
  CHECK(l0cert::adversarial_auc(inst, 0, AucMode::exhaustive) == doctest::Approx(1.0));
  // k = 1: dropping the second positive to 0.1 puts it under both negatives,
  // losing two of the four pairs: AUC = (1 + 1 + 0 + 0) / 4 = 0.5. Every other
  // single perturbation loses less.
  CHECK(l0cert::adversarial_auc(inst, 1, AucMode::exhaustive) == doctest::Approx(0.5));
  // k = 2: both positives at 0.2 / 0.1 against clean negatives 0.3 / 0.2:
  // the only surviving credit is the (0.2, 0.2) tie, worth half a pair
  CHECK(l0cert::adversarial_auc(inst, 2, AucMode::exhaustive) == doctest::Approx(0.125));
  CHECK(l0cert::adversarial_auc(inst, 4, AucMode::exhaustive) == doctest::Approx(0.0));
}

TEST_CASE("auc ties count half") {
  std::vector<AucInstance> inst;
  inst.push_back({true, 0.5, 0.5});
  inst.push_back({false, 0.5, 0.5});
  CHECK(l0cert::adversarial_auc(inst, 0, AucMode::exhaustive) == doctest::Approx(0.5));
}

TEST_CASE("greedy upper bounds exhaustive and both decrease with k") {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<AucInstance> inst;
    const int n = 3 + static_cast<int>(rng() % 3);
    const int m = 3 + static_cast<int>(rng() % 3);
    const auto u = [&rng]() { return static_cast<double>(rng() % 1000) / 1000.0; };
    for (int i = 0; i < n; ++i) {
      const double clean = u();
      inst.push_back({true, clean, clean * u()});
    }
    for (int j = 0; j < m; ++j) {
      const double clean = u();
      inst.push_back({false, clean, clean + (1.0 - clean) * u()});
    }
    const double clean_auc = l0cert::adversarial_auc(inst, 0, AucMode::exhaustive);
    double prev_ex = clean_auc, prev_gr = clean_auc;
    for (int k = 1; k <= n + m; ++k) {
      const double ex = l0cert::adversarial_auc(inst, k, AucMode::exhaustive);
      const double gr = l0cert::adversarial_auc(inst, k, AucMode::greedy);
      CHECK(ex <= gr + 1e-12);  // exhaustive is the true minimum
      CHECK(gr <= clean_auc + 1e-12);
      CHECK(ex <= prev_ex + 1e-12);  // larger budgets only help the adversary
      CHECK(gr <= prev_gr + 1e-12);
      prev_ex = ex;
      prev_gr = gr;
    }
  }
}

TEST_CASE("auc validation and size cap") {
  std::vector<AucInstance> inst;
  inst.push_back({true, 0.9, 0.1});
  inst.push_back({false, 0.1, 0.9});
  CHECK_THROWS_AS(l0cert::adversarial_auc(inst, -1, AucMode::exhaustive),
                  l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::adversarial_auc(inst, 3, AucMode::exhaustive),
                  l0cert::validation_error);
  CHECK_THROWS_AS(l0cert::adversarial_auc({}, 0, AucMode::exhaustive),
                  l0cert::validation_error);

  // single-class inputs cannot form pairs
  std::vector<AucInstance> pos_only;
  pos_only.push_back({true, 0.9, 0.1});
  CHECK_THROWS_AS(l0cert::adversarial_auc(pos_only, 0, AucMode::exhaustive),
                  l0cert::validation_error);

  // direction violations
  std::vector<AucInstance> bad = inst;
  bad[0].score_adv = 0.95;  // positive whose attack raises the score
  CHECK_THROWS_AS(l0cert::adversarial_auc(bad, 1, AucMode::exhaustive),
                  l0cert::validation_error);
  bad = inst;
  bad[1].score_adv = 0.05;  // negative whose attack lowers the score
  CHECK_THROWS_AS(l0cert::adversarial_auc(bad, 1, AucMode::exhaustive),
                  l0cert::validation_error);

  // exhaustive refuses more than 20 instances, pointing at greedy
  std::vector<AucInstance> big;
  for (int i = 0; i < 21; ++i) big.push_back({i % 2 == 0, 0.5, 0.5});
  CHECK_THROWS_AS(l0cert::adversarial_auc(big, 1, AucMode::exhaustive),
                  l0cert::unsupported_size_error);
  CHECK_NOTHROW(l0cert::adversarial_auc(big, 1, AucMode::greedy));
}

TEST_CASE("prediction ingestion") {
  TempDir tmp;
  const fs::path file = tmp.path / "preds.jsonl";

  SUBCASE("both record shapes, sorted by id") {
    write_file(file,
               "{\"id\": \"zz\", \"label\": 1, \"predicted\": 1, \"success_count\": 95, "
               "\"n_samples\": 100}\n"
               "{\"id\": \"aa\", \"label\": 0, \"p_exact\": \"1/4\"}\n");
    const auto records = l0cert::ingest_predictions(file);
    REQUIRE(records.size() == 2);
    CHECK(records[0].id == "aa");
    REQUIRE(records[0].p_exact.has_value());
    CHECK(*records[0].p_exact == Rational(1, 4));
    CHECK(records[1].id == "zz");
    CHECK(!records[1].p_exact.has_value());
    CHECK(records[1].success_count == 95);
    CHECK(records[1].n_samples == 100);
  }
  SUBCASE("round trip through the writer") {
    std::vector<PredictionRecord> records;
    records.push_back(counted_record("a", 1, 1, 97, 100));
    records.push_back(exact_record("b", 0, Rational(2, 7)));
    std::ostringstream out;
    l0cert::write_predictions(records, out);
    write_file(file, out.str());
    const auto back = l0cert::ingest_predictions(file);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "a");
    CHECK(back[0].label == 1);
    CHECK(back[0].success_count == 97);
    CHECK(back[1].id == "b");
    REQUIRE(back[1].p_exact.has_value());
    CHECK(*back[1].p_exact == Rational(2, 7));
  }
  SUBCASE("errors carry line numbers") {
    write_file(file, "{\"id\": \"a\", \"label\": 0, \"p_exact\": \"1/4\"}\nnot json\n");
    try {
      l0cert::ingest_predictions(file);
      FAIL("expected validation_error");
    } catch (const l0cert::validation_error& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
  SUBCASE("mixing the two shapes in one record is rejected") {
    write_file(file,
               "{\"id\": \"a\", \"label\": 0, \"p_exact\": \"1/4\", \"n_samples\": 10, "
               "\"predicted\": 0, \"success_count\": 5}\n");
    CHECK_THROWS_AS(l0cert::ingest_predictions(file), l0cert::validation_error);
  }
  SUBCASE("neither shape is rejected") {
    write_file(file, "{\"id\": \"a\", \"label\": 0}\n");
    CHECK_THROWS_AS(l0cert::ingest_predictions(file), l0cert::validation_error);
  }
  SUBCASE("semantic field checks") {
    write_file(file, "{\"id\": \"a\", \"label\": 2, \"p_exact\": \"1/4\"}\n");
    CHECK_THROWS_AS(l0cert::ingest_predictions(file), l0cert::validation_error);
    write_file(file, "{\"id\": \"a\", \"label\": 0, \"p_exact\": \"5/4\"}\n");
    CHECK_THROWS_AS(l0cert::ingest_predictions(file), l0cert::validation_error);
    write_file(file,
               "{\"id\": \"a\", \"label\": 0, \"predicted\": 0, \"success_count\": 11, "
               "\"n_samples\": 10}\n");
    CHECK_THROWS_AS(l0cert::ingest_predictions(file), l0cert::validation_error);
    write_file(file,
               "{\"id\": \"a\", \"label\": 0, \"predicted\": 0, \"success_count\": 5, "
               "\"n_samples\": 0}\n");
    CHECK_THROWS_AS(l0cert::ingest_predictions(file), l0cert::validation_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(l0cert::ingest_predictions(tmp.path / "nope.jsonl"),
                    l0cert::validation_error);
  }
}

TEST_CASE("report csv") {
  std::vector<l0cert::CertRow> rows;
  rows.push_back({"a", 1, Rational(7, 8), 2, true});
  rows.push_back({"b", 0, Rational(1, 2), std::nullopt, false});
  std::ostringstream out;
  l0cert::write_report_csv(rows, out);
  CHECK(out.str() ==
        "id,p_lower,radius,correct\n"
        "a,0.875000000000,2,1\n"
        "b,0.500000000000,abstain,0\n");
}
