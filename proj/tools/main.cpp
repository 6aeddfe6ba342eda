#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "l0cert/closed_form.hpp"
#include "l0cert/errors.hpp"
#include "l0cert/eval.hpp"
#include "l0cert/noise.hpp"
#include "l0cert/oracle.hpp"
#include "l0cert/regions.hpp"
#include "l0cert/solver.hpp"
#include "l0cert/threshold.hpp"
#include "l0cert/tree.hpp"
#include "l0cert/version.hpp"

namespace {

using namespace l0cert;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open output file " + path);
  return out;
}

std::string format_prob(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::uint8_t> parse_bits(const std::string& s) {
  std::vector<std::uint8_t> bits;
  bits.reserve(s.size());
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw validation_error("point must be a string of 0/1 bits");
    bits.push_back(ch == '1');
  }
  if (bits.empty()) throw validation_error("point must not be empty");
  return bits;
}

// attack CSV rows keyed by (id, r)
std::map<std::pair<std::string, int>, double> load_attacks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open attacks file " + path);
  std::map<std::pair<std::string, int>, double> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "id,r,adv_prob") continue;
    std::istringstream ls(line);
    std::string id, r_str, prob_str;
    if (!std::getline(ls, id, ',') || !std::getline(ls, r_str, ',') ||
        !std::getline(ls, prob_str))
      throw validation_error("malformed attack row at " + path + ":" + std::to_string(line_no));
    try {
      rows[{id, std::stoi(r_str)}] = std::stod(prob_str);
    } catch (const std::exception&) {
      throw validation_error("malformed attack row at " + path + ":" + std::to_string(line_no));
    }
  }
  return rows;
}

int cmd_table(const NoiseParams& params, int r_max, int precision, int workers,
              const std::string& out_path) {
  CertTable table = build_cert_table(params, r_max, precision, workers,
                                     [r_max](int r, double secs) {
                                       std::fprintf(stderr, "row r=%d done in %.3fs (of %d)\n", r,
                                                    secs, r_max);
                                     });
  save_table(table, out_path);
  std::cout << "wrote " << table.rows.size() << " rows to " << out_path << "\n";
  return 0;
}

int cmd_regions(const NoiseParams& params, int r, const std::string& out_path) {
  RegionTable table = build_region_table(params, r);
  if (out_path.empty()) {
    dump_csv(table, std::cout);
  } else {
    auto out = open_out(out_path);
    dump_csv(table, out);
  }
  return 0;
}

int cmd_certify(const std::string& table_path, const std::string& pred_path,
                const std::string& out_path, double confidence) {
  const CertTable table = load_table(table_path);
  const auto records = ingest_predictions(pred_path);
  std::vector<CertRow> rows;
  rows.reserve(records.size());
  int done = 0;
  for (const auto& rec : records) {
    const auto t0 = std::chrono::steady_clock::now();
    auto row = certify_records({rec}, table, confidence);
    rows.push_back(std::move(row[0]));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "certified %s in %.4fs (%d/%zu)\n", rec.id.c_str(), secs, ++done,
                 records.size());
  }
  auto out = open_out(out_path);
  write_report_csv(rows, out);
  std::cout << "certified " << rows.size() << " records to " << out_path << "\n";
  return 0;
}

int cmd_tree_train(const std::string& data_path, int alpha_pct, int max_depth,
                   const TrainOptions& options, const std::string& out_path) {
  const Dataset data = load_dataset_csv(data_path);
  NoiseParams params{data.d, 1, alpha_pct};
  Tree tree = train(data, params, max_depth, options);
  save_tree(tree, out_path);
  std::cout << "trained tree with " << tree.nodes.size() << " nodes on " << data.x.size()
            << " samples, wrote " << out_path << "\n";
  return 0;
}

int cmd_tree_predict(const std::string& tree_path, const std::string& data_path,
                     const std::string& out_path) {
  const Tree tree = load_tree(tree_path);
  const Dataset data = load_dataset_csv(data_path);
  if (data.d != tree.params.d)
    throw validation_error("dataset dimension does not match the tree");
  std::vector<PredictionRecord> records;
  records.reserve(data.x.size());
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    PredictionRecord rec;
    rec.id = std::to_string(i);
    rec.label = data.y[i];
    rec.p_exact = predict_prob(tree, data.x[i]);
    records.push_back(std::move(rec));
  }
  auto out = open_out(out_path);
  write_predictions(records, out);
  std::cout << "predicted " << records.size() << " records to " << out_path << "\n";
  return 0;
}

int cmd_tree_attack(const std::string& tree_path, const std::string& data_path, int r_max,
                    const std::string& out_path) {
  const Tree tree = load_tree(tree_path);
  const Dataset data = load_dataset_csv(data_path);
  if (data.d != tree.params.d)
    throw validation_error("dataset dimension does not match the tree");
  auto out = open_out(out_path);
  out << "id,r,adv_prob\n";
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    // worst-case class-1 score in the direction that harms the labeled class:
    // minimized for positives, maximized for negatives
    std::vector<Rational> adv;
    if (data.y[i] == 1)
      adv = dp_adversary(tree, data.x[i], r_max).root();
    else
      adv = dp_adversary_max(tree, data.x[i], r_max);
    for (int r = 0; r <= r_max; ++r)
      out << i << ',' << r << ',' << format_prob(adv[static_cast<std::size_t>(r)].to_double())
          << '\n';
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "attacked %zu in %.4fs (%zu/%zu)\n", i, secs, i + 1, data.x.size());
  }
  std::cout << "wrote adversary table to " << out_path << "\n";
  return 0;
}

int cmd_eval_acc(const std::string& pred_path, const std::string& table_path, int r,
                 double confidence, const std::string& detail_path) {
  const CertTable table = load_table(table_path);
  const auto records = ingest_predictions(pred_path);
  const double acc = acc_at_r(records, table, r, confidence);
  if (!detail_path.empty()) {
    auto out = open_out(detail_path);
    write_report_csv(certify_records(records, table, confidence), out);
  }
  std::cout << "acc@" << r << " = " << format_prob(acc) << "\n";
  return 0;
}

int cmd_eval_radius(const std::string& pred_path, const std::string& table_path,
                    double confidence) {
  const CertTable table = load_table(table_path);
  const auto records = ingest_predictions(pred_path);
  std::cout << "mean_radius = " << format_prob(mean_radius(records, table, confidence)) << "\n";
  return 0;
}

int cmd_eval_auc(const std::string& pred_path, const std::string& attacks_path, int r, int k,
                 const std::string& mode_str) {
  AucMode mode;
  if (mode_str == "exhaustive")
    mode = AucMode::exhaustive;
  else if (mode_str == "greedy")
    mode = AucMode::greedy;
  else
    throw validation_error("mode must be 'exhaustive' or 'greedy'");

  const auto records = ingest_predictions(pred_path);
  const auto attacks = load_attacks(attacks_path);
  std::vector<AucInstance> instances;
  instances.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.p_exact)
      throw validation_error("eval auc needs exact predictions (p_exact records)");
    const auto it = attacks.find({rec.id, r});
    if (it == attacks.end())
      throw validation_error("no attack row for id " + rec.id + " at r=" + std::to_string(r));
    AucInstance inst;
    inst.positive = rec.label == 1;
    inst.score_clean = rec.p_exact->to_double();
    inst.score_adv = it->second;
    instances.push_back(inst);
  }
  std::cout << "auc = " << format_prob(adversarial_auc(instances, k, mode)) << "\n";
  return 0;
}

int cmd_uniform(double gamma, double p, const std::string& q, int d) {
  UniformParams params{gamma, d};
  UniformNorm norm;
  if (q == "1")
    norm = UniformNorm::l1;
  else if (q == "inf")
    norm = UniformNorm::linf;
  else
    throw validation_error("q must be '1' or 'inf'");
  const auto radius = uniform_radius(params, p, norm);
  if (radius)
    std::cout << "radius = " << format_prob(*radius) << "\n";
  else
    std::cout << "abstain\n";
  return 0;
}

int cmd_gaussian(double sigma, int alpha_pct, double p) {
  GaussianBaseline baseline =
      sigma > 0.0 ? GaussianBaseline::from_sigma(sigma)
                  : GaussianBaseline::from_alpha(static_cast<double>(alpha_pct) / 100.0);
  std::cout << "sigma = " << format_prob(baseline.sigma)
            << " alpha = " << format_prob(baseline.alpha)
            << " radius = " << gaussian_l0_radius(baseline.sigma, p) << "\n";
  return 0;
}

int cmd_gaussian_dominance(int alpha_pct, int d, int grid, int workers) {
  if (alpha_pct <= 50) throw validation_error("dominance report needs alpha_pct > 50");
  NoiseParams params{d, 1, alpha_pct};
  const GaussianBaseline baseline =
      GaussianBaseline::from_alpha(static_cast<double>(alpha_pct) / 100.0);
  const CertTable table = build_cert_table(params, d, 20, workers);
  int violations = 0;
  for (int i = 1; i <= grid; ++i) {
    const double p = 0.5 + (0.9999 - 0.5) * static_cast<double>(i) /
                               static_cast<double>(grid + 1);
    const auto discrete = certified_radius(Rational::from_double(p), table);
    const int disc = discrete ? *discrete : 0;
    // no perturbation moves more than d coordinates, so radii compare capped
    const int gauss = std::min(gaussian_l0_radius(baseline.sigma, p), d);
    const bool ok = disc >= gauss;
    violations += !ok;
    std::cout << "p=" << format_prob(p) << " discrete=" << disc << " gaussian=" << gauss
              << (ok ? "" : " VIOLATION") << "\n";
  }
  std::cout << "dominance violations: " << violations << " of " << grid << "\n";
  return violations == 0 ? 0 : 1;
}

int cmd_oracle_regions(const NoiseParams& params, int r, const std::string& out_path) {
  RegionTable table = oracle::brute_regions(params, r);
  if (out_path.empty()) {
    dump_csv(table, std::cout);
  } else {
    auto out = open_out(out_path);
    dump_csv(table, out);
  }
  return 0;
}

int cmd_oracle_rho(const NoiseParams& params, int r, const std::string& p_str) {
  const Rational p = Rational::from_fraction_string(p_str);
  std::cout << "rho = " << oracle::brute_rho(params, r, p).to_string() << "\n";
  return 0;
}

int cmd_oracle_tree_adv(const std::string& tree_path, const std::string& bits, int r) {
  const Tree tree = load_tree(tree_path);
  const auto x = parse_bits(bits);
  std::cout << "adv = " << oracle::brute_tree_adversary(tree, x, r).to_string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact l0 robustness certificates for discretely smoothed classifiers"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  NoiseParams params;
  int r = 1, r_max = 1, precision = 20, workers = 1, k = 0, grid = 50, d = 1;
  int alpha_pct = 0, max_depth = 3;
  double confidence = 0.999, gamma = 1.0, p = 0.9, sigma = 0.0;
  std::string out_path, table_path, pred_path, data_path, tree_path, attacks_path;
  std::string mode_str = "exhaustive", q_norm = "1", p_str = "1/2", bits;
  TrainOptions train_options;

  auto add_noise_flags = [&params](CLI::App* cmd) {
    cmd->add_option("--d", params.d, "input dimension")->required();
    cmd->add_option("--K", params.K, "levels above zero per coordinate")->required();
    cmd->add_option("--alpha-pct", params.alpha_pct, "keep probability in percent")->required();
  };

  auto* table_cmd = app.add_subcommand("table", "precompute certification thresholds");
  add_noise_flags(table_cmd);
  table_cmd->add_option("--r-max", r_max, "largest radius row")->required();
  table_cmd->add_option("--precision", precision, "decimal digits per row");
  table_cmd->add_option("--workers", workers, "worker threads (0 = hardware)");
  table_cmd->add_option("--out", out_path, "output table file")->required();

  auto* regions_cmd = app.add_subcommand("regions", "dump the region table as CSV");
  add_noise_flags(regions_cmd);
  regions_cmd->add_option("--r", r, "radius")->required();
  regions_cmd->add_option("--out", out_path, "output CSV (default stdout)");

  auto* certify_cmd = app.add_subcommand("certify", "certify a prediction dump against a table");
  certify_cmd->add_option("--table", table_path, "threshold table file")->required();
  certify_cmd->add_option("--predictions", pred_path, "JSON-lines prediction dump")->required();
  certify_cmd->add_option("--confidence", confidence, "lower-bound confidence");
  certify_cmd->add_option("--out", out_path, "report CSV")->required();

  auto* tree_cmd = app.add_subcommand("tree", "smoothed decision trees");
  tree_cmd->require_subcommand(1);
  auto* train_cmd = tree_cmd->add_subcommand("train", "train on a label-first binary CSV");
  train_cmd->add_option("--data", data_path, "training CSV")->required();
  train_cmd->add_option("--alpha-pct", alpha_pct, "keep probability in percent")->required();
  train_cmd->add_option("--max-depth", max_depth, "maximum depth")->required();
  train_cmd->add_flag("--soft-leaves", train_options.soft_leaves,
                      "leaves emit the weighted class fraction");
  train_cmd->add_option("--feature-fraction", train_options.feature_fraction,
                        "random fraction of candidate features per node");
  train_cmd->add_option("--seed", train_options.seed, "feature subsampling seed");
  train_cmd->add_option("--out", out_path, "output tree file")->required();

  auto* predict_cmd = tree_cmd->add_subcommand("predict", "exact smoothed predictions");
  predict_cmd->add_option("--tree", tree_path, "tree file")->required();
  predict_cmd->add_option("--data", data_path, "CSV to predict")->required();
  predict_cmd->add_option("--out", out_path, "JSON-lines prediction dump")->required();

  auto* attack_cmd = tree_cmd->add_subcommand("attack", "exact worst-case scores per radius");
  attack_cmd->add_option("--tree", tree_path, "tree file")->required();
  attack_cmd->add_option("--data", data_path, "CSV to attack")->required();
  attack_cmd->add_option("--r-max", r_max, "largest flip budget")->required();
  attack_cmd->add_option("--out", out_path, "adversary CSV")->required();

  auto* eval_cmd = app.add_subcommand("eval", "certified metrics");
  eval_cmd->require_subcommand(1);
  auto* acc_cmd = eval_cmd->add_subcommand("acc", "certified accuracy at a radius");
  acc_cmd->add_option("--predictions", pred_path)->required();
  acc_cmd->add_option("--table", table_path)->required();
  acc_cmd->add_option("--r", r, "radius")->required();
  acc_cmd->add_option("--confidence", confidence);
  acc_cmd->add_option("--detail", out_path, "optional per-record report CSV");

  auto* radius_cmd = eval_cmd->add_subcommand("radius", "mean certified radius");
  radius_cmd->add_option("--predictions", pred_path)->required();
  radius_cmd->add_option("--table", table_path)->required();
  radius_cmd->add_option("--confidence", confidence);

  auto* auc_cmd = eval_cmd->add_subcommand("auc", "worst-case AUC under a flip budget");
  auc_cmd->add_option("--predictions", pred_path)->required();
  auc_cmd->add_option("--attacks", attacks_path, "CSV from tree attack")->required();
  auc_cmd->add_option("--r", r, "attack radius")->required();
  auc_cmd->add_option("--k", k, "instances the adversary may perturb")->required();
  auc_cmd->add_option("--mode", mode_str, "exhaustive or greedy");

  auto* uniform_cmd = app.add_subcommand("uniform", "closed-form uniform-noise radii");
  uniform_cmd->add_option("--gamma", gamma, "box half width")->required();
  uniform_cmd->add_option("--p", p, "retention probability")->required();
  uniform_cmd->add_option("--q", q_norm, "norm: 1 or inf");
  uniform_cmd->add_option("--d", d, "dimension (norm inf only)");

  auto* gauss_cmd = app.add_subcommand("gaussian-baseline", "Gaussian-derived l0 radii");
  gauss_cmd->add_option("--sigma", sigma, "Gaussian sigma (or use --alpha-pct)");
  gauss_cmd->add_option("--alpha-pct", alpha_pct, "matched keep probability in percent");
  gauss_cmd->add_option("--p", p, "retention probability");
  bool dominance = false;
  gauss_cmd->add_flag("--dominance", dominance, "sweep p and compare with the discrete radius");
  gauss_cmd->add_option("--d", d, "dimension for the dominance sweep");
  gauss_cmd->add_option("--grid", grid, "dominance sweep points");
  gauss_cmd->add_option("--workers", workers, "table build workers for the sweep");

  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force diagnostics (size-capped)");
  oracle_cmd->require_subcommand(1);
  auto* oracle_regions_cmd = oracle_cmd->add_subcommand("regions", "region table by enumeration");
  add_noise_flags(oracle_regions_cmd);
  oracle_regions_cmd->add_option("--r", r, "radius")->required();
  oracle_regions_cmd->add_option("--out", out_path, "output CSV (default stdout)");
  auto* oracle_rho_cmd = oracle_cmd->add_subcommand("rho", "worst case by per-point greedy fill");
  add_noise_flags(oracle_rho_cmd);
  oracle_rho_cmd->add_option("--r", r, "radius")->required();
  oracle_rho_cmd->add_option("--p", p_str, "probability as num/den")->required();
  auto* oracle_adv_cmd = oracle_cmd->add_subcommand("tree-adv", "tree adversary by enumeration");
  oracle_adv_cmd->add_option("--tree", tree_path, "tree file")->required();
  oracle_adv_cmd->add_option("--x", bits, "input as a 0/1 string")->required();
  oracle_adv_cmd->add_option("--r", r, "flip budget")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (table_cmd->parsed()) return cmd_table(params, r_max, precision, workers, out_path);
    if (regions_cmd->parsed()) return cmd_regions(params, r, out_path);
    if (certify_cmd->parsed()) return cmd_certify(table_path, pred_path, out_path, confidence);
    if (tree_cmd->parsed()) {
      if (train_cmd->parsed())
        return cmd_tree_train(data_path, alpha_pct, max_depth, train_options, out_path);
      if (predict_cmd->parsed()) return cmd_tree_predict(tree_path, data_path, out_path);
      if (attack_cmd->parsed()) return cmd_tree_attack(tree_path, data_path, r_max, out_path);
    }
    if (eval_cmd->parsed()) {
      if (acc_cmd->parsed())
        return cmd_eval_acc(pred_path, table_path, r, confidence, out_path);
      if (radius_cmd->parsed()) return cmd_eval_radius(pred_path, table_path, confidence);
      if (auc_cmd->parsed()) return cmd_eval_auc(pred_path, attacks_path, r, k, mode_str);
    }
    if (uniform_cmd->parsed()) return cmd_uniform(gamma, p, q_norm, d);
    if (gauss_cmd->parsed()) {
      if (dominance) return cmd_gaussian_dominance(alpha_pct, d, grid, workers);
      return cmd_gaussian(sigma, alpha_pct, p);
    }
    if (oracle_cmd->parsed()) {
      if (oracle_regions_cmd->parsed()) return cmd_oracle_regions(params, r, out_path);
      if (oracle_rho_cmd->parsed()) return cmd_oracle_rho(params, r, p_str);
      if (oracle_adv_cmd->parsed()) return cmd_oracle_tree_adv(tree_path, bits, r);
    }
  } catch (const unsupported_size_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
