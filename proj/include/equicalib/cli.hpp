#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "equicalib/bounds.hpp"
#include "equicalib/dataset_io.hpp"
#include "equicalib/experiments.hpp"
#include "equicalib/generators.hpp"
#include "equicalib/group.hpp"
#include "equicalib/metrics.hpp"
#include "equicalib/orbits.hpp"
#include "equicalib/report.hpp"
#include "equicalib/symmetry.hpp"
#include "equicalib/worked_examples.hpp"

namespace equicalib::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

inline constexpr const char* kGenGrammar =
    "dataset specs:\n"
    "  circle20                              20 points on the unit circle, two label colours\n"
    "  swiss [--ratio r] [--n k] [--sectors s]  two Swiss-roll arms at z = 0 and z = 1\n"
    "  perm24                                the 24 row permutations of a 4 x 2 matrix\n"
    "  pointcloud                            five 4-point clouds with vector targets\n"
    "  vectorfield:spiral|sinusoidal [--n k] [--radius r]\n"
    "  gaussian [--n k] [--dims d] [--stratified]  calibrated Gaussian regression data";

struct Options {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string format = "csv";

  std::string gen_spec;
  std::string out_path;
  double ratio = 1.0;
  std::optional<int> n;
  int sectors = 8;
  double radius = 3.0;
  int dims = 1;
  bool stratified = false;

  std::string metric_kind;
  std::string pred_path;
  std::string truth_path;
  int bins = kDefaultEceBins;
  std::string fibers = "quantile:10";
  bool zero_truth = false;

  std::string bound_kind;
  std::string density;
  std::optional<double> k_star;
  double p2_mass = 1.0;
  std::optional<double> m;
  std::optional<double> K2;
  std::optional<double> K;
  std::optional<int> deepsets_n;
  std::optional<double> m_prime;
  double mass = 1.0;
  std::optional<double> min_orbit_mass;
  std::vector<std::string> fiber_terms;
  std::optional<double> eps;
  double delta = 0.05;
  std::string data_path;
  std::string group;
  double tol = kDefaultOrbitTolerance;

  std::string example_id;
  double s1 = 1.0;
  double s2 = 1.0;
  double sigma = 0.1;
  double coefficient = 0.03;

  std::string experiment_kind;
  std::vector<double> ratios{0.0, 0.25, 0.5, 0.75, 1.0};
  int seeds = 5;
  std::optional<int> n_per_arm;
  std::optional<int> epochs;
  std::vector<int> hidden;
  std::optional<double> lr;
  std::optional<int> batch;
  std::string field = "spiral";
  std::optional<double> variance_init;
  std::string optimizer;
  std::string activation;
  double beta = 1.0;
};

namespace detail {

struct Runner {
  const Options& o;
  std::ostream& out;
  std::ostream& err;
  RunManifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  // ---- output helpers

  void print_report(const std::string& label, const BoundReport& r) const {
    if (o.format == "jsonl") {
      nlohmann::json j;
      j["label"] = label;
      j["kind"] = r.kind;
      j["value"] = r.value;
      nlohmann::json comps = nlohmann::json::object();
      for (const auto& [k, v] : r.components) comps[k] = v;
      j["components"] = comps;
      j["flags"] = r.flags;
      out << j.dump() << '\n';
      return;
    }
    out << label << ',' << r.kind << ",value," << fmt_double(r.value) << '\n';
    for (const auto& [k, v] : r.components) out << label << ',' << r.kind << ',' << k << ',' << fmt_double(v) << '\n';
    for (const auto& f : r.flags) out << label << ',' << r.kind << ",flag," << f << '\n';
  }

  void print_header() const {
    if (o.format == "csv") out << "label,kind,field,value\n";
  }

  void print_values(const std::vector<std::pair<std::string, double>>& rows) const {
    if (o.format == "jsonl") {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& [k, v] : rows) j[k] = v;
      out << j.dump() << '\n';
      return;
    }
    out << "name,value\n";
    for (const auto& [k, v] : rows) out << k << ',' << fmt_double(v) << '\n';
  }

  [[nodiscard]] std::string out_file(const std::string& name) const {
    std::filesystem::create_directories(o.out_dir);
    return (std::filesystem::path(o.out_dir) / name).string();
  }

  void save_table(const CsvTable& t, const std::string& path) {
    t.save(path, &manifest);
    manifest.outputs.push_back(path);
  }

  void write_manifest(const std::string& path) {
    manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f << manifest.full_json().dump(2) << '\n';
  }

  [[nodiscard]] WeightedDataset load(const std::string& path) {
    if (path.empty()) throw UsageError("missing input dataset path");
    auto ds = io::load_dataset(path);
    manifest.add_input(path);
    return ds;
  }

  [[nodiscard]] FiniteGroup group_for(const WeightedDataset& ds) const {
    if (o.group.empty()) throw UsageError("--group is required");
    const int dim = ds.size() ? static_cast<int>(ds.points[0].cols()) : 2;
    return build_group(o.group, dim);
  }

  template <class T>
  [[nodiscard]] static T need(const std::optional<T>& v, const char* flag) {
    if (!v) throw UsageError(std::string(flag) + " is required");
    return *v;
  }

  // ---- gen

  int gen() {
    WeightedDataset ds;
    const std::string& s = o.gen_spec;
    if (s == "circle20") {
      ds = gen::circle20();
    } else if (s == "swiss") {
      ds = gen::swiss_rolls({o.ratio, o.n.value_or(250), o.sectors, o.seed});
    } else if (s == "perm24") {
      ds = gen::permutation24();
    } else if (s == "pointcloud") {
      ds = gen::pointcloud_gence();
    } else if (s == "vectorfield:spiral" || s == "vectorfield:sinusoidal") {
      ds = gen::vector_field(parse_vector_field(s.substr(12)), o.n.value_or(500), o.radius, o.seed);
    } else if (s == "gaussian") {
      gen::CalibratedGaussianParams p;
      p.n = o.n.value_or(1000);
      p.dims = o.dims;
      p.seed = o.seed;
      p.stratified = o.stratified;
      ds = gen::calibrated_gaussian(p);
    } else {
      throw UsageError("unknown dataset spec '" + s + "'\n" + kGenGrammar);
    }
    manifest.seeds = {o.seed};
    if (o.out_path.empty()) {
      io::write_dataset(ds, out);
      return kOk;
    }
    io::save_dataset(ds, o.out_path);
    manifest.outputs.push_back(o.out_path);
    write_manifest(o.out_path + ".manifest.json");
    err << "wrote " << ds.size() << " records to " << o.out_path << '\n';
    return kOk;
  }

  // ---- metric

  int metric() {
    const auto truth = load(o.truth_path);
    io::Predictions pred;
    if (!o.pred_path.empty()) {
      pred = io::load_predictions(o.pred_path);
      manifest.add_input(o.pred_path);
    } else if (truth.annotation_mean && truth.annotation_variance) {
      for (std::size_t i = 0; i < truth.size(); ++i) {
        pred.regressions.push_back({(*truth.annotation_mean)[i], (*truth.annotation_variance)[i]});
      }
    } else {
      throw UsageError("--pred is required unless the truth file carries mean/variance annotations");
    }
    if (pred.size() != truth.size()) throw DataError("prediction/truth record count mismatch");
    const std::vector<double>& w = truth.weights;
    const std::string& k = o.metric_kind;
    if (k == "ece" || k == "accuracy") {
      if (!pred.is_classifier()) throw DataError("ece needs classifier predictions");
      if (!truth.labels) throw DataError("ece needs a labeled truth file");
      const auto e = ece_binned(pred.classes, *truth.labels, w, o.bins);
      print_values({{"ece", e.ece}, {"accuracy", weighted_accuracy(pred.classes, *truth.labels, w)}});
      if (!o.out_path.empty()) {
        CsvTable t({"bin", "lower", "upper", "count", "mass", "accuracy", "confidence"});
        for (const auto& b : e.bins) {
          t.add({std::to_string(b.bin), fmt_double(b.lower), fmt_double(b.upper), std::to_string(b.count),
                 fmt_double(b.mass), fmt_double(b.accuracy), fmt_double(b.confidence)});
        }
        save_table(t, o.out_path);
      }
      return kOk;
    }
    if (pred.is_classifier()) throw DataError(k + " needs regressor predictions");
    if (k == "gence" || k == "gence-sq") {
      if (!truth.targets) throw DataError(k + " needs a truth file with targets");
      const auto fibers = fibers_by_variance(pred.regressions, w, parse_fiber_scheme(o.fibers));
      const auto g = k == "gence" ? gence(pred.regressions, *truth.targets, w, fibers)
                                  : gence_sq(pred.regressions, *truth.targets, w, fibers);
      print_values({{k, g.value},
                    {"baseline", k == "gence" ? kCalibratedGenceBaseline : kCalibratedGenceSqBaseline},
                    {"fibers", static_cast<double>(g.fibers.size())}});
      if (!o.out_path.empty()) {
        CsvTable t({"fiber", "mass", "s_norm", "normalized"});
        for (std::size_t i = 0; i < g.fibers.size(); ++i) {
          t.add({std::to_string(i), fmt_double(g.fibers[i].mass), fmt_double(g.fibers[i].s.norm()),
                 fmt_double(g.fibers[i].normalized)});
        }
        save_table(t, o.out_path);
      }
      return kOk;
    }
    if (k == "bleed") {
      std::vector<Vector> vars, truth_var;
      for (const auto& r : pred.regressions) vars.push_back(r.variance);
      if (o.zero_truth) {
        for (const auto& v : vars) truth_var.push_back(Vector::Zero(v.size()));
      } else if (truth.annotation_variance) {
        truth_var = *truth.annotation_variance;
      } else {
        throw DataError("bleed needs --zero-truth or variance annotations in the truth file");
      }
      print_values({{"bleed", aleatoric_bleed(vars, truth_var, w)}});
      return kOk;
    }
    if (k == "regression") {
      if (!truth.targets) throw DataError("regression error needs targets");
      std::vector<Vector> means;
      for (const auto& r : pred.regressions) means.push_back(r.mean);
      print_values({{"regression_error", regression_error(means, *truth.targets, w)}});
      return kOk;
    }
    throw UsageError("unknown metric '" + k + "' (expected ece|accuracy|gence|gence-sq|bleed|regression)");
  }

  // ---- bound

  int bound() {
    const std::string& k = o.bound_kind;
    if (k == "example") return example();
    print_header();
    if (k == "ece-upper") {
      const auto r = parse_density(need(std::optional(o.density.empty() ? std::nullopt : std::optional(o.density)),
                                        "--density"));
      print_report(k, o.k_star ? ece_upper_invariant(r, *o.k_star, o.p2_mass) : ece_upper_naive(r));
    } else if (k == "ece-upper-fiberwise") {
      print_report(k, ece_upper_fiberwise(parse_density(o.density), need(o.m, "--m"), o.p2_mass));
    } else if (k == "ece-upper-binary") {
      print_report(k, ece_upper_binary(need(o.m, "--m")));
    } else if (k == "ece-upper-bilipschitz") {
      print_report(k, ece_upper_bilipschitz(need(o.K2, "--K2"), need(o.k_star, "--k-star"), o.p2_mass,
                                            need(o.min_orbit_mass, "--min-orbit-mass")));
    } else if (k == "ece-lower") {
      print_report(k, ece_lower(parse_density(o.density), need(o.m, "--m")));
    } else if (k == "m-prime") {
      const auto ds = load(o.data_path);
      print_report(k, m_prime(ds, group_for(ds), o.tol));
    } else if (k == "ece-lower-lipschitz") {
      const double K = o.deepsets_n ? deepsets_lipschitz(*o.deepsets_n).K : need(o.K, "--K or --deepsets-n");
      print_report(k, ece_lower_lipschitz(K, need(o.m_prime, "--m-prime"), o.mass));
    } else if (k == "deepsets") {
      const auto d = deepsets_lipschitz(need(o.deepsets_n, "--deepsets-n"));
      print_report(k, BoundReport{"deepsets_lipschitz",
                                  d.K,
                                  {{"n", static_cast<double>(d.n)},
                                   {"sigma_sum_row", d.sigma_sum_row},
                                   {"sigma_ones", d.sigma_ones}},
                                  {}});
    } else if (k == "gence-upper") {
      std::vector<GenceFiberInput> fibers;
      for (const auto& t : o.fiber_terms) {
        std::vector<double> xs;
        std::stringstream ss(t);
        std::string item;
        while (std::getline(ss, item, ',')) {
          try {
            xs.push_back(std::stod(item));
          } catch (const std::exception&) {
            throw UsageError("bad --fiber '" + t + "' (expected mass,error,s[,s...])");
          }
        }
        if (xs.size() < 3) throw UsageError("bad --fiber '" + t + "' (expected mass,error,s[,s...])");
        Vector s(static_cast<Eigen::Index>(xs.size() - 2));
        for (std::size_t i = 2; i < xs.size(); ++i) s(static_cast<Eigen::Index>(i - 2)) = xs[i];
        fibers.push_back({xs[0], xs[1], s});
      }
      if (fibers.empty()) throw UsageError("--fiber is required");
      print_report(k, gence_upper(fibers));
    } else if (k == "gence-sq-lower") {
      const auto d = parse_density(o.density);
      const auto* e = std::get_if<EmpiricalDensity>(&d);
      if (!e) throw UsageError("gence-sq-lower needs an empirical (point:) variance density");
      print_report(k, gence_sq_lower(*e, need(o.m, "--m")));
    } else if (k == "hoeffding") {
      const double eps = need(o.eps, "--eps");
      print_report(k, BoundReport{"hoeffding_n",
                                  static_cast<double>(hoeffding_n(eps, o.delta)),
                                  {{"eps", eps}, {"delta", o.delta}},
                                  {}});
    } else {
      throw UsageError("unknown bound '" + k +
                       "' (expected ece-upper|ece-upper-fiberwise|ece-upper-binary|ece-upper-bilipschitz|ece-lower|"
                       "m-prime|ece-lower-lipschitz|deepsets|gence-upper|gence-sq-lower|hoeffding|example)");
    }
    return kOk;
  }

  // ---- example

  int example() {
    ExampleOptions eo;
    eo.s1 = o.s1;
    eo.s2 = o.s2;
    eo.sigma = o.sigma;
    eo.k_star = o.k_star;
    eo.coefficient = o.coefficient;
    const auto ex = run_example(o.example_id, eo);
    print_header();
    for (const auto& r : ex.rows) print_report(ex.id + " " + r.label, r.report);
    return kOk;
  }

  // ---- analyze

  int analyze() {
    const auto ds = load(o.data_path);
    const auto g = group_for(ds);
    const auto dec = decompose_orbits(ds, g, o.tol);
    const auto stats = orbit_stats(ds, dec);
    print_header();
    if (ds.labels) {
      const auto b = classification_bounds(ds, dec);
      BoundReport r{"classification_bounds",
                    b.error_lower,
                    {{"error_lower", b.error_lower},
                     {"error_upper", b.error_upper},
                     {"k_star", b.k_star},
                     {"min_orbit_mass", b.min_orbit_mass},
                     {"orbits", static_cast<double>(b.orbits)}},
                    {}};
      if (b.vacuous) r.flags.push_back("vacuous");
      print_report("analyze", r);
      if (ds.fiber) {
        for (const auto& f : fiber_dissent(ds, g, fibers_from_annotation(ds), o.tol)) {
          print_report("fiber " + std::to_string(f.fiber),
                       BoundReport{"fiber_dissent",
                                   f.majority_sum,
                                   {{"mass", f.mass},
                                    {"majority_sum", f.majority_sum},
                                    {"minority_sum", f.minority_sum},
                                    {"orbits", static_cast<double>(f.orbits)}},
                                   {}});
        }
      }
    }
    if (ds.targets) {
      print_report("analyze", BoundReport{"invariant_regression_lower", invariant_regression_lower(ds, dec), {}, {}});
      if (g.has_output_rep() && g.output_rep(0).rows() == (*ds.targets)[0].size()) {
        const auto e = equivariant_orbit_lower_bound(ds, g, o.tol);
        print_report("analyze", BoundReport{"equivariant_orbit_lower_bound", e.value, {}, {}});
      }
    }
    if (!o.out_path.empty()) {
      CsvTable t({"orbit", "size", "mass", "k", "kappa", "V"});
      for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& s = stats[i];
        t.add({std::to_string(i), std::to_string(s.size), fmt_double(s.mass), fmt_double(s.majority_dissent),
               fmt_double(s.minority_dissent), s.target_variance ? fmt_double(*s.target_variance) : "nan"});
      }
      save_table(t, o.out_path);
    }
    return kOk;
  }

  // ---- experiment

  void apply_model_overrides(MlpConfig& c) const {
    if (o.epochs) c.epochs = *o.epochs;
    if (!o.hidden.empty()) c.layer_widths = o.hidden;
    if (o.lr) c.learning_rate = *o.lr;
    if (o.batch) c.batch_size = *o.batch;
    if (o.variance_init) c.variance_init = *o.variance_init;
    if (!o.optimizer.empty()) c.optimizer = nn::parse_optimizer(o.optimizer);
    if (!o.activation.empty()) c.activation = nn::parse_activation(o.activation);
  }

  int experiment() {
    manifest.seeds = {o.seed};
    if (o.experiment_kind == "swiss") {
      SwissSweepConfig c;
      c.ratios = o.ratios;
      c.seeds = o.seeds;
      c.base_seed = o.seed;
      if (o.n_per_arm) c.n_per_arm = *o.n_per_arm;
      c.n_bins = o.bins == kDefaultEceBins ? c.n_bins : o.bins;
      apply_model_overrides(c.model);
      const auto rows = run_swissroll_sweep(c);
      save_table(swiss_csv(rows), out_file("swiss_results.csv"));
      CsvTable summary({"ratio", "model", "acc", "ece"});
      for (const auto& s : summarize_swiss(rows)) {
        summary.add({fmt_double(s.ratio), s.model, fmt_double(s.acc), fmt_double(s.ece)});
      }
      summary.write(out);
      write_manifest(out_file("swiss_manifest.json"));
      return kOk;
    }
    if (o.experiment_kind == "vectorfield") {
      VectorFieldConfig c;
      c.kind = parse_vector_field(o.field);
      c.seeds = o.seeds;
      c.base_seed = o.seed;
      if (o.n) c.n = *o.n;
      c.radius = o.radius;
      c.beta_exp = o.beta;
      apply_model_overrides(c.model);
      const auto rep = run_vectorfield_experiment(c);
      const std::string stem = "vectorfield_" + rep.kind;
      save_table(vectorfield_results_csv(rep), out_file(stem + "_results.csv"));
      save_table(vectorfield_angle_csv(rep), out_file(stem + "_angles.csv"));
      CsvTable summary({"model", "mse", "beta_nll", "bleed", "target_second_moment"});
      for (const auto& s : rep.summary) {
        summary.add({s.model, fmt_double(s.mse), fmt_double(s.beta_nll), fmt_double(s.bleed),
                     fmt_double(rep.target_second_moment)});
      }
      summary.write(out);
      write_manifest(out_file(stem + "_manifest.json"));
      return kOk;
    }
    throw UsageError("unknown experiment '" + o.experiment_kind + "' (expected swiss|vectorfield)");
  }
};

} // namespace detail

/// Runs the command line `args` (without the program name). Returns the exit
/// code: 0 ok, 2 usage, 3 data, 4 numeric.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"equicalib: calibration metrics and symmetry bounds"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", o.seed, "base seed");
  app.add_option("--out-dir", o.out_dir, "directory for experiment outputs");
  app.add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"csv", "jsonl"}));

  auto* gen = app.add_subcommand("gen", "generate a dataset");
  gen->footer(kGenGrammar);
  gen->add_option("spec", o.gen_spec, "dataset spec")->required();
  gen->add_option("-o,--out", o.out_path, "output JSONL path (stdout if absent)");
  gen->add_option("--ratio", o.ratio, "swiss correct-invariance ratio");
  gen->add_option("--n", o.n, "size parameter");
  gen->add_option("--sectors", o.sectors, "swiss sectors");
  gen->add_option("--radius", o.radius, "vector-field disk radius");
  gen->add_option("--dims", o.dims, "gaussian target dimension");
  gen->add_flag("--stratified", o.stratified, "Latin-hypercube gaussian noise");

  auto* metric = app.add_subcommand("metric", "evaluate a calibration or regression metric");
  metric->add_option("kind", o.metric_kind, "ece|accuracy|gence|gence-sq|bleed|regression")->required();
  metric->add_option("--pred", o.pred_path, "predictions JSONL");
  metric->add_option("--truth", o.truth_path, "dataset JSONL")->required();
  metric->add_option("--bins", o.bins, "ECE bins");
  metric->add_option("--fibers", o.fibers, "variance fibers: exact | eps:<w> | quantile:<k>");
  metric->add_flag("--zero-truth", o.zero_truth, "compare variances against zero");
  metric->add_option("-o,--out", o.out_path, "bin/fiber CSV path");

  auto* bound = app.add_subcommand("bound", "evaluate a bound");
  bound->add_option("kind", o.bound_kind, "bound kind")->required();
  bound->add_option("--density", o.density, "truncnorm:mu,sigma,a,b | point:p");
  bound->add_option("--k-star", o.k_star);
  bound->add_option("--p2-mass", o.p2_mass);
  bound->add_option("--m", o.m);
  bound->add_option("--K2", o.K2);
  bound->add_option("--K", o.K);
  bound->add_option("--deepsets-n", o.deepsets_n);
  bound->add_option("--m-prime", o.m_prime);
  bound->add_option("--mass", o.mass);
  bound->add_option("--min-orbit-mass", o.min_orbit_mass);
  bound->add_option("--fiber", o.fiber_terms, "mass,error,s[,s...] (repeatable)");
  bound->add_option("--eps", o.eps);
  bound->add_option("--delta", o.delta);
  bound->add_option("--data", o.data_path);
  bound->add_option("--group", o.group);
  bound->add_option("--tol", o.tol);
  bound->add_option("--id", o.example_id);
  bound->add_option("--s1", o.s1);
  bound->add_option("--s2", o.s2);

  auto* analyze = app.add_subcommand("analyze", "orbit decomposition and dissent analysis");
  analyze->add_option("--data", o.data_path)->required();
  analyze->add_option("--group", o.group)->required();
  analyze->add_option("--tol", o.tol);
  analyze->add_option("-o,--out", o.out_path, "per-orbit CSV path");

  auto* example = app.add_subcommand("example", "reproduce a worked example");
  example->add_option("--id", o.example_id, "4.1|4.2|4.3|4.4|5.1")->required();
  example->add_option("--s1", o.s1);
  example->add_option("--s2", o.s2);
  example->add_option("--k-star", o.k_star);
  example->add_option("--sigma", o.sigma);
  example->add_option("--coefficient", o.coefficient);

  auto* experiment = app.add_subcommand("experiment", "run a toy-model experiment");
  experiment->add_option("name", o.experiment_kind, "swiss|vectorfield")->required();
  experiment->add_option("--ratios", o.ratios)->delimiter(',');
  experiment->add_option("--seeds", o.seeds);
  experiment->add_option("--n-per-arm", o.n_per_arm);
  experiment->add_option("--n", o.n);
  experiment->add_option("--radius", o.radius);
  experiment->add_option("--kind", o.field, "spiral|sinusoidal");
  experiment->add_option("--epochs", o.epochs);
  experiment->add_option("--hidden", o.hidden)->delimiter(',');
  experiment->add_option("--lr", o.lr);
  experiment->add_option("--batch", o.batch);
  experiment->add_option("--bins", o.bins);
  experiment->add_option("--variance-init", o.variance_init);
  experiment->add_option("--optimizer", o.optimizer);
  experiment->add_option("--activation", o.activation);
  experiment->add_option("--beta", o.beta);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    if (gen->parsed() || o.gen_spec.empty()) err << kGenGrammar << '\n';
    return kUsage;
  }

  detail::Runner r{o, out, err, {}};
  r.manifest.command = args;
  r.manifest.seeds = {o.seed};
  try {
    if (gen->parsed()) return r.gen();
    if (metric->parsed()) return r.metric();
    if (bound->parsed()) return r.bound();
    if (analyze->parsed()) return r.analyze();
    if (example->parsed()) return r.example();
    if (experiment->parsed()) return r.experiment();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}

} // namespace equicalib::cli
