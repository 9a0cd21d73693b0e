#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "equicalib/generators.hpp"
#include "equicalib/group.hpp"
#include "equicalib/models.hpp"
#include "equicalib/parallel.hpp"
#include "equicalib/report.hpp"
#include "equicalib/rng.hpp"
#include "equicalib/symmetry.hpp"

namespace equicalib {

// ---------------------------------------------------------------------------
// Swiss-roll sweep

inline MlpConfig default_swiss_model() {
  MlpConfig c;
  c.layer_widths = {64, 64};
  c.activation = nn::Activation::relu;
  c.epochs = 1500;
  c.learning_rate = 0.01;
  c.batch_size = 32;
  return c;
}

struct SwissSweepConfig {
  std::vector<double> ratios{0.0, 0.25, 0.5, 0.75, 1.0};
  int seeds = 5;
  std::uint64_t base_seed = 0;
  int n_per_arm = 100;
  int sectors = 8;
  int n_bins = 10;
  double test_fraction = 0.2;
  MlpConfig model = default_swiss_model();
};

struct SwissRow {
  double ratio = 0.0;
  int seed = 0;
  std::string model; // "invariant" or "unconstrained"
  double acc = 0.0;
  double ece = 0.0;
  double lb = 0.0; // accuracy bounds implied by the symmetry analysis
  double ub = 1.0;
};

/// Seeds for replicate `s`: the dataset seed is shared across ratios so the
/// arm layout and sector order stay fixed while the ratio varies.
inline SeedTree replicate_seed(std::uint64_t base, int s) { return SeedTree(base).child(static_cast<std::uint64_t>(s)); }

inline std::vector<SwissRow> run_swissroll_sweep(const SwissSweepConfig& cfg) {
  for (double r : cfg.ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw UsageError("ratios must lie in [0, 1]");
  }
  if (cfg.seeds < 1) throw UsageError("need at least one seed");
  cfg.model.validate();
  const std::size_t n_tasks = cfg.ratios.size() * static_cast<std::size_t>(cfg.seeds) * 2;
  std::vector<SwissRow> rows(n_tasks);
  const FiniteGroup zswap = build_group("z-swap", 3);
  parallel_for(n_tasks, [&](std::size_t t) {
    const std::size_t ri = t / (2 * static_cast<std::size_t>(cfg.seeds));
    const int s = static_cast<int>((t / 2) % static_cast<std::size_t>(cfg.seeds));
    const bool invariant = t % 2 == 0;
    const SeedTree root = replicate_seed(cfg.base_seed, s);
    const double ratio = cfg.ratios[ri];
    const auto ds = gen::swiss_rolls({ratio, cfg.n_per_arm, cfg.sectors, root.child("data").seed()});
    const auto split = train_test_split(ds, cfg.test_fraction, root.child("split").seed(), true);
    MlpConfig mc = cfg.model;
    mc.seed = root.child(invariant ? "model/invariant" : "model/unconstrained").seed();
    mc.invariant_mode = invariant ? InvariantMode::drop_z : InvariantMode::none;
    const auto model = train_classifier(split.train, mc);
    const auto ev = evaluate_classifier(model, split.test, cfg.n_bins);
    SwissRow row{ratio, s, invariant ? "invariant" : "unconstrained", ev.accuracy, ev.ece, 0.0, 1.0};
    if (invariant) {
      const auto b = classification_bounds(ds, zswap);
      row.lb = 1.0 - b.error_upper;
      row.ub = 1.0 - b.error_lower;
    }
    rows[t] = row;
  });
  return rows;
}

inline CsvTable swiss_csv(const std::vector<SwissRow>& rows) {
  CsvTable t({"ratio", "seed", "model", "acc", "ece", "lb", "ub"});
  for (const auto& r : rows) {
    t.add({fmt_double(r.ratio), std::to_string(r.seed), r.model, fmt_double(r.acc), fmt_double(r.ece),
           fmt_double(r.lb), fmt_double(r.ub)});
  }
  return t;
}

struct SwissSummaryRow {
  double ratio = 0.0;
  std::string model;
  double acc = 0.0;
  double ece = 0.0;
};

/// Seed-averaged accuracy and ECE per (ratio, model), in ratio order.
inline std::vector<SwissSummaryRow> summarize_swiss(const std::vector<SwissRow>& rows) {
  std::vector<SwissSummaryRow> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SwissSummaryRow& s) { return s.ratio == r.ratio && s.model == r.model; });
    if (it == out.end()) {
      out.push_back({r.ratio, r.model, 0.0, 0.0});
      it = out.end() - 1;
    }
    it->acc += r.acc;
    it->ece += r.ece;
  }
  for (auto& s : out) {
    const auto n = std::count_if(rows.begin(), rows.end(),
                                 [&](const SwissRow& r) { return r.ratio == s.ratio && r.model == s.model; });
    s.acc /= static_cast<double>(n);
    s.ece /= static_cast<double>(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vector-field experiment

inline MlpConfig default_vectorfield_model() {
  MlpConfig c;
  c.layer_widths = {32, 32};
  c.epochs = 200;
  c.learning_rate = 0.005;
  c.batch_size = 32;
  c.variance_init = 0.1;
  return c;
}

struct VectorFieldConfig {
  gen::VectorField kind = gen::VectorField::spiral;
  int seeds = 5;
  std::uint64_t base_seed = 0;
  int n = 500;
  double radius = 3.0;
  double test_fraction = 0.2;
  double beta_exp = 1.0;
  MlpConfig model = default_vectorfield_model();
};

struct VectorFieldRow {
  int seed = 0;
  std::string model;
  double mse = 0.0;
  double beta_nll = 0.0;
  double gence = 0.0;
  double bleed = 0.0;
};

struct AngleSummary {
  std::string model;
  AngleRow row; // seed-averaged
};

struct ModelSummary {
  std::string model;
  double mse = 0.0;
  double beta_nll = 0.0;
  double bleed = 0.0;
};

struct VectorFieldReport {
  std::string kind;
  std::vector<VectorFieldRow> rows;
  std::vector<AngleSummary> angles; // kAngleSectors rows per model
  std::vector<ModelSummary> summary;
  double target_second_moment = 0.0; // seed-averaged test E|f|^2

  [[nodiscard]] const ModelSummary& model(const std::string& name) const {
    for (const auto& s : summary) {
      if (s.model == name) return s;
    }
    throw UsageError("no model '" + name + "' in report");
  }
};

inline std::string to_string(gen::VectorField k) { return k == gen::VectorField::spiral ? "spiral" : "sinusoidal"; }

inline gen::VectorField parse_vector_field(std::string_view s) {
  if (s == "spiral") return gen::VectorField::spiral;
  if (s == "sinusoidal") return gen::VectorField::sinusoidal;
  throw UsageError("unknown vector field '" + std::string(s) + "' (expected spiral|sinusoidal)");
}

inline VectorFieldReport run_vectorfield_experiment(const VectorFieldConfig& cfg) {
  if (cfg.seeds < 1) throw UsageError("need at least one seed");
  cfg.model.validate();
  const RegressorKind kinds[2] = {RegressorKind::radial_equivariant, RegressorKind::unconstrained};
  const std::size_t n_tasks = static_cast<std::size_t>(cfg.seeds) * 2;
  std::vector<VectorFieldRow> rows(n_tasks);
  std::vector<std::vector<AngleRow>> angle_rows(n_tasks);
  std::vector<double> second_moment(static_cast<std::size_t>(cfg.seeds));
  parallel_for(n_tasks, [&](std::size_t t) {
    const int s = static_cast<int>(t / 2);
    const RegressorKind kind = kinds[t % 2];
    const SeedTree root = replicate_seed(cfg.base_seed, s).child(to_string(cfg.kind));
    const auto ds = gen::vector_field(cfg.kind, cfg.n, cfg.radius, root.child("data").seed());
    const auto split = train_test_split(ds, cfg.test_fraction, root.child("split").seed(), false);
    MlpConfig mc = cfg.model;
    mc.seed = root.child("model/" + to_string(kind)).seed();
    const auto model = train_vector_regressor(split.train, kind, mc, cfg.beta_exp);
    const auto ev = evaluate_regressor(model, split.test, cfg.beta_exp);
    rows[t] = {s, to_string(kind), ev.mse, ev.beta_nll, ev.gence, ev.bleed};
    angle_rows[t] = ev.angles;
    if (t % 2 == 0) {
      std::vector<double> e;
      for (std::size_t i = 0; i < split.test.size(); ++i) {
        e.push_back(split.test.weights[i] * (*split.test.targets)[i].squaredNorm());
      }
      second_moment[static_cast<std::size_t>(s)] = numeric::pairwise_sum(e);
    }
  });

  VectorFieldReport rep;
  rep.kind = to_string(cfg.kind);
  rep.rows = rows;
  for (double m : second_moment) rep.target_second_moment += m / cfg.seeds;
  for (std::size_t k = 0; k < 2; ++k) {
    ModelSummary ms{to_string(kinds[k])};
    for (int s = 0; s < cfg.seeds; ++s) {
      const auto& r = rows[static_cast<std::size_t>(s) * 2 + k];
      ms.mse += r.mse / cfg.seeds;
      ms.beta_nll += r.beta_nll / cfg.seeds;
      ms.bleed += r.bleed / cfg.seeds;
    }
    rep.summary.push_back(ms);
    for (int a = 0; a < kAngleSectors; ++a) {
      AngleRow avg = angle_rows[k][static_cast<std::size_t>(a)];
      avg.mass = avg.mse = avg.beta_nll = 0.0;
      int present = 0;
      for (int s = 0; s < cfg.seeds; ++s) {
        const auto& r = angle_rows[static_cast<std::size_t>(s) * 2 + k][static_cast<std::size_t>(a)];
        avg.mass += r.mass / cfg.seeds;
        if (r.mass > 0.0) {
          avg.mse += r.mse;
          avg.beta_nll += r.beta_nll;
          ++present;
        }
      }
      avg.mse = present ? avg.mse / present : std::nan("");
      avg.beta_nll = present ? avg.beta_nll / present : std::nan("");
      rep.angles.push_back({to_string(kinds[k]), avg});
    }
  }
  return rep;
}

inline CsvTable vectorfield_results_csv(const VectorFieldReport& rep) {
  CsvTable t({"kind", "seed", "model", "mse", "beta_nll", "gence", "bleed"});
  for (const auto& r : rep.rows) {
    t.add({rep.kind, std::to_string(r.seed), r.model, fmt_double(r.mse), fmt_double(r.beta_nll), fmt_double(r.gence),
           fmt_double(r.bleed)});
  }
  return t;
}

inline CsvTable vectorfield_angle_csv(const VectorFieldReport& rep) {
  CsvTable t({"kind", "model", "sector", "angle_lo", "angle_hi", "mass", "mse", "beta_nll"});
  for (const auto& a : rep.angles) {
    t.add({rep.kind, a.model, std::to_string(a.row.sector), fmt_double(a.row.angle_lo), fmt_double(a.row.angle_hi),
           fmt_double(a.row.mass), fmt_double(a.row.mse), fmt_double(a.row.beta_nll)});
  }
  return t;
}

} // namespace equicalib
