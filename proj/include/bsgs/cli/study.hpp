#ifndef BSGS_CLI_STUDY_HPP_
#define BSGS_CLI_STUDY_HPP_

// Monte Carlo studies: for every (cell, replication) simulate, optionally
// tune, run the chain and score. Replications are independent tasks; the
// summary tables are assembled after all of them finish.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "bsgs/cli/config.hpp"
#include "bsgs/cli/fit.hpp"
#include "bsgs/cli/report.hpp"
#include "bsgs/dgp.hpp"
#include "bsgs/eval.hpp"
#include "bsgs/parallel.hpp"

namespace bsgs::cli {

struct ReplicationRecord {
  int cell = 0, replication = 0;
  std::uint64_t data_seed = 0, chain_seed = 0, tuning_seed = 0;
  double c0 = 0.0, c1 = 0.0;
  std::string error;  // empty on success
  Eigen::VectorXd theta_hat;  // posterior median of the exogenous block
  double sq_error = 0.0;
  SelectionReport selection;
  ScoreReport scores;
  std::optional<Selection> tuning;
  Eigen::VectorXd implied_weights;  // MIDAS only: mean of Phi' theta_hat over active series
};

struct StudyResult {
  std::vector<ReplicationRecord> records;
  Report report;
};

inline std::uint64_t cell_data_seed(std::uint64_t spec_seed, std::uint64_t study_seed, int cell) {
  return spec_seed != 0 ? spec_seed : mix_seed(study_seed, 1000 + std::uint64_t(cell));
}

inline std::uint64_t replication_seed(std::uint64_t study_seed, int cell, int rep) {
  return mix_seed(mix_seed(study_seed, 2000 + std::uint64_t(cell)), std::uint64_t(rep));
}

namespace detail {

/// Fits one replication and fills estimation, selection and forecast scores.
inline void score_replication(ReplicationRecord& rec, const GroupedDesign& in, const GroupedDesign& oos,
                              const Eigen::VectorXd& theta0, const std::vector<bool>& truth_group,
                              const RunConfig& cfg) {
  const FitResult fit = fit_model(in, cfg, VolatilityModel::Homoskedastic, rec.chain_seed, 1);
  rec.c0 = fit.prior.c0;
  rec.c1 = fit.prior.c1;
  rec.tuning_seed = fit.tuning_seed;
  rec.tuning = fit.selection;
  const int p = int(theta0.size());
  const int N = int(truth_group.size());
  rec.theta_hat = posterior_median(fit.chain.theta_draws).head(p);
  rec.sq_error = (rec.theta_hat - theta0).squaredNorm();
  std::vector<bool> truth_var(p);
  for (int c = 0; c < p; ++c) truth_var[c] = theta0[c] != 0.0;
  rec.selection = selection_metrics(fit.chain.inclusion_group.head(N), fit.chain.inclusion_within.head(p),
                                    truth_group, truth_var);
  if (oos.T() > 0) {
    const auto dens = posterior_predictive(fit.chain, oos.Z);
    const auto bench = ar1_on_design(in, oos);
    rec.scores = forecast_scores(dens, oos.y, &bench);
  } else {
    rec.scores.rmsfe = rec.scores.avg_logs = rec.scores.avg_crps = std::numeric_limits<double>::quiet_NaN();
  }
}

struct Metric {
  std::string name;
  double (*get)(const ReplicationRecord&);
};

inline const std::vector<Metric>& metrics() {
  static const std::vector<Metric> m = {
      {"sq_error", [](const ReplicationRecord& r) { return r.sq_error; }},
      {"TPR_N", [](const ReplicationRecord& r) { return r.selection.tpr_group; }},
      {"TPR_g", [](const ReplicationRecord& r) { return r.selection.tpr_var; }},
      {"MCC_N", [](const ReplicationRecord& r) { return r.selection.mcc_group; }},
      {"MCC_g", [](const ReplicationRecord& r) { return r.selection.mcc_var; }},
      {"rel_RMSFE", [](const ReplicationRecord& r) { return r.scores.rel_rmsfe; }},
      {"rel_LogS", [](const ReplicationRecord& r) { return r.scores.rel_logs; }},
      {"rel_CRPS", [](const ReplicationRecord& r) { return r.scores.rel_crps; }},
      {"RMSFE", [](const ReplicationRecord& r) { return r.scores.rmsfe; }},
      {"LogS", [](const ReplicationRecord& r) { return r.scores.avg_logs; }},
      {"CRPS", [](const ReplicationRecord& r) { return r.scores.avg_crps; }},
  };
  return m;
}

/// Mean over successful replications and its bootstrap s.e. (absent below two).
struct Summary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
};

inline Summary summarize(const std::vector<const ReplicationRecord*>& ok, const Metric& m, int B, std::uint64_t seed) {
  std::vector<double> v;
  for (const auto* r : ok) v.push_back(m.get(*r));
  Summary s;
  if (v.empty()) return s;
  double acc = 0.0;
  int n = 0;
  for (double x : v)
    if (std::isfinite(x)) { acc += x; ++n; }
  if (n > 0) s.mean = acc / n;
  if (B > 1) s.se = bootstrap_se(v, B, seed);
  return s;
}

inline Table replications_table(const std::vector<ReplicationRecord>& recs, const std::vector<std::string>& labels) {
  Table t;
  t.name = "replications";
  t.columns = {"cell", "replication", "data_seed", "chain_seed", "tuning_seed", "c0", "c1", "status"};
  for (const auto& m : metrics()) t.columns.push_back(m.name);
  for (const auto& r : recs) {
    std::vector<Cell> row = {text(labels[r.cell]), integer(r.replication), text(std::to_string(r.data_seed)),
                             text(std::to_string(r.chain_seed)), text(std::to_string(r.tuning_seed))};
    if (r.error.empty()) {
      row.push_back(num(r.c0));
      row.push_back(num(r.c1));
      row.push_back(text("ok"));
      for (const auto& m : metrics()) row.push_back(num(m.get(r)));
    } else {
      row.push_back(Cell{});
      row.push_back(Cell{});
      row.push_back(text("failed: " + r.error));
      for (std::size_t k = 0; k < metrics().size(); ++k) row.push_back(Cell{});
    }
    t.add(std::move(row));
  }
  return t;
}

inline Table manifest_table(const std::vector<ReplicationRecord>& recs, const std::vector<std::string>& labels,
                            const std::vector<std::string>& summary_tables) {
  Table t;
  t.name = "manifest";
  t.columns = {"table", "row", "replication", "data_seed", "chain_seed", "tuning_seed", "status"};
  for (const auto& name : summary_tables) {
    for (const auto& r : recs) {
      t.add({text(name), text(labels[r.cell]), integer(r.replication), text(std::to_string(r.data_seed)),
             text(std::to_string(r.chain_seed)), text(std::to_string(r.tuning_seed)),
             text(r.error.empty() ? "used" : "excluded")});
    }
  }
  return t;
}

inline Table dic_table(const std::vector<ReplicationRecord>& recs, const std::vector<std::string>& labels) {
  Table t;
  t.name = "dic";
  t.columns = {"cell", "replication", "point", "c0", "c1", "dic", "chain_seed", "selected", "error"};
  for (const auto& r : recs) {
    if (!r.tuning) continue;
    for (const auto& row : r.tuning->table) {
      const bool chosen = row.error.empty() && row.c0 == r.tuning->c0 && row.c1 == r.tuning->c1;
      t.add({text(labels[r.cell]), integer(r.replication), integer(row.index), num(row.c0), num(row.c1), num(row.dic),
             text(std::to_string(row.chain_seed)), integer(chosen ? 1 : 0), text(row.error)});
    }
  }
  return t;
}

inline std::vector<const ReplicationRecord*> successful(const std::vector<ReplicationRecord>& recs, int cell) {
  std::vector<const ReplicationRecord*> ok;
  for (const auto& r : recs)
    if (r.cell == cell && r.error.empty()) ok.push_back(&r);
  return ok;
}

inline int failures(const std::vector<ReplicationRecord>& recs, int cell) {
  int n = 0;
  for (const auto& r : recs)
    if (r.cell == cell && !r.error.empty()) ++n;
  return n;
}

inline EstimationMetrics cell_estimation(const std::vector<const ReplicationRecord*>& ok, const Eigen::VectorXd& theta0) {
  if (ok.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan};
  }
  Eigen::MatrixXd H(ok.size(), theta0.size());
  for (std::size_t i = 0; i < ok.size(); ++i) H.row(i) = ok[i]->theta_hat.transpose();
  return estimation_metrics(H, theta0);
}

inline const Metric& metric(const std::string& name) {
  for (const auto& m : metrics())
    if (m.name == name) return m;
  throw std::logic_error("unknown metric " + name);
}

// Appends "<name>, <name>_se" cells.
inline void add_summary(std::vector<Cell>& row, const std::vector<const ReplicationRecord*>& ok, const std::string& name,
                        const RunConfig& cfg, int cell) {
  std::uint64_t tag = 0;
  for (std::size_t k = 0; k < metrics().size(); ++k)
    if (metrics()[k].name == name) tag = k;
  const Summary s = summarize(ok, metric(name), cfg.study.bootstrap, mix_seed(cfg.seed, 3000 + 64 * std::uint64_t(cell) + tag));
  row.push_back(num(s.mean));
  row.push_back(num(s.se));
}

}  // namespace detail

inline StudyResult run_grouped_study(const RunConfig& cfg) {
  const auto& cells = cfg.study.grouped_cells;
  const int R = cfg.study.replications;
  StudyResult out;
  out.records.resize(cells.size() * R);
  std::vector<GroupedTruth> truths(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    GroupedDgpSpec spec = cells[c];
    spec.seed = cell_data_seed(spec.seed, cfg.seed, int(c));
    truths[c] = grouped_support(spec);
  }
  parallel_for(out.records.size(), cfg.threads, [&](std::size_t i) {
    ReplicationRecord& rec = out.records[i];
    rec.cell = int(i / R);
    rec.replication = int(i % R);
    GroupedDgpSpec spec = cells[rec.cell];
    spec.seed = cell_data_seed(spec.seed, cfg.seed, rec.cell);
    spec.replication = rec.replication;
    rec.data_seed = spec.seed;
    rec.chain_seed = replication_seed(cfg.seed, rec.cell, rec.replication);
    try {
      const GroupedDataset data = simulate_grouped(spec);
      std::vector<bool> truth_group(spec.N, false);
      for (int j : data.truth.active_groups) truth_group[j] = true;
      detail::score_replication(rec, data.in_sample, data.out_of_sample, data.truth.theta0, truth_group, cfg);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  });

  const auto& labels = cfg.study.cell_labels;
  Table t1, t3;
  t1.name = "table1";
  t1.columns = {"cell", "Ng", "N", "g", "s0gr", "reps", "failed", "MSE", "MSE_se", "VAR", "BIAS2", "TPR_N", "TPR_N_se",
                "TPR_g", "TPR_g_se", "MCC_N", "MCC_N_se", "MCC_g", "MCC_g_se"};
  t3.name = "table3";
  t3.columns = {"cell", "Ng", "N", "g", "s0gr", "reps", "rel_RMSFE", "rel_RMSFE_se", "rel_LogS", "rel_LogS_se",
                "rel_CRPS", "rel_CRPS_se"};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& s = cells[c];
    const auto ok = detail::successful(out.records, int(c));
    const EstimationMetrics em = detail::cell_estimation(ok, truths[c].theta0);
    std::vector<Cell> row = {text(labels[c]), integer(s.N * s.g), integer(s.N), integer(s.g), integer(s.s0gr),
                             integer(std::int64_t(ok.size())), integer(detail::failures(out.records, int(c)))};
    row.push_back(num(em.mse));
    const detail::Summary mse = detail::summarize(ok, detail::metric("sq_error"), cfg.study.bootstrap,
                                                  mix_seed(cfg.seed, 3000 + 64 * std::uint64_t(c)));
    row.push_back(num(mse.se));
    row.push_back(num(em.var));
    row.push_back(num(em.bias2));
    for (const char* m : {"TPR_N", "TPR_g", "MCC_N", "MCC_g"}) detail::add_summary(row, ok, m, cfg, int(c));
    t1.add(std::move(row));

    std::vector<Cell> row3 = {text(labels[c]), integer(s.N * s.g), integer(s.N), integer(s.g), integer(s.s0gr),
                              integer(std::int64_t(ok.size()))};
    for (const char* m : {"rel_RMSFE", "rel_LogS", "rel_CRPS"}) detail::add_summary(row3, ok, m, cfg, int(c));
    t3.add(std::move(row3));
  }
  out.report.tables = {t1, t3, detail::replications_table(out.records, labels),
                       detail::manifest_table(out.records, labels, {"table1", "table3"})};
  if (cfg.tuning.enabled) out.report.tables.push_back(detail::dic_table(out.records, labels));
  return out;
}

inline StudyResult run_midas_study(const RunConfig& cfg) {
  const auto& cells = cfg.study.midas_cells;
  const int R = cfg.study.replications;
  StudyResult out;
  out.records.resize(cells.size() * R);
  std::vector<Eigen::VectorXd> theta0(cells.size()), true_weights(cells.size());
  std::vector<BasisMatrix> bases(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    bases[c] = make_basis(cells[c].basis, cells[c].basis_g, cells[c].p_x);
    true_weights[c] = beta_lag_weights(cells[c].a, cells[c].b, cells[c].c, cells[c].p_x);
  }
  parallel_for(out.records.size(), cfg.threads, [&](std::size_t i) {
    ReplicationRecord& rec = out.records[i];
    rec.cell = int(i / R);
    rec.replication = int(i % R);
    MidasDgpSpec spec = cells[rec.cell];
    spec.seed = cell_data_seed(spec.seed, cfg.seed, rec.cell);
    spec.replication = rec.replication;
    rec.data_seed = spec.seed;
    rec.chain_seed = replication_seed(cfg.seed, rec.cell, rec.replication);
    try {
      const MidasDataset data = simulate_midas(spec);
      std::vector<bool> truth_group(spec.N, false);
      for (int j : data.truth.active_series) truth_group[j] = true;
      detail::score_replication(rec, data.in_sample, data.out_of_sample, data.truth.theta0, truth_group, cfg);
      const BasisMatrix& B = bases[rec.cell];
      const int g = int(B.values.rows());
      rec.implied_weights = Eigen::VectorXd::Zero(B.p_x + 1);
      for (int j : data.truth.active_series) rec.implied_weights += B.values.transpose() * rec.theta_hat.segment(j * g, g);
      rec.implied_weights /= double(data.truth.active_series.size());
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  });
  // theta0 is shared by every replication of a cell.
  for (std::size_t c = 0; c < cells.size(); ++c) {
    MidasDgpSpec spec = cells[c];
    spec.seed = cell_data_seed(spec.seed, cfg.seed, int(c));
    spec.T = 2;
    spec.T_oos = 0;
    theta0[c] = simulate_midas(spec).truth.theta0;
  }

  const auto& labels = cfg.study.cell_labels;
  Table t4;
  t4.name = "table4";
  t4.columns = {"cell", "N", "s0gr", "basis", "weights", "reps", "failed", "TPR_N", "TPR_N_se", "MCC_N", "MCC_N_se",
                "rel_RMSFE", "rel_RMSFE_se", "rel_LogS", "rel_LogS_se", "rel_CRPS", "rel_CRPS_se", "MSE", "MSE_se",
                "VAR", "BIAS2"};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& s = cells[c];
    const auto ok = detail::successful(out.records, int(c));
    const std::string w = "(" + format_double(s.a) + "," + format_double(s.b) + "," + format_double(s.c) + ")";
    std::vector<Cell> row = {text(labels[c]), integer(s.N), integer(s.s0gr), text(to_string(s.basis)), text(w),
                             integer(std::int64_t(ok.size())), integer(detail::failures(out.records, int(c)))};
    for (const char* m : {"TPR_N", "MCC_N", "rel_RMSFE", "rel_LogS", "rel_CRPS"}) detail::add_summary(row, ok, m, cfg, int(c));
    const EstimationMetrics em = detail::cell_estimation(ok, theta0[c]);
    row.push_back(num(em.mse));
    const detail::Summary mse = detail::summarize(ok, detail::metric("sq_error"), cfg.study.bootstrap,
                                                  mix_seed(cfg.seed, 3000 + 64 * std::uint64_t(c)));
    row.push_back(num(mse.se));
    row.push_back(num(em.var));
    row.push_back(num(em.bias2));
    t4.add(std::move(row));

    LinePlot plot;
    plot.name = "weights_" + labels[c];
    plot.title = "MIDAS weights, cell " + labels[c] + " " + w;
    plot.x_label = "lag";
    plot.y_label = "weight";
    Series truth{"true weights", {}, {}};
    for (Eigen::Index u = 0; u < true_weights[c].size(); ++u) {
      truth.x.push_back(double(u));
      truth.y.push_back(true_weights[c][u]);
    }
    plot.series.push_back(truth);
    if (!ok.empty()) {
      Series est{"estimated (mean over replications)", {}, {}};
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(true_weights[c].size());
      for (const auto* r : ok) mean += r->implied_weights;
      mean /= double(ok.size());
      for (Eigen::Index u = 0; u < mean.size(); ++u) {
        est.x.push_back(double(u));
        est.y.push_back(mean[u]);
      }
      plot.series.push_back(est);
    }
    out.report.lines.push_back(std::move(plot));
  }
  out.report.tables = {t4, detail::replications_table(out.records, labels),
                       detail::manifest_table(out.records, labels, {"table4"})};
  if (cfg.tuning.enabled) out.report.tables.push_back(detail::dic_table(out.records, labels));
  return out;
}

}  // namespace bsgs::cli

#endif  // BSGS_CLI_STUDY_HPP_
