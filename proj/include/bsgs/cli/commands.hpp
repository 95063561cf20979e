#ifndef BSGS_CLI_COMMANDS_HPP_
#define BSGS_CLI_COMMANDS_HPP_

// One function per verb, each returning the report to emit.

#include <string>
#include <vector>

#include "bsgs/cli/config.hpp"
#include "bsgs/cli/fit.hpp"
#include "bsgs/cli/models.hpp"
#include "bsgs/cli/nowcast.hpp"
#include "bsgs/cli/panel.hpp"
#include "bsgs/cli/report.hpp"
#include "bsgs/cli/study.hpp"
#include "bsgs/tuning.hpp"

namespace bsgs::cli {

inline Panel load_checked_panel(const RunConfig& cfg) {
  validate_references(cfg, read_csv_header(cfg.data.path));
  return load_panel(cfg.data.path, cfg.data.schema);
}

inline Table key_value_table(const std::string& name, const std::vector<std::pair<std::string, Cell>>& kv) {
  Table t;
  t.name = name;
  t.columns = {"key", "value"};
  for (const auto& [k, v] : kv) t.add({text(k), v});
  return t;
}

inline Table dic_rows(const Selection& s) {
  Table t;
  t.name = "dic";
  t.columns = {"point", "c0", "c1", "dic", "chain_seed", "selected", "error"};
  for (const auto& row : s.table) {
    const bool chosen = row.error.empty() && row.c0 == s.c0 && row.c1 == s.c1;
    t.add({integer(row.index), num(row.c0), num(row.c1), num(row.dic), text(std::to_string(row.chain_seed)),
           integer(chosen ? 1 : 0), text(row.error)});
  }
  return t;
}

inline Report run_estimate(const RunConfig& cfg) {
  const Panel panel = load_checked_panel(cfg);
  const auto series = regressor_names(panel, cfg.model);
  const PanelDesign pd = panel_design(panel, cfg.model, series, cfg.model.basis, cfg.model.horizon);
  GroupedDesign d = pd.design;
  if (cfg.model.standardize) standardize_columns(d);
  const FitResult fit = fit_model(d, cfg, cfg.model.volatility, mix_seed(cfg.seed, 4000), cfg.threads);
  const ChainOutput& ch = fit.chain;

  Report r;
  const Eigen::VectorXd scale = d.column_scale.size() ? d.column_scale : Eigen::VectorXd::Ones(d.width());
  const Eigen::VectorXd med = posterior_median(ch.theta_draws).cwiseQuotient(scale);
  const Eigen::VectorXd mean = ch.theta_draws.colwise().mean().transpose().cwiseQuotient(scale);

  Table coef;
  coef.name = "coefficients";
  coef.columns = {"group", "column", "position", "median", "mean", "inclusion"};
  for (int j = 0; j < d.groups(); ++j) {
    for (int c = d.partition.start(j); c < d.partition.end(j); ++c) {
      coef.add({text(d.group_labels[j]), integer(c), integer(c - d.partition.start(j)), num(med[c]), num(mean[c]),
                num(ch.inclusion_within[c])});
    }
  }
  Table groups;
  groups.name = "groups";
  groups.columns = {"group", "size", "inclusion", "selected"};
  for (int j = 0; j < d.groups(); ++j) {
    groups.add({text(d.group_labels[j]), integer(d.partition.size(j)), num(ch.inclusion_group[j]),
                integer(ch.inclusion_group[j] >= 0.5 ? 1 : 0)});
  }
  std::vector<std::pair<std::string, Cell>> kv = {
      {"design", text(cfg.model.design)},
      {"target", text(cfg.model.target)},
      {"first_period", text(panel.period_label(pd.row_quarter.front()))},
      {"last_period", text(panel.period_label(pd.row_quarter.back()))},
      {"T", integer(d.T())},
      {"width", integer(d.width())},
      {"groups", integer(d.groups())},
      {"volatility", text(to_string(cfg.model.volatility))},
      {"c0", num(fit.prior.c0)},
      {"c1", num(fit.prior.c1)},
      {"retained_draws", integer(ch.draws())},
      {"sigma2_mean", num(ch.sigma2_draws.mean())},
      {"tau_acceptance_mean", num(ch.meta.tau_acceptance.mean())},
  };
  if (cfg.model.volatility == VolatilityModel::Homoskedastic) kv.push_back({"dic", num(dic(ch, d))});
  for (std::size_t k = 0; k < fit.chain_seeds.size(); ++k) {
    kv.push_back({"chain_seed_" + std::to_string(k), text(std::to_string(fit.chain_seeds[k]))});
  }
  if (fit.selection) kv.push_back({"tuning_seed", text(std::to_string(fit.tuning_seed))});
  r.tables = {key_value_table("summary", kv), groups, coef};
  if (fit.selection) r.tables.push_back(dic_rows(*fit.selection));

  // Implied lag weights Phi' theta for the series with a basis, strongest first.
  if (cfg.model.design == "midas") {
    LinePlot plot;
    plot.name = "weights";
    plot.title = "Implied MIDAS weights (posterior median)";
    plot.x_label = "monthly lag";
    plot.y_label = "weight";
    std::vector<int> order;
    for (int j = 0; j < d.groups(); ++j)
      if (d.basis_meta[j]) order.push_back(j);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ch.inclusion_group[a] > ch.inclusion_group[b]; });
    if (order.size() > 4) order.resize(4);
    for (int j : order) {
      const BasisMatrix& B = *d.basis_meta[j];
      const Eigen::VectorXd w = B.values.transpose() * med.segment(d.partition.start(j), d.partition.size(j));
      Series s{d.group_labels[j], {}, {}};
      for (Eigen::Index u = 0; u < w.size(); ++u) {
        s.x.push_back(double(u));
        s.y.push_back(w[u]);
      }
      plot.series.push_back(std::move(s));
    }
    if (!plot.series.empty()) r.lines.push_back(std::move(plot));
  }
  return r;
}

inline Report run_tune(const RunConfig& cfg) {
  const Panel panel = load_checked_panel(cfg);
  const auto series = regressor_names(panel, cfg.model);
  const PanelDesign pd = panel_design(panel, cfg.model, series, cfg.model.basis, cfg.model.horizon);
  GroupedDesign d = pd.design;
  if (cfg.model.standardize) standardize_columns(d);
  const std::uint64_t seed = mix_seed(mix_seed(cfg.seed, 4000), 1);
  const GridSpec grid = tuning_grid(d, cfg.tuning, seed);
  McmcConfig short_cfg;
  short_cfg.sweeps = cfg.tuning.sweeps;
  short_cfg.burn_in = cfg.tuning.burn_in;
  short_cfg.thin = cfg.tuning.thin;
  short_cfg.seed = seed;
  const Selection s = select_c(d, base_prior(d, cfg.prior), grid, short_cfg, cfg.threads);
  Report r;
  r.tables = {key_value_table("summary", {{"T", integer(d.T())},
                                          {"groups", integer(d.groups())},
                                          {"width", integer(d.width())},
                                          {"c0_floor", num(grid.explicit_points.empty() ? grid.c0_floor : NAN)},
                                          {"c1_floor", num(grid.explicit_points.empty() ? grid.c1_floor : NAN)},
                                          {"plug_in", text(cfg.tuning.plug_in == DicPlugIn::PosteriorMedian ? "median" : "mean")},
                                          {"c0", num(s.c0)},
                                          {"c1", num(s.c1)},
                                          {"seed", text(std::to_string(seed))}}),
              dic_rows(s)};
  return r;
}

inline Report run_mode(const RunConfig& cfg) {
  switch (cfg.mode) {
    case Mode::SimulateGrouped: return run_grouped_study(cfg).report;
    case Mode::SimulateMidas: return run_midas_study(cfg).report;
    case Mode::Estimate: return run_estimate(cfg);
    case Mode::Tune: return run_tune(cfg);
    case Mode::Nowcast: return run_rolling_nowcast(cfg, load_checked_panel(cfg)).report;
  }
  throw std::logic_error("unreachable");
}

}  // namespace bsgs::cli

#endif  // BSGS_CLI_COMMANDS_HPP_
