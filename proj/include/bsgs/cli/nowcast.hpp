#ifndef BSGS_CLI_NOWCAST_HPP_
#define BSGS_CLI_NOWCAST_HPP_

// Rolling-window nowcasting. At each origin every (basis, volatility,
// partition) model is re-estimated on the trailing window and produces a
// direct predictive density per horizon. Pools combine these with weights
// fitted on the past out-of-sample periods only.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bsgs/cli/config.hpp"
#include "bsgs/cli/fit.hpp"
#include "bsgs/cli/models.hpp"
#include "bsgs/cli/panel.hpp"
#include "bsgs/cli/report.hpp"
#include "bsgs/eval.hpp"
#include "bsgs/parallel.hpp"

namespace bsgs::cli {

/// Quantile of a Gaussian mixture by bisection on its CDF.
inline double mixture_quantile(const ForecastDensity& f, double p) {
  double lo = f.means.minCoeff() - 10.0 * std::sqrt(f.variances.maxCoeff());
  double hi = f.means.maxCoeff() + 10.0 * std::sqrt(f.variances.maxCoeff());
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mixture_cdf(f, mid) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// A pooled density per origin. Weights used at origin k are fitted on the
/// origins before k whose train flag is set; with none, weights are uniform.
struct PoolSeries {
  std::vector<Eigen::VectorXd> weights;
  std::vector<ForecastDensity> densities;
};

inline PoolSeries build_pool(const std::vector<const std::vector<ForecastDensity>*>& members,
                             const Eigen::VectorXd& outcomes, const std::vector<bool>& train) {
  const int K = int(members.size());
  if (K == 0) throw std::invalid_argument("build_pool: no members");
  const int n = int(outcomes.size());
  Eigen::MatrixXd dens(n, K);
  for (int k = 0; k < K; ++k) {
    if (int(members[k]->size()) != n) throw std::invalid_argument("build_pool: member length mismatch");
    for (int t = 0; t < n; ++t) dens(t, k) = mixture_density((*members[k])[t], outcomes[t]);
  }
  PoolSeries out;
  std::vector<int> rows;
  for (int t = 0; t < n; ++t) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(K, 1.0 / K);
    if (!rows.empty() && K > 1) {
      Eigen::MatrixXd D(rows.size(), K);
      for (std::size_t i = 0; i < rows.size(); ++i) D.row(i) = dens.row(rows[i]);
      // Zero columns would make the objective -inf for every weight on them;
      // floor them so the optimizer stays finite.
      D = D.cwiseMax(1e-300);
      w = optimal_pool(D).weights;
    }
    std::vector<const ForecastDensity*> ptrs;
    for (int k = 0; k < K; ++k) ptrs.push_back(&(*members[k])[t]);
    out.densities.push_back(pool_densities(ptrs, w));
    out.weights.push_back(w);
    if (train[t]) rows.push_back(t);
  }
  return out;
}

inline std::string horizon_label(double h) {
  if (std::abs(h) < 1e-9) return "0";
  if (std::abs(h - 1.0 / 3.0) < 1e-9) return "1/3";
  if (std::abs(h - 2.0 / 3.0) < 1e-9) return "2/3";
  return format_double(h);
}

struct NowcastModel {
  BasisFamily basis;
  VolatilityModel volatility;
  std::string partition;  // "whole" or a group name
  std::vector<std::string> series;
  std::string name() const {
    return std::string(to_string(basis)) + "/" + to_string(volatility) + "/" + partition;
  }
};

struct NowcastResult {
  std::vector<std::string> origin_labels;
  std::vector<double> horizons;
  std::vector<NowcastModel> models;
  // [horizon][model][origin]
  std::vector<std::vector<std::vector<ForecastDensity>>> densities;
  std::vector<std::vector<ForecastDensity>> benchmark;  // [horizon][origin]
  Eigen::VectorXd outcomes;
  std::vector<bool> scored;
  Report report;
};

inline std::vector<NowcastModel> nowcast_models(const RunConfig& cfg, const Panel& p) {
  std::vector<BasisFamily> bases = cfg.nowcast.bases;
  if (bases.empty()) bases.push_back(cfg.model.basis);
  std::vector<VolatilityModel> vols = cfg.nowcast.volatility;
  if (vols.empty()) vols.push_back(cfg.model.volatility);
  std::vector<std::pair<std::string, std::vector<std::string>>> parts;
  if (cfg.nowcast.whole) parts.push_back({"whole", regressor_names(p, cfg.model)});
  for (const auto& [g, list] : cfg.nowcast.partition) parts.push_back({g, list});
  if (parts.empty()) throw std::invalid_argument("nowcast: no partition (set whole or a partition map)");
  std::vector<NowcastModel> out;
  for (auto b : bases)
    for (auto v : vols)
      for (const auto& [name, list] : parts) out.push_back({b, v, name, list});
  return out;
}

inline NowcastResult run_rolling_nowcast(const RunConfig& cfg, const Panel& panel) {
  NowcastResult res;
  res.models = nowcast_models(cfg, panel);
  res.horizons = cfg.nowcast.horizons;
  const int M = int(res.models.size()), H = int(res.horizons.size());
  const int W = cfg.nowcast.window;

  // Designs per (horizon, model).
  std::vector<std::vector<PanelDesign>> designs(H, std::vector<PanelDesign>(M));
  for (int h = 0; h < H; ++h)
    for (int k = 0; k < M; ++k)
      designs[h][k] = panel_design(panel, cfg.model, res.models[k].series, res.models[k].basis, res.horizons[h]);

  // Origins: quarters where every design has a row and a full window behind it.
  int first = -1, last = 1 << 30;
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < M; ++k) {
      const auto& rq = designs[h][k].row_quarter;
      first = std::max(first, rq.front() + W);
      last = std::min(last, rq.back());
    }
  }
  if (!cfg.nowcast.first_origin.empty()) {
    const int want = quarter_index(cfg.nowcast.first_origin);
    const int base = panel.quarters.front().year * 4 + panel.quarters.front().quarter() - 1;
    const int q = want - base;
    if (q < first) {
      throw std::invalid_argument("insufficient window at first origin " + cfg.nowcast.first_origin +
                                  ": the earliest origin with " + std::to_string(W) + " training rows is " +
                                  (first < panel.T() ? panel.period_label(first) : std::string("beyond the sample")));
    }
    first = q;
  }
  if (first > last) throw std::invalid_argument("insufficient window at first origin: no origin has " + std::to_string(W) + " training rows");
  const int n = last - first + 1;
  for (int q = first; q <= last; ++q) res.origin_labels.push_back(panel.period_label(q));

  std::set<int> excluded;
  for (const auto& e : cfg.nowcast.exclude) excluded.insert(quarter_index(e));
  res.outcomes.resize(n);
  res.scored.resize(n);
  const PanelSeries& target = panel.get(cfg.model.target);
  for (int i = 0; i < n; ++i) {
    const int q = first + i;
    res.outcomes[i] = target.values[q];
    const int qi = panel.quarters[q].year * 4 + panel.quarters[q].quarter() - 1;
    res.scored[i] = !excluded.count(qi);
  }

  // Fit every (horizon, model, origin).
  res.densities.assign(H, std::vector<std::vector<ForecastDensity>>(M, std::vector<ForecastDensity>(n)));
  std::vector<std::uint64_t> seeds(std::size_t(H) * M * n), tseeds(seeds.size());
  std::vector<double> c0s(seeds.size()), c1s(seeds.size());
  parallel_for(seeds.size(), cfg.threads, [&](std::size_t idx) {
    const int h = int(idx / (std::size_t(M) * n));
    const int k = int(idx / n % M);
    const int i = int(idx % n);
    const PanelDesign& pd = designs[h][k];
    const int q = first + i;
    const int row = int(std::find(pd.row_quarter.begin(), pd.row_quarter.end(), q) - pd.row_quarter.begin());
    GroupedDesign train = slice_rows(pd.design, row - W, W);
    GroupedDesign test = slice_rows(pd.design, row, 1);
    if (cfg.model.standardize) standardize_pair(train, test);
    const std::uint64_t seed = mix_seed(mix_seed(cfg.seed, 5000 + std::uint64_t(h) * 1000 + std::uint64_t(k)), std::uint64_t(q));
    const FitResult fit = fit_model(train, cfg, res.models[k].volatility, seed, 1);
    res.densities[h][k][i] = posterior_predictive(fit.chain, Eigen::VectorXd(test.Z.row(0).transpose()));
    seeds[idx] = fit.chain_seeds.front();
    tseeds[idx] = fit.tuning_seed;
    c0s[idx] = fit.prior.c0;
    c1s[idx] = fit.prior.c1;
  });

  // AR(1) on the target's trailing window; direct nowcasts use y_{q-1}.
  res.benchmark.assign(H, std::vector<ForecastDensity>(n));
  for (int i = 0; i < n; ++i) {
    const int q = first + i;
    const Eigen::VectorXd hist = q - W - 1 >= 0 ? Eigen::VectorXd(target.values.segment(q - W - 1, W + 1))
                                                 : Eigen::VectorXd(target.values.segment(q - W, W));
    if (!hist.allFinite()) throw std::invalid_argument("nowcast: target history before " + res.origin_labels[i] + " has gaps");
    const Ar1Fit f = fit_ar1(hist);
    for (int h = 0; h < H; ++h) res.benchmark[h][i] = ar1_predict(f, target.values[q - 1], 1);
  }

  // Pools.
  struct Entry {
    std::string name, kind;
    std::vector<ForecastDensity> dens;
    std::vector<std::string> members;
    std::vector<Eigen::VectorXd> weights;
  };
  Table scores, forecasts, weights, manifest, fit_table;
  scores.name = "scores";
  scores.columns = {"horizon", "name", "kind", "n_scored", "RMSFE", "LogS", "CRPS", "rel_RMSFE", "rel_LogS", "rel_CRPS"};
  forecasts.name = "forecasts";
  forecasts.columns = {"horizon", "origin", "name", "mean", "q05", "q50", "q95", "outcome", "LogS", "CRPS", "scored"};
  weights.name = "pool_weights";
  weights.columns = {"horizon", "pool", "origin", "member", "weight"};
  manifest.name = "manifest";
  manifest.columns = {"horizon", "model", "origin", "chain_seed", "tuning_seed", "c0", "c1"};

  const std::set<std::string> levels(cfg.nowcast.pool_levels.begin(), cfg.nowcast.pool_levels.end());
  std::vector<BasisFamily> bases;
  std::vector<VolatilityModel> vols;
  for (const auto& m : res.models) {
    if (std::find(bases.begin(), bases.end(), m.basis) == bases.end()) bases.push_back(m.basis);
    if (std::find(vols.begin(), vols.end(), m.volatility) == vols.end()) vols.push_back(m.volatility);
  }
  const bool any_groups = !cfg.nowcast.partition.empty();
  for (const auto& l : levels) {
    if (l.find("groups") != std::string::npos && !any_groups) {
      throw std::invalid_argument("pool level '" + l + "' needs a nowcast.partition map");
    }
    if (l.find("whole") != std::string::npos && !cfg.nowcast.whole) {
      throw std::invalid_argument("pool level '" + l + "' needs whole-dataset models");
    }
  }

  for (int h = 0; h < H; ++h) {
    const std::string hl = horizon_label(res.horizons[h]);
    std::vector<Entry> entries;
    for (int k = 0; k < M; ++k) entries.push_back({res.models[k].name(), "model", res.densities[h][k], {}, {}});

    auto pool = [&](const std::string& name, const std::vector<int>& member_idx) {
      std::vector<const std::vector<ForecastDensity>*> mem;
      Entry e{name, "pool", {}, {}, {}};
      for (int idx : member_idx) {
        mem.push_back(&entries[idx].dens);
        e.members.push_back(entries[idx].name);
      }
      PoolSeries ps = build_pool(mem, res.outcomes, res.scored);
      e.dens = std::move(ps.densities);
      e.weights = std::move(ps.weights);
      entries.push_back(std::move(e));
      return int(entries.size()) - 1;
    };
    auto models_where = [&](auto pred) {
      std::vector<int> idx;
      for (int k = 0; k < M; ++k)
        if (pred(res.models[k])) idx.push_back(k);
      return idx;
    };
    std::vector<int> keep;  // entries to report
    for (int k = 0; k < M; ++k) keep.push_back(k);
    const bool need_groups = levels.count("groups") || levels.count("volatility_groups") || levels.count("basis_volatility_groups");
    std::map<std::pair<int, int>, int> group_pool;  // (basis, vol) -> entry
    if (need_groups) {
      for (std::size_t b = 0; b < bases.size(); ++b) {
        for (std::size_t v = 0; v < vols.size(); ++v) {
          const auto idx = models_where([&](const NowcastModel& m) {
            return m.basis == bases[b] && m.volatility == vols[v] && m.partition != "whole";
          });
          const int e = pool(std::string("groups[") + to_string(bases[b]) + "/" + to_string(vols[v]) + "]", idx);
          group_pool[{int(b), int(v)}] = e;
          if (levels.count("groups")) keep.push_back(e);
        }
      }
    }
    if (levels.count("volatility_groups")) {
      for (std::size_t b = 0; b < bases.size(); ++b) {
        std::vector<int> idx;
        for (std::size_t v = 0; v < vols.size(); ++v) idx.push_back(group_pool[{int(b), int(v)}]);
        keep.push_back(pool(std::string("volatility_groups[") + to_string(bases[b]) + "]", idx));
      }
    }
    if (levels.count("basis_volatility_groups")) {
      std::vector<int> idx;
      for (const auto& [key, e] : group_pool) idx.push_back(e);
      keep.push_back(pool("basis_volatility_groups", idx));
    }
    if (levels.count("volatility_whole")) {
      for (auto b : bases) {
        const auto idx = models_where([&](const NowcastModel& m) { return m.basis == b && m.partition == "whole"; });
        keep.push_back(pool(std::string("volatility_whole[") + to_string(b) + "]", idx));
      }
    }
    if (levels.count("basis_volatility_whole")) {
      keep.push_back(pool("basis_volatility_whole", models_where([](const NowcastModel& m) { return m.partition == "whole"; })));
    }

    // Scores on the non-excluded origins.
    std::vector<int> sc;
    for (int i = 0; i < n; ++i)
      if (res.scored[i]) sc.push_back(i);
    if (sc.empty()) throw std::invalid_argument("nowcast: every origin is excluded from scoring");
    Eigen::VectorXd y_sc(sc.size());
    std::vector<ForecastDensity> bench_sc;
    for (std::size_t j = 0; j < sc.size(); ++j) {
      y_sc[j] = res.outcomes[sc[j]];
      bench_sc.push_back(res.benchmark[h][sc[j]]);
    }
    auto emit = [&](const std::string& name, const std::string& kind, const std::vector<ForecastDensity>& dens, bool rel) {
      std::vector<ForecastDensity> d;
      for (int i : sc) d.push_back(dens[i]);
      const ScoreReport s = forecast_scores(d, y_sc, rel ? &bench_sc : nullptr);
      scores.add({text(hl), text(name), text(kind), integer(std::int64_t(sc.size())), num(s.rmsfe), num(s.avg_logs),
                  num(s.avg_crps), num(s.rel_rmsfe), num(s.rel_logs), num(s.rel_crps)});
      for (int i = 0; i < n; ++i) {
        const ForecastDensity& f = dens[i];
        forecasts.add({text(hl), text(res.origin_labels[i]), text(name), num(f.mean()), num(mixture_quantile(f, 0.05)),
                       num(mixture_quantile(f, 0.5)), num(mixture_quantile(f, 0.95)), num(res.outcomes[i]),
                       num(log_score(f, res.outcomes[i])), num(crps(f, res.outcomes[i])), integer(res.scored[i] ? 1 : 0)});
      }
    };
    emit("AR(1)", "benchmark", res.benchmark[h], false);
    for (int e : keep) emit(entries[e].name, entries[e].kind, entries[e].dens, true);
    for (int e : keep) {
      if (entries[e].kind != "pool") continue;
      for (int i = 0; i < n; ++i)
        for (std::size_t m = 0; m < entries[e].members.size(); ++m)
          weights.add({text(hl), text(entries[e].name), text(res.origin_labels[i]), text(entries[e].members[m]),
                       num(entries[e].weights[i][m])});
    }
    for (int k = 0; k < M; ++k) {
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = (std::size_t(h) * M + k) * n + i;
        manifest.add({text(hl), text(res.models[k].name()), text(res.origin_labels[i]), text(std::to_string(seeds[idx])),
                      text(std::to_string(tseeds[idx])), num(c0s[idx]), num(c1s[idx])});
      }
    }

    // Fan chart for the last reported entry (the top pool when pooling is on).
    const Entry& top = entries[keep.back()];
    FanChart fan;
    fan.name = "fan_h" + std::to_string(int(std::lround(res.horizons[h] * 3)));
    fan.title = "Predictive density, h = " + hl + ", " + top.name;
    fan.labels = res.origin_labels;
    for (int i = 0; i < n; ++i) {
      fan.q05.push_back(mixture_quantile(top.dens[i], 0.05));
      fan.q25.push_back(mixture_quantile(top.dens[i], 0.25));
      fan.q50.push_back(mixture_quantile(top.dens[i], 0.50));
      fan.q75.push_back(mixture_quantile(top.dens[i], 0.75));
      fan.q95.push_back(mixture_quantile(top.dens[i], 0.95));
      fan.outcome.push_back(res.outcomes[i]);
    }
    res.report.fans.push_back(std::move(fan));
  }
  res.report.tables = {scores, forecasts};
  if (!weights.rows.empty()) res.report.tables.push_back(weights);
  res.report.tables.push_back(manifest);
  return res;
}

}  // namespace bsgs::cli

#endif  // BSGS_CLI_NOWCAST_HPP_
