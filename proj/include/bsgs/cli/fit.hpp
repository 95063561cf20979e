#ifndef BSGS_CLI_FIT_HPP_
#define BSGS_CLI_FIT_HPP_

// One estimation: default prior, optional DIC choice of (c0, c1), then one
// or more chains whose retained draws are stacked.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "bsgs/cli/config.hpp"
#include "bsgs/eval.hpp"
#include "bsgs/parallel.hpp"
#include "bsgs/random.hpp"
#include "bsgs/sampler.hpp"
#include "bsgs/tuning.hpp"

namespace bsgs::cli {

struct FitResult {
  ChainOutput chain;
  PriorHyperparams prior;
  std::optional<Selection> selection;
  std::vector<std::uint64_t> chain_seeds;
  std::uint64_t tuning_seed = 0;
};

/// Stacks retained draws; inclusion frequencies are draw-weighted averages.
inline ChainOutput combine_chains(std::vector<ChainOutput> chains) {
  if (chains.empty()) throw std::invalid_argument("combine_chains: no chains");
  if (chains.size() == 1) return std::move(chains.front());
  ChainOutput out = chains.front();
  Eigen::Index S = 0;
  for (const auto& c : chains) S += c.draws();
  auto stack_rows = [&](auto member) {
    const auto& first = chains.front().*member;
    std::decay_t<decltype(first)> m(S, first.cols());
    Eigen::Index at = 0;
    for (const auto& c : chains) {
      m.middleRows(at, (c.*member).rows()) = c.*member;
      at += (c.*member).rows();
    }
    return m;
  };
  out.theta_draws = stack_rows(&ChainOutput::theta_draws);
  out.sigma2_draws = stack_rows(&ChainOutput::sigma2_draws);
  out.intercept_draws = stack_rows(&ChainOutput::intercept_draws);
  out.loglik_draws = stack_rows(&ChainOutput::loglik_draws);
  out.inclusion_group.setZero();
  out.inclusion_within.setZero();
  for (const auto& c : chains) {
    const double w = double(c.draws()) / double(S);
    out.inclusion_group += w * c.inclusion_group;
    out.inclusion_within += w * c.inclusion_within;
  }
  if (out.sv) {
    auto stack_sv = [&](auto member) {
      const auto& first = (*chains.front().sv).*member;
      std::decay_t<decltype(first)> m(S, first.cols());
      Eigen::Index at = 0;
      for (const auto& c : chains) {
        m.middleRows(at, ((*c.sv).*member).rows()) = (*c.sv).*member;
        at += ((*c.sv).*member).rows();
      }
      return m;
    };
    SvDraws& d = *out.sv;
    d.zeta = stack_sv(&SvDraws::zeta);
    d.outlier = stack_sv(&SvDraws::outlier);
    d.next_log_vol = stack_sv(&SvDraws::next_log_vol);
    d.nu = stack_sv(&SvDraws::nu);
    d.last_omega = stack_sv(&SvDraws::last_omega);
    d.mu = stack_sv(&SvDraws::mu);
    d.phi = stack_sv(&SvDraws::phi);
    d.sigma2_zeta = stack_sv(&SvDraws::sigma2_zeta);
    d.p_omega = stack_sv(&SvDraws::p_omega);
  }
  return out;
}

inline PriorHyperparams base_prior(const GroupedDesign& d, const PriorBlock& block) {
  int g_max = 1;
  for (int s : d.partition.sizes()) g_max = std::max(g_max, s);
  PriorHyperparams p = default_hyperparams(d.groups(), d.T(), g_max);
  p.group_specific_pi1 = block.group_specific_pi1;
  p.hierarchical_a1 = block.hierarchical_a1;
  p.c0 = block.c0.value_or(1.0);
  p.c1 = block.c1.value_or(1.0);
  return p;
}

/// Grid for the DIC search: explicit points, or `points` random draws on
/// [c_min, span * c_min] with c_min from the analytic lower bounds (at
/// least 1). The average group size stands in for g.
inline GridSpec tuning_grid(const GroupedDesign& d, const TuningBlock& t, std::uint64_t seed) {
  GridSpec grid;
  grid.plug_in = t.plug_in;
  grid.seed = seed;
  if (!t.points_list.empty()) {
    grid.explicit_points = t.points_list;
    return grid;
  }
  const int g = std::max(1, int(std::lround(double(d.width()) / d.groups())));
  const CLowerBounds b = c_lower_bounds(d.groups(), g, t.s0gr_guess, t.u0, t.u1, t.k0, t.k1);
  const double c0 = std::max(1.0, b.c0_min), c1 = std::max(1.0, b.c1_min);
  grid.c0_range = {c0, t.span * c0};
  grid.c1_range = {c1, t.span * c1};
  grid.c0_floor = b.c0_min;
  grid.c1_floor = b.c1_min;
  grid.points = t.points;
  return grid;
}

/// Seeds: the DIC search uses mix_seed(seed, 1); chain k uses mix_seed(seed, 100 + k).
inline FitResult fit_model(const GroupedDesign& d, const RunConfig& cfg, VolatilityModel volatility,
                           std::uint64_t seed, int threads = 1) {
  FitResult r;
  r.prior = base_prior(d, cfg.prior);
  if (cfg.tuning.enabled) {
    r.tuning_seed = mix_seed(seed, 1);
    McmcConfig short_cfg;
    short_cfg.sweeps = cfg.tuning.sweeps;
    short_cfg.burn_in = cfg.tuning.burn_in;
    short_cfg.thin = cfg.tuning.thin;
    short_cfg.seed = r.tuning_seed;
    r.selection = select_c(d, r.prior, tuning_grid(d, cfg.tuning, r.tuning_seed), short_cfg, threads);
    r.prior.c0 = r.selection->c0;
    r.prior.c1 = r.selection->c1;
  }
  std::vector<ChainOutput> chains(cfg.mcmc.chains);
  r.chain_seeds.resize(cfg.mcmc.chains);
  for (int k = 0; k < cfg.mcmc.chains; ++k) r.chain_seeds[k] = mix_seed(seed, 100 + std::uint64_t(k));
  parallel_for(chains.size(), threads, [&](std::size_t k) {
    McmcConfig mc;
    mc.sweeps = cfg.mcmc.sweeps;
    mc.burn_in = cfg.mcmc.burn_in;
    mc.thin = cfg.mcmc.thin;
    mc.seed = r.chain_seeds[k];
    mc.volatility = volatility;
    chains[k] = run_chain(d, r.prior, mc);
  });
  r.chain = combine_chains(std::move(chains));
  return r;
}

/// One-step AR(1) predictives for the test rows. The designs' last column
/// must hold the first lag of y.
inline std::vector<ForecastDensity> ar1_on_design(const GroupedDesign& train, const GroupedDesign& test) {
  const Ar1Fit f = fit_ar1(train.y);
  std::vector<ForecastDensity> out;
  out.reserve(test.T());
  for (int t = 0; t < test.T(); ++t) out.push_back(ar1_predict(f, test.Z(t, test.width() - 1), 1));
  return out;
}

}  // namespace bsgs::cli

#endif  // BSGS_CLI_FIT_HPP_
