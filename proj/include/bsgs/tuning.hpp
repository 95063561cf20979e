#ifndef BSGS_TUNING_HPP_
#define BSGS_TUNING_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bsgs/design.hpp"
#include "bsgs/parallel.hpp"
#include "bsgs/random.hpp"
#include "bsgs/sampler.hpp"

namespace bsgs {

/// lambda0 = 1/2, lambda1_j = log(log(max(N, T))), d0 = d1 = 1, a0 = 2.5,
/// e0 = 5, e1 = e0 / (a0 - 1). c0 and c1 stay at 1 until selected.
inline PriorHyperparams default_hyperparams(int N, int T, int g) {
  (void)g;
  if (N < 1) throw std::invalid_argument("default_hyperparams: N must be >= 1");
  if (std::max(N, T) < 3) throw std::invalid_argument("default_hyperparams: max(N, T) must be >= 3");
  PriorHyperparams p;
  p.lambda0 = 0.5;
  p.lambda1 = Eigen::VectorXd::Constant(N, std::log(std::log(double(std::max(N, T)))));
  p.c0 = p.c1 = 1.0;
  p.d0 = p.d1 = 1.0;
  p.a0 = 2.5;
  p.e0 = 5.0;
  p.e1 = p.e0 / (p.a0 - 1.0);
  p.a1 = 1.0;
  return p;
}

struct CLowerBounds {
  double c0_min = 0.0;
  double c1_min = 0.0;
};

/// c0 >= 1 - N + N^(u0+1)/k0 and c1 >= 1 - Ng + (s0gr g)^u1 Ng / k1.
inline CLowerBounds c_lower_bounds(int N, int g, int s0gr_guess, double u0, double u1, double k0 = 1.0,
                                   double k1 = 1.0) {
  if (N <= 1) throw std::invalid_argument("c_lower_bounds: N must exceed 1");
  if (g < 1 || s0gr_guess < 1) throw std::invalid_argument("c_lower_bounds: g and s0gr must be >= 1");
  if (!(k0 > 0.0) || !(k1 > 0.0)) throw std::invalid_argument("c_lower_bounds: k0 and k1 must be positive");
  const double u0_min = std::log(2.0) / std::log(double(N));
  if (!(u0 > u0_min)) {
    throw std::invalid_argument("c_lower_bounds: need log2/logN < u0, i.e. " + std::to_string(u0_min) + " < " +
                                std::to_string(u0));
  }
  const double sg = double(s0gr_guess) * g;
  if (sg <= 1.0) throw std::invalid_argument("c_lower_bounds: need s0gr*g > 1 for log2/log(s0gr*g) < u1");
  const double u1_min = std::log(2.0) / std::log(sg);
  if (!(u1 > u1_min)) {
    throw std::invalid_argument("c_lower_bounds: need log2/log(s0gr*g) < u1, i.e. " + std::to_string(u1_min) +
                                " < " + std::to_string(u1));
  }
  const double Ng = double(N) * g;
  CLowerBounds b;
  b.c0_min = 1.0 - N + std::pow(double(N), u0 + 1.0) / k0;
  b.c1_min = 1.0 - Ng + std::pow(sg, u1) * Ng / k1;
  return b;
}

/// Gaussian log-likelihood at (theta, sigma2) on the scale the chain ran on.
inline double plug_in_log_likelihood(const ChainOutput& chain, const GroupedDesign& design,
                                     const Eigen::VectorXd& theta, double sigma2) {
  Eigen::VectorXd resid;
  if (chain.z_means.size()) {
    resid = (design.y.array() - chain.y_mean).matrix() - (design.Z.rowwise() - chain.z_means.transpose()) * theta;
  } else {
    resid = design.y - design.Z * theta;
  }
  return GibbsSampler::gaussian_log_likelihood(resid, sigma2);
}

/// Point estimate of theta in the plug-in term. The median is the default;
/// with inclusion rates below one half it sits at zero and the plug-in
/// deviance then understates the effective number of parameters.
enum class DicPlugIn { PosteriorMedian, PosteriorMean };

/// DIC = -4 mean_s log f(y | theta_s, sigma2_s) + 2 log f(y | theta_hat, sigma2_hat),
/// theta_hat the elementwise posterior median (or mean) and sigma2_hat the posterior mean.
inline double dic(const ChainOutput& chain, const GroupedDesign& design,
                  DicPlugIn plug_in = DicPlugIn::PosteriorMedian) {
  if (chain.draws() == 0) throw std::invalid_argument("dic: empty chain");
  if (chain.meta.volatility != VolatilityModel::Homoskedastic) {
    throw std::invalid_argument("dic: defined for homoskedastic chains only");
  }
  if (chain.theta_draws.cols() != design.width()) throw std::invalid_argument("dic: design width mismatch");
  const Eigen::VectorXd theta_hat = plug_in == DicPlugIn::PosteriorMedian
                                        ? posterior_median(chain.theta_draws)
                                        : Eigen::VectorXd(chain.theta_draws.colwise().mean().transpose());
  const double sigma2_hat = chain.sigma2_draws.mean();
  return -4.0 * chain.loglik_draws.mean() + 2.0 * plug_in_log_likelihood(chain, design, theta_hat, sigma2_hat);
}

struct GridSpec {
  std::pair<double, double> c0_range{1.0, 1.0};
  std::pair<double, double> c1_range{1.0, 1.0};
  int points = 1;
  std::uint64_t seed = 1;
  // Analytic lower bounds the ranges must respect.
  double c0_floor = 0.0;
  double c1_floor = 0.0;
  // When non-empty these points are used instead of random sampling.
  std::vector<std::pair<double, double>> explicit_points;
  DicPlugIn plug_in = DicPlugIn::PosteriorMedian;
};

struct DicRow {
  int index = 0;
  double c0 = 0.0, c1 = 0.0;
  double dic = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t chain_seed = 0;
  std::string error;  // empty when the chain succeeded
};

struct Selection {
  double c0 = 0.0, c1 = 0.0;
  std::vector<DicRow> table;
};

inline std::vector<std::pair<double, double>> grid_points(const GridSpec& grid) {
  if (!grid.explicit_points.empty()) return grid.explicit_points;
  if (grid.points < 1) throw std::invalid_argument("select_c: grid budget must be >= 1");
  for (const auto& r : {grid.c0_range, grid.c1_range}) {
    if (!(r.first > 0.0) || r.second < r.first) throw std::invalid_argument("select_c: bad grid interval");
  }
  if (grid.c0_range.first < grid.c0_floor || grid.c1_range.first < grid.c1_floor) {
    throw std::invalid_argument("select_c: grid interval below the analytic lower bound");
  }
  Rng rng(mix_seed(grid.seed, 0x67726964));
  std::vector<std::pair<double, double>> pts;
  pts.reserve(grid.points);
  for (int i = 0; i < grid.points; ++i) {
    const double c0 = grid.c0_range.first + (grid.c0_range.second - grid.c0_range.first) * rng.uniform();
    const double c1 = grid.c1_range.first + (grid.c1_range.second - grid.c1_range.first) * rng.uniform();
    pts.emplace_back(c0, c1);
  }
  return pts;
}

/// One homoskedastic chain per grid point; the DIC minimizer wins and ties go
/// to the larger (c0, c1) pair. Failed points stay in the table with their error.
inline Selection select_c(const GroupedDesign& design, const PriorHyperparams& prior_template, const GridSpec& grid,
                          const McmcConfig& mcmc_short, int threads = 1) {
  const auto pts = grid_points(grid);
  for (const auto& [c0, c1] : pts) {
    if (c0 < grid.c0_floor || c1 < grid.c1_floor) throw std::invalid_argument("select_c: point below lower bound");
  }
  Selection out;
  out.table.resize(pts.size());
  parallel_for(pts.size(), threads, [&](std::size_t i) {
    DicRow& row = out.table[i];
    row.index = int(i);
    row.c0 = pts[i].first;
    row.c1 = pts[i].second;
    McmcConfig cfg = mcmc_short;
    cfg.volatility = VolatilityModel::Homoskedastic;
    cfg.seed = mix_seed(mcmc_short.seed, i);
    row.chain_seed = cfg.seed;
    try {
      PriorHyperparams p = prior_template;
      p.c0 = row.c0;
      p.c1 = row.c1;
      row.dic = dic(run_chain(design, p, cfg), design, grid.plug_in);
      if (!std::isfinite(row.dic)) row.error = "non-finite DIC";
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  const DicRow* best = nullptr;
  for (const auto& row : out.table) {
    if (!row.error.empty()) continue;
    if (!best || row.dic < best->dic ||
        (row.dic == best->dic && std::make_pair(row.c0, row.c1) > std::make_pair(best->c0, best->c1))) {
      best = &row;
    }
  }
  if (!best) throw std::runtime_error("select_c: every grid point failed");
  out.c0 = best->c0;
  out.c1 = best->c1;
  return out;
}

}  // namespace bsgs

#endif  // BSGS_TUNING_HPP_
