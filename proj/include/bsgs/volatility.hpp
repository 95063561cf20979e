#ifndef BSGS_VOLATILITY_HPP_
#define BSGS_VOLATILITY_HPP_

// Stochastic volatility error model with Student-t scale mixing and a
// two-part outlier scale:
//   u_t ~ N(0, tau_t * omega_t * exp(zeta_t)),  tau_t ~ IG(nu/2, nu/2),
//   zeta_t - mu = phi (zeta_{t-1} - mu) + N(0, sigma2_zeta),
//   omega_t = 1 w.p. 1 - p_omega, U(2, omega_bar) w.p. p_omega.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsgs/random.hpp"

namespace bsgs {

enum class VolatilityModel { Homoskedastic, SV, SVt, SVOutlier, SVtOutlier };

inline const char* to_string(VolatilityModel m) {
  switch (m) {
    case VolatilityModel::Homoskedastic: return "homoskedastic";
    case VolatilityModel::SV: return "sv";
    case VolatilityModel::SVt: return "sv-t";
    case VolatilityModel::SVOutlier: return "sv-outlier";
    case VolatilityModel::SVtOutlier: return "sv-t-outlier";
  }
  return "unknown";
}

inline VolatilityModel volatility_from_string(const std::string& s) {
  for (auto m : {VolatilityModel::Homoskedastic, VolatilityModel::SV, VolatilityModel::SVt,
                 VolatilityModel::SVOutlier, VolatilityModel::SVtOutlier}) {
    if (s == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown volatility model '" + s + "'");
}

inline bool has_t_tails(VolatilityModel m) {
  return m == VolatilityModel::SVt || m == VolatilityModel::SVtOutlier;
}
inline bool has_outliers(VolatilityModel m) {
  return m == VolatilityModel::SVOutlier || m == VolatilityModel::SVtOutlier;
}

inline std::vector<double> default_nu_grid() {
  std::vector<double> grid;
  for (double nu = 2.5; nu <= 100.0 + 1e-9; nu += 0.5) grid.push_back(nu);
  return grid;
}

struct SvPriors {
  // mu_zeta ~ N(mu_mean, mu_var); a NaN mean is replaced by log var(y) at start.
  double mu_mean = std::numeric_limits<double>::quiet_NaN();
  double mu_var = 10.0;
  // phi_zeta ~ N(phi_mean, phi_var) restricted to (-1, 1).
  double phi_mean = 0.9;
  double phi_var = 0.25;
  // sigma2_zeta ~ IG(shape, scale).
  double sigma2_shape = 2.5;
  double sigma2_scale = 0.15;
  // p_omega ~ Beta(a, b): prior mean 1/17, about one outlier per four years of quarters.
  double p_omega_a = 2.0;
  double p_omega_b = 32.0;
  double omega_bar = 10.0;
  int omega_grid = 50;
  std::vector<double> nu_grid = default_nu_grid();
  double zeta_step = 0.3;
};

/// Optional pins that hold a parameter fixed instead of sampling it.
struct SvPins {
  std::optional<double> nu;
  std::optional<double> sigma2_zeta;  // 0 pins zeta_t to mu_zeta
  std::optional<double> phi_zeta;
};

struct SVState {
  Eigen::VectorXd zeta;
  Eigen::VectorXd tau_t;
  Eigen::VectorXd omega_t;
  double nu = 10.0;
  double mu_zeta = 0.0;
  double phi_zeta = 0.9;
  double sigma2_zeta = 0.1;
  double p_omega = 2.0 / 34.0;
  double omega_bar = 10.0;
  VolatilityModel model = VolatilityModel::SV;
  SvPins pins;

  long zeta_proposals = 0;
  long zeta_accepts = 0;
  long level_proposals = 0;
  long level_accepts = 0;

  int T() const { return int(zeta.size()); }
};

inline SVState initial_sv_state(int T, double log_var, VolatilityModel model, const SvPriors& priors,
                                const SvPins& pins = {}) {
  if (model == VolatilityModel::Homoskedastic) throw std::invalid_argument("initial_sv_state: homoskedastic model");
  SVState sv;
  sv.model = model;
  sv.pins = pins;
  sv.mu_zeta = log_var;
  sv.zeta = Eigen::VectorXd::Constant(T, log_var);
  sv.tau_t = Eigen::VectorXd::Ones(T);
  sv.omega_t = Eigen::VectorXd::Ones(T);
  sv.omega_bar = priors.omega_bar;
  sv.nu = pins.nu.value_or(has_t_tails(model) ? 10.0 : std::numeric_limits<double>::infinity());
  sv.phi_zeta = pins.phi_zeta.value_or(priors.phi_mean);
  sv.sigma2_zeta = pins.sigma2_zeta.value_or(priors.sigma2_scale / (priors.sigma2_shape - 1.0));
  sv.p_omega = has_outliers(model) ? priors.p_omega_a / (priors.p_omega_a + priors.p_omega_b) : 0.0;
  return sv;
}

/// tau_t * omega_t * exp(zeta_t)
inline Eigen::VectorXd observation_variance(const SVState& sv) {
  return (sv.tau_t.array() * sv.omega_t.array() * sv.zeta.array().exp()).matrix();
}

namespace detail {

inline double log_normal_density(double u, double var) {
  return -kLogSqrt2Pi - 0.5 * std::log(var) - 0.5 * u * u / var;
}

inline double log_inv_gamma_density(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kGl8Nodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                    0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGl8Weights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                      0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                      0.2223810344533745, 0.1012285362903763};

inline double stationary_variance(double sigma2, double phi) { return sigma2 / (1.0 - phi * phi); }

// Log AR(1) prior of a zeta path; a zero innovation variance requires a flat path.
inline double ar1_log_density(const Eigen::VectorXd& zeta, double mu, double phi, double sigma2) {
  double lp = log_normal_density(zeta[0] - mu, stationary_variance(sigma2, phi));
  for (Eigen::Index t = 1; t < zeta.size(); ++t) {
    lp += log_normal_density(zeta[t] - mu - phi * (zeta[t - 1] - mu), sigma2);
  }
  return lp;
}

}  // namespace detail

/// log of (1/(omega_bar-2)) * int_2^omega_bar N(u; 0, omega * base_var) d omega.
/// Substituting q = 1/omega leaves q^{-3/2} exp(-c q) on [1/omega_bar, 1/2]
/// with c = u^2 / (2 base_var); the exponential factor at the left end is
/// pulled out and the rest integrated by composite Gauss-Legendre.
inline double outlier_branch_log_density(double u, double base_var, double omega_bar) {
  if (!(omega_bar > 2.0)) throw std::invalid_argument("omega_bar must exceed 2");
  const double c = 0.5 * u * u / base_var;
  const double q0 = 1.0 / omega_bar;
  const double span = 0.5 - q0;
  const double upper = c > 0.0 ? std::min(span, 60.0 / c) : span;
  constexpr int kPanels = 64;
  const double width = upper / kPanels;
  double acc = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double mid = (p + 0.5) * width;
    for (std::size_t k = 0; k < detail::kGl8Nodes.size(); ++k) {
      const double x = mid + 0.5 * width * detail::kGl8Nodes[k];
      acc += detail::kGl8Weights[k] * 0.5 * width * std::pow(q0 + x, -1.5) * std::exp(-c * x);
    }
  }
  return -kLogSqrt2Pi - 0.5 * std::log(base_var) - c * q0 + std::log(acc) - std::log(omega_bar - 2.0);
}

/// log of P(outlier branch) / P(regular branch) given the residual.
inline double outlier_log_odds(double u, double base_var, double p_omega, double omega_bar) {
  if (p_omega <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p_omega >= 1.0) return std::numeric_limits<double>::infinity();
  return std::log(p_omega) + outlier_branch_log_density(u, base_var, omega_bar) - std::log1p(-p_omega) -
         detail::log_normal_density(u, base_var);
}

/// Draws tau_t ~ IG((nu+1)/2, (nu + u_t^2 / (omega_t exp(zeta_t)))/2).
/// Without t-tails the scale is degenerate at one.
inline void step_mixture_scale(SVState& sv, const Eigen::VectorXd& resid, Rng& rng) {
  if (!has_t_tails(sv.model)) {
    sv.tau_t.setOnes();
    return;
  }
  for (int t = 0; t < sv.T(); ++t) {
    const double scaled = std::isnan(resid[t]) ? 0.0 : resid[t] * resid[t] / (sv.omega_t[t] * std::exp(sv.zeta[t]));
    sv.tau_t[t] = rng.inv_gamma(0.5 * (sv.nu + 1.0), 0.5 * (sv.nu + scaled));
  }
}

/// Two-part conditional for omega_t: exact branch odds, then omega from the
/// conditional on a midpoint grid over (2, omega_bar).
inline void step_outliers(SVState& sv, const Eigen::VectorXd& resid, Rng& rng, int grid_points = 50) {
  if (!has_outliers(sv.model)) {
    sv.omega_t.setOnes();
    return;
  }
  const double step = (sv.omega_bar - 2.0) / grid_points;
  std::vector<double> logw(grid_points);
  for (int t = 0; t < sv.T(); ++t) {
    const double base = sv.tau_t[t] * std::exp(sv.zeta[t]);
    const double u = std::isnan(resid[t]) ? 0.0 : resid[t];
    const double lo = outlier_log_odds(u, base, sv.p_omega, sv.omega_bar);
    const double p_out = lo > 0 ? 1.0 / (1.0 + std::exp(-lo)) : std::exp(lo) / (1.0 + std::exp(lo));
    if (!rng.bernoulli(p_out)) {
      sv.omega_t[t] = 1.0;
      continue;
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_points; ++k) {
      logw[k] = detail::log_normal_density(u, (2.0 + (k + 0.5) * step) * base);
      mx = std::max(mx, logw[k]);
    }
    double total = 0.0;
    for (double& w : logw) total += (w = std::exp(w - mx));
    double pick = rng.uniform() * total;
    int k = 0;
    for (; k + 1 < grid_points && pick > logw[k]; ++k) pick -= logw[k];
    sv.omega_t[t] = 2.0 + (k + 0.5) * step;
  }
}

/// Single-site random-walk Metropolis on each zeta_t. NaN residuals drop the
/// likelihood term for that period. A zero pinned sigma2_zeta flattens the path.
inline void step_log_volatility(SVState& sv, const Eigen::VectorXd& resid, Rng& rng, double step_size = 0.3) {
  const int T = sv.T();
  if (sv.sigma2_zeta <= 0.0) {
    sv.zeta.setConstant(sv.mu_zeta);
    return;
  }
  const double mu = sv.mu_zeta, phi = sv.phi_zeta, s2 = sv.sigma2_zeta;
  auto log_target = [&](int t, double z) {
    double lp = 0.0;
    if (!std::isnan(resid[t])) {
      const double scale = sv.tau_t[t] * sv.omega_t[t];
      lp += -0.5 * (std::log(scale) + z) - 0.5 * resid[t] * resid[t] / (scale * std::exp(z));
    }
    if (t == 0) {
      lp += -0.5 * (z - mu) * (z - mu) * (1.0 - phi * phi) / s2;
    } else {
      const double e = z - mu - phi * (sv.zeta[t - 1] - mu);
      lp += -0.5 * e * e / s2;
    }
    if (t + 1 < T) {
      const double e = sv.zeta[t + 1] - mu - phi * (z - mu);
      lp += -0.5 * e * e / s2;
    }
    return lp;
  };
  for (int t = 0; t < T; ++t) {
    const double current = sv.zeta[t];
    const double proposal = current + step_size * rng.normal();
    ++sv.zeta_proposals;
    if (std::log(rng.uniform()) < log_target(t, proposal) - log_target(t, current)) {
      sv.zeta[t] = proposal;
      ++sv.zeta_accepts;
    }
  }
}

/// Updates (mu, phi, sigma2_zeta), nu and p_omega.
/// phi and sigma2_zeta use their conditionals without the initial-state factor
/// as independence proposals, corrected by a Metropolis step on that factor.
/// mu has an exact Gaussian conditional. A joint level shift of (mu, zeta)
/// keeps the overall volatility level mobile when sigma2_zeta is small or pinned.
inline void step_sv_params(SVState& sv, const Eigen::VectorXd& resid, const SvPriors& priors, Rng& rng) {
  const int T = sv.T();
  const bool flat = sv.sigma2_zeta <= 0.0;

  if (!flat && T > 1) {
    Eigen::VectorXd x = sv.zeta.array() - sv.mu_zeta;
    // phi
    if (!sv.pins.phi_zeta) {
      double sxx = 0.0, sxy = 0.0;
      for (int t = 1; t < T; ++t) {
        sxx += x[t - 1] * x[t - 1];
        sxy += x[t] * x[t - 1];
      }
      const double prec = 1.0 / priors.phi_var + sxx / sv.sigma2_zeta;
      const double mean = (priors.phi_mean / priors.phi_var + sxy / sv.sigma2_zeta) / prec;
      const double cand = mean + rng.normal() / std::sqrt(prec);
      if (std::abs(cand) < 1.0) {
        const double log_r = detail::log_normal_density(x[0], detail::stationary_variance(sv.sigma2_zeta, cand)) -
                             detail::log_normal_density(x[0], detail::stationary_variance(sv.sigma2_zeta, sv.phi_zeta));
        if (std::log(rng.uniform()) < log_r) sv.phi_zeta = cand;
      }
    }
    // sigma2_zeta
    if (!sv.pins.sigma2_zeta) {
      double ss = 0.0;
      for (int t = 1; t < T; ++t) {
        const double e = x[t] - sv.phi_zeta * x[t - 1];
        ss += e * e;
      }
      const double cand = rng.inv_gamma(priors.sigma2_shape + 0.5 * (T - 1), priors.sigma2_scale + 0.5 * ss);
      const double log_r = detail::log_normal_density(x[0], detail::stationary_variance(cand, sv.phi_zeta)) -
                           detail::log_normal_density(x[0], detail::stationary_variance(sv.sigma2_zeta, sv.phi_zeta));
      if (cand > 0.0 && std::log(rng.uniform()) < log_r) sv.sigma2_zeta = cand;
    }
    // mu | zeta, phi, sigma2
    const double phi = sv.phi_zeta, s2 = sv.sigma2_zeta;
    double prec = 1.0 / priors.mu_var + (1.0 - phi * phi) / s2;
    double num = priors.mu_mean / priors.mu_var + (1.0 - phi * phi) * sv.zeta[0] / s2;
    for (int t = 1; t < T; ++t) {
      prec += (1.0 - phi) * (1.0 - phi) / s2;
      num += (1.0 - phi) * (sv.zeta[t] - phi * sv.zeta[t - 1]) / s2;
    }
    sv.mu_zeta = num / prec + rng.normal() / std::sqrt(prec);
  }

  // Joint level shift: the AR(1) density of zeta - mu is unchanged, so only
  // the likelihood and the mu prior enter the ratio.
  {
    int observed = 0;
    for (int t = 0; t < T; ++t) observed += std::isnan(resid[t]) ? 0 : 1;
    const double step = 1.5 * std::sqrt(2.0 / std::max(1, observed));
    const double delta = step * rng.normal();
    double log_r = 0.0;
    for (int t = 0; t < T; ++t) {
      if (std::isnan(resid[t])) continue;
      const double scale = sv.tau_t[t] * sv.omega_t[t];
      const double u2 = resid[t] * resid[t];
      log_r += -0.5 * delta - 0.5 * u2 / (scale * std::exp(sv.zeta[t])) * (std::exp(-delta) - 1.0);
    }
    const double m0 = priors.mu_mean, v0 = priors.mu_var;
    log_r += (-(sv.mu_zeta + delta - m0) * (sv.mu_zeta + delta - m0) + (sv.mu_zeta - m0) * (sv.mu_zeta - m0)) / (2 * v0);
    ++sv.level_proposals;
    if (std::log(rng.uniform()) < log_r) {
      sv.mu_zeta += delta;
      sv.zeta.array() += delta;
      ++sv.level_accepts;
    }
  }

  // nu: griddy Gibbs on the scale-mixture likelihood.
  if (has_t_tails(sv.model)) {
    if (sv.pins.nu) {
      sv.nu = *sv.pins.nu;
    } else {
      const auto& grid = priors.nu_grid;
      std::vector<double> lp(grid.size());
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < grid.size(); ++k) {
        double s = 0.0;
        for (int t = 0; t < T; ++t) s += detail::log_inv_gamma_density(sv.tau_t[t], 0.5 * grid[k], 0.5 * grid[k]);
        lp[k] = s;
        mx = std::max(mx, s);
      }
      double total = 0.0;
      for (double& v : lp) total += (v = std::exp(v - mx));
      double pick = rng.uniform() * total;
      std::size_t k = 0;
      for (; k + 1 < grid.size() && pick > lp[k]; ++k) pick -= lp[k];
      sv.nu = grid[k];
    }
  }

  if (has_outliers(sv.model)) {
    int outliers = 0;
    for (int t = 0; t < T; ++t) outliers += sv.omega_t[t] > 1.0 ? 1 : 0;
    sv.p_omega = rng.beta(priors.p_omega_a + outliers, priors.p_omega_b + T - outliers);
  }
}

/// Variance multiplier of the one-step-ahead error: nu/(nu-2) under t-tails.
inline double t_variance_factor(const SVState& sv) {
  return has_t_tails(sv.model) ? sv.nu / (sv.nu - 2.0) : 1.0;
}

/// zeta_{T+1} drawn from the AR(1) law given the last state.
inline double draw_next_log_volatility(const SVState& sv, Rng& rng) {
  const double last = sv.zeta[sv.T() - 1];
  if (sv.sigma2_zeta <= 0.0) return sv.mu_zeta;
  return sv.mu_zeta + sv.phi_zeta * (last - sv.mu_zeta) + std::sqrt(sv.sigma2_zeta) * rng.normal();
}

}  // namespace bsgs

#endif  // BSGS_VOLATILITY_HPP_
