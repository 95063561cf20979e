#ifndef BSGS_SAMPLER_HPP_
#define BSGS_SAMPLER_HPP_

// Gibbs sampler for the bi-level spike-and-slab group prior:
//   theta_j = diag(v_j) b_j,
//   b_j ~ (1 - pi0) N(0, I) + pi0 delta_0,
//   v_ji ~ (1 - pi1) N+(0, tau_j^2) + pi1 delta_0,
//   tau_j ~ Gamma(lambda0, scale lambda1_j),
//   pi0 ~ Beta(c0, d0), pi1 ~ Beta(c1, d1), sigma2 ~ IG(a0, a1), a1 ~ Gamma(e0, e1).
// gamma0_j = 1 and gamma1_ji = 1 flag the spike components.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bsgs/design.hpp"
#include "bsgs/random.hpp"
#include "bsgs/volatility.hpp"

namespace bsgs {

struct PriorHyperparams {
  double c0 = 1.0, d0 = 1.0;
  double c1 = 1.0, d1 = 1.0;
  double a0 = 2.5;
  double a1 = 1.0;  // starting value when hierarchical_a1
  double e0 = 5.0, e1 = 5.0 / 1.5;
  double lambda0 = 0.5;
  Eigen::VectorXd lambda1;  // one scale per group
  bool group_specific_pi1 = true;
  bool hierarchical_a1 = true;
};

inline void validate(const PriorHyperparams& p, int groups) {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string("prior: ") + name + " must be positive");
  };
  positive(p.c0, "c0");
  positive(p.d0, "d0");
  positive(p.c1, "c1");
  positive(p.d1, "d1");
  positive(p.a0, "a0");
  positive(p.a1, "a1");
  if (p.hierarchical_a1) {
    positive(p.e0, "e0");
    positive(p.e1, "e1");
  }
  if (p.lambda0 != 0.5) throw std::invalid_argument("prior: lambda0 is fixed at 1/2");
  if (p.lambda1.size() != groups) throw std::invalid_argument("prior: lambda1 needs one entry per group");
  for (Eigen::Index j = 0; j < p.lambda1.size(); ++j) positive(p.lambda1[j], "lambda1");
}

struct McmcConfig {
  int sweeps = 60000;
  int burn_in = 10000;
  int thin = 5;
  std::uint64_t seed = 1;
  bool center = true;
  VolatilityModel volatility = VolatilityModel::Homoskedastic;
  SvPriors sv_priors;
  SvPins sv_pins;

  int retained() const { return (sweeps - burn_in) / thin; }
};

struct ChainState {
  Eigen::VectorXd b, v, theta;
  Eigen::VectorXd tau;
  double pi0 = 0.5;
  Eigen::VectorXd pi1;  // size 1, or one entry per group
  double sigma2 = 1.0;
  double a1 = 1.0;
  std::vector<std::uint8_t> gamma0, gamma1;
  Eigen::VectorXd resid;  // y - Z theta, kept in sync with theta
  std::optional<SVState> sv;

  double pi1_for(int group) const { return pi1.size() == 1 ? pi1[0] : pi1[group]; }
};

struct SvDraws {
  Eigen::MatrixXd zeta;  // S x T
  Eigen::VectorXd next_log_vol, nu, last_omega, mu, phi, sigma2_zeta, p_omega;
  Eigen::MatrixXd outlier;  // S x T indicators omega_t > 1
};

struct McmcMeta {
  int sweeps = 0, burn_in = 0, thin = 1;
  std::uint64_t seed = 0;
  Eigen::VectorXd tau_acceptance;
  double zeta_acceptance = std::numeric_limits<double>::quiet_NaN();
  VolatilityModel volatility = VolatilityModel::Homoskedastic;
};

struct ChainOutput {
  Eigen::MatrixXd theta_draws;     // S x width
  Eigen::VectorXd sigma2_draws;    // one-step predictive error variance per draw
  Eigen::VectorXd intercept_draws; // zero when the chain ran uncentered
  Eigen::VectorXd inclusion_group;
  Eigen::VectorXd inclusion_within;
  Eigen::VectorXd loglik_draws;
  std::optional<SvDraws> sv;
  McmcMeta meta;
  double y_mean = 0.0;
  Eigen::VectorXd z_means;  // empty when uncentered
  Partition partition;

  int draws() const { return int(theta_draws.rows()); }
};

/// P(v_ji = 0 | rest) = pi1 / (pi1 + 2 (1 - pi1) (eta/tau) exp(nu^2 / (2 eta^2)) Phi(nu/eta)),
/// evaluated in log space.
inline double spike_prob_within(double eta2, double nu, double tau, double pi1) {
  if (!(eta2 > 0.0) || !(tau > 0.0) || !std::isfinite(nu)) throw std::domain_error("spike_prob_within: bad input");
  if (pi1 >= 1.0) return 1.0;
  if (pi1 <= 0.0) return 0.0;
  const double eta = std::sqrt(eta2);
  const double log_slab = std::log(2.0) + std::log1p(-pi1) + std::log(eta) - std::log(tau) +
                          half_square_plus_log_norm_cdf(nu / eta);
  const double log_spike = std::log(pi1);
  return std::exp(log_spike - log_sum_exp(log_spike, log_slab));
}

/// Posterior of b_j given everything else, as its precision
/// I + V Z'WZ V and score V Z'W r_{-j}.
struct GroupPosterior {
  Eigen::LLT<Eigen::MatrixXd> chol;
  Eigen::VectorXd mean;
  double spike_prob = 1.0;
};

/// P(b_j = 0 | rest) = pi0 / (pi0 + (1 - pi0) |Sigma|^{1/2} exp(mu' Sigma^{-1} mu / 2)).
inline GroupPosterior group_posterior(const Eigen::MatrixXd& precision, const Eigen::VectorXd& score, double pi0) {
  GroupPosterior gp;
  gp.chol.compute(precision);
  if (gp.chol.info() != Eigen::Success) throw std::runtime_error("group_posterior: precision not positive definite");
  const Eigen::MatrixXd L = gp.chol.matrixL();
  const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(score);
  gp.mean = L.transpose().triangularView<Eigen::Upper>().solve(w);
  if (pi0 >= 1.0) {
    gp.spike_prob = 1.0;
  } else if (pi0 <= 0.0) {
    gp.spike_prob = 0.0;
  } else {
    const double half_logdet_sigma = -L.diagonal().array().log().sum();
    const double log_slab = std::log1p(-pi0) + half_logdet_sigma + 0.5 * w.squaredNorm();
    const double log_spike = std::log(pi0);
    gp.spike_prob = std::exp(log_spike - log_sum_exp(log_spike, log_slab));
  }
  return gp;
}

/// log acceptance ratio of the exponential-proposal Metropolis step for tau_j.
inline double tau_log_acceptance(double tau_old, double tau_new, int active, double sum_v2, double lambda0,
                                 double lambda1) {
  return (active + 2.0 - lambda0) * std::log(tau_old / tau_new) -
         0.5 * sum_v2 * (1.0 / (tau_new * tau_new) - 1.0 / (tau_old * tau_old)) - (tau_new - tau_old) / lambda1 -
         tau_old / tau_new + tau_new / tau_old;
}

/// Sampler kernel bound to one (possibly centered) design. Each step_* method
/// is one block of the Gibbs cycle and leaves theta, resid and the indicators
/// mutually consistent.
class GibbsSampler {
 public:
  GibbsSampler(const GroupedDesign& design, PriorHyperparams prior, McmcConfig config)
      : prior_(std::move(prior)), config_(std::move(config)), partition_(design.partition) {
    validate(design);
    validate(prior_, design.groups());
    Z_ = design.Z;
    y_ = design.y;
    if (config_.center) {
      y_mean_ = y_.mean();
      z_means_ = Z_.colwise().mean().transpose();
      y_.array() -= y_mean_;
      Z_.rowwise() -= z_means_.transpose();
    }
    col_norm2_ = Z_.colwise().squaredNorm().transpose();
    grams_.reserve(partition_.groups());
    for (int j = 0; j < partition_.groups(); ++j) {
      const auto block = Z_.middleCols(partition_.start(j), partition_.size(j));
      grams_.push_back(block.transpose() * block);
    }
    if (config_.volatility != VolatilityModel::Homoskedastic && std::isnan(config_.sv_priors.mu_mean)) {
      config_.sv_priors.mu_mean = std::log(std::max(sample_variance(), 1e-12));
    }
  }

  int T() const { return int(y_.size()); }
  int width() const { return int(Z_.cols()); }
  int groups() const { return partition_.groups(); }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& Z() const { return Z_; }
  const PriorHyperparams& prior() const { return prior_; }
  const McmcConfig& config() const { return config_; }

  /// b = 0, v = 0, tau = 1, pi0 = pi1 = 1/2, sigma2 = sample variance of y.
  ChainState initial_state() const {
    ChainState s;
    const int p = width(), N = groups();
    s.b = Eigen::VectorXd::Zero(p);
    s.v = Eigen::VectorXd::Zero(p);
    s.theta = Eigen::VectorXd::Zero(p);
    s.tau = Eigen::VectorXd::Ones(N);
    s.pi0 = 0.5;
    s.pi1 = Eigen::VectorXd::Constant(prior_.group_specific_pi1 ? N : 1, 0.5);
    s.sigma2 = std::max(sample_variance(), 1e-8);
    s.a1 = prior_.a1;
    s.gamma0.assign(N, 1);
    s.gamma1.assign(p, 1);
    s.resid = y_;
    if (config_.volatility != VolatilityModel::Homoskedastic) {
      s.sv = initial_sv_state(T(), std::log(s.sigma2), config_.volatility, config_.sv_priors, config_.sv_pins);
    }
    return s;
  }

  /// Replaces the response (e.g. when re-simulating data) and resyncs the residual.
  void set_response(const Eigen::VectorXd& y, ChainState& s) {
    if (y.size() != y_.size()) throw std::invalid_argument("set_response: length mismatch");
    y_ = y;
    refresh_residual(s);
  }

  void refresh_residual(ChainState& s) const { s.resid = y_ - Z_ * s.theta; }

  /// Step (a). Homoskedastic: sigma2 ~ IG(T/2 + a0, |r|^2/2 + a1), then
  /// a1 ~ Gamma(e0 + a0, e1 + 1/sigma2) under the hierarchical prior.
  /// With stochastic volatility the error-model blocks run instead.
  void step_sigma2(ChainState& s, Rng& rng) const {
    if (s.sv) {
      step_mixture_scale(*s.sv, s.resid, rng);
      step_outliers(*s.sv, s.resid, rng, config_.sv_priors.omega_grid);
      step_log_volatility(*s.sv, s.resid, rng, config_.sv_priors.zeta_step);
      step_sv_params(*s.sv, s.resid, config_.sv_priors, rng);
      return;
    }
    const double rss = s.resid.squaredNorm();
    if (!std::isfinite(rss)) throw std::runtime_error("step_sigma2: non-finite residual norm");
    const auto [shape, scale] = sigma2_conditional(s);
    s.sigma2 = rng.inv_gamma(shape, scale);
    if (prior_.hierarchical_a1) {
      const auto [a_shape, a_rate] = a1_conditional(s.sigma2);
      s.a1 = rng.gamma(a_shape, a_rate);
    }
  }

  /// (shape, rate) of the Gamma full conditional of a1 given sigma2.
  std::pair<double, double> a1_conditional(double sigma2) const {
    return {prior_.e0 + prior_.a0, prior_.e1 + 1.0 / sigma2};
  }

  /// (shape, scale) of the inverse-gamma full conditional of sigma2.
  std::pair<double, double> sigma2_conditional(const ChainState& s) const {
    const double a1 = prior_.hierarchical_a1 ? s.a1 : prior_.a1;
    return {0.5 * T() + prior_.a0, 0.5 * s.resid.squaredNorm() + a1};
  }

  /// Step (b): coordinate-wise v_ji from the spike / truncated-normal mixture.
  void step_v(ChainState& s, Rng& rng) const {
    const Weights w = weights(s);
    for (int j = 0; j < groups(); ++j) {
      const double tau = s.tau[j];
      const double pi1 = s.pi1_for(j);
      for (int c = partition_.start(j); c < partition_.end(j); ++c) {
        const auto [eta2, nu] = v_conditional(s, w, c, tau);
        const double p_spike = spike_prob_within(eta2, nu, tau, pi1);
        const bool spike = rng.bernoulli(p_spike);
        s.gamma1[c] = spike ? 1 : 0;
        const double v_new = spike ? 0.0 : rng.positive_normal(nu, std::sqrt(eta2));
        set_coefficient(s, c, v_new, s.b[c]);
      }
    }
  }

  /// (eta^2, nu) for column c given the current state.
  std::pair<double, double> v_conditional(const ChainState& s, int c) const {
    return v_conditional(s, weights(s), c, s.tau[partition_.group_of(c)]);
  }

  /// Step (c): group-wise b_j from the point mass / Gaussian mixture.
  void step_b(ChainState& s, Rng& rng) const {
    const Weights w = weights(s);
    for (int j = 0; j < groups(); ++j) {
      const int start = partition_.start(j), g = partition_.size(j);
      const auto vj = s.v.segment(start, g);
      Eigen::VectorXd b_new(g);
      if ((vj.array() == 0.0).all()) {
        // Sigma = I, mu = 0: the conditional equals the prior.
        const bool spike = rng.bernoulli(s.pi0);
        s.gamma0[j] = spike ? 1 : 0;
        if (spike) b_new.setZero(); else for (int i = 0; i < g; ++i) b_new[i] = rng.normal();
      } else {
        const GroupPosterior gp = group_conditional(s, w, j);
        const bool spike = rng.bernoulli(gp.spike_prob);
        s.gamma0[j] = spike ? 1 : 0;
        if (spike) {
          b_new.setZero();
        } else {
          Eigen::VectorXd xi(g);
          for (int i = 0; i < g; ++i) xi[i] = rng.normal();
          const Eigen::MatrixXd L = gp.chol.matrixL();
          b_new = gp.mean + L.transpose().triangularView<Eigen::Upper>().solve(xi);
        }
      }
      for (int i = 0; i < g; ++i) set_coefficient(s, start + i, s.v[start + i], b_new[i]);
    }
  }

  GroupPosterior group_conditional(const ChainState& s, int j) const { return group_conditional(s, weights(s), j); }

  /// Step (d): Metropolis-Hastings for tau_j with an exponential proposal of mean tau_old.
  void step_tau(ChainState& s, Rng& rng, Eigen::VectorXi* accepted = nullptr) const {
    for (int j = 0; j < groups(); ++j) {
      int active = 0;
      double sum_v2 = 0.0;
      for (int c = partition_.start(j); c < partition_.end(j); ++c) {
        if (s.v[c] > 0.0) {
          ++active;
          sum_v2 += s.v[c] * s.v[c];
        }
      }
      const double tau_old = s.tau[j];
      const double tau_new = rng.exponential_mean(tau_old);
      if (!(tau_new > 0.0)) throw std::logic_error("step_tau: non-positive proposal");
      const double log_r = tau_log_acceptance(tau_old, tau_new, active, sum_v2, prior_.lambda0, prior_.lambda1[j]);
      if (std::log(rng.uniform()) < log_r) {
        s.tau[j] = tau_new;
        if (accepted) ++(*accepted)[j];
      }
    }
  }

  /// Step (e): conjugate Beta updates. pi0 and pi1 are spike probabilities,
  /// so spikes add to the first shape parameter and slabs to the second.
  void step_pi(ChainState& s, Rng& rng) const {
    const auto [a, b] = pi0_conditional(s);
    s.pi0 = rng.beta(a, b);
    if (prior_.group_specific_pi1) {
      for (int j = 0; j < groups(); ++j) {
        const auto [aj, bj] = pi1_conditional(s, j);
        s.pi1[j] = rng.beta(aj, bj);
      }
    } else {
      const auto [a1, b1] = pi1_conditional(s, -1);
      s.pi1[0] = rng.beta(a1, b1);
    }
  }

  std::pair<double, double> pi0_conditional(const ChainState& s) const {
    int spikes = 0;
    for (auto g : s.gamma0) spikes += g;
    return {prior_.c0 + spikes, prior_.d0 + groups() - spikes};
  }

  /// group < 0 pools all coefficients.
  std::pair<double, double> pi1_conditional(const ChainState& s, int group) const {
    const int begin = group < 0 ? 0 : partition_.start(group);
    const int end = group < 0 ? width() : partition_.end(group);
    int spikes = 0;
    for (int c = begin; c < end; ++c) spikes += s.gamma1[c];
    return {prior_.c1 + spikes, prior_.d1 + (end - begin) - spikes};
  }

  void sweep(ChainState& s, Rng& rng, Eigen::VectorXi* tau_accepted = nullptr) const {
    step_sigma2(s, rng);
    step_v(s, rng);
    step_b(s, rng);
    step_tau(s, rng, tau_accepted);
    step_pi(s, rng);
  }

  /// Gaussian log-likelihood of the current residual.
  double log_likelihood(const ChainState& s) const {
    if (s.sv) {
      const Eigen::VectorXd var = observation_variance(*s.sv);
      double ll = 0.0;
      for (int t = 0; t < T(); ++t) ll += -kLogSqrt2Pi - 0.5 * std::log(var[t]) - 0.5 * s.resid[t] * s.resid[t] / var[t];
      return ll;
    }
    return gaussian_log_likelihood(s.resid, s.sigma2);
  }

  static double gaussian_log_likelihood(const Eigen::VectorXd& resid, double sigma2) {
    const double n = double(resid.size());
    return -n * kLogSqrt2Pi - 0.5 * n * std::log(sigma2) - 0.5 * resid.squaredNorm() / sigma2;
  }

  double y_mean() const { return y_mean_; }
  const Eigen::VectorXd& z_means() const { return z_means_; }

 private:
  // Observation precisions: a scalar 1/sigma2, or per-period under SV.
  struct Weights {
    double scalar = 1.0;
    Eigen::VectorXd per_obs;   // empty when homoskedastic
    Eigen::VectorXd col_norm2; // weighted squared column norms under SV
  };

  Weights weights(const ChainState& s) const {
    Weights w;
    if (s.sv) {
      w.per_obs = observation_variance(*s.sv).cwiseInverse();
      w.col_norm2 = (Z_.array().square().colwise() * w.per_obs.array()).colwise().sum().transpose();
    } else {
      w.scalar = 1.0 / s.sigma2;
    }
    return w;
  }

  double weighted_norm2(const Weights& w, int c) const {
    return w.per_obs.size() ? w.col_norm2[c] : w.scalar * col_norm2_[c];
  }

  double weighted_dot(const Weights& w, int c, const Eigen::VectorXd& r) const {
    if (w.per_obs.size()) return (Z_.col(c).array() * w.per_obs.array() * r.array()).sum();
    return w.scalar * Z_.col(c).dot(r);
  }

  std::pair<double, double> v_conditional(const ChainState& s, const Weights& w, int c, double tau) const {
    const double zz = weighted_norm2(w, c);
    const double zr = weighted_dot(w, c, s.resid) + zz * s.theta[c];
    const double b = s.b[c];
    const double eta2 = 1.0 / (b * b * zz + 1.0 / (tau * tau));
    return {eta2, eta2 * b * zr};
  }

  GroupPosterior group_conditional(const ChainState& s, const Weights& w, int j) const {
    const int start = partition_.start(j), g = partition_.size(j);
    const auto block = Z_.middleCols(start, g);
    const Eigen::VectorXd vj = s.v.segment(start, g);
    Eigen::MatrixXd gram;
    Eigen::VectorXd zr;
    if (w.per_obs.size()) {
      const Eigen::MatrixXd weighted = block.array().colwise() * w.per_obs.array();
      gram = weighted.transpose() * block;
      zr = weighted.transpose() * s.resid;
    } else {
      gram = w.scalar * grams_[j];
      zr = w.scalar * (block.transpose() * s.resid);
    }
    zr += gram * s.theta.segment(start, g);  // Z_j' W (y - Z_{-j} theta_{-j})
    Eigen::MatrixXd precision = vj.asDiagonal() * gram * vj.asDiagonal();
    precision.diagonal().array() += 1.0;
    return group_posterior(precision, vj.asDiagonal() * zr, s.pi0);
  }

  void set_coefficient(ChainState& s, int c, double v, double b) const {
    s.v[c] = v;
    s.b[c] = b;
    const double theta = v * b;
    const double delta = theta - s.theta[c];
    if (delta != 0.0) s.resid -= delta * Z_.col(c);
    s.theta[c] = theta;
  }

  double sample_variance() const {
    if (y_.size() < 2) return 1.0;
    const double m = y_.mean();
    return (y_.array() - m).square().sum() / double(y_.size() - 1);
  }

  PriorHyperparams prior_;
  McmcConfig config_;
  Partition partition_;
  Eigen::MatrixXd Z_;
  Eigen::VectorXd y_;
  double y_mean_ = 0.0;
  Eigen::VectorXd z_means_;
  Eigen::VectorXd col_norm2_;
  std::vector<Eigen::MatrixXd> grams_;
};

/// Runs the full cycle (a)-(e) for config.sweeps sweeps and keeps every
/// thin-th draw after burn-in. Deterministic given config.seed.
inline ChainOutput run_chain(const GroupedDesign& design, const PriorHyperparams& prior, const McmcConfig& config) {
  if (config.sweeps <= config.burn_in) throw std::invalid_argument("run_chain: sweeps must exceed burn_in");
  if (config.thin < 1) throw std::invalid_argument("run_chain: thin must be >= 1");
  if (config.burn_in < 0) throw std::invalid_argument("run_chain: negative burn_in");
  GibbsSampler sampler(design, prior, config);
  Rng rng(config.seed);
  ChainState s = sampler.initial_state();
  const int S = config.retained();
  const int p = sampler.width(), N = sampler.groups(), T = sampler.T();

  ChainOutput out;
  out.theta_draws.resize(S, p);
  out.sigma2_draws.resize(S);
  out.intercept_draws = Eigen::VectorXd::Zero(S);
  out.loglik_draws.resize(S);
  out.inclusion_group = Eigen::VectorXd::Zero(N);
  out.inclusion_within = Eigen::VectorXd::Zero(p);
  out.partition = design.partition;
  out.y_mean = sampler.y_mean();
  out.z_means = sampler.z_means();
  if (s.sv) {
    SvDraws d;
    d.zeta.resize(S, T);
    d.outlier.resize(S, T);
    for (auto* v : {&d.next_log_vol, &d.nu, &d.last_omega, &d.mu, &d.phi, &d.sigma2_zeta, &d.p_omega}) v->resize(S);
    out.sv = std::move(d);
  }

  Eigen::VectorXi tau_accepted = Eigen::VectorXi::Zero(N);
  int kept = 0;
  for (int sweep = 1; sweep <= config.sweeps; ++sweep) {
    sampler.sweep(s, rng, &tau_accepted);
    // Periodic resync bounds drift from the rank-one residual updates.
    if (sweep % 1000 == 0) sampler.refresh_residual(s);
    const double ll = sampler.log_likelihood(s);
    if (!std::isfinite(ll)) {
      throw std::runtime_error("run_chain: non-finite likelihood at sweep " + std::to_string(sweep));
    }
    if (sweep <= config.burn_in || (sweep - config.burn_in) % config.thin != 0 || kept >= S) continue;
    out.theta_draws.row(kept) = s.theta.transpose();
    out.loglik_draws[kept] = ll;
    if (config.center) out.intercept_draws[kept] = out.y_mean - out.z_means.dot(s.theta);
    // A group counts as included when it contributes, i.e. theta_j != 0;
    // b_j off the spike with every v_ji = 0 leaves the fit unchanged.
    for (int j = 0; j < N; ++j) {
      if (!s.theta.segment(out.partition.start(j), out.partition.size(j)).isZero(0.0)) out.inclusion_group[j] += 1.0;
    }
    for (int c = 0; c < p; ++c) {
      if (s.theta[c] != 0.0) out.inclusion_within[c] += 1.0;
    }
    if (s.sv) {
      auto& d = *out.sv;
      const double next = draw_next_log_volatility(*s.sv, rng);
      d.zeta.row(kept) = s.sv->zeta.transpose();
      d.outlier.row(kept) = (s.sv->omega_t.array() > 1.0).cast<double>().transpose();
      d.next_log_vol[kept] = next;
      d.nu[kept] = s.sv->nu;
      d.last_omega[kept] = s.sv->omega_t[T - 1];
      d.mu[kept] = s.sv->mu_zeta;
      d.phi[kept] = s.sv->phi_zeta;
      d.sigma2_zeta[kept] = s.sv->sigma2_zeta;
      d.p_omega[kept] = s.sv->p_omega;
      out.sigma2_draws[kept] = t_variance_factor(*s.sv) * s.sv->omega_t[T - 1] * std::exp(next);
    } else {
      out.sigma2_draws[kept] = s.sigma2;
    }
    ++kept;
  }
  if (S > 0) {
    out.inclusion_group /= double(S);
    out.inclusion_within /= double(S);
  }
  out.meta.sweeps = config.sweeps;
  out.meta.burn_in = config.burn_in;
  out.meta.thin = config.thin;
  out.meta.seed = config.seed;
  out.meta.volatility = config.volatility;
  out.meta.tau_acceptance = tau_accepted.cast<double>() / double(config.sweeps);
  if (s.sv && s.sv->zeta_proposals > 0) {
    out.meta.zeta_acceptance = double(s.sv->zeta_accepts) / double(s.sv->zeta_proposals);
  }
  return out;
}

/// Equal-weight Gaussian mixture, one component per retained draw.
struct ForecastDensity {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return means.size(); }
  double mean() const { return weights.dot(means); }
  double variance() const {
    const double m = mean();
    return weights.dot((variances.array() + (means.array() - m).square()).matrix());
  }
};

inline ForecastDensity gaussian_density(double mean, double variance) {
  ForecastDensity f;
  f.means = Eigen::VectorXd::Constant(1, mean);
  f.variances = Eigen::VectorXd::Constant(1, variance);
  f.weights = Eigen::VectorXd::Ones(1);
  return f;
}

/// Predictive density for one design row: component s is
/// N(intercept_s + z' theta_s, sigma2_s).
inline ForecastDensity posterior_predictive(const ChainOutput& chain, const Eigen::VectorXd& z_new) {
  if (z_new.size() != chain.theta_draws.cols()) {
    throw std::invalid_argument("posterior_predictive: row has " + std::to_string(z_new.size()) +
                                " columns, chain has " + std::to_string(chain.theta_draws.cols()));
  }
  if (chain.draws() == 0) throw std::invalid_argument("posterior_predictive: empty chain");
  ForecastDensity f;
  f.means = chain.theta_draws * z_new + chain.intercept_draws;
  f.variances = chain.sigma2_draws;
  f.weights = Eigen::VectorXd::Constant(chain.draws(), 1.0 / chain.draws());
  return f;
}

inline std::vector<ForecastDensity> posterior_predictive(const ChainOutput& chain, const Eigen::MatrixXd& rows) {
  std::vector<ForecastDensity> out;
  out.reserve(rows.rows());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) out.push_back(posterior_predictive(chain, Eigen::VectorXd(rows.row(r).transpose())));
  return out;
}

/// Elementwise posterior median of theta.
inline Eigen::VectorXd posterior_median(const Eigen::MatrixXd& draws) {
  Eigen::VectorXd med(draws.cols());
  std::vector<double> col(draws.rows());
  for (Eigen::Index c = 0; c < draws.cols(); ++c) {
    for (Eigen::Index r = 0; r < draws.rows(); ++r) col[r] = draws(r, c);
    const std::size_t n = col.size();
    std::nth_element(col.begin(), col.begin() + n / 2, col.end());
    double m = col[n / 2];
    if (n % 2 == 0) m = 0.5 * (m + *std::max_element(col.begin(), col.begin() + n / 2));
    med[c] = m;
  }
  return med;
}

}  // namespace bsgs

#endif  // BSGS_SAMPLER_HPP_
