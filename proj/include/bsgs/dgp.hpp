#ifndef BSGS_DGP_HPP_
#define BSGS_DGP_HPP_

// Monte Carlo data generators: grouped predictors with Toeplitz-correlated AR(1)
// regressors, and mixed-frequency predictors weighted by a Beta lag polynomial.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsgs/design.hpp"
#include "bsgs/random.hpp"

namespace bsgs {

/// psi(u) = x^(a-1) (1-x)^(b-1) / B(a,b) + c with x = (u+1)/(p_x+1); values
/// below 1e-4 are zeroed and the rest normalized to unit sum.
inline Eigen::VectorXd beta_lag_weights(double a, double b, double c, int p_x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta_lag_weights: a and b must be positive");
  if (p_x < 0) throw std::invalid_argument("beta_lag_weights: p_x must be >= 0");
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  Eigen::VectorXd w(p_x + 1);
  for (int u = 0; u <= p_x; ++u) {
    const double x = double(u + 1) / double(p_x + 1);
    const double raw = std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) * std::exp(log_norm) + c;
    w[u] = raw < 1e-4 ? 0.0 : raw;
  }
  const double total = w.sum();
  if (!(total > 0.0)) throw std::invalid_argument("beta_lag_weights: all weights vanish after thresholding");
  return w / total;
}

/// S R S with S = sigma_eps I and R Toeplitz rho^|i-i'|, either within each of
/// the N blocks of size g (zero across blocks) or over all N*g coordinates.
inline Eigen::MatrixXd toeplitz_block_cov(int N, int g, double rho, double sigma_eps, bool full) {
  if (N < 1 || g < 1) throw std::invalid_argument("toeplitz_block_cov: N and g must be >= 1");
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("toeplitz_block_cov: |rho| must be < 1");
  if (!(sigma_eps > 0.0)) throw std::invalid_argument("toeplitz_block_cov: sigma_eps must be positive");
  const int n = N * g;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  const double s2 = sigma_eps * sigma_eps;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (!full && i / g != k / g) continue;
      S(i, k) = s2 * std::pow(rho, std::abs(i - k));
    }
  }
  return S;
}

struct SkewNormalSpec {
  double alpha = 0.0;
  double sigma2 = 1.0;
  double delta = 0.0;
  double omega2 = 1.0;
  double xi = 0.0;
  double skewness = 0.0;

  /// Azzalini representation: xi + omega (delta |U0| + sqrt(1 - delta^2) U1).
  double draw(Rng& rng) const {
    const double u0 = std::abs(rng.normal());
    const double u1 = rng.normal();
    return xi + std::sqrt(omega2) * (delta * u0 + std::sqrt(1.0 - delta * delta) * u1);
  }
};

/// Location and scale giving mean zero and variance sigma2 at shape alpha.
inline SkewNormalSpec skew_normal_params(double alpha, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("skew_normal_params: sigma2 must be positive");
  SkewNormalSpec s;
  s.alpha = alpha;
  s.sigma2 = sigma2;
  s.delta = alpha / std::sqrt(1.0 + alpha * alpha);
  const double pi = std::numbers::pi;
  s.omega2 = sigma2 * pi / (pi - 2.0 * s.delta * s.delta);
  s.xi = -s.delta * std::sqrt(2.0 * s.omega2 / pi);
  const double m = s.delta * std::sqrt(2.0 / pi);
  s.skewness = (4.0 - pi) / 2.0 * m * m * m / std::pow(1.0 - 2.0 * s.delta * s.delta / pi, 1.5);
  return s;
}

struct Calibration {
  double sigma_eps = 0.0;
  double nsr = 0.0;  // achieved on the pilot path
  std::string convention = "var(eps) / var(beta_y * y[t-1] + signal[t])";
};

/// Bisection for the regressor innovation scale. unit_signal is the regression
/// signal generated with unit innovation scale, so at scale s the conditional
/// mean minus intercept is beta_y y[t-1] + s * unit_signal[t]. The recursion is
/// linear in s, which lets every bisection step reuse the same pilot draws.
inline Calibration calibrate_noise(double target_nsr, double beta_y, const Eigen::VectorXd& unit_signal,
                                   const Eigen::VectorXd& eps) {
  if (!(target_nsr > 0.0)) throw std::invalid_argument("calibrate_noise: target NSR must be positive");
  if (unit_signal.size() != eps.size() || eps.size() < 3) throw std::invalid_argument("calibrate_noise: pilot paths");
  const Eigen::Index n = eps.size();
  // y = A + s B with A driven by eps and B by the signal.
  Eigen::VectorXd P(n - 1), Q(n - 1);
  double A = 0.0, B = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (t > 0) {
      P[t - 1] = beta_y * A;
      Q[t - 1] = beta_y * B + unit_signal[t];
    }
    A = beta_y * A + eps[t];
    B = beta_y * B + unit_signal[t];
  }
  auto centered = [](const Eigen::VectorXd& x) { return (x.array() - x.mean()).matrix(); };
  const Eigen::VectorXd Pc = centered(P), Qc = centered(Q);
  const Eigen::VectorXd ec = centered(eps.tail(n - 1));
  const double m = double(n - 1);
  const double vP = Pc.squaredNorm() / m, vQ = Qc.squaredNorm() / m, cPQ = Pc.dot(Qc) / m;
  const double vE = ec.squaredNorm() / m;
  auto nsr = [&](double s) {
    const double v = vP + 2.0 * s * cPQ + s * s * vQ;
    return v > 0.0 ? vE / v : std::numeric_limits<double>::infinity();
  };
  double lo = 0.0, hi = 1.0;
  if (!(nsr(lo) > target_nsr)) {
    throw std::runtime_error("calibrate_noise: non-bracketing at lower endpoint s=0 (NSR " + std::to_string(nsr(lo)) +
                             " <= target " + std::to_string(target_nsr) + ")");
  }
  int expansions = 0;
  while (!(nsr(hi) < target_nsr)) {
    if (++expansions > 200 || !(vQ > 0.0)) {
      throw std::runtime_error("calibrate_noise: non-bracketing on [0, " + std::to_string(hi) + "], NSR at ends " +
                               std::to_string(nsr(lo)) + " and " + std::to_string(nsr(hi)));
    }
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (nsr(mid) > target_nsr) lo = mid; else hi = mid;
  }
  Calibration c;
  c.sigma_eps = 0.5 * (lo + hi);
  c.nsr = nsr(c.sigma_eps);
  return c;
}

/// Draws from N(0, cov) through a fixed lower Cholesky factor.
class GaussianDraws {
 public:
  explicit GaussianDraws(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::runtime_error("GaussianDraws: covariance not positive definite");
    L_ = llt.matrixL();
  }
  Eigen::VectorXd draw(Rng& rng) const {
    Eigen::VectorXd z(L_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return L_.triangularView<Eigen::Lower>() * z;
  }

 private:
  Eigen::MatrixXd L_;
};

namespace detail {

inline constexpr int kBurnIn = 500;
inline constexpr int kPilotLength = 50000;

// k distinct indices from {0..n-1}, in increasing order.
inline std::vector<int> draw_without_replacement(int n, int k, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + int(rng.uniform() * (n - i));
    std::swap(idx[i], idx[std::min(j, n - 1)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline double draw_shock(Rng& rng, double sigma, const std::optional<SkewNormalSpec>& skew) {
  return skew ? skew->draw(rng) : sigma * rng.normal();
}

}  // namespace detail

struct GroupedDgpSpec {
  int N = 10, g = 10, s0gr = 1, s0j = 1;
  int T = 200, T_oos = 50;
  double rho_z = 0.9;
  double rho_eps = 0.5;
  bool full_corr = false;
  double nsr = 0.2;
  double alpha_const = 0.2;
  double beta_y = 0.3;
  double sigma = 0.5;
  double theta_mag = 0.5;
  std::optional<double> skew_alpha;
  std::uint64_t seed = 1;  // fixes support, signs and calibration
  int replication = 0;     // selects the noise stream
};

inline void validate(const GroupedDgpSpec& s) {
  if (s.N < 1 || s.g < 1) throw std::invalid_argument("grouped dgp: N and g must be >= 1");
  if (s.s0gr < 1 || s.s0gr > s.N) throw std::invalid_argument("grouped dgp: need 1 <= s0gr <= N");
  if (s.s0j < 1 || s.s0j > s.g) throw std::invalid_argument("grouped dgp: need 1 <= s0j <= g");
  if (s.T < 2 || s.T_oos < 0) throw std::invalid_argument("grouped dgp: need T >= 2 and T_oos >= 0");
  if (!(std::abs(s.rho_z) < 1.0) || !(std::abs(s.beta_y) < 1.0)) {
    throw std::invalid_argument("grouped dgp: |rho_z| and |beta_y| must be < 1");
  }
  if (!(std::abs(s.rho_eps) < 1.0)) throw std::invalid_argument("grouped dgp: |rho_eps| must be < 1");
  if (!(s.sigma > 0.0) || !(s.nsr > 0.0)) throw std::invalid_argument("grouped dgp: sigma and nsr must be positive");
}

struct GroupedTruth {
  Eigen::VectorXd theta0;  // N*g exogenous coefficients
  std::vector<int> active_groups;
  std::vector<int> active_coefs;
  double sigma_eps = 0.0;
  double pilot_nsr = 0.0;
  std::string nsr_convention;
  double alpha = 0.0, beta_y = 0.0;
};

struct GroupedDataset {
  GroupedDesign in_sample;
  GroupedDesign out_of_sample;
  GroupedTruth truth;
};

/// Support and signs come from a sub-stream of spec.seed only, so they are
/// shared by every replication.
inline GroupedTruth grouped_support(const GroupedDgpSpec& spec) {
  validate(spec);
  Rng rng(mix_seed(spec.seed, 0));
  GroupedTruth truth;
  truth.theta0 = Eigen::VectorXd::Zero(spec.N * spec.g);
  truth.active_groups = detail::draw_without_replacement(spec.N, spec.s0gr, rng);
  for (int j : truth.active_groups) {
    for (int i : detail::draw_without_replacement(spec.g, spec.s0j, rng)) {
      const int c = j * spec.g + i;
      truth.active_coefs.push_back(c);
      truth.theta0[c] = spec.theta_mag * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
  }
  truth.alpha = spec.alpha_const;
  truth.beta_y = spec.beta_y;
  return truth;
}

inline Calibration calibrate_noise(const GroupedDgpSpec& spec, const GroupedTruth& truth) {
  const int n = spec.N * spec.g;
  const Eigen::MatrixXd cov = toeplitz_block_cov(spec.N, spec.g, spec.rho_eps, 1.0, spec.full_corr);
  // Only the active coordinates enter the signal.
  const auto& act = truth.active_coefs;
  Eigen::MatrixXd sub(act.size(), act.size());
  for (std::size_t a = 0; a < act.size(); ++a)
    for (std::size_t b = 0; b < act.size(); ++b) sub(a, b) = cov(act[a], act[b]);
  (void)n;
  Rng rng(mix_seed(spec.seed, 1));
  const int L = detail::kPilotLength + detail::kBurnIn;
  Eigen::VectorXd signal(detail::kPilotLength), eps(detail::kPilotLength);
  if (act.empty() || truth.theta0.isZero(0.0)) {
    signal.setZero();
    for (int t = 0; t < detail::kPilotLength; ++t) eps[t] = spec.sigma * rng.normal();
    return calibrate_noise(spec.nsr, spec.beta_y, signal, eps);
  }
  const GaussianDraws draws(sub);
  const auto skew = spec.skew_alpha ? std::optional(skew_normal_params(*spec.skew_alpha, spec.sigma * spec.sigma))
                                    : std::nullopt;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(act.size());
  Eigen::VectorXd th(act.size());
  for (std::size_t a = 0; a < act.size(); ++a) th[a] = truth.theta0[act[a]];
  for (int t = 0; t < L; ++t) {
    z = spec.rho_z * z + draws.draw(rng);
    const double e = detail::draw_shock(rng, spec.sigma, skew);
    if (t >= detail::kBurnIn) {
      signal[t - detail::kBurnIn] = th.dot(z);
      eps[t - detail::kBurnIn] = e;
    }
  }
  return calibrate_noise(spec.nsr, spec.beta_y, signal, eps);
}

/// y_t = alpha + beta_y y_{t-1} + sum z theta + eps_t. Designs carry the N
/// groups of regressors followed by a one-column group holding y_{t-1}.
inline GroupedDataset simulate_grouped(const GroupedDgpSpec& spec) {
  GroupedDataset out;
  out.truth = grouped_support(spec);
  // Without an exogenous signal there is nothing to calibrate against; the
  // regressors keep unit innovation scale and do not enter y.
  Calibration cal;
  if (out.truth.theta0.isZero(0.0)) {
    cal.sigma_eps = 1.0;
    cal.nsr = std::numeric_limits<double>::quiet_NaN();
    cal.convention = "no exogenous signal: regressor innovation scale fixed at 1";
  } else {
    cal = calibrate_noise(spec, out.truth);
  }
  out.truth.sigma_eps = cal.sigma_eps;
  out.truth.pilot_nsr = cal.nsr;
  out.truth.nsr_convention = cal.convention;

  const int n = spec.N * spec.g;
  const GaussianDraws draws(toeplitz_block_cov(spec.N, spec.g, spec.rho_eps, cal.sigma_eps, spec.full_corr));
  const auto skew = spec.skew_alpha ? std::optional(skew_normal_params(*spec.skew_alpha, spec.sigma * spec.sigma))
                                    : std::nullopt;
  Rng rng(mix_seed(mix_seed(spec.seed, 2), std::uint64_t(spec.replication)));
  const int total = spec.T + spec.T_oos;
  Eigen::MatrixXd Z(total, n);
  Eigen::VectorXd y(total), ylag(total);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  double y_prev = spec.alpha_const / (1.0 - spec.beta_y);
  for (int t = -detail::kBurnIn; t < total; ++t) {
    z = spec.rho_z * z + draws.draw(rng);
    const double yt = spec.alpha_const + spec.beta_y * y_prev + z.dot(out.truth.theta0) +
                      detail::draw_shock(rng, spec.sigma, skew);
    if (t >= 0) {
      Z.row(t) = z.transpose();
      y[t] = yt;
      ylag[t] = y_prev;
    }
    y_prev = yt;
  }
  auto build = [&](int begin, int count) {
    std::vector<Eigen::MatrixXd> blocks;
    std::vector<std::string> labels;
    for (int j = 0; j < spec.N; ++j) {
      blocks.push_back(Z.block(begin, j * spec.g, count, spec.g));
      labels.push_back("g" + std::to_string(j + 1));
    }
    blocks.push_back(ylag.segment(begin, count));
    labels.push_back("y_lag");
    return assemble_grouped_design(blocks, y.segment(begin, count), 0.0, labels);
  };
  out.in_sample = build(0, spec.T);
  if (spec.T_oos > 0) out.out_of_sample = build(spec.T, spec.T_oos);
  return out;
}

struct MidasDgpSpec {
  int N = 50, s0gr = 5;
  int T = 200, T_oos = 50;
  int m = 3, p_x = 11;
  double a = 5.0, b = 15.0, c = 0.0;
  double rho_x = 0.9;
  double rho_eps = 0.5;
  double alpha_const = 0.5;
  double beta_y = 0.3;
  double sigma = 0.5;
  double nsr = 0.2;
  double h = 0.0;
  BasisFamily basis = BasisFamily::Legendre;
  int basis_g = 5;
  std::uint64_t seed = 1;
  int replication = 0;
};

inline void validate(const MidasDgpSpec& s) {
  if (s.N < 1) throw std::invalid_argument("midas dgp: N must be >= 1");
  if (s.s0gr < 1 || s.s0gr > s.N) throw std::invalid_argument("midas dgp: need 1 <= s0gr <= N");
  if (s.T < 2 || s.T_oos < 0) throw std::invalid_argument("midas dgp: need T >= 2 and T_oos >= 0");
  if (s.m < 1 || s.p_x < 0) throw std::invalid_argument("midas dgp: need m >= 1 and p_x >= 0");
  if (!(std::abs(s.rho_x) < 1.0) || !(std::abs(s.beta_y) < 1.0) || !(std::abs(s.rho_eps) < 1.0)) {
    throw std::invalid_argument("midas dgp: |rho_x|, |rho_eps| and |beta_y| must be < 1");
  }
  if (!(s.sigma > 0.0) || !(s.nsr > 0.0)) throw std::invalid_argument("midas dgp: sigma and nsr must be positive");
  if (s.h < 0.0) throw std::invalid_argument("midas dgp: negative horizon");
}

inline BasisMatrix make_basis(BasisFamily family, int g, int p_x) {
  switch (family) {
    case BasisFamily::Almon: return almon_basis(g, p_x, false);
    case BasisFamily::RestrictedAlmon: return almon_basis(g, p_x, true);
    default: return orthogonal_basis(family, g, p_x);
  }
}

struct MidasTruth {
  std::vector<int> active_series;
  Eigen::VectorXd weights;  // psi over lags 0..p_x
  // Basis coefficients of psi for every series (zero when inactive), the
  // least-squares projection of psi on the basis rows.
  Eigen::VectorXd theta0;
  double sigma_eps = 0.0;
  double pilot_nsr = 0.0;
  std::string nsr_convention;
  double alpha = 0.0, beta_y = 0.0;
};

struct MidasDataset {
  std::vector<HighFrequencySeries> panel;
  Eigen::VectorXd y;  // every low-frequency period, aligned with the panel
  int first_period = 0;
  GroupedDesign in_sample;
  GroupedDesign out_of_sample;
  MidasTruth truth;
};

namespace detail {

// HF AR(1) paths for the given correlation, laid out period-major: x(k, j).
inline Eigen::MatrixXd simulate_hf(int hf_len, const GaussianDraws& draws, double rho, Rng& rng, int burn) {
  const Eigen::Index n = draws.draw(rng).size();
  Eigen::MatrixXd X(hf_len, n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int k = -burn; k < hf_len; ++k) {
    x = rho * x + draws.draw(rng);
    if (k >= 0) X.row(k) = x.transpose();
  }
  return X;
}

inline double midas_term(const Eigen::MatrixXd& X, int col, const Eigen::VectorXd& w, int last) {
  double acc = 0.0;
  for (Eigen::Index u = 0; u < w.size(); ++u) acc += w[u] * X(last - u, col);
  return acc;
}

}  // namespace detail

inline Calibration calibrate_noise(const MidasDgpSpec& spec, const std::vector<int>& active, const Eigen::VectorXd& w) {
  Eigen::MatrixXd sub(active.size(), active.size());
  for (std::size_t a = 0; a < active.size(); ++a)
    for (std::size_t b = 0; b < active.size(); ++b) sub(a, b) = std::pow(spec.rho_eps, std::abs(active[a] - active[b]));
  Rng rng(mix_seed(spec.seed, 1));
  const GaussianDraws draws(sub);
  const int lags = (spec.p_x + detail::horizon_steps(spec.h, spec.m)) / spec.m + 1;
  const int L = detail::kPilotLength + lags;
  const Eigen::MatrixXd X = detail::simulate_hf(L * spec.m, draws, spec.rho_x, rng, detail::kBurnIn * spec.m);
  const int hs = detail::horizon_steps(spec.h, spec.m);
  Eigen::VectorXd signal(detail::kPilotLength), eps(detail::kPilotLength);
  for (int t = 0; t < detail::kPilotLength; ++t) {
    const int period = t + lags;
    const int last = spec.m * period + spec.m - 1 - hs;
    double s = 0.0;
    for (std::size_t a = 0; a < active.size(); ++a) s += detail::midas_term(X, int(a), w, last);
    signal[t] = s;
    eps[t] = spec.sigma * rng.normal();
  }
  return calibrate_noise(spec.nsr, spec.beta_y, signal, eps);
}

/// High-frequency AR(1) predictors with Toeplitz cross-correlation; the active
/// series enter y through psi from beta_lag_weights.
inline MidasDataset simulate_midas(const MidasDgpSpec& spec) {
  validate(spec);
  MidasDataset out;
  {
    Rng support(mix_seed(spec.seed, 0));
    out.truth.active_series = detail::draw_without_replacement(spec.N, spec.s0gr, support);
  }
  out.truth.weights = beta_lag_weights(spec.a, spec.b, spec.c, spec.p_x);
  out.truth.alpha = spec.alpha_const;
  out.truth.beta_y = spec.beta_y;
  const Calibration cal = calibrate_noise(spec, out.truth.active_series, out.truth.weights);
  out.truth.sigma_eps = cal.sigma_eps;
  out.truth.pilot_nsr = cal.nsr;
  out.truth.nsr_convention = cal.convention;

  const BasisMatrix basis = make_basis(spec.basis, spec.basis_g, spec.p_x);
  HighFrequencySeries probe{"x", Eigen::VectorXd(), spec.m, basis};
  const int first = first_feasible_period(std::span<const HighFrequencySeries>(&probe, 1), spec.h, 1);
  const int total = first + spec.T + spec.T_oos;

  Eigen::MatrixXd R(spec.N, spec.N);
  for (int i = 0; i < spec.N; ++i)
    for (int k = 0; k < spec.N; ++k) R(i, k) = cal.sigma_eps * cal.sigma_eps * std::pow(spec.rho_eps, std::abs(i - k));
  const GaussianDraws draws(R);
  Rng rng(mix_seed(mix_seed(spec.seed, 2), std::uint64_t(spec.replication)));
  const Eigen::MatrixXd X = detail::simulate_hf(total * spec.m, draws, spec.rho_x, rng, detail::kBurnIn * spec.m);

  const int hs = detail::horizon_steps(spec.h, spec.m);
  out.y.resize(total);
  double y_prev = spec.alpha_const / (1.0 - spec.beta_y);
  // Periods before `first` lack a full lag window; they are filled with the
  // AR part only and never enter a design row as the target.
  for (int t = 0; t < total; ++t) {
    const int last = spec.m * t + spec.m - 1 - hs;
    double s = 0.0;
    if (last - spec.p_x >= 0) {
      for (int j : out.truth.active_series) s += detail::midas_term(X, j, out.truth.weights, last);
    }
    const double yt = spec.alpha_const + spec.beta_y * y_prev + s + spec.sigma * rng.normal();
    out.y[t] = yt;
    y_prev = yt;
  }
  for (int j = 0; j < spec.N; ++j) {
    out.panel.push_back(HighFrequencySeries{"x" + std::to_string(j + 1), X.col(j), spec.m, basis});
  }
  out.first_period = first;
  const GroupedDesign full = assemble_midas_design(out.y, out.panel, spec.h, 1, first);
  out.in_sample = slice_rows(full, 0, spec.T);
  if (spec.T_oos > 0) out.out_of_sample = slice_rows(full, spec.T, spec.T_oos);

  const int g = int(basis.values.rows());
  const Eigen::VectorXd coef =
      basis.values.transpose().colPivHouseholderQr().solve(out.truth.weights);
  out.truth.theta0 = Eigen::VectorXd::Zero(spec.N * g);
  for (int j : out.truth.active_series) out.truth.theta0.segment(j * g, g) = coef;
  return out;
}

}  // namespace bsgs

#endif  // BSGS_DGP_HPP_
