#ifndef BSGS_EVAL_HPP_
#define BSGS_EVAL_HPP_

#include <Eigen/Dense>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsgs/design.hpp"
#include "bsgs/random.hpp"
#include "bsgs/sampler.hpp"

namespace bsgs {

struct EstimationMetrics {
  double mse = 0.0, var = 0.0, bias2 = 0.0;
};

/// Rows of theta_hat are replications. Everything divides by R, so
/// mse = var + bias2 holds exactly.
inline EstimationMetrics estimation_metrics(const Eigen::MatrixXd& theta_hat, const Eigen::VectorXd& theta0) {
  if (theta_hat.rows() < 1) throw std::invalid_argument("estimation_metrics: no replications");
  if (theta_hat.cols() != theta0.size()) throw std::invalid_argument("estimation_metrics: dimension mismatch");
  const double R = double(theta_hat.rows());
  const Eigen::VectorXd mean = theta_hat.colwise().mean().transpose();
  EstimationMetrics m;
  m.mse = (theta_hat.rowwise() - theta0.transpose()).rowwise().squaredNorm().sum() / R;
  m.var = (theta_hat.rowwise() - mean.transpose()).squaredNorm() / R;
  m.bias2 = (mean - theta0).squaredNorm();
  return m;
}

struct Confusion {
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

inline double tpr(const Confusion& c) {
  return c.tp + c.fn == 0 ? std::numeric_limits<double>::quiet_NaN() : 100.0 * double(c.tp) / double(c.tp + c.fn);
}

/// Matthews correlation; 0 when any marginal count vanishes.
inline double mcc(const Confusion& c) {
  const double tp = double(c.tp), fp = double(c.fp), fn = double(c.fn), tn = double(c.tn);
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

inline Confusion confusion(const std::vector<bool>& declared, const std::vector<bool>& truth) {
  if (declared.size() != truth.size()) throw std::invalid_argument("confusion: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (declared[i] && truth[i]) ++c.tp;
    else if (declared[i]) ++c.fp;
    else if (truth[i]) ++c.fn;
    else ++c.tn;
  }
  return c;
}

struct SelectionReport {
  double tpr_group = 0.0, tpr_var = 0.0;
  double mcc_group = 0.0, mcc_var = 0.0;
  Confusion group, var;
};

/// Median probability model by default: active iff frequency >= threshold.
inline SelectionReport selection_metrics(const Eigen::VectorXd& inclusion_group, const Eigen::VectorXd& inclusion_within,
                                         const std::vector<bool>& truth_group, const std::vector<bool>& truth_var,
                                         double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("selection_metrics: threshold outside (0,1)");
  auto declare = [&](const Eigen::VectorXd& f) {
    std::vector<bool> d(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) d[i] = f[i] >= threshold;
    return d;
  };
  SelectionReport r;
  r.group = confusion(declare(inclusion_group), truth_group);
  r.var = confusion(declare(inclusion_within), truth_var);
  r.tpr_group = tpr(r.group);
  r.tpr_var = tpr(r.var);
  r.mcc_group = mcc(r.group);
  r.mcc_var = mcc(r.var);
  return r;
}

namespace detail {

// E|X| for X ~ N(m, s2).
inline double abs_normal_mean(double m, double s2) {
  if (s2 <= 0.0) return std::abs(m);
  const double s = std::sqrt(s2);
  return m * (2.0 * norm_cdf(m / s) - 1.0) + 2.0 * s * norm_pdf(m / s);
}

inline constexpr Eigen::Index kPairwiseCrpsLimit = 2000;

}  // namespace detail

/// CRPS of N(mu, sigma^2) at y.
inline double crps_gaussian(double mu, double sigma, double y) {
  if (sigma < 0.0) throw std::invalid_argument("crps_gaussian: negative scale");
  if (sigma == 0.0) return std::abs(y - mu);
  const double z = (y - mu) / sigma;
  return sigma * (z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z) - 1.0 / std::sqrt(std::numbers::pi));
}

inline double mixture_cdf(const ForecastDensity& f, double x) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double s2 = f.variances[i];
    acc += f.weights[i] * (s2 > 0.0 ? norm_cdf((x - f.means[i]) / std::sqrt(s2)) : (x >= f.means[i] ? 1.0 : 0.0));
  }
  return acc;
}

/// CRPS = E|X - y| - E|X - X'|/2. Small mixtures use the exact pairwise
/// kernel form; large ones integrate (F - 1{x >= y})^2 numerically.
inline double crps(const ForecastDensity& f, double y) {
  const Eigen::Index S = f.size();
  if (S == 0) throw std::invalid_argument("crps: empty density");
  if (S == 1) return crps_gaussian(f.means[0], std::sqrt(f.variances[0]), y);
  if (S <= detail::kPairwiseCrpsLimit) {
    double first = 0.0, second = 0.0;
    for (Eigen::Index i = 0; i < S; ++i) {
      first += f.weights[i] * detail::abs_normal_mean(f.means[i] - y, f.variances[i]);
      double row = 0.0;
      for (Eigen::Index k = 0; k < i; ++k) {
        row += f.weights[k] * detail::abs_normal_mean(f.means[i] - f.means[k], f.variances[i] + f.variances[k]);
      }
      second += 2.0 * f.weights[i] * row + f.weights[i] * f.weights[i] * detail::abs_normal_mean(0.0, 2.0 * f.variances[i]);
    }
    return first - 0.5 * second;
  }
  const Eigen::ArrayXd sd = f.variances.array().sqrt();
  const double lo = std::min(y, (f.means.array() - 12.0 * sd).minCoeff());
  const double hi = std::max(y, (f.means.array() + 12.0 * sd).maxCoeff());
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double below = y > lo ? Quad::integrate([&](double x) { const double F = mixture_cdf(f, x); return F * F; },
                                                lo, y, 12, 1e-10) : 0.0;
  const double above = hi > y ? Quad::integrate([&](double x) { const double G = 1.0 - mixture_cdf(f, x); return G * G; },
                                                y, hi, 12, 1e-10) : 0.0;
  return below + above;
}

/// log of the mixture density at y; throws when the density underflows to zero.
inline double log_score(const ForecastDensity& f, double y) {
  double acc = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double s2 = f.variances[i];
    if (!(s2 > 0.0)) throw std::invalid_argument("log_score: non-positive component variance");
    const double d = y - f.means[i];
    acc = log_sum_exp(acc, std::log(f.weights[i]) - kLogSqrt2Pi - 0.5 * std::log(s2) - 0.5 * d * d / s2);
  }
  if (!std::isfinite(acc)) throw std::domain_error("log_score: zero predictive density at outcome " + std::to_string(y));
  return acc;
}

struct ScoreReport {
  double rmsfe = 0.0, avg_logs = 0.0, avg_crps = 0.0;
  // Ratios for RMSFE and CRPS, a difference for LogS. NaN without benchmark.
  double rel_rmsfe = std::numeric_limits<double>::quiet_NaN();
  double rel_logs = std::numeric_limits<double>::quiet_NaN();
  double rel_crps = std::numeric_limits<double>::quiet_NaN();
  std::string benchmark;
  Eigen::VectorXd point, logs, crps_t;
};

inline ScoreReport forecast_scores(const std::vector<ForecastDensity>& densities, const Eigen::VectorXd& outcomes,
                                   const std::vector<ForecastDensity>* benchmark = nullptr,
                                   std::string benchmark_name = "AR(1)") {
  const Eigen::Index n = outcomes.size();
  if (Eigen::Index(densities.size()) != n || n == 0) throw std::invalid_argument("forecast_scores: length mismatch");
  ScoreReport r;
  r.point.resize(n);
  r.logs.resize(n);
  r.crps_t.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    r.point[t] = densities[t].mean();
    r.logs[t] = log_score(densities[t], outcomes[t]);
    r.crps_t[t] = crps(densities[t], outcomes[t]);
  }
  r.rmsfe = std::sqrt((r.point - outcomes).squaredNorm() / double(n));
  r.avg_logs = r.logs.mean();
  r.avg_crps = r.crps_t.mean();
  if (benchmark) {
    const ScoreReport b = forecast_scores(*benchmark, outcomes);
    r.rel_rmsfe = r.rmsfe / b.rmsfe;
    r.rel_logs = r.avg_logs - b.avg_logs;
    r.rel_crps = r.avg_crps / b.avg_crps;
    r.benchmark = std::move(benchmark_name);
  }
  return r;
}

struct Ar1Fit {
  double intercept = 0.0, slope = 0.0, sigma2 = 0.0;
};

/// Least squares AR(1) with intercept; sigma2 is the plug-in SSR / n.
inline Ar1Fit fit_ar1(const Eigen::VectorXd& y) {
  if (y.size() < 10) throw std::invalid_argument("fit_ar1: need at least 10 observations");
  const Eigen::Index n = y.size() - 1;
  const Eigen::VectorXd x = y.head(n), target = y.tail(n);
  const double mx = x.mean(), my = target.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_ar1: degenerate (constant) series");
  Ar1Fit f;
  f.slope = ((x.array() - mx) * (target.array() - my)).sum() / sxx;
  f.intercept = my - f.slope * mx;
  f.sigma2 = (target.array() - f.intercept - f.slope * x.array()).square().sum() / double(n);
  if (!(f.sigma2 > 1e-14 * (1.0 + sxx / double(n)))) throw std::invalid_argument("fit_ar1: zero residual variance");
  return f;
}

/// h-step Gaussian predictive by iterating the fitted recursion from y_last.
inline ForecastDensity ar1_predict(const Ar1Fit& f, double y_last, int h = 1) {
  if (h < 1) throw std::invalid_argument("ar1_predict: horizon must be >= 1");
  double mean = y_last, var = 0.0, phi_pow = 1.0;
  for (int k = 0; k < h; ++k) {
    mean = f.intercept + f.slope * mean;
    var += f.sigma2 * phi_pow;
    phi_pow *= f.slope * f.slope;
  }
  return gaussian_density(mean, var);
}

/// Predictive densities for horizons 1..H after the end of y_train.
inline std::vector<ForecastDensity> ar1_benchmark(const Eigen::VectorXd& y_train, int horizons = 1) {
  const Ar1Fit f = fit_ar1(y_train);
  std::vector<ForecastDensity> out;
  for (int h = 1; h <= horizons; ++h) out.push_back(ar1_predict(f, y_train[y_train.size() - 1], h));
  return out;
}

/// Euclidean projection onto the probability simplex.
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / double(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

struct PoolResult {
  Eigen::VectorXd weights;
  double objective = 0.0;  // mean log pooled density
  double gradient_norm = 0.0;
  int iterations = 0;
};

/// Maximizes mean_t log(sum_k w_k f(t, k)) over the simplex by projected
/// gradient ascent with backtracking, starting from equal weights.
inline PoolResult optimal_pool(const Eigen::MatrixXd& densities, int max_iterations = 100000, double tol = 1e-8) {
  const Eigen::Index T = densities.rows(), K = densities.cols();
  if (T < 1 || K < 1) throw std::invalid_argument("optimal_pool: need at least one model and one period");
  if (!densities.allFinite() || (densities.array() < 0.0).any()) {
    throw std::invalid_argument("optimal_pool: densities must be finite and non-negative");
  }
  auto objective = [&](const Eigen::VectorXd& w) {
    const Eigen::ArrayXd p = (densities * w).array();
    if ((p <= 0.0).any()) return -std::numeric_limits<double>::infinity();
    return p.log().mean();
  };
  auto gradient = [&](const Eigen::VectorXd& w) {
    const Eigen::VectorXd inv = (densities * w).cwiseInverse();
    return Eigen::VectorXd(densities.transpose() * inv / double(T));
  };
  PoolResult r;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(K, 1.0 / double(K));
  double f = objective(w);
  if (!std::isfinite(f)) throw std::invalid_argument("optimal_pool: pooled density vanishes at equal weights");
  double step = 1.0;
  double f_lagged = f;
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd g = gradient(w);
    r.gradient_norm = (project_simplex(w + g) - w).norm();
    r.iterations = it;
    if (r.gradient_norm < tol) break;
    // Near-collinear members leave a flat ridge; stop once the objective stalls.
    if (it > 0 && it % 200 == 0) {
      if (f - f_lagged <= 1e-14 * (1.0 + std::abs(f))) break;
      f_lagged = f;
    }
    step = std::min(step * 2.0, 1e6);
    for (;;) {
      const Eigen::VectorXd cand = project_simplex(w + step * g);
      const double fc = objective(cand);
      if (std::isfinite(fc) && fc >= f + 1e-4 * g.dot(cand - w)) {
        w = cand;
        f = fc;
        break;
      }
      step *= 0.5;
      if (step < 1e-20) {
        r.weights = w;
        r.objective = f;
        return r;  // no ascent direction left at machine precision
      }
    }
    if (it + 1 == max_iterations) {
      throw std::runtime_error("optimal_pool: no convergence, final projected gradient norm " +
                               std::to_string((project_simplex(w + gradient(w)) - w).norm()));
    }
  }
  w /= w.sum();
  r.weights = w;
  r.objective = objective(w);
  return r;
}

/// Linear pool of densities: component weights scaled by the pool weights.
inline ForecastDensity pool_densities(const std::vector<const ForecastDensity*>& members, const Eigen::VectorXd& weights) {
  if (members.size() != std::size_t(weights.size()) || members.empty()) throw std::invalid_argument("pool_densities");
  Eigen::Index total = 0;
  for (const auto* m : members) total += m->size();
  ForecastDensity out;
  out.means.resize(total);
  out.variances.resize(total);
  out.weights.resize(total);
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& m = *members[k];
    out.means.segment(at, m.size()) = m.means;
    out.variances.segment(at, m.size()) = m.variances;
    out.weights.segment(at, m.size()) = weights[Eigen::Index(k)] * m.weights;
    at += m.size();
  }
  return out;
}

inline double mixture_density(const ForecastDensity& f, double y) { return std::exp(log_score(f, y)); }

/// min over supports with at most s groups and at most r entries of
/// lambda_min(Z_S' Z_S) / max_j ||Z_j||_op^2, by exhaustive enumeration.
inline double bilevel_sparse_singular_value(const Eigen::MatrixXd& Z, const Partition& partition, int s, int r) {
  const int N = partition.groups(), p = partition.width();
  if (Z.cols() != p) throw std::invalid_argument("bilevel_sparse_singular_value: partition does not match Z");
  if (s < 1 || r < 1) throw std::invalid_argument("bilevel_sparse_singular_value: s and r must be >= 1");
  if (N > 12 || p > 24) {
    throw std::invalid_argument("bilevel_sparse_singular_value: instance too large for exact enumeration (N=" +
                                std::to_string(N) + ", columns=" + std::to_string(p) + ")");
  }
  double op2 = 0.0;
  for (int j = 0; j < N; ++j) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z.middleCols(partition.start(j), partition.size(j)));
    const double sv = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    op2 = std::max(op2, sv * sv);
  }
  if (!(op2 > 0.0)) throw std::invalid_argument("bilevel_sparse_singular_value: Z is zero");
  // Eigenvalues interlace, so enlarging a support never raises lambda_min:
  // only maximal supports need checking.
  const int sg = std::min(s, N);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> gsel(sg);
  std::function<void(int, int)> pick_groups = [&](int from, int depth) {
    if (depth == sg) {
      std::vector<int> cols;
      for (int j : gsel)
        for (int c = partition.start(j); c < partition.end(j); ++c) cols.push_back(c);
      const int k = std::min<int>(r, int(cols.size()));
      std::vector<int> sel(k);
      std::function<void(int, int)> pick_cols = [&](int cfrom, int cdepth) {
        if (cdepth == k) {
          Eigen::MatrixXd sub(Z.rows(), k);
          for (int i = 0; i < k; ++i) sub.col(i) = Z.col(sel[i]);
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub.transpose() * sub, Eigen::EigenvaluesOnly);
          best = std::min(best, std::max(0.0, es.eigenvalues()[0]) / op2);
          return;
        }
        for (int c = cfrom; c <= int(cols.size()) - (k - cdepth); ++c) {
          sel[cdepth] = cols[c];
          pick_cols(c + 1, cdepth + 1);
        }
      };
      pick_cols(0, 0);
      return;
    }
    for (int j = from; j <= N - (sg - depth); ++j) {
      gsel[depth] = j;
      pick_groups(j + 1, depth + 1);
    }
  };
  pick_groups(0, 0);
  return best;
}

/// Bootstrap standard error of the mean; NaN (absent) with fewer than two values.
inline double bootstrap_se(const std::vector<double>& values, int resamples, std::uint64_t seed) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (int b = 0; b < resamples; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += v[std::min(v.size() - 1, std::size_t(rng.uniform() * v.size()))];
    means[b] = acc / double(v.size());
  }
  double m = 0.0;
  for (double x : means) m += x;
  m /= resamples;
  double ss = 0.0;
  for (double x : means) ss += (x - m) * (x - m);
  return std::sqrt(ss / double(resamples - 1));
}

}  // namespace bsgs

#endif  // BSGS_EVAL_HPP_
