#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "bsgs/eval.hpp"
#include "bsgs/random.hpp"
#include "bsgs/sampler.hpp"
#include "test_support.hpp"

using namespace bsgs;
using Catch::Approx;

namespace {

ForecastDensity random_mixture(int S, Rng& rng) {
  ForecastDensity f;
  f.means.resize(S);
  f.variances.resize(S);
  f.weights = Eigen::VectorXd::Constant(S, 1.0 / S);
  for (int i = 0; i < S; ++i) {
    f.means[i] = 0.8 * rng.normal();
    f.variances[i] = 0.2 + rng.uniform();
  }
  return f;
}

ForecastDensity reversed(const ForecastDensity& f) {
  ForecastDensity r;
  r.means = f.means.reverse();
  r.variances = f.variances.reverse();
  r.weights = f.weights.reverse();
  return r;
}

Confusion make_confusion(long tp, long fp, long fn, long tn) {
  Confusion c;
  c.tp = tp;
  c.fp = fp;
  c.fn = fn;
  c.tn = tn;
  return c;
}

}  // namespace

TEST_CASE("estimation metrics") {
  Eigen::VectorXd theta0(3);
  theta0 << 0.5, 0.0, -0.2;

  const Eigen::MatrixXd exact = theta0.transpose().replicate(4, 1);
  const EstimationMetrics z = estimation_metrics(exact, theta0);
  CHECK(z.mse == 0.0);
  CHECK(z.var == 0.0);
  CHECK(z.bias2 == 0.0);

  Eigen::MatrixXd two(2, 3);
  two.row(0) = theta0.transpose();
  two.row(1) = theta0.transpose();
  two(0, 0) += 1.0;
  two(1, 0) -= 1.0;
  const EstimationMetrics m = estimation_metrics(two, theta0);
  CHECK(m.mse == Approx(1.0).epsilon(1e-15));
  CHECK(m.var == Approx(1.0).epsilon(1e-15));
  CHECK(m.bias2 == Approx(0.0).margin(1e-15));

  Eigen::MatrixXd one(1, 3);
  one << 0.7, 0.1, 0.0;
  const EstimationMetrics s = estimation_metrics(one, theta0);
  CHECK(s.var == 0.0);
  CHECK(s.mse == Approx(s.bias2).epsilon(1e-15));

  Rng rng(1);
  Eigen::MatrixXd reps(25, 3);
  for (int r = 0; r < 25; ++r)
    for (int c = 0; c < 3; ++c) reps(r, c) = rng.normal();
  const EstimationMetrics d = estimation_metrics(reps, theta0);
  CHECK(d.mse == Approx(d.var + d.bias2).epsilon(1e-13));

  CHECK_THROWS_AS(estimation_metrics(Eigen::MatrixXd(2, 2), theta0), std::invalid_argument);
}

TEST_CASE("selection metrics") {
  const std::vector<bool> tg = {true, false, false, true};
  const std::vector<bool> tv = {true, false, true, false, false, false};
  Eigen::VectorXd ig(4), iv(6);
  ig << 0.9, 0.1, 0.2, 0.6;
  iv << 1.0, 0.0, 0.5, 0.4, 0.0, 0.1;
  const SelectionReport perfect = selection_metrics(ig, iv, tg, tv);
  CHECK(perfect.tpr_group == 100.0);
  CHECK(perfect.tpr_var == 100.0);
  CHECK(perfect.mcc_group == Approx(1.0).epsilon(1e-15));
  CHECK(perfect.mcc_var == Approx(1.0).epsilon(1e-15));

  const SelectionReport none = selection_metrics(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(6), tg, tv);
  CHECK(none.tpr_group == 0.0);
  CHECK(none.tpr_var == 0.0);
  CHECK(none.mcc_group == 0.0);

  CHECK_THROWS_AS(selection_metrics(ig, iv, tg, tv, 1.0), std::invalid_argument);
}

TEST_CASE("Matthews correlation") {
  CHECK(mcc(make_confusion(3, 1, 2, 14)) == Approx(40.0 / std::sqrt(4.0 * 5 * 15 * 16)).epsilon(1e-15));
  CHECK(mcc(make_confusion(3, 1, 2, 14)) == Approx(0.577).margin(5e-4));
  CHECK(mcc(make_confusion(0, 0, 3, 7)) == 0.0);
  CHECK(mcc(make_confusion(4, 0, 0, 6)) == 1.0);
  CHECK(mcc(make_confusion(0, 4, 6, 0)) == -1.0);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Confusion c = make_confusion(long(rng.uniform() * 10), long(rng.uniform() * 10), long(rng.uniform() * 10),
                                       long(rng.uniform() * 10));
    const double v = mcc(c);
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
    const bool diagonal = c.fp == 0 && c.fn == 0 && c.tp > 0 && c.tn > 0;
    CHECK((std::abs(v - 1.0) < 1e-12) == diagonal);
  }
  CHECK(std::isnan(tpr(make_confusion(0, 2, 0, 3))));
}

TEST_CASE("CRPS closed forms") {
  CHECK(crps_gaussian(0.0, 1.0, 0.0) == Approx((std::sqrt(2.0) - 1.0) / std::sqrt(std::numbers::pi)).epsilon(1e-14));
  CHECK(crps_gaussian(0.0, 1.0, 0.0) == Approx(0.2337).margin(1e-4));
  const ForecastDensity point = gaussian_density(1.5, 0.0);
  CHECK(crps(point, 1.5) == 0.0);
  CHECK(point.mean() == 1.5);
  CHECK(crps(point, 2.0) == 0.5);
  CHECK(crps(gaussian_density(0.3, 2.0), -0.4) == Approx(crps_gaussian(0.3, std::sqrt(2.0), -0.4)).epsilon(1e-15));
}

TEST_CASE("mixture CRPS against a sampling estimator") {
  Rng rng(3);
  const ForecastDensity f = random_mixture(50, rng);
  for (double y : {-1.0, 0.2, 2.5}) {
    const double empirical = testing::empirical_crps(testing::stratified_mixture_sample(f, 100000), y);
    CHECK(crps(f, y) == Approx(empirical).epsilon(0.01));
  }
}

TEST_CASE("large mixtures switch to quadrature without changing the value") {
  Rng rng(4);
  const ForecastDensity big = random_mixture(2400, rng);
  ForecastDensity head = big;
  // The first 2000 components scored exactly, then compared with quadrature
  // on the same components.
  head.means = big.means.head(2000);
  head.variances = big.variances.head(2000);
  head.weights = Eigen::VectorXd::Constant(2000, 1.0 / 2000);
  ForecastDensity padded = head;
  padded.means.conservativeResize(2400);
  padded.variances.conservativeResize(2400);
  padded.weights.conservativeResize(2400);
  for (int i = 2000; i < 2400; ++i) {
    padded.means[i] = head.means[i - 2000];
    padded.variances[i] = head.variances[i - 2000];
  }
  // Duplicating the first 400 components and reweighting leaves the same law.
  padded.weights.setConstant(1.0 / 2400);
  for (int i = 0; i < 400; ++i) padded.weights[i] = padded.weights[i + 2000] = 0.5 / 2000;
  for (int i = 400; i < 2000; ++i) padded.weights[i] = 1.0 / 2000;
  for (double y : {-0.5, 1.0}) CHECK(crps(padded, y) == Approx(crps(head, y)).epsilon(1e-8));
  const double empirical = testing::empirical_crps(testing::stratified_mixture_sample(big, 120000), 0.3);
  CHECK(crps(big, 0.3) == Approx(empirical).epsilon(0.01));
}

TEST_CASE("mixture scores ignore component order") {
  Rng rng(5);
  const ForecastDensity f = random_mixture(40, rng);
  const ForecastDensity r = reversed(f);
  for (double y : {-2.0, 0.0, 1.1}) {
    CHECK(crps(r, y) == Approx(crps(f, y)).epsilon(1e-12));
    CHECK(log_score(r, y) == Approx(log_score(f, y)).epsilon(1e-12));
  }
}

TEST_CASE("log score") {
  const ForecastDensity n = gaussian_density(0.0, 1.0);
  CHECK(log_score(n, 0.0) == Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
  ForecastDensity two;
  two.means = Eigen::Vector2d(-1.0, 1.0);
  two.variances = Eigen::Vector2d(0.5, 2.0);
  two.weights = Eigen::Vector2d(0.3, 0.7);
  double direct = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double d = 0.7 - two.means[i];
    direct += two.weights[i] * std::exp(-0.5 * d * d / two.variances[i]) / std::sqrt(2.0 * std::numbers::pi * two.variances[i]);
  }
  CHECK(log_score(two, 0.7) == Approx(std::log(direct)).epsilon(1e-14));
  // Far tails stay finite in log space; only a mixture without mass scores zero.
  CHECK(std::isfinite(log_score(gaussian_density(0.0, 1e-6), 1e3)));
  ForecastDensity empty = two;
  empty.weights.setZero();
  CHECK_THROWS_AS(log_score(empty, 0.0), std::domain_error);
  CHECK_THROWS_AS(log_score(gaussian_density(0.0, 0.0), 0.0), std::invalid_argument);
}

TEST_CASE("forecast score report") {
  Rng rng(6);
  std::vector<ForecastDensity> model, bench;
  Eigen::VectorXd y(30);
  for (int t = 0; t < 30; ++t) {
    y[t] = rng.normal();
    model.push_back(gaussian_density(0.5 * y[t], 0.8));
    bench.push_back(gaussian_density(0.0, 1.0));
  }
  const ScoreReport m = forecast_scores(model, y, &bench);
  const ScoreReport b = forecast_scores(bench, y);
  CHECK(m.rel_rmsfe == Approx(m.rmsfe / b.rmsfe).epsilon(1e-15));
  CHECK(m.rel_crps == Approx(m.avg_crps / b.avg_crps).epsilon(1e-15));
  CHECK(m.rel_logs == Approx(m.avg_logs - b.avg_logs).epsilon(1e-15));
  CHECK(m.benchmark == "AR(1)");
  CHECK(std::isnan(b.rel_rmsfe));
  const ScoreReport self = forecast_scores(bench, y, &bench);
  CHECK(self.rel_rmsfe == 1.0);
  CHECK(self.rel_logs == 0.0);
  CHECK_THROWS_AS(forecast_scores(model, y.head(10)), std::invalid_argument);
}

TEST_CASE("AR(1) benchmark on white noise") {
  Rng rng(7);
  Eigen::VectorXd y(10000);
  for (int t = 0; t < y.size(); ++t) y[t] = rng.normal();
  const Ar1Fit f = fit_ar1(y);
  const double se = 1.0 / std::sqrt(double(y.size()));
  CHECK(std::abs(f.slope) < 3.0 * se);
  const ForecastDensity p = ar1_benchmark(y).front();
  CHECK(std::abs(p.mean() - y.mean()) < 0.01 + 3.0 * se * std::abs(y[y.size() - 1]));
  CHECK_THROWS_AS(fit_ar1(Eigen::VectorXd::Constant(20, 2.0)), std::invalid_argument);
  Eigen::VectorXd line(20);
  for (int t = 0; t < 20; ++t) line[t] = 1.0 + 0.5 * t;
  CHECK_THROWS_AS(fit_ar1(line), std::invalid_argument);
  CHECK_THROWS_AS(fit_ar1(y.head(5)), std::invalid_argument);
}

TEST_CASE("AR(1) predictive intervals are calibrated") {
  Rng rng(8);
  const int sims = 1000, T = 100;
  const double z90 = norm_quantile(0.95);
  int covered = 0;
  for (int s = 0; s < sims; ++s) {
    Eigen::VectorXd y(T + 1);
    double prev = 0.0;
    for (int t = -100; t <= T; ++t) {
      const double v = 0.3 * prev + rng.normal();
      if (t >= 0) y[t] = v;
      prev = v;
    }
    const ForecastDensity p = ar1_benchmark(y.head(T)).front();
    const double half = z90 * std::sqrt(p.variance());
    covered += std::abs(y[T] - p.mean()) <= half ? 1 : 0;
  }
  const double rate = double(covered) / sims;
  CHECK(rate >= 0.85);
  CHECK(rate <= 0.94);
}

TEST_CASE("multi-step AR(1) variance accumulates") {
  Ar1Fit f;
  f.intercept = 1.0;
  f.slope = 0.5;
  f.sigma2 = 2.0;
  const ForecastDensity h2 = ar1_predict(f, 4.0, 2);
  CHECK(h2.mean() == Approx(1.0 + 0.5 * 3.0).epsilon(1e-15));
  CHECK(h2.variance() == Approx(2.0 * 1.25).epsilon(1e-15));
}

TEST_CASE("optimal pool") {
  Rng rng(9);
  Eigen::MatrixXd one(20, 1);
  for (int t = 0; t < 20; ++t) one(t, 0) = 0.1 + rng.uniform();
  CHECK(optimal_pool(one).weights[0] == 1.0);

  Eigen::MatrixXd same(20, 2);
  same.col(0) = one.col(0);
  same.col(1) = one.col(0);
  const PoolResult tie = optimal_pool(same);
  CHECK(tie.weights[0] == Approx(0.5).epsilon(1e-12));
  CHECK(tie.weights[1] == Approx(0.5).epsilon(1e-12));

  Eigen::MatrixXd dom(40, 2);
  for (int t = 0; t < 40; ++t) {
    dom(t, 1) = 0.05 + 0.3 * rng.uniform();
    dom(t, 0) = dom(t, 1) * (1.2 + rng.uniform());
  }
  const PoolResult d = optimal_pool(dom);
  CHECK(d.weights[0] >= 1.0 - 1e-6);
  // Grid scan of the one-dimensional objective.
  auto obj = [&](double w) { return (dom.col(0) * w + dom.col(1) * (1.0 - w)).array().log().mean(); };
  double best_w = 0.0, best = -1e300;
  for (int i = 0; i <= 10000; ++i) {
    const double w = i / 10000.0;
    if (obj(w) > best) {
      best = obj(w);
      best_w = w;
    }
  }
  CHECK(best_w == 1.0);
  CHECK(d.objective >= best - 1e-12);
}

TEST_CASE("optimal pool of overlapping models") {
  Rng rng(10);
  const int T = 200, K = 4;
  Eigen::MatrixXd dens(T, K);
  for (int t = 0; t < T; ++t) {
    const double y = rng.normal();
    for (int k = 0; k < K; ++k) {
      const double mu = 0.4 * (k - 1.5), s2 = 0.6 + 0.3 * k;
      dens(t, k) = std::exp(-0.5 * (y - mu) * (y - mu) / s2) / std::sqrt(2.0 * std::numbers::pi * s2);
    }
  }
  const PoolResult r = optimal_pool(dens);
  CHECK(std::abs(r.weights.sum() - 1.0) < 1e-12);
  CHECK((r.weights.array() >= 0.0).all());
  CHECK(r.gradient_norm < 1e-8);
  const double uniform = (dens * Eigen::VectorXd::Constant(K, 0.25)).array().log().mean();
  CHECK(r.objective >= uniform);
  // No random simplex point does better.
  for (int i = 0; i < 2000; ++i) {
    Eigen::VectorXd w(K);
    for (int k = 0; k < K; ++k) w[k] = rng.exponential_mean(1.0);
    w /= w.sum();
    CHECK((dens * w).array().log().mean() <= r.objective + 1e-12);
  }
  CHECK_THROWS_AS(optimal_pool(Eigen::MatrixXd(0, 2)), std::invalid_argument);
}

TEST_CASE("pooled density keeps total weight") {
  const ForecastDensity a = gaussian_density(0.0, 1.0), b = gaussian_density(1.0, 2.0);
  const ForecastDensity p = pool_densities({&a, &b}, Eigen::Vector2d(0.25, 0.75));
  CHECK(p.size() == 2);
  CHECK(p.weights.sum() == Approx(1.0).epsilon(1e-15));
  CHECK(p.mean() == Approx(0.75).epsilon(1e-15));
  CHECK(mixture_density(p, 0.3) == Approx(0.25 * mixture_density(a, 0.3) + 0.75 * mixture_density(b, 0.3)).epsilon(1e-14));
}

TEST_CASE("bi-level sparse singular value") {
  Rng rng(11);
  Eigen::MatrixXd single(6, 1);
  for (int t = 0; t < 6; ++t) single(t, 0) = rng.normal();
  CHECK(bilevel_sparse_singular_value(single, Partition({1}), 1, 1) == Approx(1.0).epsilon(1e-12));

  Eigen::MatrixXd orth = Eigen::MatrixXd::Zero(4, 3);
  orth(0, 0) = orth(1, 1) = orth(2, 2) = 2.0;
  CHECK(bilevel_sparse_singular_value(orth, Partition({2, 1}), 1, 1) == Approx(1.0).epsilon(1e-12));

  Eigen::MatrixXd twin(6, 3);
  for (int t = 0; t < 6; ++t) twin.row(t) << rng.normal(), 0.0, rng.normal();
  twin.col(1) = twin.col(0);
  CHECK(bilevel_sparse_singular_value(twin, Partition({2, 1}), 1, 2) == Approx(0.0).margin(1e-12));

  Eigen::MatrixXd Z(10, 6);
  for (int t = 0; t < 10; ++t)
    for (int c = 0; c < 6; ++c) Z(t, c) = rng.normal() + 0.3 * (c > 0 ? Z(t, c - 1) : 0.0);
  const Partition p({2, 2, 2});
  for (int s = 1; s <= 3; ++s)
    for (int r = 1; r <= 6; ++r) {
      const double v = bilevel_sparse_singular_value(Z, p, s, r);
      CHECK(v >= 0.0);
      if (s < 3) CHECK(bilevel_sparse_singular_value(Z, p, s + 1, r) <= v + 1e-12);
      if (r < 6) CHECK(bilevel_sparse_singular_value(Z, p, s, r + 1) <= v + 1e-12);
    }

  const Eigen::MatrixXd wide = Eigen::MatrixXd::Random(5, 13);
  CHECK_THROWS_AS(bilevel_sparse_singular_value(wide, Partition(std::vector<int>(13, 1)), 1, 1),
                  std::invalid_argument);
}

TEST_CASE("bootstrap standard error") {
  CHECK(std::isnan(bootstrap_se({1.0}, 100, 1)));
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
  const double se = bootstrap_se(v, 20000, 2);
  // Plug-in standard error of the mean: sd_n / sqrt(n).
  CHECK(se == Approx(std::sqrt(5.25 / 8.0)).epsilon(0.03));
  CHECK(bootstrap_se(v, 200, 3) == bootstrap_se(v, 200, 3));
}
