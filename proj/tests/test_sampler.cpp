#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bsgs/eval.hpp"
#include "bsgs/sampler.hpp"
#include "bsgs/tuning.hpp"
#include "test_support.hpp"

using namespace bsgs;
using bsgs::testing::toy_design;
using Catch::Approx;

namespace {

PriorHyperparams flat_prior(int groups) {
  PriorHyperparams p;
  p.lambda1 = Eigen::VectorXd::Constant(groups, 1.5);
  return p;
}

McmcConfig raw_config(std::uint64_t seed = 1) {
  McmcConfig c;
  c.center = false;
  c.seed = seed;
  c.sweeps = 200;
  c.burn_in = 100;
  c.thin = 1;
  return c;
}

// Places theta into the state with consistent b, v and indicators.
void set_theta(const GibbsSampler& s, ChainState& st, const Eigen::VectorXd& b, const Eigen::VectorXd& v) {
  st.b = b;
  st.v = v;
  st.theta = v.cwiseProduct(b);
  for (int c = 0; c < s.width(); ++c) st.gamma1[c] = v[c] == 0.0 ? 1 : 0;
  const Partition p(std::vector<int>(s.groups(), s.width() / s.groups()));
  for (int j = 0; j < s.groups(); ++j) st.gamma0[j] = b.segment(p.start(j), p.size(j)).isZero(0.0) ? 1 : 0;
  st.resid = s.y() - s.Z() * st.theta;
}

void check_consistent(const ChainState& st, const Partition& p) {
  for (Eigen::Index c = 0; c < st.theta.size(); ++c) {
    CHECK(st.theta[c] == st.v[c] * st.b[c]);
    CHECK(st.v[c] >= 0.0);
    if (st.gamma1[c]) CHECK(st.v[c] == 0.0);
  }
  for (int j = 0; j < p.groups(); ++j) {
    if (st.gamma0[j]) CHECK(st.b.segment(p.start(j), p.size(j)).isZero(0.0));
  }
}

}  // namespace

TEST_CASE("spike_prob_within edge values") {
  CHECK(spike_prob_within(1.0, 0.3, 1.0, 1.0) == 1.0);
  CHECK(spike_prob_within(1.0, 0.3, 1.0, 0.0) == 0.0);
  CHECK(spike_prob_within(1.0, 0.0, 1.0, 0.5) == Approx(0.5).epsilon(1e-14));
  // Huge nu/eta: exp(nu^2/2eta^2) alone would overflow.
  const double p = spike_prob_within(1e-4, 50.0, 1.0, 0.5);
  CHECK(std::isfinite(p));
  CHECK(p == 0.0);
  CHECK(spike_prob_within(1e-4, -50.0, 1.0, 0.5) > 0.99);
  CHECK_THROWS(spike_prob_within(0.0, 0.0, 1.0, 0.5));
}

TEST_CASE("spike_prob_within matches quadrature of the slab") {
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const double tau = 0.3 + 2.0 * rng.uniform();
    const double pi1 = 0.05 + 0.9 * rng.uniform();
    const double A = 5.0 * rng.uniform();     // b^2 z'z / sigma^2
    const double B = 4.0 * rng.normal();      // b z'r / sigma^2
    const double eta2 = 1.0 / (A + 1.0 / (tau * tau));
    const double nu = eta2 * B;
    const double ratio = bsgs::testing::within_slab_ratio(A, B, tau);
    const double oracle = pi1 / (pi1 + (1.0 - pi1) * ratio);
    CHECK(spike_prob_within(eta2, nu, tau, pi1) == Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("spike_prob_within monotonicity") {
  for (double nu : {0.1, 0.5, 1.0, 2.0}) {
    double prev = 0.0;
    for (double pi1 = 0.05; pi1 < 1.0; pi1 += 0.05) {
      const double p = spike_prob_within(0.5, nu, 1.0, pi1);
      CHECK(p > prev);
      prev = p;
    }
  }
  double prev = 1.0;
  for (double nu = 0.05; nu < 5.0; nu += 0.05) {
    const double p = spike_prob_within(0.5, nu, 1.0, 0.5);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("sigma2 conditional with an exact fit") {
  const GroupedDesign base = toy_design();
  GroupedDesign d = base;
  Eigen::VectorXd theta(4);
  theta << 0.0, 0.7, 0.0, -0.2;
  d.y = d.Z * theta;
  d.y.conservativeResize(10);
  d.Z.conservativeResize(10, 4);
  PriorHyperparams p = flat_prior(2);
  p.hierarchical_a1 = false;
  p.a0 = 2.5;
  p.a1 = 1.0;
  GibbsSampler s(d, p, raw_config());
  ChainState st = s.initial_state();
  set_theta(s, st, theta, Eigen::VectorXd::Ones(4));
  const auto [shape, scale] = s.sigma2_conditional(st);
  CHECK(shape == 7.5);
  CHECK(scale == Approx(1.0).margin(1e-20));
}

TEST_CASE("sigma2 draws have the inverse-gamma mean") {
  const GroupedDesign d = toy_design();
  PriorHyperparams p = flat_prior(2);
  p.hierarchical_a1 = false;
  GibbsSampler s(d, p, raw_config());
  ChainState st = s.initial_state();
  const auto [shape, scale] = s.sigma2_conditional(st);
  Rng rng(5);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    s.step_sigma2(st, rng);
    acc += st.sigma2;
  }
  CHECK(acc / n == Approx(scale / (shape - 1.0)).epsilon(0.01));
}

TEST_CASE("hierarchical a1 conditional") {
  const GroupedDesign d = toy_design();
  PriorHyperparams p = flat_prior(2);
  p.a0 = 2.5;
  p.e0 = 5.0;
  p.e1 = p.e0 / (p.a0 - 1.0);
  GibbsSampler s(d, p, raw_config());
  const auto [shape, rate] = s.a1_conditional(1.0);
  CHECK(shape == 7.5);
  CHECK(rate == Approx(10.0 / 3.0 + 1.0).epsilon(1e-15));
}

TEST_CASE("v conditional with b = 0 reduces to the prior") {
  const GroupedDesign d = toy_design();
  GibbsSampler s(d, flat_prior(2), raw_config());
  ChainState st = s.initial_state();
  st.tau[0] = 0.7;
  const auto [eta2, nu] = s.v_conditional(st, 1);
  CHECK(eta2 == Approx(0.49).epsilon(1e-14));
  CHECK(nu == 0.0);
}

TEST_CASE("pi1 = 1 zeroes every scale") {
  const GroupedDesign d = toy_design();
  GibbsSampler s(d, flat_prior(2), raw_config());
  ChainState st = s.initial_state();
  Rng rng(2);
  set_theta(s, st, Eigen::VectorXd::Ones(4), Eigen::VectorXd::Constant(4, 0.5));
  st.pi1.setOnes();
  s.step_v(st, rng);
  CHECK(st.v.isZero(0.0));
  CHECK(st.theta.isZero(0.0));
  CHECK((st.resid - s.y()).norm() < 1e-12);
}

TEST_CASE("empirical spike frequency of v matches the closed form") {
  // One-column design, b, sigma2, tau, pi1 frozen.
  Rng data(9);
  Eigen::MatrixXd Z(25, 1);
  Eigen::VectorXd y(25);
  for (int t = 0; t < 25; ++t) {
    Z(t, 0) = data.normal();
    y[t] = 0.3 * Z(t, 0) + data.normal();
  }
  std::vector<Eigen::MatrixXd> blocks = {Z};
  const GroupedDesign d = assemble_grouped_design(blocks, y, 0.0);
  GibbsSampler s(d, flat_prior(1), raw_config());
  ChainState st = s.initial_state();
  st.b[0] = 0.6;
  st.gamma0[0] = 0;
  st.sigma2 = 0.9;
  st.tau[0] = 0.8;
  st.pi1[0] = 0.4;
  const auto [eta2, nu] = s.v_conditional(st, 0);
  const double p = spike_prob_within(eta2, nu, st.tau[0], st.pi1[0]);
  Rng rng(10);
  const int n = 50000;
  int spikes = 0;
  for (int i = 0; i < n; ++i) {
    s.step_v(st, rng);
    spikes += st.v[0] == 0.0 ? 1 : 0;
  }
  const double freq = double(spikes) / n;
  const double se = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(freq - p) < 3.0 * se);
}

TEST_CASE("b conditional with v_j = 0 equals the prior") {
  const GroupedDesign d = toy_design();
  GibbsSampler s(d, flat_prior(2), raw_config());
  ChainState st = s.initial_state();
  st.pi0 = 0.37;
  const GroupPosterior gp = s.group_conditional(st, 0);
  CHECK(gp.spike_prob == Approx(0.37).epsilon(1e-14));
  CHECK(gp.mean.isZero(1e-15));
}

TEST_CASE("pi0 = 1 zeroes every group") {
  const GroupedDesign d = toy_design();
  GibbsSampler s(d, flat_prior(2), raw_config());
  ChainState st = s.initial_state();
  Rng rng(3);
  set_theta(s, st, Eigen::VectorXd::Ones(4), Eigen::VectorXd::Constant(4, 0.5));
  st.pi0 = 1.0;
  s.step_b(st, rng);
  CHECK(st.b.isZero(0.0));
  CHECK(st.theta.isZero(0.0));
}

TEST_CASE("empirical group spike frequency matches the closed form") {
  Rng data(30);
  Eigen::MatrixXd Z(30, 4);
  for (int t = 0; t < 30; ++t)
    for (int c = 0; c < 4; ++c) Z(t, c) = data.normal();
  Eigen::VectorXd y = 0.25 * Z.col(0) - 0.2 * Z.col(3);
  for (int t = 0; t < 30; ++t) y[t] += data.normal();
  std::vector<Eigen::MatrixXd> blocks = {Z.leftCols(2), Z.rightCols(2)};
  const GroupedDesign d = assemble_grouped_design(blocks, y, 0.0);
  GibbsSampler s(d, flat_prior(2), raw_config());
  ChainState frozen = s.initial_state();
  Eigen::VectorXd b(4), v(4);
  b << 0.4, -0.3, 0.2, -0.5;
  v << 0.6, 0.3, 0.0, 0.4;
  set_theta(s, frozen, b, v);
  frozen.sigma2 = 1.1;
  frozen.pi0 = 0.5;
  const double p = s.group_conditional(frozen, 0).spike_prob;
  Rng rng(31);
  const int n = 100000;
  int spikes = 0;
  for (int i = 0; i < n; ++i) {
    ChainState st = frozen;
    s.step_b(st, rng);
    spikes += st.gamma0[0];
  }
  const double freq = double(spikes) / n;
  const double se = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(freq - p) < 3.0 * se);
}

TEST_CASE("group spike probability matches quadrature") {
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    Eigen::Matrix2d A;
    A << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    const Eigen::Matrix2d P = 0.5 * A.transpose() * A;
    const Eigen::Vector2d s(rng.normal(), rng.normal());
    const double pi0 = 0.05 + 0.9 * rng.uniform();
    Eigen::MatrixXd prec = P + Eigen::Matrix2d::Identity();
    const GroupPosterior gp = group_posterior(prec, s, pi0);
    const double oracle = pi0 / (pi0 + (1.0 - pi0) * bsgs::testing::group_slab_ratio(P, s));
    CHECK(gp.spike_prob == Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("tau acceptance ratio special cases") {
  CHECK(tau_log_acceptance(0.8, 0.8, 3, 1.2, 0.5, 1.7) == 0.0);
  // No active scales and lambda1 -> infinity.
  const double to = 0.6, tn = 1.3;
  const double expect = 1.5 * std::log(to / tn) - to / tn + tn / to;
  CHECK(tau_log_acceptance(to, tn, 0, 0.0, 0.5, 1e300) == Approx(expect).epsilon(1e-14));
}

TEST_CASE("tau chain with frozen v targets its conditional") {
  // Target density: Gamma(1/2, scale lambda1) prior times the half-normal
  // likelihood of the retained v's, tabulated by quadrature.
  const GroupedDesign d = toy_design();
  PriorHyperparams p = flat_prior(2);
  GibbsSampler s(d, p, raw_config());
  ChainState st = s.initial_state();
  Eigen::VectorXd b = Eigen::VectorXd::Ones(4), v(4);
  v << 0.9, 0.4, 0.0, 0.0;
  set_theta(s, st, b, v);
  const double sum_v2 = 0.81 + 0.16;
  const int xi = 2;
  const double lambda1 = p.lambda1[0];
  auto log_kernel = [&](double t) {
    return (0.5 - 1.0) * std::log(t) - t / lambda1 - xi * std::log(t) - 0.5 * sum_v2 / (t * t);
  };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double upper = 60.0;
  const double Z = Quad::integrate([&](double t) { return std::exp(log_kernel(t)); }, 0.0, upper, 20, 1e-12);
  auto cdf = [&](double x) {
    if (x <= 0.0) return 0.0;
    return Quad::integrate([&](double t) { return std::exp(log_kernel(t)); }, 0.0, std::min(x, upper), 20, 1e-12) / Z;
  };
  Rng rng(77);
  std::vector<double> draws;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    s.step_tau(st, rng);
    if (i % 2 == 0) draws.push_back(st.tau[0]);
  }
  CHECK(bsgs::testing::ks_distance(draws, cdf) < 0.02);
}

TEST_CASE("Beta updates count spikes toward the first shape") {
  const GroupedDesign d = toy_design();
  PriorHyperparams p = flat_prior(2);
  p.c0 = 1.0;
  p.d0 = 1.0;
  p.c1 = 2.0;
  p.d1 = 3.0;
  GibbsSampler s(d, p, raw_config());
  ChainState st = s.initial_state();
  st.gamma0 = {0, 0};
  auto [a0, b0] = s.pi0_conditional(st);
  CHECK(a0 == p.c0);
  CHECK(b0 == 2.0 + p.d0);
  st.gamma1 = {1, 1, 1, 1};
  auto [a1, b1] = s.pi1_conditional(st, -1);
  CHECK(a1 == 4.0 + p.c1);
  CHECK(b1 == p.d1);
  auto [a1j, b1j] = s.pi1_conditional(st, 1);
  CHECK(a1j == 2.0 + p.c1);
  CHECK(b1j == p.d1);
}

TEST_CASE("pi0 draws have the Beta mean") {
  // Three groups, two spikes, c0 = d0 = 1: pi0 ~ B(3, 2), mean 0.6.
  Rng data(4);
  std::vector<Eigen::MatrixXd> blocks = {Eigen::MatrixXd::Random(12, 1), Eigen::MatrixXd::Random(12, 1),
                                         Eigen::MatrixXd::Random(12, 1)};
  Eigen::VectorXd y(12);
  for (int t = 0; t < 12; ++t) y[t] = data.normal();
  const GroupedDesign d = assemble_grouped_design(blocks, y, 0.0);
  GibbsSampler s(d, flat_prior(3), raw_config());
  ChainState st = s.initial_state();
  st.gamma0 = {1, 1, 0};
  Rng rng(8);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    s.step_pi(st, rng);
    acc += st.pi0;
  }
  CHECK(acc / n == Approx(0.6).epsilon(0.01));
}

TEST_CASE("state stays consistent across sweeps") {
  const GroupedDesign d = toy_design();
  GibbsSampler s(d, flat_prior(2), raw_config());
  ChainState st = s.initial_state();
  Rng rng(21);
  for (int i = 0; i < 500; ++i) {
    s.sweep(st, rng);
    check_consistent(st, d.partition);
    CHECK((st.resid - (s.y() - s.Z() * st.theta)).norm() < 1e-9);
  }
}

TEST_CASE("run_chain is deterministic given the seed") {
  const GroupedDesign d = toy_design();
  McmcConfig c = raw_config(42);
  c.center = true;
  c.sweeps = 1500;
  c.burn_in = 500;
  c.thin = 2;
  const ChainOutput a = run_chain(d, flat_prior(2), c);
  const ChainOutput b = run_chain(d, flat_prior(2), c);
  CHECK(a.draws() == 500);
  CHECK(a.theta_draws == b.theta_draws);
  CHECK(a.sigma2_draws == b.sigma2_draws);
  CHECK(a.loglik_draws == b.loglik_draws);
  CHECK(a.inclusion_within == b.inclusion_within);
  CHECK((a.inclusion_group.array() >= 0.0).all());
  CHECK((a.inclusion_group.array() <= 1.0).all());
  c.seed = 43;
  const ChainOutput other = run_chain(d, flat_prior(2), c);
  CHECK(other.theta_draws != a.theta_draws);
}

TEST_CASE("retained draw count for the default run length") {
  McmcConfig c;
  CHECK(c.sweeps == 60000);
  CHECK(c.burn_in == 10000);
  CHECK(c.thin == 5);
  CHECK(c.retained() == 10000);
}

TEST_CASE("no-signal design gives the closed-form sigma2 posterior") {
  GroupedDesign d = toy_design();
  d.Z.setZero();
  PriorHyperparams p = flat_prior(2);
  p.hierarchical_a1 = false;
  McmcConfig c = raw_config(5);
  c.sweeps = 60000;
  c.burn_in = 1000;
  c.thin = 1;
  const ChainOutput out = run_chain(d, p, c);
  CHECK(out.theta_draws.allFinite());
  const double shape = d.T() / 2.0 + p.a0;
  const double scale = d.y.squaredNorm() / 2.0 + p.a1;
  const double mean = scale / (shape - 1.0);
  const double sd = mean / std::sqrt(shape - 2.0);
  CHECK(std::abs(out.sigma2_draws.mean() - mean) < 4.0 * sd / std::sqrt(double(out.draws())));
}

TEST_CASE("huge c0 collapses every group to the spike") {
  const GroupedDesign d = toy_design();
  PriorHyperparams p = flat_prior(2);
  p.c0 = 1e12;
  McmcConfig c = raw_config(6);
  c.sweeps = 2000;
  c.burn_in = 200;
  const ChainOutput out = run_chain(d, p, c);
  CHECK(out.theta_draws.isZero(0.0));
  CHECK(out.inclusion_group.isZero(0.0));
}

TEST_CASE("bad run configurations are rejected") {
  const GroupedDesign d = toy_design();
  McmcConfig c = raw_config();
  c.sweeps = 100;
  c.burn_in = 100;
  CHECK_THROWS_AS(run_chain(d, flat_prior(2), c), std::invalid_argument);
  c.burn_in = 10;
  c.thin = 0;
  CHECK_THROWS_AS(run_chain(d, flat_prior(2), c), std::invalid_argument);
  PriorHyperparams p = flat_prior(2);
  p.lambda0 = 1.0;
  CHECK_THROWS_AS(run_chain(d, p, raw_config()), std::invalid_argument);
}

TEST_CASE("posterior predictive from identical draws is one Gaussian") {
  ChainOutput ch;
  ch.theta_draws = Eigen::MatrixXd(3, 2);
  ch.theta_draws << 1.0, -2.0, 1.0, -2.0, 1.0, -2.0;
  ch.sigma2_draws = Eigen::VectorXd::Constant(3, 0.7);
  ch.intercept_draws = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd z(2);
  z << 0.5, 0.25;
  const ForecastDensity f = posterior_predictive(ch, z);
  CHECK((f.means.array() == 0.0).all());
  CHECK(f.mean() == 0.0);
  CHECK(f.variance() == Approx(0.7).epsilon(1e-15));
  CHECK(f.weights.sum() == Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(posterior_predictive(ch, Eigen::VectorXd(Eigen::VectorXd::Zero(3))), std::invalid_argument);
}

TEST_CASE("mixture mean is the average of component means") {
  const GroupedDesign d = toy_design();
  McmcConfig c = raw_config(8);
  c.sweeps = 2000;
  c.burn_in = 500;
  c.center = true;
  const ChainOutput out = run_chain(d, flat_prior(2), c);
  const Eigen::VectorXd z = d.Z.row(3).transpose();
  const ForecastDensity f = posterior_predictive(out, z);
  CHECK(f.mean() == Approx(f.means.mean()).epsilon(1e-12));
  CHECK((f.variances.array() > 0.0).all());
}

TEST_CASE("mixture CRPS agrees with the sampling estimator") {
  const GroupedDesign d = toy_design();
  McmcConfig c = raw_config(9);
  c.sweeps = 3000;
  c.burn_in = 1000;
  c.thin = 4;
  c.center = true;
  const ChainOutput out = run_chain(d, flat_prior(2), c);
  const ForecastDensity f = posterior_predictive(out, Eigen::VectorXd(d.Z.row(0).transpose()));
  const double y = d.y[0] + 0.3;
  const double empirical = bsgs::testing::empirical_crps(bsgs::testing::stratified_mixture_sample(f, 10000), y);
  CHECK(crps(f, y) == Approx(empirical).epsilon(0.01));
}
