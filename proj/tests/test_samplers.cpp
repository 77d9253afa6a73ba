#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "hmcmix/samplers.hpp"
#include "hmcmix/targets.hpp"

using namespace hmcmix;

namespace {

GaussianTarget rotated(std::vector<double> s, std::uint64_t seed) {
  const Matrix q = random_orthonormal(static_cast<Eigen::Index>(s.size()), seed);
  return gaussian_from_spectrum(s, &q);
}

// log N(z; mean, var I) up to the shared constant
double log_gauss(const Vector& z, const Vector& mean, double var) {
  return -(z - mean).squaredNorm() / (2.0 * var);
}

}  // namespace

TEST(Leapfrog, OneDimensionalClosedForm) {
  const double sigma = 1.7;
  const std::vector<double> s{sigma};
  const GaussianTarget t = gaussian_from_spectrum(s);
  const double eta = 0.3;
  const int K = 7;
  double q = 0.8, p = -1.1;
  for (int k = 0; k < K; ++k) {
    p -= 0.5 * eta * q / (sigma * sigma);
    q += eta * p;
    p -= 0.5 * eta * q / (sigma * sigma);
  }
  Vector q0(1), p0(1);
  q0 << 0.8;
  p0 << -1.1;
  const HmcProposal prop = hmc_propose_from(t, q0, p0, K, eta);
  EXPECT_NEAR(prop.qK[0], q, 1e-14);
  EXPECT_NEAR(prop.pK[0], p, 1e-14);
}

TEST(Leapfrog, SingleStepMatchesHelper) {
  const GaussianTarget t = rotated({1.0, 2.0, 3.0}, 4);
  Rng r(2);
  const Vector q = r.normal_vector(3), p = r.normal_vector(3);
  const PhasePoint one = leapfrog_step(t, p, q, 0.2);
  const HmcProposal prop = hmc_propose_from(t, q, p, 1, 0.2);
  EXPECT_LT((one.q - prop.qK).norm(), 1e-15);
  EXPECT_LT((one.p - prop.pK).norm(), 1e-15);
}

TEST(Leapfrog, ReversibleUnderMomentumFlip) {
  const GaussianTarget t = rotated({0.5, 1.0, 2.0, 4.0}, 8);
  Rng r(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector q = r.normal_vector(4), p = r.normal_vector(4);
    const HmcProposal fwd = hmc_propose_from(t, q, p, 12, 0.15);
    const HmcProposal back = hmc_propose_from(t, fwd.qK, -fwd.pK, 12, 0.15);
    EXPECT_LT((back.qK - q).norm(), 1e-12);
    EXPECT_LT((back.pK + p).norm(), 1e-12);
  }
}

TEST(Leapfrog, EnergyErrorShrinksQuadratically) {
  const GaussianTarget t = rotated({1.0, 1.5, 2.0}, 5);
  Rng r(7);
  const Vector q = r.normal_vector(3), p = r.normal_vector(3);
  const double h0 = hamiltonian(t, p, q);
  auto err = [&](double eta) {
    const int K = static_cast<int>(std::lround(1.0 / eta));
    const HmcProposal prop = hmc_propose_from(t, q, p, K, eta);
    return std::abs(hamiltonian(t, prop.pK, prop.qK) - h0);
  };
  const double ratio = err(0.1) / err(0.05);
  EXPECT_GT(ratio, 3.0);
  EXPECT_LT(ratio, 5.5);
}

TEST(Hmc, LogAcceptIsEnergyDifference) {
  const GaussianTarget t = rotated({1.0, 3.0}, 3);
  Rng r(9);
  const Vector q = r.normal_vector(2), p = r.normal_vector(2);
  const HmcProposal prop = hmc_propose_from(t, q, p, 5, 0.4);
  const double want = hamiltonian(t, p, q) - hamiltonian(t, prop.pK, prop.qK);
  EXPECT_NEAR(hmc_log_accept_ratio(t, prop), want, 1e-12);
}

TEST(Mala, EqualsHmcWithOneLeapfrogStep) {
  const GaussianTarget t = rotated({1.0, 2.0, 5.0}, 6);
  Rng r(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = r.normal_vector(3), xi = r.normal_vector(3);
    const double eta = 0.05 + 0.9 * r.uniform();
    const Vector z = mala_propose_from(t, x, 0.5 * eta * eta, xi);
    const HmcProposal prop = hmc_propose_from(t, x, xi, 1, eta);
    EXPECT_LT((z - prop.qK).norm(), 1e-12);
    EXPECT_NEAR(mala_log_accept_ratio(t, x, z, 0.5 * eta * eta),
                hmc_log_accept_ratio(t, prop), 1e-10);
  }
}

TEST(Mala, LogRatioMatchesDensityFormula) {
  const GaussianTarget t = rotated({1.0, 2.0}, 1);
  Rng r(17);
  const double h = 0.3;
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = r.normal_vector(2), z = r.normal_vector(2);
    const double want = -eval_potential(t, z) + eval_potential(t, x) +
                        log_gauss(x, z - h * eval_grad(t, z), 2 * h) -
                        log_gauss(z, x - h * eval_grad(t, x), 2 * h);
    EXPECT_NEAR(mala_log_accept_ratio(t, x, z, h), want, 1e-12);
  }
}

TEST(Mala, DetailedBalanceOfTransitionDensity) {
  const GaussianTarget t = rotated({0.7, 1.3, 2.1}, 2);
  Rng r(19);
  const double h = 0.25;
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = r.normal_vector(3), z = r.normal_vector(3);
    const double fwd = -eval_potential(t, x) + log_gauss(z, x - h * eval_grad(t, x), 2 * h) +
                       std::min(0.0, mala_log_accept_ratio(t, x, z, h));
    const double rev = -eval_potential(t, z) + log_gauss(x, z - h * eval_grad(t, z), 2 * h) +
                       std::min(0.0, mala_log_accept_ratio(t, z, x, h));
    EXPECT_NEAR(fwd, rev, 1e-10);
  }
}

TEST(Mrw, LogRatioIsPotentialDifference) {
  const GaussianTarget t = rotated({1.0, 2.0}, 1);
  Rng r(23);
  const Vector x = r.normal_vector(2), z = r.normal_vector(2);
  EXPECT_NEAR(mrw_log_accept_ratio(t, x, z), eval_potential(t, x) - eval_potential(t, z),
              1e-14);
}

TEST(Chain, GradientAccountingPerProposal) {
  const GaussianTarget t = rotated({1.0, 2.0}, 1);
  const Vector x0 = Vector::Zero(2);
  ChainConfig cfg;
  cfg.sampler = SamplerKind::kHmc;
  cfg.step = 0.2;
  cfg.leapfrog_steps = 5;
  cfg.seed = 3;
  const ChainTrace cached = run_chain(t, cfg, x0, 100);
  EXPECT_EQ(cached.counters.grad_evals, 100u * 6u);
  EXPECT_EQ(cached.eval_count_paper(), 500u);
  cfg.accounting = GradientAccounting::kUncached;
  const ChainTrace uncached = run_chain(t, cfg, x0, 100);
  EXPECT_EQ(uncached.counters.grad_evals, 100u * 10u);
  EXPECT_EQ(uncached.eval_count_paper(), 500u);
}

TEST(Chain, LazyIterationsCostNothing) {
  const GaussianTarget t = gaussian_from_spectrum(std::vector<double>{1.0, 2.0});
  ChainConfig cfg;
  cfg.sampler = SamplerKind::kMala;
  cfg.step = 0.1;
  cfg.laziness = 0.5;
  cfg.seed = 4;
  const ChainTrace tr = run_chain(t, cfg, Vector::Zero(2), 20000);
  const double frac = 1.0 - static_cast<double>(tr.non_lazy_iterations()) / 20000.0;
  EXPECT_NEAR(frac, 0.5, 0.02);
  EXPECT_EQ(tr.eval_count_paper(), tr.non_lazy_iterations());
  for (std::size_t i = 0; i < tr.iterations(); ++i) {
    if (tr.lazy_hold[i]) {
      EXPECT_FALSE(tr.accepted[i]);
      EXPECT_EQ(tr.states[i + 1], tr.states[i]);
    }
  }
}

TEST(Chain, DeterministicForSeed) {
  const GaussianTarget t = rotated({1.0, 2.0, 3.0}, 1);
  for (SamplerKind k : {SamplerKind::kMrw, SamplerKind::kMala, SamplerKind::kHmc}) {
    ChainConfig cfg;
    cfg.sampler = k;
    cfg.step = 0.1;
    cfg.leapfrog_steps = 3;
    cfg.laziness = 0.2;
    cfg.seed = 99;
    const ChainTrace a = run_chain(t, cfg, Vector::Ones(3), 200);
    const ChainTrace b = run_chain(t, cfg, Vector::Ones(3), 200);
    ASSERT_EQ(a.states.size(), 201u);
    for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_EQ(a.states[i], b.states[i]);
    EXPECT_EQ(a.accepted, b.accepted);
  }
}

TEST(Chain, SamplersPreserveGaussianVariance) {
  const std::vector<double> s{1.0, 2.0};
  const GaussianTarget t = gaussian_from_spectrum(s);
  struct Case {
    SamplerKind kind;
    double step;
    int K;
  };
  for (const Case c : {Case{SamplerKind::kMrw, 1.0, 1}, Case{SamplerKind::kMala, 0.5, 1},
                       Case{SamplerKind::kHmc, 0.5, 4}}) {
    ChainConfig cfg;
    cfg.sampler = c.kind;
    cfg.step = c.step;
    cfg.leapfrog_steps = c.K;
    cfg.seed = 21;
    Chain chain(t, cfg, Vector::Zero(2));
    double s0 = 0, s1 = 0;
    const int burn = 2000, n = 100000;
    for (int i = 0; i < burn + n; ++i) {
      chain.step();
      if (i >= burn) {
        s0 += chain.state()[0] * chain.state()[0];
        s1 += chain.state()[1] * chain.state()[1];
      }
    }
    EXPECT_NEAR(s0 / n, 1.0, 0.1) << sampler_name(c.kind);
    EXPECT_NEAR(s1 / n, 4.0, 0.4) << sampler_name(c.kind);
  }
}

TEST(Chain, DivergentProposalsAreRejectedAndCounted) {
  const std::vector<double> s{1.0};
  const GaussianTarget g = gaussian_from_spectrum(s);
  TargetModel::Constants k;
  k.smoothness = 1.0;
  k.strong_convexity = 1.0;
  TargetModel t(
      1, [&](const Vector& x) { return std::abs(x[0]) > 3 ? INFINITY : eval_potential(g, x); },
      [&](const Vector& x, Vector& out) {
        out = std::abs(x[0]) > 3 ? Vector::Constant(1, NAN) : eval_grad(g, x);
      },
      k, Vector::Zero(1));
  ChainConfig cfg;
  cfg.sampler = SamplerKind::kHmc;
  cfg.step = 0.8;
  cfg.leapfrog_steps = 4;
  cfg.seed = 5;
  const ChainTrace tr = run_chain(t, cfg, Vector::Zero(1), 2000);
  EXPECT_GT(tr.counters.divergences, 0u);
  for (const Vector& x : tr.states) EXPECT_LE(std::abs(x[0]), 3.0);
}

TEST(Chain, AbortsWhenMostProposalsDiverge) {
  TargetModel::Constants k;
  k.smoothness = 1.0;
  TargetModel t(
      1, [](const Vector&) { return 0.0; },
      [](const Vector&, Vector& out) { out = Vector::Constant(1, NAN); }, k, Vector::Zero(1));
  ChainConfig cfg;
  cfg.sampler = SamplerKind::kHmc;
  cfg.seed = 1;
  try {
    run_chain(t, cfg, Vector::Zero(1), 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumericalDivergence);
  }
}

TEST(Chain, ConfigValidation) {
  ChainConfig cfg;
  cfg.step = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.step = 0.1;
  cfg.laziness = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.laziness = 0.0;
  cfg.leapfrog_steps = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Init, FeasibleStartHasVarianceOneOverL) {
  const GaussianTarget t = gaussian_from_spectrum(std::vector<double>{0.5, 2.0});
  Rng r(8);
  double s = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) s += sample_init(InitKind::kGaussianFeasible, t, r).squaredNorm();
  EXPECT_NEAR(s / n / 2.0, 1.0 / t.smoothness(), 0.01);
}
