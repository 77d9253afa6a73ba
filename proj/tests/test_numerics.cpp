#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "hmcmix/normal.hpp"
#include "hmcmix/rng.hpp"
#include "hmcmix/targets.hpp"

using namespace hmcmix;

namespace {

double bisect_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Normal, CdfMatchesErfc) {
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    EXPECT_NEAR(normal_cdf(x), 0.5 * std::erfc(-x / std::sqrt(2.0)), 1e-15);
  }
}

TEST(Normal, QuantileMatchesBisection) {
  for (double p : {1e-12, 1e-6, 0.01, 0.1, 0.25, 0.5, 0.6827, 0.75, 0.9, 0.99, 1 - 1.0 / 1024}) {
    const double want = bisect_quantile(p);
    EXPECT_NEAR(normal_quantile(p), want, 1e-9 * std::max(1.0, std::abs(want))) << p;
  }
  EXPECT_NEAR(normal_quantile(0.75), 0.6744897501960817, 1e-12);
}

TEST(Normal, QuantileRejectsOutOfRange) {
  EXPECT_THROW(normal_quantile(0.0), Error);
  EXPECT_THROW(normal_quantile(1.0), Error);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  Rng c(43);
  EXPECT_NE(Rng(42).uniform(), c.uniform());
}

TEST(Rng, DerivedSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(7, i));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  EXPECT_EQ(derive_seed(7, 3), 7ULL ^ mix64(3));
}

TEST(Rng, NormalMoments) {
  Rng r(1);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Targets, DiagonalGaussianConstants) {
  const std::vector<double> s{1.0, 2.0};
  const GaussianTarget t = gaussian_from_spectrum(s);
  EXPECT_EQ(t.dim(), 2);
  EXPECT_DOUBLE_EQ(t.smoothness(), 1.0);
  EXPECT_DOUBLE_EQ(t.strong_convexity(), 0.25);
  EXPECT_DOUBLE_EQ(t.condition_number(), 4.0);
  Vector x(2);
  x << 1.0, 2.0;
  EXPECT_NEAR(eval_potential(t, x), 0.5 * (1.0 + 1.0), 1e-15);
  const Vector g = eval_grad(t, x);
  EXPECT_NEAR(g[0], 1.0, 1e-15);
  EXPECT_NEAR(g[1], 0.5, 1e-15);
  const Vector dir = t.max_variance_direction();
  EXPECT_NEAR(std::abs(dir[1]), 1.0, 1e-15);
}

TEST(Targets, RotatedGaussianMatchesExplicitPrecision) {
  const std::vector<double> s{1.0, 1.5, 3.0};
  const Matrix q = random_orthonormal(3, 9);
  EXPECT_LT((q.transpose() * q - Matrix::Identity(3, 3)).norm(), 1e-12);
  const GaussianTarget t = gaussian_from_spectrum(s, &q);
  Matrix sigma = Matrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i) sigma += s[i] * s[i] * q.col(i) * q.col(i).transpose();
  EXPECT_LT((t.covariance() - sigma).norm(), 1e-12);
  const Matrix prec = sigma.inverse();
  Rng r(3);
  for (int k = 0; k < 10; ++k) {
    const Vector x = r.normal_vector(3);
    EXPECT_NEAR(eval_potential(t, x), 0.5 * x.dot(prec * x), 1e-10);
    EXPECT_LT((eval_grad(t, x) - prec * x).norm(), 1e-10);
  }
  EXPECT_NEAR(std::abs(t.max_variance_direction().dot(q.col(2))), 1.0, 1e-12);
}

TEST(Targets, GradientMatchesFiniteDifferences) {
  const std::vector<double> s{0.5, 1.0, 2.0, 4.0};
  const Matrix q = random_orthonormal(4, 1);
  const GaussianTarget t = gaussian_from_spectrum(s, &q);
  Rng r(5);
  std::vector<Vector> pts;
  for (int i = 0; i < 5; ++i) pts.push_back(r.normal_vector(4));
  EXPECT_LT(check_gradient(t, pts, 1e-5), 1e-6);
}

TEST(Targets, RejectsBadSpectrumAndBasis) {
  const std::vector<double> bad{1.0, -1.0};
  EXPECT_THROW(gaussian_from_spectrum(bad), Error);
  const std::vector<double> ok{1.0, 2.0};
  Matrix skew(2, 2);
  skew << 1.0, 0.5, 0.0, 1.0;
  try {
    gaussian_from_spectrum(ok, &skew);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidBasis);
  }
  Vector x(3);
  x.setZero();
  const GaussianTarget t = gaussian_from_spectrum(ok);
  EXPECT_THROW(eval_potential(t, x), Error);
}

TEST(Targets, LinearSpacingEndpoints) {
  const auto v = linear_spacing(1.0, 2.0, 5);
  ASSERT_EQ(v.size(), 5u);
  EXPECT_DOUBLE_EQ(v.front(), 1.0);
  EXPECT_DOUBLE_EQ(v.back(), 2.0);
  EXPECT_DOUBLE_EQ(v[2], 1.5);
}
