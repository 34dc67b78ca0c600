#include "ram/proposal.hpp"
#include "ram/rng.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace ram;

TEST(GaussianProposal, RejectsMalformedCovariances) {
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  EXPECT_THROW(GaussianProposal{asym}, std::invalid_argument);
  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(GaussianProposal{indefinite}, std::invalid_argument);
  EXPECT_THROW(GaussianProposal(Matrix(2, 3)), std::invalid_argument);
  EXPECT_THROW(GaussianProposal::isotropic(2, 0.0), std::invalid_argument);
}

TEST(GaussianProposal, PresetScale) {
  const auto p = GaussianProposal::scaled_identity_preset(4);
  EXPECT_DOUBLE_EQ(p.covariance()(0, 0), 2.38 * 2.38 / 4.0);
  EXPECT_DOUBLE_EQ(p.covariance()(0, 1), 0.0);
}

TEST(GaussianProposal, DrawsHaveTheRequestedMeanAndCovariance) {
  Matrix cov(2, 2);
  cov << 2.0, 0.6, 0.6, 0.5;
  const GaussianProposal p(cov);
  Rng rng(11);
  const Vector center = Eigen::Vector2d(1.0, -2.0);
  const int n = 200000;
  Vector sum = Vector::Zero(2);
  Matrix sq = Matrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const Vector d = p.draw(center, rng) - center;
    sum += d;
    sq += d * d.transpose();
  }
  const Vector mean = sum / n;
  const Matrix emp = sq / n - mean * mean.transpose();
  EXPECT_NEAR(mean[0], 0.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(mean[1], 0.0, 4.0 * std::sqrt(0.5 / n));
  EXPECT_NEAR(emp(0, 0), 2.0, 0.03);
  EXPECT_NEAR(emp(0, 1), 0.6, 0.015);
  EXPECT_NEAR(emp(1, 1), 0.5, 0.008);
}

TEST(GaussianProposal, LogDensityIsSymmetric) {
  Matrix cov(2, 2);
  cov << 1.0, 0.3, 0.3, 2.0;
  const GaussianProposal p(cov);
  const Vector a = Eigen::Vector2d(0.2, 1.0), b = Eigen::Vector2d(-1.0, 3.0);
  EXPECT_DOUBLE_EQ(p.log_density(a, b), p.log_density(b, a));
  EXPECT_DOUBLE_EQ(p.log_density(a, a), 0.0);
}

TEST(AdaptFromSample, ExactSampleCovariance) {
  const std::vector<Vector> draws = {Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 2),
                                     Eigen::Vector2d(2, 2)};
  const auto p = adapt_from_sample(draws);
  // Denominator n - 1 = 3: variance 4/3 per coordinate, no correlation.
  EXPECT_NEAR(p.covariance()(0, 0), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.covariance()(1, 1), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.covariance()(0, 1), 0.0, 1e-15);
}

TEST(AdaptFromSample, DegenerateOrTooSmallSamplesAreErrors) {
  const std::vector<Vector> same(10, Eigen::Vector2d(1, 1));
  EXPECT_THROW(adapt_from_sample(same), std::runtime_error);
  const std::vector<Vector> two = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2)};
  EXPECT_THROW(adapt_from_sample(two), std::invalid_argument);
  EXPECT_THROW(adapt_from_sample(std::vector<Vector>{}), std::invalid_argument);
}

TEST(AdaptFromSample, CollinearSampleIsRescuedByDiagonalJitter) {
  std::vector<Vector> line;
  for (int i = 0; i < 20; ++i) line.emplace_back(Eigen::Vector2d(i, 2.0 * i));
  const auto p = adapt_from_sample(line);
  const double var = 35.0;  // sample variance of 0..19
  EXPECT_NEAR(p.covariance()(0, 0), var, 1e-6);
  EXPECT_NEAR(p.covariance()(1, 1), 4.0 * var, 1e-6);
  EXPECT_GT(p.covariance().determinant(), 0.0);
}

TEST(OneTimeAdaptation, AdaptsOnceThenFreezes) {
  OneTimeAdaptation a(GaussianProposal::isotropic(2, 1.0));
  Rng rng(3);
  std::vector<Vector> draws;
  for (int i = 0; i < 50; ++i) draws.emplace_back(Eigen::Vector2d(3.0 * rng.normal(), rng.normal()));
  a.adapt(draws);
  EXPECT_TRUE(a.adapted());
  EXPECT_GT(a.proposal().covariance()(0, 0), 3.0);
  EXPECT_THROW(a.adapt(draws), std::logic_error);

  OneTimeAdaptation b(GaussianProposal::isotropic(2, 1.0));
  b.freeze();
  EXPECT_THROW(b.adapt(draws), std::logic_error);
  EXPECT_DOUBLE_EQ(b.proposal().covariance()(0, 0), 1.0);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a(5, 0), b(5, 0), c(5, 1);
  for (int i = 0; i < 10; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_NE(u, c.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
