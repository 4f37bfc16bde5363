#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "roughgp/errors.hpp"
#include "roughgp/gp_sampling.hpp"

using namespace roughgp;

TEST(Grid, PositionsAndIndexing) {
    const Grid g = Grid::plane(3, 4, 0.5, 2.0, 1.0, -1.0);
    EXPECT_EQ(g.size(), 12u);
    EXPECT_EQ(g.index(2, 1), 9u);
    const auto p = g.position(g.index(2, 3));
    EXPECT_DOUBLE_EQ(p[0], 2.0);
    EXPECT_DOUBLE_EQ(p[1], 5.0);
    const Lag l = g.lag(g.index(0, 0), g.index(2, 3));
    EXPECT_DOUBLE_EQ(l.x(), 1.0);
    EXPECT_DOUBLE_EQ(l.y(), 6.0);
    EXPECT_TRUE(g.lag(5, 5).is_zero());
}

TEST(Grid, RejectsBadShapes) {
    EXPECT_THROW(Grid::line(0, 1.0), InvalidInput);
    EXPECT_THROW(Grid::line(4, 0.0), InvalidInput);
    EXPECT_THROW(Grid::plane(4, 4, 1.0, -1.0), InvalidInput);
}

TEST(BuildCovariance, WhiteNoiseIsScaledIdentity) {
    const auto R = build_covariance(Grid::line(3, 1.0), WhiteNoiseAcvf{4.0});
    EXPECT_TRUE(R.values.isApprox(4.0 * Eigen::MatrixXd::Identity(3, 3)));
    EXPECT_EQ(R.values(0, 1), 0.0);
}

TEST(BuildCovariance, OneDimensionalExponential) {
    const auto R = build_covariance(Grid::line(2, 1.0), ExponentialRotatedAcvf{1.0, 1.0, 1.0, 0.0});
    EXPECT_DOUBLE_EQ(R.values(0, 0), 1.0);
    EXPECT_NEAR(R.values(0, 1), std::exp(-1.0), 1e-16);
    EXPECT_EQ(R.values(0, 1), R.values(1, 0));
}

TEST(BuildCovariance, MatchesDirectEvaluation) {
    const Grid g = Grid::plane(5, 6, 0.7, 1.3);
    const Acvf k = ExponentialRotatedAcvf{1.2, 3.0, 0.8, 0.4};
    const auto R = build_covariance(g, k);
    for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = 0; b < g.size(); ++b) {
            const auto pa = g.position(a), pb = g.position(b);
            EXPECT_NEAR(R.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)),
                        evaluate(k, Lag(pb[0] - pa[0], pb[1] - pa[1])), 1e-14);
        }
}

TEST(BuildCovariance, LargeGridSymmetricUnitDiagonal) {
    const auto R = build_covariance(Grid::plane(40, 40, 1, 1),
                                    ExponentialRotatedAcvf{1.0, 10.0, 2.0, std::numbers::pi / 6});
    EXPECT_EQ(R.values.rows(), 1600);
    EXPECT_EQ((R.values - R.values.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_TRUE((R.values.diagonal().array() == 1.0).all());
}

TEST(BuildCovariance, RejectsMismatchAndCap) {
    const SpectralMixtureAcvf sm{{SpectralComponent{1.0, {0.1}, {0.01}}}};
    EXPECT_THROW(build_covariance(Grid::plane(3, 3, 1, 1), sm), InvalidInput);
    EXPECT_THROW(build_covariance(Grid::line(3, 1), WhiteNoiseAcvf{-1.0}), InvalidKernel);
    EXPECT_THROW(build_covariance(Grid::line(100, 1), WhiteNoiseAcvf{}, 99), CapExceeded);
}

TEST(Cholesky, IdentityNeedsNoJitter) {
    const auto f = cholesky_with_jitter({Eigen::MatrixXd::Identity(3, 3)});
    EXPECT_EQ(f.jitter, 0.0);
    EXPECT_TRUE(f.lower.isApprox(Eigen::MatrixXd::Identity(3, 3)));
}

TEST(Cholesky, RankOneGetsSmallJitter) {
    Eigen::MatrixXd R(2, 2);
    R << 1, 1, 1, 1;
    const auto f = cholesky_with_jitter({R});
    EXPECT_GT(f.jitter, 0.0);
    EXPECT_LE(f.jitter, 1e-4);
    const double residual = (f.lower * f.lower.transpose() - R).cwiseAbs().maxCoeff();
    EXPECT_LE(residual, f.jitter + 1e-12);
    EXPECT_EQ(f.lower(0, 1), 0.0);
}

TEST(Cholesky, SpectralMixtureGridJitterIsSmall) {
    const SpectralMixtureAcvf sm{{SpectralComponent{1.0, {0.1}, {1e-3}}}};
    const auto f = cholesky_with_jitter(build_covariance(Grid::line(64, 1.0), sm));
    EXPECT_LE(f.jitter, 1e-8);
}

TEST(Cholesky, IndefiniteReportsPivot) {
    Eigen::MatrixXd R(3, 3);
    R << 1, 0, 0, 0, 1, 0, 0, 0, -1;
    try {
        cholesky_with_jitter({R});
        FAIL() << "expected NotPositiveDefinite";
    } catch (const NotPositiveDefinite& e) {
        EXPECT_EQ(e.pivot(), 2u);
        EXPECT_NE(std::string(e.what()).find("not positive semidefinite"), std::string::npos);
    }
}

TEST(Sampling, WhiteNoiseVarianceBand) {
    const auto f = sample_latent(Grid::line(10000, 1.0), WhiteNoiseAcvf{1.0}, 17, 1);
    const double v = oracle::variance(f[0].heights);
    EXPECT_GE(v, 0.97);
    EXPECT_LE(v, 1.03);
}

TEST(Sampling, SuccessiveDrawsDifferButRepeat) {
    const Grid g = Grid::plane(6, 5, 1, 1);
    const Acvf k = ExponentialRotatedAcvf{1.0, 3.0, 1.0, 0.3};
    const auto a = sample_latent(g, k, 5, 2);
    const auto b = sample_latent(g, k, 5, 2);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_NE(a[0].heights, a[1].heights);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a[0].provenance.seed, 5u);
    EXPECT_EQ(a[0].kind, FieldKind::latent);
}

TEST(Sampling, WhiteNoiseDirectPathMatchesDense) {
    const Grid g = Grid::line(50, 1.0);
    const LatentSampler direct(g, WhiteNoiseAcvf{2.25});
    const auto L = cholesky_with_jitter(build_covariance(g, WhiteNoiseAcvf{2.25}));
    const Eigen::MatrixXd u = direct.draw_matrix(9, 3) / 1.5;
    const Eigen::MatrixXd dense = L.lower * u;
    EXPECT_TRUE(direct.draw_matrix(9, 3).isApprox(dense, 1e-15));
}

TEST(Sampling, OverCapIsRejectedWithMessage) {
    try {
        sample_latent(Grid::plane(2000, 2000, 1, 1), ExponentialRotatedAcvf{}, 1, 1);
        FAIL() << "expected CapExceeded";
    } catch (const CapExceeded& e) {
        EXPECT_EQ(e.cap(), kDefaultMaxPoints);
        EXPECT_NE(std::string(e.what()).find("cap"), std::string::npos);
    }
}

TEST(Noise, ZeroSigmaKeepsHeights) {
    const auto f = sample_latent(Grid::line(20, 1.0), ExponentialRotatedAcvf{}, 1, 1)[0];
    const auto z = add_gaussian_noise(f, 0.0, 3);
    EXPECT_EQ(z.heights, f.heights);
    EXPECT_EQ(z.kind, FieldKind::noisy);
}

TEST(Noise, MomentsOnZeroField) {
    const std::size_t n = 100000;
    const SurfaceField zero{Grid::line(n, 1.0), std::vector<double>(n, 0.0), FieldKind::latent, {}};
    const auto z = add_gaussian_noise(zero, 1.0, 99);
    EXPECT_LE(std::abs(oracle::mean(z.heights)), 3.0 / std::sqrt(double(n)));
    EXPECT_GE(oracle::variance(z.heights), 0.99);
    EXPECT_LE(oracle::variance(z.heights), 1.01);
    EXPECT_EQ(z.provenance.noise_seed, 99u);
}

TEST(Noise, RejectsNoisyInputAndNegativeSigma) {
    const SurfaceField f{Grid::line(4, 1.0), std::vector<double>(4, 0.0), FieldKind::latent, {}};
    EXPECT_THROW(add_gaussian_noise(f, -1.0, 1), InvalidInput);
    EXPECT_THROW(add_gaussian_noise(add_gaussian_noise(f, 1.0, 1), 1.0, 2), InvalidInput);
}

TEST(CovarianceMae, WhiteNoiseManySamples) {
    const double mae = sample_covariance_mae(Grid::line(4, 1.0), WhiteNoiseAcvf{1.0}, 100000, 8);
    EXPECT_LE(mae, 0.01);
}

TEST(CovarianceMae, MatchesDirectComputation) {
    const Grid g = Grid::plane(4, 3, 1, 1);
    const Acvf k = ExponentialRotatedAcvf{1.0, 2.0, 1.0, 0.5};
    const Eigen::MatrixXd s = LatentSampler(g, k).draw_matrix(4, 7);
    const Eigen::MatrixXd Rhat = s * s.transpose() / 7.0;
    const Eigen::MatrixXd R = build_covariance(g, k).values;
    EXPECT_NEAR(covariance_mae(g, k, s), (Rhat - R).cwiseAbs().mean(), 1e-14);
}

TEST(CovarianceMae, PredictionAgreesWithOracle) {
    const Grid g = Grid::plane(8, 8, 1, 1);
    const Acvf k = ExponentialRotatedAcvf{1.0, 4.0, 1.0, 0.5};
    const auto r = [&](std::size_t a, std::size_t b) { return evaluate(k, g.lag(a, b)); };
    const double mc = oracle::predicted_mae(r, g.size(), 50, 20000, 1);
    EXPECT_NEAR(predicted_covariance_mae(g, k, 50) / mc, 1.0, 0.05);
}

TEST(CovarianceMae, NeedsTwoSamples) {
    EXPECT_THROW(sample_covariance_mae(Grid::line(4, 1), WhiteNoiseAcvf{}, 1, 1), InvalidInput);
}
