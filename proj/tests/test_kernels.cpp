#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "roughgp/errors.hpp"
#include "roughgp/kernels.hpp"

using namespace roughgp;
using std::numbers::pi;

namespace {

SpectralMixtureAcvf sm1(double w, double mu, double var) { return {{SpectralComponent{w, {mu}, {var}}}}; }

} // namespace

TEST(Kernels, ExponentialAtOrigin) {
    const ExponentialRotatedAcvf k{1.0, 1.0, 1.0, 0.0};
    EXPECT_DOUBLE_EQ(evaluate(k, Lag(0.0, 0.0)), 1.0);
}

TEST(Kernels, ExponentialUnitLag) {
    const ExponentialRotatedAcvf k{1.0, 1.0, 1.0, 0.0};
    EXPECT_NEAR(evaluate(k, Lag(1.0, 0.0)), 0.367879441171442, 1e-15);
}

TEST(Kernels, ExponentialAnisotropicRotated) {
    const ExponentialRotatedAcvf k{2.0, 10.0, 2.0, pi / 6};
    const double c = std::cos(pi / 6), s = std::sin(pi / 6);
    // Along the groove the decay follows lambda_a, across it lambda_b.
    EXPECT_NEAR(evaluate(k, Lag(5 * c, 5 * s)), 2.0 * std::exp(-0.5), 1e-14);
    EXPECT_NEAR(evaluate(k, Lag(-1 * s, 1 * c)), 2.0 * std::exp(-0.5), 1e-14);
}

TEST(Kernels, ExponentialSymmetricAndPositive) {
    const ExponentialRotatedAcvf k{1.5, 4.0, 0.5, -1.0};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-20, 20);
    for (int i = 0; i < 200; ++i) {
        const Lag t(u(rng), u(rng));
        EXPECT_GT(evaluate(k, t), 0.0);
        EXPECT_EQ(evaluate(k, t), evaluate(k, -t));
    }
}

TEST(Kernels, ExponentialOneDimensional) {
    const ExponentialRotatedAcvf k{1.0, 3.0, 1.0, 0.7};
    EXPECT_NEAR(evaluate(k, Lag(-6.0)), std::exp(-2.0), 1e-15);
}

TEST(Kernels, SpectralMixtureCosineLimit) {
    EXPECT_NEAR(evaluate(sm1(2.0, 0.25, kMinSpectralVariance), Lag(2.0)), -2.0, 1e-9);
}

TEST(Kernels, SpectralMixtureMatchesClosedForm) {
    const SpectralMixtureAcvf k{{SpectralComponent{1.0, {0.1}, {0.01}}, SpectralComponent{0.5, {0.3}, {0.002}}}};
    for (double tau : {-7.5, -1.0, 0.0, 0.25, 3.0, 12.0}) {
        const double want = oracle::sm_acvf({{1.0, 0.1, 0.01}, {0.5, 0.3, 0.002}}, tau);
        EXPECT_NEAR(evaluate(k, Lag(tau)), want, 1e-15);
    }
    EXPECT_DOUBLE_EQ(evaluate(k, Lag(0.0)), k.total_weight());
}

TEST(Kernels, SpectralMixtureBoundedByOrigin) {
    const SpectralMixtureAcvf k{{SpectralComponent{1.0, {0.2}, {1e-4}}, SpectralComponent{0.3, {0.0}, {0.05}}}};
    for (double tau = -30; tau <= 30; tau += 0.37)
        EXPECT_LE(std::abs(evaluate(k, Lag(tau))), evaluate(k, Lag(0.0)) + 1e-15);
}

TEST(Kernels, SpectralMixtureTwoDimensional) {
    const SpectralMixtureAcvf k{{SpectralComponent{1.0, {0.1, 0.2}, {0.01, 0.02}}}};
    const double tx = 1.5, ty = -2.0;
    const double want = std::cos(2 * pi * (tx * 0.1 + ty * 0.2)) *
                        std::exp(-2 * pi * pi * (tx * tx * 0.01 + ty * ty * 0.02));
    EXPECT_NEAR(evaluate(k, Lag(tx, ty)), want, 1e-15);
    EXPECT_THROW(evaluate(Acvf{k}, Lag(1.0)), InvalidInput);
}

TEST(Kernels, AdditiveWhiteNoiseAtOrigin) {
    const AdditiveAcvf k{WhiteNoiseAcvf{1.0}, WhiteNoiseAcvf{1.0}};
    EXPECT_DOUBLE_EQ(evaluate(k, Lag(0.0, 0.0)), 2.0);
}

TEST(Kernels, AdditiveIsSumOfAxes) {
    const AdditiveAcvf k{ExponentialRotatedAcvf{1.0, 2.0, 2.0, 0.0}, sm1(0.5, 0.1, 0.001)};
    const double tx = 3.0, ty = 4.0;
    EXPECT_DOUBLE_EQ(evaluate(k, Lag(tx, ty)), std::exp(-1.5) + oracle::sm_acvf({{0.5, 0.1, 0.001}}, ty));
}

TEST(Kernels, WhiteNoiseIsKroneckerDelta) {
    const WhiteNoiseAcvf k{3.0};
    EXPECT_EQ(evaluate(k, Lag(0.0)), 3.0);
    EXPECT_EQ(evaluate(k, Lag(1e-300)), 0.0);
    EXPECT_EQ(evaluate(k, Lag(0.0, 1.0)), 0.0);
}

TEST(Kernels, LagRejectsNonFinite) {
    EXPECT_THROW(Lag(std::nan("")), InvalidInput);
    EXPECT_THROW(Lag(1.0, INFINITY), InvalidInput);
}

TEST(RotateLag, Identity) {
    const Lag t = rotate_lag(Lag(1.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(t.x(), 1.0);
    EXPECT_DOUBLE_EQ(t.y(), 0.0);
}

TEST(RotateLag, QuarterTurnIsClockwise) {
    const Lag t = rotate_lag(Lag(1.0, 0.0), pi / 2);
    EXPECT_NEAR(t.x(), 0.0, 1e-16);
    EXPECT_NEAR(t.y(), -1.0, 1e-16);
}

TEST(RotateLag, GrooveDirectionMapsToFirstAxis) {
    const Lag t = rotate_lag(Lag(std::cos(pi / 6), std::sin(pi / 6)), pi / 6);
    EXPECT_NEAR(t.x(), 1.0, 1e-15);
    EXPECT_NEAR(t.y(), 0.0, 1e-15);
}

TEST(SpectralDensity, ZeroMeanIsNormalizedGaussian) {
    const auto k = sm1(1.0, 0.0, 0.04);
    EXPECT_NEAR(spectral_density(k, 0.0), 1.0 / std::sqrt(2 * pi * 0.04), 1e-14);
    const double mass = oracle::inverse_fourier([&](double f) { return spectral_density(k, f); }, 0.0, 3.0, 20000);
    EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(SpectralDensity, TwoEqualPeaks) {
    const auto k = sm1(1.0, 0.2, 1e-4);
    EXPECT_DOUBLE_EQ(spectral_density(k, 0.2), spectral_density(k, -0.2));
    EXPECT_GT(spectral_density(k, 0.2), spectral_density(k, 0.19));
    EXPECT_GT(spectral_density(k, 0.2), spectral_density(k, 0.21));
    EXPECT_NEAR(spectral_density(k, 0.0), 0.0, 1e-50);
}

TEST(SpectralDensity, InverseTransformMatchesAcvf) {
    const SpectralMixtureAcvf k{{SpectralComponent{1.0, {0.15}, {0.02}}, SpectralComponent{0.4, {0.4}, {0.05}}}};
    const auto S = [&](double f) { return spectral_density(k, f); };
    for (double tau = -10; tau <= 10; tau += 0.5)
        EXPECT_NEAR(oracle::inverse_fourier(S, tau, 2.0, 8000), evaluate(k, Lag(tau)), 1e-9);
}

TEST(Validation, NegativeLengthscale) {
    const Validation v = is_valid(Acvf{ExponentialRotatedAcvf{1.0, -1.0, 1.0, 0.0}});
    ASSERT_FALSE(v.ok());
    EXPECT_NE(v.message().find("lengthscale must be positive"), std::string::npos);
}

TEST(Validation, PositiveMixtureIsValid) {
    EXPECT_TRUE(is_valid(Acvf{SpectralMixtureAcvf{{SpectralComponent{1.0, {0.1}, {0.01}},
                                                   SpectralComponent{0.2, {0.0}, {1e-6}}}}}));
}

TEST(Validation, ZeroWhiteNoiseVarianceIsInvalid) {
    EXPECT_FALSE(is_valid(Acvf{WhiteNoiseAcvf{0.0}}));
}

TEST(Validation, DomainChecks) {
    EXPECT_FALSE(is_valid(Acvf{ExponentialRotatedAcvf{1.0, 1.0, 1.0, pi}}));
    EXPECT_TRUE(is_valid(Acvf{ExponentialRotatedAcvf{1.0, 1.0, 1.0, -pi}}));
    EXPECT_FALSE(is_valid(Acvf{sm1(1.0, 0.1, 1e-13)}));
    EXPECT_FALSE(is_valid(Acvf{sm1(1.0, -0.1, 1e-3)}));
    EXPECT_FALSE(is_valid(Acvf{sm1(0.0, 0.1, 1e-3)}));
    EXPECT_FALSE(is_valid(Acvf{SpectralMixtureAcvf{}}));
    const SpectralMixtureAcvf two_d{{SpectralComponent{1.0, {0.1, 0.1}, {0.01, 0.01}}}};
    EXPECT_FALSE(is_valid(Acvf{AdditiveAcvf{two_d, WhiteNoiseAcvf{1.0}}}));
    EXPECT_THROW(require_valid(Acvf{WhiteNoiseAcvf{-1.0}}), InvalidKernel);
}

TEST(Validation, AcceptedDimensions) {
    EXPECT_TRUE(accepts_dimension(Acvf{WhiteNoiseAcvf{}}, 1));
    EXPECT_TRUE(accepts_dimension(Acvf{ExponentialRotatedAcvf{}}, 2));
    EXPECT_FALSE(accepts_dimension(Acvf{sm1(1, 0.1, 0.1)}, 2));
    EXPECT_FALSE(accepts_dimension(Acvf{AdditiveAcvf{WhiteNoiseAcvf{}, WhiteNoiseAcvf{}}}, 1));
}

TEST(Kernels, VarianceAtOrigin) {
    EXPECT_DOUBLE_EQ(variance_at_origin(Acvf{AdditiveAcvf{WhiteNoiseAcvf{2.0}, sm1(0.5, 0.1, 0.1)}}, 2), 2.5);
    EXPECT_DOUBLE_EQ(variance_at_origin(Acvf{ExponentialRotatedAcvf{3.0, 1, 1, 0}}, 1), 3.0);
}

TEST(Kernels, TypeNames) {
    EXPECT_EQ(type_name(Acvf{WhiteNoiseAcvf{}}), "white_noise");
    EXPECT_EQ(type_name(Acvf{ExponentialRotatedAcvf{}}), "exponential_rotated");
    EXPECT_EQ(type_name(Acvf{sm1(1, 0, 1)}), "spectral_mixture");
    EXPECT_EQ(type_name(Acvf{AdditiveAcvf{}}), "additive");
}
