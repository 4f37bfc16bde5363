#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "roughgp/composition.hpp"
#include "roughgp/errors.hpp"

using namespace roughgp;
using std::numbers::pi;

namespace {

SurfaceField constant(const Grid& g, double v) { return {g, std::vector<double>(g.size(), v), FieldKind::latent, {}}; }

/// Mean normalized product at lag `l` along the direction `angle`, nearest node.
double directional_acf(const SurfaceField& f, double angle, double l) {
    const auto di = static_cast<std::ptrdiff_t>(std::lround(l * std::cos(angle)));
    const auto dj = static_cast<std::ptrdiff_t>(std::lround(l * std::sin(angle)));
    const double m = oracle::mean(f.heights), v = oracle::variance(f.heights);
    const auto nx = static_cast<std::ptrdiff_t>(f.grid.nx()), ny = static_cast<std::ptrdiff_t>(f.grid.ny());
    double s = 0.0;
    std::size_t n = 0;
    for (std::ptrdiff_t i = 0; i < nx; ++i)
        for (std::ptrdiff_t j = 0; j < ny; ++j) {
            const auto i2 = i + di, j2 = j + dj;
            if (i2 < 0 || i2 >= nx || j2 < 0 || j2 >= ny)
                continue;
            s += (f.at(i, j) - m) * (f.at(i2, j2) - m);
            ++n;
        }
    return s / static_cast<double>(n) / v;
}

} // namespace

TEST(MinCompose, ConstantFields) {
    const Grid g = Grid::plane(3, 3, 1, 1);
    const std::vector<SurfaceField> in{constant(g, 1.0), constant(g, -1.0)};
    const auto out = min_compose(in);
    EXPECT_TRUE(std::all_of(out.heights.begin(), out.heights.end(), [](double h) { return h == -1.0; }));
}

TEST(MinCompose, Idempotent) {
    const auto a = sample_latent(Grid::plane(5, 5, 1, 1), ExponentialRotatedAcvf{}, 3, 1)[0];
    const std::vector<SurfaceField> in{a, a};
    EXPECT_EQ(min_compose(in).heights, a.heights);
}

TEST(MinCompose, OrderInvariant) {
    const auto fs = sample_latent(Grid::plane(6, 4, 1, 1), ExponentialRotatedAcvf{1, 2, 1, 0.3}, 8, 3);
    std::vector<SurfaceField> perm{fs[2], fs[0], fs[1]};
    EXPECT_EQ(min_compose(fs).heights, min_compose(perm).heights);
}

TEST(MinCompose, KindAndErrors) {
    const Grid g = Grid::line(8, 1.0);
    auto noisy = constant(g, 0.0);
    noisy.kind = FieldKind::noisy;
    const std::vector<SurfaceField> mixed{constant(g, 1.0), noisy};
    EXPECT_EQ(min_compose(mixed).kind, FieldKind::noisy);
    const std::vector<SurfaceField> one{constant(g, 1.0)};
    EXPECT_THROW(min_compose(one), InvalidInput);
    const std::vector<SurfaceField> mismatch{constant(g, 1.0), constant(Grid::line(8, 2.0), 1.0)};
    EXPECT_THROW(min_compose(mismatch), InvalidInput);
}

TEST(MinCompose, WhiteNoiseMinimumStatistics) {
    const Grid g = Grid::line(100000, 1.0);
    const LatentSampler s(g, WhiteNoiseAcvf{1.0});
    const auto a = s.draw(1, 1)[0];
    const auto b = s.draw(2, 1)[0];
    const std::vector<SurfaceField> in{a, b};
    const auto h = min_compose(in).heights;
    const double tol = 3.0 * std::sqrt((1.0 - 1.0 / pi) / 1e5);
    EXPECT_NEAR(oracle::mean(h), -1.0 / std::sqrt(pi), tol);
    EXPECT_LT(oracle::skewness(h), 0.0);
}

TEST(Honing, SeedsFromMaster) {
    const ExponentialRotatedAcvf k{1.0, 10.0, 1.0, pi / 6};
    const auto s0 = HoningStep::from_master(k, 5, 0);
    const auto s1 = HoningStep::from_master(k, 5, 1);
    EXPECT_NE(s0.seed_plus, s0.seed_minus);
    EXPECT_NE(s0.seed_plus, s1.seed_plus);
    EXPECT_EQ(s0.seed_plus, HoningStep::from_master(k, 5, 0).seed_plus);
}

TEST(Honing, MirroredKernel) {
    const ExponentialRotatedAcvf k{1.0, 10.0, 1.0, pi / 6};
    EXPECT_DOUBLE_EQ(mirrored(k).angle, -pi / 6);
    EXPECT_DOUBLE_EQ(mirrored(ExponentialRotatedAcvf{1, 1, 1, -pi}).angle, -pi);
}

TEST(Honing, TwoStepMinimumBound) {
    const Grid g = Grid::plane(24, 24, 1, 1);
    const std::vector<HoningStep> steps{
        HoningStep::from_master({1.0, 8.0, 2.0, pi / 4}, 3, 0),
        HoningStep::from_master({0.5, 4.0, 1.0, pi / 3}, 3, 1),
    };
    const auto r = simulate_honed(g, steps);
    ASSERT_EQ(r.constituents.size(), 4u);
    for (std::size_t n = 0; n < g.size(); ++n) {
        double lo = INFINITY;
        for (const auto& c : r.constituents) {
            EXPECT_LE(r.surface.heights[n], c.heights[n]);
            lo = std::min(lo, c.heights[n]);
        }
        EXPECT_EQ(r.surface.heights[n], lo);
    }
    EXPECT_EQ(simulate_honed(g, steps).surface, r.surface);
}

TEST(Honing, RejectsZeroAngleAndOneDimensionalGrid) {
    const std::vector<HoningStep> zero{HoningStep::from_master({1.0, 8.0, 2.0, 0.0}, 3, 0)};
    EXPECT_THROW(simulate_honed(Grid::plane(8, 8, 1, 1), zero), InvalidInput);
    const std::vector<HoningStep> ok{HoningStep::from_master({1.0, 8.0, 2.0, 0.5}, 3, 0)};
    EXPECT_THROW(simulate_honed(Grid::line(8, 1), ok), InvalidInput);
    EXPECT_THROW(simulate_honed(Grid::plane(8, 8, 1, 1), std::vector<HoningStep>{}), InvalidInput);
}

TEST(Honing, CrossStructure) {
    const Grid g = Grid::plane(40, 40, 1, 1);
    const ExponentialRotatedAcvf k{1.0, 20.0, 2.0, pi / 6};
    double plus = 0, minus = 0, axis = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::vector<HoningStep> steps{HoningStep::from_master(k, seed, 0)};
        const auto s = simulate_honed(g, steps).surface;
        plus += directional_acf(s, pi / 6, 5.0);
        minus += directional_acf(s, -pi / 6, 5.0);
        axis += directional_acf(s, 0.0, 5.0);
    }
    EXPECT_GT(plus, axis);
    EXPECT_GT(minus, axis);
}
