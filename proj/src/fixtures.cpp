#include "roughgp/fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace roughgp::fixtures {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Two harmonics give the turned shape of wide dales and narrow hills.
double turned_shape(double x, double period, double a1, double a2, double phase2) {
    const double u = kTwoPi * x / period;
    return a1 * std::cos(u) + a2 * std::cos(2.0 * u + phase2);
}

} // namespace

Profile turned_profile(const TurnedProfileOptions& o) {
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> noise(0.0, o.noise_sigma);
    std::vector<double> h(o.points);
    for (std::size_t n = 0; n < o.points; ++n) {
        const double x = static_cast<double>(n) * o.spacing;
        h[n] = turned_shape(x, o.period, o.first_amplitude, o.second_amplitude, o.second_phase) + noise(rng);
    }
    return Profile(std::move(h), o.spacing);
}

SurfaceField turned_surface(const TurnedSurfaceOptions& o) {
    const Grid grid = Grid::plane(o.nx, o.ny, o.spacing, o.spacing);
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> noise(0.0, o.noise_sigma);
    SurfaceField f{grid, std::vector<double>(grid.size()), FieldKind::noisy, {}};
    const double length_y = static_cast<double>(o.ny) * o.spacing;
    for (std::size_t i = 0; i < o.nx; ++i)
        for (std::size_t j = 0; j < o.ny; ++j) {
            const double x = static_cast<double>(i) * o.spacing;
            const double y = static_cast<double>(j) * o.spacing;
            const double bow = o.bow_amplitude * std::cos(std::numbers::pi * y / length_y);
            f.heights[grid.index(i, j)] = turned_shape(x, o.period, 1.0, 0.4, 0.9) + bow + noise(rng);
        }
    f.provenance.seed = o.seed;
    f.provenance.noise_sigma = o.noise_sigma;
    return f;
}

Profile cosine_profile(std::size_t points, std::size_t bin, double spacing) {
    std::vector<double> h(points);
    for (std::size_t n = 0; n < points; ++n)
        h[n] = std::cos(kTwoPi * static_cast<double>(bin) * static_cast<double>(n) / static_cast<double>(points));
    return Profile(std::move(h), spacing);
}

} // namespace roughgp::fixtures
