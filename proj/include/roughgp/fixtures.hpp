// Deterministic synthetic measurement data for fitting demos and tests.
#pragma once

#include <cstdint>

#include "roughgp/gp_sampling.hpp"
#include "roughgp/spectral_estimation.hpp"

namespace roughgp::fixtures {

/// Turned profile: two harmonics of one feed period plus Gaussian noise.
struct TurnedProfileOptions {
    std::size_t points = 1000;
    double spacing = 1.0;
    double period = 50.0;
    double first_amplitude = 1.0;
    double second_amplitude = 0.4;
    double second_phase = 0.9;
    double noise_sigma = 0.1;
    std::uint64_t seed = 2023;
};

Profile turned_profile(const TurnedProfileOptions& options = {});

/// Turned surface: the turned profile along x, a slow bow along y, noise.
struct TurnedSurfaceOptions {
    std::size_t nx = 200;
    std::size_t ny = 64;
    double spacing = 1.0;
    double period = 50.0;
    double bow_amplitude = 0.15;
    double noise_sigma = 0.05;
    std::uint64_t seed = 2024;
};

SurfaceField turned_surface(const TurnedSurfaceOptions& options = {});

/// Cosine of frequency bin/(points * spacing), useful for spectral checks.
Profile cosine_profile(std::size_t points, std::size_t bin, double spacing = 1.0);

} // namespace roughgp::fixtures
