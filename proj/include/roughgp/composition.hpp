// Honed surfaces as pointwise minima of ground surfaces.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "roughgp/gp_sampling.hpp"

namespace roughgp {

/// Pointwise minimum over fields sharing one grid. The result keeps the
/// kind of the inputs (latent unless any input is noisy).
SurfaceField min_compose(std::span<const SurfaceField> fields);

/// One honing step: two ground surfaces with grooves at +angle and -angle.
struct HoningStep {
    ExponentialRotatedAcvf kernel;
    std::uint64_t seed_plus = 0;
    std::uint64_t seed_minus = 0;

    /// Seeds derived from a master seed by fixed offsets.
    static HoningStep from_master(const ExponentialRotatedAcvf& kernel, std::uint64_t master_seed,
                                  std::size_t step_index);
};

/// Mirrored kernel for the -angle realization.
ExponentialRotatedAcvf mirrored(const ExponentialRotatedAcvf& kernel);

struct HoningResult {
    SurfaceField surface;
    /// Constituent latent fields, ordered (step 0 +, step 0 -, step 1 +, ...).
    std::vector<SurfaceField> constituents;
    /// Largest jitter applied by any constituent factorization.
    double jitter = 0.0;
};

/// P-step honed surface: min over steps of min(z_+angle, z_-angle).
HoningResult simulate_honed(const Grid& grid, std::span<const HoningStep> steps,
                            std::size_t max_points = kDefaultMaxPoints);

} // namespace roughgp
