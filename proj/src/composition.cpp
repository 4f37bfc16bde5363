#include "roughgp/composition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughgp/errors.hpp"

namespace roughgp {

namespace {

constexpr std::uint64_t kStepSeedStride = 1000;

void require_step(const HoningStep& s) {
    if (s.kernel.angle == 0.0)
        throw InvalidInput("honing step angle must be non-zero so the grooves differ");
    require_valid(Acvf{s.kernel});
}

} // namespace

SurfaceField min_compose(std::span<const SurfaceField> fields) {
    if (fields.size() < 2)
        throw InvalidInput("min_compose needs at least two fields");
    const Grid& grid = fields.front().grid;
    for (const auto& f : fields) {
        if (!(f.grid == grid))
            throw InvalidInput("min_compose needs all fields on the identical grid");
        if (f.heights.size() != grid.size())
            throw InvalidInput("field height count does not match its grid");
    }
    SurfaceField out{grid, fields.front().heights, FieldKind::latent, {}};
    for (const auto& f : fields.subspan(1))
        std::transform(out.heights.begin(), out.heights.end(), f.heights.begin(), out.heights.begin(),
                       [](double a, double b) { return std::min(a, b); });
    const bool any_noisy = std::any_of(fields.begin(), fields.end(),
                                       [](const SurfaceField& f) { return f.kind == FieldKind::noisy; });
    out.kind = any_noisy ? FieldKind::noisy : FieldKind::latent;
    for (const auto& f : fields)
        out.provenance.jitter = std::max(out.provenance.jitter, f.provenance.jitter);
    return out;
}

HoningStep HoningStep::from_master(const ExponentialRotatedAcvf& kernel, std::uint64_t master_seed,
                                   std::size_t step_index) {
    const std::uint64_t base = master_seed + kStepSeedStride * (static_cast<std::uint64_t>(step_index) + 1);
    return HoningStep{kernel, base + 1, base + 2};
}

ExponentialRotatedAcvf mirrored(const ExponentialRotatedAcvf& kernel) {
    ExponentialRotatedAcvf m = kernel;
    m.angle = -kernel.angle;
    // -(-pi) falls outside [-pi, pi); the rotation by pi and -pi is the same.
    if (m.angle >= std::numbers::pi)
        m.angle -= 2.0 * std::numbers::pi;
    return m;
}

HoningResult simulate_honed(const Grid& grid, std::span<const HoningStep> steps, std::size_t max_points) {
    if (steps.empty())
        throw InvalidInput("honing needs at least one step");
    if (grid.dim() != 2)
        throw InvalidInput("honed surfaces need a 2-D grid");
    check_cap(grid, max_points);
    for (const auto& s : steps)
        require_step(s);

    HoningResult result{SurfaceField{grid, {}, FieldKind::latent, {}}, {}, 0.0};
    std::vector<SurfaceField> one_step;
    for (const auto& s : steps) {
        const LatentSampler plus(grid, Acvf{s.kernel}, max_points);
        const LatentSampler minus(grid, Acvf{mirrored(s.kernel)}, max_points);
        auto zp = plus.draw(s.seed_plus, 1).front();
        auto zm = minus.draw(s.seed_minus, 1).front();
        result.jitter = std::max({result.jitter, plus.jitter(), minus.jitter()});
        const SurfaceField pair[] = {zp, zm};
        one_step.push_back(min_compose(pair));
        result.constituents.push_back(std::move(zp));
        result.constituents.push_back(std::move(zm));
    }
    result.surface = one_step.size() == 1 ? std::move(one_step.front()) : min_compose(one_step);
    result.surface.provenance.jitter = result.jitter;
    return result;
}

} // namespace roughgp
