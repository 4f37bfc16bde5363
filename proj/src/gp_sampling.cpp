#include "roughgp/gp_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "roughgp/errors.hpp"

namespace roughgp {

namespace {

/// Kernel values for every index offset of a grid; R depends on the offset only.
class OffsetTable {
public:
    OffsetTable(const Grid& grid, const Acvf& acvf)
        : nx_(static_cast<std::ptrdiff_t>(grid.nx())), ny_(static_cast<std::ptrdiff_t>(grid.ny())),
          values_(static_cast<std::size_t>((2 * nx_ - 1) * (2 * ny_ - 1))) {
        for (std::ptrdiff_t di = -(nx_ - 1); di < nx_; ++di)
            for (std::ptrdiff_t dj = -(ny_ - 1); dj < ny_; ++dj)
                values_[slot(di, dj)] = evaluate(acvf, grid.lag_of_offset(di, dj));
    }

    double operator()(std::ptrdiff_t di, std::ptrdiff_t dj) const { return values_[slot(di, dj)]; }

private:
    std::size_t slot(std::ptrdiff_t di, std::ptrdiff_t dj) const {
        return static_cast<std::size_t>((di + nx_ - 1) * (2 * ny_ - 1) + (dj + ny_ - 1));
    }

    std::ptrdiff_t nx_;
    std::ptrdiff_t ny_;
    std::vector<double> values_;
};

void check_grid_kernel(const Grid& grid, const Acvf& acvf) {
    require_valid(acvf);
    if (!accepts_dimension(acvf, grid.dim()))
        throw InvalidInput(type_name(acvf) + " kernel does not match a " + std::to_string(grid.dim()) +
                           "-D grid");
}

} // namespace

Grid::Grid(int dim, std::size_t nx, std::size_t ny, double dx, double dy, double ox, double oy)
    : dim_(dim), nx_(nx), ny_(ny), dx_(dx), dy_(dy), ox_(ox), oy_(oy) {
    if (nx_ < 1 || ny_ < 1)
        throw InvalidInput("grid needs at least one point per axis");
    if (!(std::isfinite(dx_) && dx_ > 0.0) || !(std::isfinite(dy_) && dy_ > 0.0))
        throw InvalidInput("grid spacing must be positive");
    if (!std::isfinite(ox_) || !std::isfinite(oy_))
        throw InvalidInput("grid origin must be finite");
}

Grid Grid::line(std::size_t n, double dx, double origin) { return Grid(1, n, 1, dx, 1.0, origin, 0.0); }

Grid Grid::plane(std::size_t nx, std::size_t ny, double dx, double dy, double origin_x, double origin_y) {
    return Grid(2, nx, ny, dx, dy, origin_x, origin_y);
}

std::array<double, 2> Grid::position(std::size_t flat) const noexcept {
    const std::size_t i = flat / ny_;
    const std::size_t j = flat % ny_;
    return {ox_ + static_cast<double>(i) * dx_, dim_ == 1 ? 0.0 : oy_ + static_cast<double>(j) * dy_};
}

Lag Grid::lag_of_offset(std::ptrdiff_t di, std::ptrdiff_t dj) const {
    if (dim_ == 1)
        return Lag(static_cast<double>(di) * dx_);
    return Lag(static_cast<double>(di) * dx_, static_cast<double>(dj) * dy_);
}

Lag Grid::lag(std::size_t a, std::size_t b) const {
    const auto ia = static_cast<std::ptrdiff_t>(a / ny_), ja = static_cast<std::ptrdiff_t>(a % ny_);
    const auto ib = static_cast<std::ptrdiff_t>(b / ny_), jb = static_cast<std::ptrdiff_t>(b % ny_);
    return lag_of_offset(ib - ia, jb - ja);
}

void check_cap(const Grid& grid, std::size_t max_points) {
    if (grid.size() > max_points)
        throw CapExceeded(grid.size(), max_points);
}

CovarianceMatrix build_covariance(const Grid& grid, const Acvf& acvf, std::size_t max_points) {
    check_cap(grid, max_points);
    check_grid_kernel(grid, acvf);

    const OffsetTable table(grid, acvf);
    const auto n = static_cast<Eigen::Index>(grid.size());
    const auto ny = static_cast<std::ptrdiff_t>(grid.ny());
    CovarianceMatrix R{Eigen::MatrixXd(n, n)};
    // Column-major storage: fill column b, rows a <= b, then mirror.
    for (Eigen::Index b = 0; b < n; ++b) {
        const std::ptrdiff_t ib = b / ny, jb = b % ny;
        for (Eigen::Index a = 0; a <= b; ++a) {
            const std::ptrdiff_t ia = a / ny, ja = a % ny;
            R.values(a, b) = table(ib - ia, jb - ja);
        }
    }
    R.values.triangularView<Eigen::StrictlyLower>() = R.values.transpose();
    return R;
}

CholeskyFactor cholesky_with_jitter(CovarianceMatrix R) {
    Eigen::MatrixXd& A = R.values;
    if (A.rows() != A.cols())
        throw InvalidInput("covariance matrix must be square");
    const Eigen::Index n = A.rows();
    if (n == 0)
        return CholeskyFactor{std::move(A), 0.0};

    // The factorization only touches the lower triangle, so the strict upper
    // triangle and this saved diagonal are enough to restore R between attempts.
    const Eigen::VectorXd diag = A.diagonal();
    const double mean_diag = diag.mean();
    if (!std::isfinite(mean_diag))
        throw InvalidInput("covariance matrix has non-finite entries");
    const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
    const double first = 1e-10 * scale;
    const double last = 1e-4 * scale;

    double jitter = 0.0;
    Eigen::Index pivot = 0;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 0) {
            A.triangularView<Eigen::StrictlyLower>() = A.transpose();
            A.diagonal() = diag.array() + jitter;
        }
        // Eigen's public LLT hides the failing column; the in-place kernel reports it.
        pivot = Eigen::internal::llt_inplace<double, Eigen::Lower>::blocked(A);
        if (pivot < 0) {
            A.triangularView<Eigen::StrictlyUpper>().setZero();
            return CholeskyFactor{std::move(A), jitter};
        }
        const double next = attempt == 0 ? first : jitter * 10.0;
        if (next > last * (1.0 + 1e-9))
            break;
        jitter = next;
    }
    throw NotPositiveDefinite(static_cast<std::size_t>(pivot), jitter);
}

namespace {

CholeskyFactor factor_for(const Grid& grid, const Acvf& acvf, std::size_t max_points) {
    if (std::holds_alternative<WhiteNoiseAcvf>(acvf)) {
        check_grid_kernel(grid, acvf);
        return {};
    }
    return cholesky_with_jitter(build_covariance(grid, acvf, max_points));
}

} // namespace

LatentSampler::LatentSampler(Grid grid, Acvf acvf, std::size_t max_points)
    : grid_(std::move(grid)), acvf_(std::move(acvf)), factor_(factor_for(grid_, acvf_, max_points)) {}

Eigen::MatrixXd LatentSampler::draw_matrix(std::uint64_t seed, std::size_t count) const {
    if (count < 1)
        throw InvalidInput("sample count must be at least 1");
    const auto n = static_cast<Eigen::Index>(grid_.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd u(n, static_cast<Eigen::Index>(count));
    for (Eigen::Index c = 0; c < u.cols(); ++c)
        for (Eigen::Index r = 0; r < n; ++r)
            u(r, c) = normal(rng);
    if (const auto* w = std::get_if<WhiteNoiseAcvf>(&acvf_))
        return std::sqrt(w->variance) * u;
    return factor_.lower.triangularView<Eigen::Lower>() * u;
}

std::vector<SurfaceField> LatentSampler::draw(std::uint64_t seed, std::size_t count) const {
    const Eigen::MatrixXd g = draw_matrix(seed, count);
    std::vector<SurfaceField> out;
    out.reserve(count);
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
        SurfaceField f{grid_, std::vector<double>(g.col(c).data(), g.col(c).data() + g.rows()),
                       FieldKind::latent, {}};
        f.provenance.seed = seed;
        f.provenance.kernel = acvf_;
        f.provenance.jitter = factor_.jitter;
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<SurfaceField> sample_latent(const Grid& grid, const Acvf& acvf, std::uint64_t seed,
                                        std::size_t count, std::size_t max_points) {
    if (count < 1)
        throw InvalidInput("sample count must be at least 1");
    return LatentSampler(grid, acvf, max_points).draw(seed, count);
}

SurfaceField add_gaussian_noise(const SurfaceField& surface, double sigma, std::uint64_t seed) {
    if (surface.kind != FieldKind::latent)
        throw InvalidInput("noise is added to latent fields only");
    if (!std::isfinite(sigma) || sigma < 0.0)
        throw InvalidInput("noise sigma must be non-negative");
    SurfaceField out = surface;
    out.kind = FieldKind::noisy;
    out.provenance.noise_sigma = sigma;
    out.provenance.noise_seed = seed;
    if (sigma == 0.0)
        return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (double& h : out.heights)
        h += normal(rng);
    return out;
}

double covariance_mae(const Grid& grid, const Acvf& acvf, const Eigen::MatrixXd& samples) {
    check_grid_kernel(grid, acvf);
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (samples.rows() != n)
        throw InvalidInput("sample matrix rows must equal the number of grid points");
    if (samples.cols() < 2)
        throw InvalidInput("need at least 2 samples");

    const OffsetTable table(grid, acvf);
    const auto ny = static_cast<std::ptrdiff_t>(grid.ny());
    const double inv_count = 1.0 / static_cast<double>(samples.cols());
    constexpr Eigen::Index kBlock = 256;

    // Only the upper triangle is formed; off-diagonal entries count twice.
    double total = 0.0;
    for (Eigen::Index r0 = 0; r0 < n; r0 += kBlock) {
        const Eigen::Index rows = std::min(kBlock, n - r0);
        const Eigen::MatrixXd block =
            (samples.middleRows(r0, rows) * samples.middleRows(r0, n - r0).transpose()) * inv_count;
        for (Eigen::Index c = 0; c < block.cols(); ++c) {
            const Eigen::Index b = r0 + c;
            const std::ptrdiff_t ib = b / ny, jb = b % ny;
            const Eigen::Index last_row = std::min(rows - 1, c);
            for (Eigen::Index r = 0; r <= last_row; ++r) {
                const Eigen::Index a = r0 + r;
                const std::ptrdiff_t ia = a / ny, ja = a % ny;
                const double err = std::abs(block(r, c) - table(ib - ia, jb - ja));
                total += (a == b) ? err : 2.0 * err;
            }
        }
    }
    return total / (static_cast<double>(n) * static_cast<double>(n));
}

double sample_covariance_mae(const Grid& grid, const Acvf& acvf, std::size_t n_samples,
                             std::uint64_t seed, std::size_t max_points) {
    if (n_samples < 2)
        throw InvalidInput("need at least 2 samples");
    const LatentSampler sampler(grid, acvf, max_points);
    return covariance_mae(grid, acvf, sampler.draw_matrix(seed, n_samples));
}

double predicted_covariance_mae(const Grid& grid, const Acvf& acvf, std::size_t n_samples) {
    check_grid_kernel(grid, acvf);
    if (n_samples < 2)
        throw InvalidInput("need at least 2 samples");
    const auto nx = static_cast<std::ptrdiff_t>(grid.nx());
    const auto ny = static_cast<std::ptrdiff_t>(grid.ny());
    const double r0 = variance_at_origin(acvf, grid.dim());
    const double scale = std::sqrt(2.0 / std::numbers::pi / static_cast<double>(n_samples));
    double total = 0.0;
    for (std::ptrdiff_t di = -(nx - 1); di < nx; ++di)
        for (std::ptrdiff_t dj = -(ny - 1); dj < ny; ++dj) {
            const double r = evaluate(acvf, grid.lag_of_offset(di, dj));
            const auto pairs = static_cast<double>((nx - std::abs(di)) * (ny - std::abs(dj)));
            total += pairs * scale * std::sqrt(r0 * r0 + r * r);
        }
    const auto n = static_cast<double>(grid.size());
    return total / (n * n);
}

} // namespace roughgp
