// Exact sampling of zero-mean Gaussian processes on regular grids.
#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "roughgp/kernels.hpp"

namespace roughgp {

/// Default bound on grid points for dense covariance sampling.
inline constexpr std::size_t kDefaultMaxPoints = 65536;

/// Regular 1-D or 2-D lattice. Node (i, j) sits at
/// (origin_x + i dx, origin_y + j dy); flat index is i * ny + j.
class Grid {
public:
    static Grid line(std::size_t n, double dx, double origin = 0.0);
    static Grid plane(std::size_t nx, std::size_t ny, double dx, double dy, double origin_x = 0.0,
                      double origin_y = 0.0);

    int dim() const noexcept { return dim_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return nx_ * ny_; }
    double dx() const noexcept { return dx_; }
    double dy() const noexcept { return dy_; }
    double origin_x() const noexcept { return ox_; }
    double origin_y() const noexcept { return oy_; }

    std::size_t index(std::size_t i, std::size_t j = 0) const noexcept { return i * ny_ + j; }
    std::array<double, 2> position(std::size_t flat) const noexcept;

    /// Lag x_b - x_a, computed from index offsets so the diagonal is exactly zero.
    Lag lag(std::size_t a, std::size_t b) const;
    Lag lag_of_offset(std::ptrdiff_t di, std::ptrdiff_t dj) const;

    bool operator==(const Grid&) const = default;

private:
    Grid(int dim, std::size_t nx, std::size_t ny, double dx, double dy, double ox, double oy);

    int dim_;
    std::size_t nx_;
    std::size_t ny_;
    double dx_;
    double dy_;
    double ox_;
    double oy_;
};

struct CovarianceMatrix {
    Eigen::MatrixXd values;
};

/// Lower-triangular L with L L^T = R + jitter I.
struct CholeskyFactor {
    Eigen::MatrixXd lower;
    double jitter = 0.0;
};

enum class FieldKind { latent, noisy };

/// Where a field came from, kept for auditability in output files.
struct Provenance {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> noise_seed;
    std::optional<Acvf> kernel;
    double jitter = 0.0;
    double noise_sigma = 0.0;

    bool operator==(const Provenance&) const = default;
};

struct SurfaceField {
    Grid grid;
    std::vector<double> heights;
    FieldKind kind = FieldKind::latent;
    Provenance provenance;

    double at(std::size_t i, std::size_t j = 0) const { return heights[grid.index(i, j)]; }

    bool operator==(const SurfaceField&) const = default;
};

/// Throws CapExceeded when the grid is larger than `max_points`.
void check_cap(const Grid& grid, std::size_t max_points);

/// R[i][j] = r(x_j - x_i); the upper triangle is computed and mirrored.
CovarianceMatrix build_covariance(const Grid& grid, const Acvf& acvf,
                                  std::size_t max_points = kDefaultMaxPoints);

/// Factorizes R in place. Jitter ladder: 0, then 1e-10 mean(diag R), growing
/// by 10x per retry up to 1e-4 mean(diag R). Throws NotPositiveDefinite with
/// the failing pivot once the ladder is exhausted.
CholeskyFactor cholesky_with_jitter(CovarianceMatrix R);

/// Holds the factor of one (grid, kernel) pair so repeated draws skip the
/// O(N^3) factorization. White noise has a diagonal covariance and is drawn
/// directly as sigma * u, with no dense factor and no point cap.
class LatentSampler {
public:
    LatentSampler(Grid grid, Acvf acvf, std::size_t max_points = kDefaultMaxPoints);

    /// N x count matrix of draws g = L u, columns in generator order.
    Eigen::MatrixXd draw_matrix(std::uint64_t seed, std::size_t count) const;
    std::vector<SurfaceField> draw(std::uint64_t seed, std::size_t count) const;

    const Grid& grid() const noexcept { return grid_; }
    const Acvf& acvf() const noexcept { return acvf_; }
    double jitter() const noexcept { return factor_.jitter; }
    const CholeskyFactor& factor() const noexcept { return factor_; }

private:
    Grid grid_;
    Acvf acvf_;
    CholeskyFactor factor_;
};

/// `count` latent draws from one seeded generator; successive draws consume
/// successive generator states.
std::vector<SurfaceField> sample_latent(const Grid& grid, const Acvf& acvf, std::uint64_t seed,
                                        std::size_t count, std::size_t max_points = kDefaultMaxPoints);

/// z = g + eps with eps ~ N(0, sigma^2) i.i.d.
SurfaceField add_gaussian_noise(const SurfaceField& surface, double sigma, std::uint64_t seed);

/// Mean over all N^2 entries of |R_hat - R|, with R_hat = (1/n) sum g g^T
/// (known zero mean). `samples` is N x n.
double covariance_mae(const Grid& grid, const Acvf& acvf, const Eigen::MatrixXd& samples);

/// Draws `n_samples` latent fields and returns covariance_mae of them.
double sample_covariance_mae(const Grid& grid, const Acvf& acvf, std::size_t n_samples,
                             std::uint64_t seed, std::size_t max_points = kDefaultMaxPoints);

/// Normal-approximation expectation of covariance_mae:
/// mean over pairs of sqrt(2/pi) * sqrt((r(0)^2 + r_ij^2) / n).
double predicted_covariance_mae(const Grid& grid, const Acvf& acvf, std::size_t n_samples);

} // namespace roughgp
