// Stationary autocovariance functions (ACVFs) used as GP kernels.
#pragma once

#include <array>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace roughgp {

/// Lag between two positions, tau = x' - x, in one or two dimensions.
class Lag {
public:
    explicit Lag(double tx);
    Lag(double tx, double ty);

    int dim() const noexcept { return dim_; }
    double operator[](int axis) const { return c_[static_cast<std::size_t>(axis)]; }
    double x() const noexcept { return c_[0]; }
    double y() const noexcept { return c_[1]; }
    double norm() const noexcept;
    bool is_zero() const noexcept { return c_[0] == 0.0 && c_[1] == 0.0; }

    Lag operator-() const;

private:
    int dim_;
    std::array<double, 2> c_;
};

/// sigma_k^2 at zero lag, zero elsewhere.
struct WhiteNoiseAcvf {
    double variance = 1.0;

    bool operator==(const WhiteNoiseAcvf&) const = default;
};

/// Exponential ACVF with anisotropic lengthscales whose principal axes are
/// rotated counter-clockwise by `angle`:
///
///   r(tau) = variance * exp(-|| Lambda^-1 T tau ||),
///
/// where T is the clockwise rotation by `angle` and Lambda = diag(a, b).
/// Evaluated on a 1-D lag it reduces to variance * exp(-|tau| / a).
struct ExponentialRotatedAcvf {
    double variance = 1.0;
    double lengthscale_a = 1.0;
    double lengthscale_b = 1.0;
    double angle = 0.0;

    bool operator==(const ExponentialRotatedAcvf&) const = default;
};

/// One Gaussian of a spectral mixture; `mean` and `variance` hold one entry
/// per dimension (frequency units and squared frequency units).
struct SpectralComponent {
    double weight = 1.0;
    std::vector<double> mean;
    std::vector<double> variance;

    bool operator==(const SpectralComponent&) const = default;
};

/// r(tau) = sum_q w_q cos(2 pi tau.mu_q) exp(-2 pi^2 tau' Sigma_q tau).
struct SpectralMixtureAcvf {
    std::vector<SpectralComponent> components;

    int dim() const;
    double total_weight() const;

    bool operator==(const SpectralMixtureAcvf&) const = default;
};

/// Smallest admissible spectral variance; the pure-cosine limit is excluded.
inline constexpr double kMinSpectralVariance = 1e-12;

/// Kernels allowed on one axis of an additive kernel.
using AxisAcvf = std::variant<WhiteNoiseAcvf, ExponentialRotatedAcvf, SpectralMixtureAcvf>;

/// r(tau) = r_x(tau_x) + r_y(tau_y).
struct AdditiveAcvf {
    AxisAcvf x;
    AxisAcvf y;

    bool operator==(const AdditiveAcvf&) const = default;
};

using Acvf = std::variant<WhiteNoiseAcvf, ExponentialRotatedAcvf, SpectralMixtureAcvf, AdditiveAcvf>;

double evaluate(const WhiteNoiseAcvf& k, const Lag& tau);
double evaluate(const ExponentialRotatedAcvf& k, const Lag& tau);
double evaluate(const SpectralMixtureAcvf& k, const Lag& tau);
double evaluate(const AdditiveAcvf& k, const Lag& tau);
double evaluate(const AxisAcvf& k, const Lag& tau);

/// Throws InvalidInput when the lag dimension is not accepted by the kernel.
double evaluate(const Acvf& k, const Lag& tau);

/// Covariance at zero lag in dimension `dim`.
double variance_at_origin(const Acvf& k, int dim);

/// White noise and the exponential kernel accept 1-D and 2-D lags; a spectral
/// mixture only its own dimension; the additive kernel only 2-D.
bool accepts_dimension(const Acvf& k, int dim);

/// tau' = T tau with T the inverse (clockwise) rotation by `angle`.
Lag rotate_lag(const Lag& tau, double angle);

/// Two-sided spectral density of a spectral mixture, the symmetrized Gaussian
/// mixture sum_q (w_q / 2) [N(f; mu_q, Sigma_q) + N(f; -mu_q, Sigma_q)].
/// Its inverse Fourier transform is exactly evaluate(k, tau).
double spectral_density(const SpectralMixtureAcvf& k, std::span<const double> frequency);
double spectral_density(const SpectralMixtureAcvf& k, double frequency);

struct Validation {
    std::vector<std::string> problems;

    bool ok() const noexcept { return problems.empty(); }
    explicit operator bool() const noexcept { return ok(); }
    std::string message() const;
};

/// Parameter-domain check; positive semidefiniteness follows from the family.
Validation is_valid(const Acvf& k);
Validation is_valid(const AxisAcvf& k);

/// Throws InvalidKernel carrying the diagnostics when `k` is invalid.
void require_valid(const Acvf& k);

std::string type_name(const Acvf& k);

} // namespace roughgp
