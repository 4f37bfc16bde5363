// Spectral-mixture hyperparameter fitting by marginal-likelihood ascent.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roughgp/gp_sampling.hpp"
#include "roughgp/kernels.hpp"
#include "roughgp/spectral_estimation.hpp"

namespace roughgp {

/// 1-D spectral mixture with Gaussian observation noise, in natural units.
struct SpectralMixtureParams {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> variances;
    double noise_variance = 0.0;

    std::size_t size() const noexcept { return weights.size(); }
    SpectralMixtureAcvf kernel() const;
    static SpectralMixtureParams from_kernel(const SpectralMixtureAcvf& kernel, double noise_variance);

    /// Packed optimizer coordinates: [log w_1..Q, mu_1..Q, log Sigma_1..Q, log sigma^2].
    std::vector<double> to_log_space() const;
    static SpectralMixtureParams from_log_space(std::span<const double> theta);

    /// Index of the component with the largest weight.
    std::size_t dominant() const;

    bool operator==(const SpectralMixtureParams&) const = default;
};

struct FitConfig {
    std::size_t q = 1;
    std::size_t n_psd_samples = 10000;
    std::size_t n_restarts = 10;
    std::size_t max_iterations = 500;
    /// Stop once one accepted step changes the objective by less than
    /// tolerance * max(1, |objective|).
    double tolerance = 1e-6;
    std::uint64_t seed = 0;
    /// Longest consecutive run of points entering the likelihood.
    std::size_t max_likelihood_points = 512;
    /// Also initialize from a Welch estimate next to the periodogram.
    bool use_welch = true;
    WelchOptions welch;
    std::size_t em_max_iterations = 100;
    double em_tolerance = 1e-8;
};

struct CandidateResult {
    std::string source;
    std::size_t restart = 0;
    SpectralMixtureParams initial;
    SpectralMixtureParams final_params;
    double initial_lml = 0.0;
    double final_lml = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool failed = false;
    std::string diagnostic;
    /// Objective after the start point and after every accepted step.
    std::vector<double> trace;
};

struct FitReport {
    SpectralMixtureParams best;
    std::size_t best_index = 0;
    std::vector<CandidateResult> candidates;
    /// EM initializations dropped as degenerate, one line each.
    std::vector<std::string> dropped;

    const CandidateResult& best_candidate() const { return candidates.at(best_index); }
};

struct LmlValue {
    double value = 0.0;
    /// d value / d theta in to_log_space() order (empty unless requested).
    std::vector<double> gradient;
    double jitter = 0.0;
};

/// log N(z; 0, K + sigma^2 I) for an equidistant profile, via Cholesky with
/// the jitter ladder on top of sigma^2. Data are used as given (no mean
/// removal).
LmlValue log_marginal_likelihood(std::span<const double> values, double spacing,
                                 const SpectralMixtureParams& params, bool with_gradient = false);

double log_marginal_likelihood(const Profile& profile, const SpectralMixtureParams& params);

/// Same objective for gridded data under any kernel.
double log_marginal_likelihood(const SurfaceField& data, const Acvf& kernel, double noise_variance);

/// Gaussian-mixture initial candidates from one PSD estimate: inverse
/// transform sampling of its non-negative half, then EM per restart.
/// Degenerate restarts are re-seeded once, then dropped (noted in `dropped`).
std::vector<SpectralMixtureParams> init_from_psd(const PsdEstimate& psd, const FitConfig& cfg,
                                                 std::uint64_t seed, std::vector<std::string>* dropped = nullptr);

/// Fits one profile; candidates come from its periodogram (and Welch
/// estimate when enabled).
FitReport fit(const Profile& profile, const FitConfig& cfg);

/// Fits `likelihood_data` with candidates initialized from the given PSDs.
FitReport fit_with_psds(const Profile& likelihood_data, std::span<const PsdEstimate> psds,
                        const FitConfig& cfg);

struct AdditiveFit {
    SpectralMixtureParams x;
    SpectralMixtureParams y;
    FitReport report_x;
    FitReport report_y;
    /// Representative profile indices (column j for the x axis, row i for y).
    std::size_t representative_x = 0;
    std::size_t representative_y = 0;

    AdditiveAcvf kernel() const;
    double noise_variance() const;
};

/// Per-axis fit of r(tau) = r_x(tau_x) + r_y(tau_y) on a 2-D grid. Each axis
/// is initialized from its averaged profile periodograms and fitted on the
/// profile of median variance.
AdditiveFit fit_additive(const SurfaceField& surface, const FitConfig& cfg);

/// Profile along x at column j, or along y at row i, of a 2-D field.
Profile profile_along_x(const SurfaceField& surface, std::size_t j);
Profile profile_along_y(const SurfaceField& surface, std::size_t i);

} // namespace roughgp
