// Nonparametric two-sided power spectral density estimates of profiles.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace roughgp {

/// Equidistant height samples, at least 8 of them.
class Profile {
public:
    Profile(std::vector<double> heights, double spacing);

    std::span<const double> heights() const noexcept { return heights_; }
    std::size_t size() const noexcept { return heights_.size(); }
    double spacing() const noexcept { return spacing_; }

    /// Consecutive sub-profile [first, first + count).
    Profile slice(std::size_t first, std::size_t count) const;

private:
    std::vector<double> heights_;
    double spacing_;
};

inline constexpr std::size_t kMinProfileLength = 8;

enum class PsdMethod { periodogram, welch, averaged };

std::string to_string(PsdMethod m);

/// Two-sided density on ascending frequencies k / (L dx), k in
/// [-ceil(L/2) + 1, floor(L/2)], normalized so sum(S) * bin_width equals the
/// mean-removed sample variance.
struct PsdEstimate {
    std::vector<double> frequencies;
    std::vector<double> densities;
    double bin_width = 0.0;
    PsdMethod method = PsdMethod::periodogram;
    /// Segment length L behind the frequency axis.
    std::size_t segment_length = 0;

    double total_power() const;
    /// |f| of the largest density (first on ties, scanning from f = 0 upward).
    double peak_frequency() const;
};

/// Mean-removed variance with 1/M normalization.
double sample_variance(std::span<const double> values);

/// S(f_k) = (dx / M) |DFT(z - mean)_k|^2.
PsdEstimate periodogram(const Profile& profile);

enum class Window { hann, rectangular };

std::string to_string(Window w);

struct WelchOptions {
    /// Defaults to M/4 rounded to the nearest power of two (at least 8).
    std::optional<std::size_t> segment_length;
    double overlap = 0.5;
    Window window = Window::hann;
};

std::size_t default_segment_length(std::size_t profile_length);

/// Average of windowed segment periodograms of the mean-removed profile.
/// Each segment is normalized by the window power, and the average is then
/// scaled so its total power equals the sample variance of the profile.
PsdEstimate welch(const Profile& profile, const WelchOptions& options = {});

/// Biased estimator r(l) = (1/M) sum_n z_n z_{n+l} on mean-removed data, l = 0..max_lag.
std::vector<double> empirical_acvf(const Profile& profile, std::size_t max_lag);

/// Element-wise mean of estimates sharing one frequency axis.
PsdEstimate average_psd(std::span<const PsdEstimate> estimates);

} // namespace roughgp
