#include "roughgp/spectral_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <unsupported/Eigen/FFT>

#include "roughgp/errors.hpp"

namespace roughgp {

namespace {

std::vector<double> demeaned(std::span<const double> values) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out)
        v -= mean;
    return out;
}

/// |DFT|^2 of `x`, arranged on ascending two-sided bins.
std::vector<double> two_sided_power(const std::vector<double>& x) {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, x);
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const std::ptrdiff_t k_min = -((n + 1) / 2) + 1;
    std::vector<double> power(x.size());
    for (std::ptrdiff_t s = 0; s < n; ++s) {
        const std::ptrdiff_t k = k_min + s;
        power[static_cast<std::size_t>(s)] = std::norm(spectrum[static_cast<std::size_t>((k + n) % n)]);
    }
    return power;
}

PsdEstimate make_axis(std::size_t length, double spacing, PsdMethod method) {
    PsdEstimate out;
    const auto n = static_cast<std::ptrdiff_t>(length);
    const std::ptrdiff_t k_min = -((n + 1) / 2) + 1;
    out.bin_width = 1.0 / (static_cast<double>(length) * spacing);
    out.frequencies.resize(length);
    for (std::ptrdiff_t s = 0; s < n; ++s)
        out.frequencies[static_cast<std::size_t>(s)] = static_cast<double>(k_min + s) * out.bin_width;
    out.densities.assign(length, 0.0);
    out.method = method;
    out.segment_length = length;
    return out;
}

std::vector<double> window_values(Window w, std::size_t n) {
    std::vector<double> v(n, 1.0);
    if (w == Window::hann)
        for (std::size_t i = 0; i < n; ++i)
            v[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n)));
    return v;
}

} // namespace

Profile::Profile(std::vector<double> heights, double spacing) : heights_(std::move(heights)), spacing_(spacing) {
    if (heights_.size() < kMinProfileLength)
        throw InvalidInput("profile too short: need at least " + std::to_string(kMinProfileLength) +
                           " points, got " + std::to_string(heights_.size()));
    if (!(std::isfinite(spacing_) && spacing_ > 0.0))
        throw InvalidInput("profile spacing must be positive");
    if (!std::all_of(heights_.begin(), heights_.end(), [](double h) { return std::isfinite(h); }))
        throw InvalidInput("profile heights must be finite");
}

Profile Profile::slice(std::size_t first, std::size_t count) const {
    if (first + count > heights_.size())
        throw InvalidInput("profile slice out of range");
    return Profile(std::vector<double>(heights_.begin() + static_cast<std::ptrdiff_t>(first),
                                       heights_.begin() + static_cast<std::ptrdiff_t>(first + count)),
                   spacing_);
}

std::string to_string(PsdMethod m) {
    switch (m) {
    case PsdMethod::periodogram:
        return "periodogram";
    case PsdMethod::welch:
        return "welch";
    case PsdMethod::averaged:
        return "averaged";
    }
    return "unknown";
}

std::string to_string(Window w) { return w == Window::hann ? "hann" : "rectangular"; }

double PsdEstimate::total_power() const {
    return std::accumulate(densities.begin(), densities.end(), 0.0) * bin_width;
}

double PsdEstimate::peak_frequency() const {
    double best_f = 0.0;
    double best_s = -1.0;
    // Ascending |f|: walk the non-negative half.
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (frequencies[i] < 0.0)
            continue;
        if (densities[i] > best_s) {
            best_s = densities[i];
            best_f = frequencies[i];
        }
    }
    return best_f;
}

double sample_variance(std::span<const double> values) {
    if (values.empty())
        return 0.0;
    const auto z = demeaned(values);
    return std::inner_product(z.begin(), z.end(), z.begin(), 0.0) / static_cast<double>(z.size());
}

PsdEstimate periodogram(const Profile& profile) {
    const std::size_t m = profile.size();
    PsdEstimate out = make_axis(m, profile.spacing(), PsdMethod::periodogram);
    const auto power = two_sided_power(demeaned(profile.heights()));
    const double scale = profile.spacing() / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
        out.densities[i] = scale * power[i];
    return out;
}

std::size_t default_segment_length(std::size_t profile_length) {
    const double target = static_cast<double>(profile_length) / 4.0;
    std::size_t best = kMinProfileLength;
    for (std::size_t p = kMinProfileLength; p <= profile_length; p *= 2)
        if (std::abs(static_cast<double>(p) - target) < std::abs(static_cast<double>(best) - target))
            best = p;
    return std::min(best, profile_length);
}

PsdEstimate welch(const Profile& profile, const WelchOptions& options) {
    const std::size_t m = profile.size();
    const std::size_t len = options.segment_length.value_or(default_segment_length(m));
    if (len < kMinProfileLength)
        throw InvalidInput("welch segment length must be at least 8");
    if (len > m)
        throw InvalidInput("welch segment length " + std::to_string(len) + " exceeds profile length " +
                           std::to_string(m));
    if (!(options.overlap >= 0.0 && options.overlap < 1.0))
        throw InvalidInput("welch overlap fraction must lie in [0, 1)");

    const std::size_t shared = static_cast<std::size_t>(std::lround(options.overlap * static_cast<double>(len)));
    const std::size_t step = std::max<std::size_t>(1, len - std::min(shared, len - 1));
    const std::size_t segments = 1 + (m - len) / step;

    const auto z = demeaned(profile.heights());
    const auto w = window_values(options.window, len);
    const double window_power = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);

    PsdEstimate out = make_axis(len, profile.spacing(), PsdMethod::welch);
    std::vector<double> segment(len);
    for (std::size_t s = 0; s < segments; ++s) {
        for (std::size_t i = 0; i < len; ++i)
            segment[i] = w[i] * z[s * step + i];
        const auto power = two_sided_power(segment);
        for (std::size_t i = 0; i < len; ++i)
            out.densities[i] += power[i];
    }
    const double scale = profile.spacing() / (window_power * static_cast<double>(segments));
    for (double& d : out.densities)
        d *= scale;

    const double variance = sample_variance(profile.heights());
    const double power = out.total_power();
    if (variance > 0.0 && power > 0.0) {
        const double match = variance / power;
        for (double& d : out.densities)
            d *= match;
    }
    return out;
}

std::vector<double> empirical_acvf(const Profile& profile, std::size_t max_lag) {
    const std::size_t m = profile.size();
    if (max_lag >= m)
        throw InvalidInput("max_lag must be smaller than the profile length");
    const auto z = demeaned(profile.heights());
    std::vector<double> r(max_lag + 1, 0.0);
    for (std::size_t l = 0; l <= max_lag; ++l) {
        double s = 0.0;
        for (std::size_t n = 0; n + l < m; ++n)
            s += z[n] * z[n + l];
        r[l] = s / static_cast<double>(m);
    }
    return r;
}

PsdEstimate average_psd(std::span<const PsdEstimate> estimates) {
    if (estimates.empty())
        throw InvalidInput("average_psd needs at least one estimate");
    PsdEstimate out = estimates.front();
    out.method = PsdMethod::averaged;
    for (const auto& e : estimates.subspan(1)) {
        if (e.frequencies != out.frequencies)
            throw InvalidInput("averaged estimates must share a frequency axis");
        for (std::size_t i = 0; i < out.densities.size(); ++i)
            out.densities[i] += e.densities[i];
    }
    const double inv = 1.0 / static_cast<double>(estimates.size());
    for (double& d : out.densities)
        d *= inv;
    return out;
}

} // namespace roughgp
