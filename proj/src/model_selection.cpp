#include "roughgp/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

#include "roughgp/errors.hpp"

namespace roughgp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// ---------------------------------------------------------------------------
// Likelihood
// ---------------------------------------------------------------------------

struct Factorized {
    CholeskyFactor factor;
    Eigen::VectorXd alpha;
    double value;
};

Factorized factorize(Eigen::MatrixXd K, std::span<const double> values) {
    const auto m = static_cast<Eigen::Index>(values.size());
    CholeskyFactor f;
    try {
        f = cholesky_with_jitter(CovarianceMatrix{std::move(K)});
    } catch (const NotPositiveDefinite& e) {
        throw Error(std::string(e.what()) + "; raise the noise variance floor");
    }
    const Eigen::Map<const Eigen::VectorXd> z(values.data(), m);
    const auto L = f.lower.triangularView<Eigen::Lower>();
    Eigen::VectorXd alpha = L.solve(z);
    const double quad = alpha.squaredNorm();
    f.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha);
    const double log_det = 2.0 * f.lower.diagonal().array().log().sum();
    const double value = -0.5 * quad - 0.5 * log_det - 0.5 * static_cast<double>(m) * kLog2Pi;
    return Factorized{std::move(f), std::move(alpha), value};
}

// ---------------------------------------------------------------------------
// Bounded L-BFGS ascent with a monotone backtracking line search
// ---------------------------------------------------------------------------

struct Objective {
    double value;
    std::vector<double> gradient;
};

struct AscentResult {
    std::vector<double> theta;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

AscentResult ascend(const std::function<Objective(const std::vector<double>&)>& objective,
                    std::vector<double> theta, const std::vector<double>& lower, const std::vector<double>& upper,
                    std::size_t max_iterations, double tolerance) {
    constexpr std::size_t kMemory = 10;
    constexpr double kArmijo = 1e-4;
    constexpr double kMaxStep = 3.0;
    constexpr int kMaxHalvings = 40;
    const std::size_t n = theta.size();

    auto project = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < n; ++i)
            x[i] = std::clamp(x[i], lower[i], upper[i]);
    };
    auto safe_eval = [&](const std::vector<double>& x) -> std::optional<Objective> {
        try {
            Objective o = objective(x);
            if (!std::isfinite(o.value))
                return std::nullopt;
            for (double g : o.gradient)
                if (!std::isfinite(g))
                    return std::nullopt;
            return o;
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    project(theta);
    Objective current = objective(theta);
    AscentResult out;
    out.trace.push_back(current.value);

    std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;
    bool retried_plain = false;
    while (out.iterations < max_iterations) {
        // Free-variable gradient: components pinned at a bound and pushing outward are dropped.
        std::vector<double> g = current.gradient;
        for (std::size_t i = 0; i < n; ++i)
            if ((theta[i] <= lower[i] && g[i] < 0.0) || (theta[i] >= upper[i] && g[i] > 0.0))
                g[i] = 0.0;
        const double gnorm = std::sqrt(dot(g, g));
        if (gnorm == 0.0 || gnorm < 1e-12 * std::max(1.0, std::abs(current.value))) {
            out.converged = true;
            break;
        }

        // Two-loop recursion on the negated objective; direction ascends f.
        std::vector<double> d = g;
        std::vector<double> coef(memory.size());
        for (std::size_t k = memory.size(); k-- > 0;) {
            const auto& [s, y] = memory[k];
            coef[k] = dot(s, d) / dot(s, y);
            for (std::size_t i = 0; i < n; ++i)
                d[i] -= coef[k] * y[i];
        }
        if (!memory.empty()) {
            const auto& [s, y] = memory.back();
            const double gamma = dot(s, y) / dot(y, y);
            for (double& v : d)
                v *= gamma;
        } else {
            double largest = 0.0;
            for (double v : g)
                largest = std::max(largest, std::abs(v));
            const double scale = 1.0 / std::max(1.0, largest);
            for (double& v : d)
                v *= scale;
        }
        for (std::size_t k = 0; k < memory.size(); ++k) {
            const auto& [s, y] = memory[k];
            const double beta = dot(y, d) / dot(s, y);
            for (std::size_t i = 0; i < n; ++i)
                d[i] += (coef[k] - beta) * s[i];
        }
        for (std::size_t i = 0; i < n; ++i)
            if (g[i] == 0.0)
                d[i] = 0.0;
        if (dot(d, g) <= 0.0) {
            d = g;
            memory.clear();
        }
        const double longest = std::abs(*std::max_element(d.begin(), d.end(), [](double a, double b) {
            return std::abs(a) < std::abs(b);
        }));
        if (longest > kMaxStep)
            for (double& v : d)
                v *= kMaxStep / longest;

        std::optional<Objective> next;
        std::vector<double> candidate(n);
        double step = 1.0;
        for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
            for (std::size_t i = 0; i < n; ++i)
                candidate[i] = theta[i] + step * d[i];
            project(candidate);
            double gain = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                gain += current.gradient[i] * (candidate[i] - theta[i]);
            auto trial = safe_eval(candidate);
            if (trial && trial->value >= current.value + kArmijo * std::max(0.0, gain)) {
                next = std::move(trial);
                break;
            }
        }
        if (!next) {
            if (!memory.empty() && !retried_plain) {
                memory.clear();
                retried_plain = true;
                continue;
            }
            out.converged = true;
            break;
        }
        retried_plain = false;
        if (next->value < current.value)
            throw std::logic_error("ascent accepted a decreasing step");

        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = candidate[i] - theta[i];
            y[i] = current.gradient[i] - next->gradient[i];
        }
        if (dot(s, y) > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
            memory.emplace_back(std::move(s), std::move(y));
            if (memory.size() > kMemory)
                memory.pop_front();
        }
        const double change = next->value - current.value;
        theta = candidate;
        current = std::move(*next);
        ++out.iterations;
        out.trace.push_back(current.value);
        if (change <= tolerance * std::max(1.0, std::abs(current.value))) {
            out.converged = true;
            break;
        }
    }
    out.theta = std::move(theta);
    out.value = current.value;
    return out;
}

// ---------------------------------------------------------------------------
// One-dimensional Gaussian mixture by EM, k-means seeded
// ---------------------------------------------------------------------------

struct Mixture {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> variances;
};

std::optional<Mixture> fit_mixture(const std::vector<double>& x, std::size_t q, std::mt19937_64& rng,
                                   double variance_floor, std::size_t max_iterations, double tolerance) {
    const std::size_t n = x.size();
    if (n < q)
        return std::nullopt;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // k-means++ seeding.
    std::vector<double> centers;
    centers.push_back(x[std::min(n - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(n)))]);
    std::vector<double> d2(n);
    while (centers.size() < q) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centers)
                best = std::min(best, (x[i] - c) * (x[i] - c));
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0)
            return std::nullopt;
        const double target = unit(rng) * total;
        double acc = 0.0;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (acc >= target) {
                pick = i;
                break;
            }
        }
        centers.push_back(x[pick]);
    }

    // Lloyd iterations.
    std::vector<std::size_t> label(n, 0);
    for (int it = 0; it < 50; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < q; ++k)
                if (std::abs(x[i] - centers[k]) < std::abs(x[i] - centers[best]))
                    best = k;
            changed |= best != label[i];
            label[i] = best;
        }
        std::vector<double> sum(q, 0.0);
        std::vector<std::size_t> count(q, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[label[i]] += x[i];
            ++count[label[i]];
        }
        for (std::size_t k = 0; k < q; ++k)
            if (count[k] > 0)
                centers[k] = sum[k] / static_cast<double>(count[k]);
        if (!changed && it > 0)
            break;
    }

    Mixture mix{std::vector<double>(q, 0.0), centers, std::vector<double>(q, 0.0)};
    {
        std::vector<std::size_t> count(q, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double dev = x[i] - centers[label[i]];
            mix.variances[label[i]] += dev * dev;
            ++count[label[i]];
        }
        for (std::size_t k = 0; k < q; ++k) {
            if (count[k] < 2)
                return std::nullopt;
            mix.weights[k] = static_cast<double>(count[k]) / static_cast<double>(n);
            mix.variances[k] /= static_cast<double>(count[k]);
            if (mix.variances[k] < variance_floor)
                return std::nullopt;
        }
    }

    std::vector<double> resp(n * q);
    double previous = -std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < max_iterations; ++it) {
        // E step in log space.
        double log_lik = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double peak = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < q; ++k) {
                const double dev = x[i] - mix.means[k];
                const double lp = std::log(mix.weights[k]) - 0.5 * std::log(2.0 * kPi * mix.variances[k]) -
                                  0.5 * dev * dev / mix.variances[k];
                resp[i * q + k] = lp;
                peak = std::max(peak, lp);
            }
            double total = 0.0;
            for (std::size_t k = 0; k < q; ++k) {
                resp[i * q + k] = std::exp(resp[i * q + k] - peak);
                total += resp[i * q + k];
            }
            for (std::size_t k = 0; k < q; ++k)
                resp[i * q + k] /= total;
            log_lik += peak + std::log(total);
        }
        log_lik /= static_cast<double>(n);

        // M step.
        for (std::size_t k = 0; k < q; ++k) {
            double nk = 0.0;
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                nk += resp[i * q + k];
                mean += resp[i * q + k] * x[i];
            }
            if (nk < 1e-8)
                return std::nullopt;
            mean /= nk;
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                var += resp[i * q + k] * (x[i] - mean) * (x[i] - mean);
            var /= nk;
            if (!(var >= variance_floor))
                return std::nullopt;
            mix.weights[k] = nk / static_cast<double>(n);
            mix.means[k] = mean;
            mix.variances[k] = var;
        }
        if (std::abs(log_lik - previous) <= tolerance * std::max(1.0, std::abs(log_lik)))
            break;
        previous = log_lik;
    }
    return mix;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

void validate_config(const FitConfig& cfg) {
    if (cfg.q < 1)
        throw InvalidInput("Q must be >= 1");
    if (cfg.n_psd_samples < 1 || cfg.n_restarts < 1)
        throw InvalidInput("fit counts must be >= 1");
    if (cfg.max_likelihood_points < kMinProfileLength)
        throw InvalidInput("max_likelihood_points must be at least 8");
    if (!(cfg.tolerance >= 0.0))
        throw InvalidInput("fit tolerance must be non-negative");
}

Profile likelihood_window(const Profile& p, std::size_t max_points) {
    if (p.size() <= max_points)
        return p;
    return p.slice((p.size() - max_points) / 2, max_points);
}

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

Bounds parameter_bounds(std::size_t q, double variance, double spacing) {
    const double nyquist = 0.5 / spacing;
    const double v = variance > 0.0 ? variance : 1.0;
    Bounds b{std::vector<double>(3 * q + 1), std::vector<double>(3 * q + 1)};
    for (std::size_t k = 0; k < q; ++k) {
        b.lower[k] = std::log(1e-8 * v);
        b.upper[k] = std::log(1e2 * v);
        b.lower[q + k] = -nyquist;
        b.upper[q + k] = nyquist;
        b.lower[2 * q + k] = std::log(kMinSpectralVariance);
        b.upper[2 * q + k] = std::log(4.0 * nyquist * nyquist);
    }
    b.lower[3 * q] = std::log(1e-6 * v);
    b.upper[3 * q] = std::log(10.0 * v);
    return b;
}

SpectralMixtureParams clamp_means(SpectralMixtureParams p) {
    // The kernel is even in mu, so the reflection leaves it unchanged.
    for (double& m : p.means)
        m = std::abs(m);
    for (double& s : p.variances)
        s = std::max(s, kMinSpectralVariance);
    return p;
}

std::vector<double> demeaned_values(const Profile& p) {
    std::vector<double> z(p.heights().begin(), p.heights().end());
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
    for (double& v : z)
        v -= mean;
    return z;
}

} // namespace

// ---------------------------------------------------------------------------
// SpectralMixtureParams
// ---------------------------------------------------------------------------

SpectralMixtureAcvf SpectralMixtureParams::kernel() const {
    SpectralMixtureAcvf k;
    for (std::size_t q = 0; q < size(); ++q)
        k.components.push_back(SpectralComponent{weights[q], {means[q]}, {variances[q]}});
    return k;
}

SpectralMixtureParams SpectralMixtureParams::from_kernel(const SpectralMixtureAcvf& kernel, double noise_variance) {
    if (kernel.dim() != 1)
        throw InvalidInput("spectral mixture parameters are one-dimensional");
    SpectralMixtureParams p;
    for (const auto& c : kernel.components) {
        p.weights.push_back(c.weight);
        p.means.push_back(c.mean.front());
        p.variances.push_back(c.variance.front());
    }
    p.noise_variance = noise_variance;
    return p;
}

std::vector<double> SpectralMixtureParams::to_log_space() const {
    const std::size_t q = size();
    std::vector<double> theta(3 * q + 1);
    for (std::size_t k = 0; k < q; ++k) {
        theta[k] = std::log(weights[k]);
        theta[q + k] = means[k];
        theta[2 * q + k] = std::log(variances[k]);
    }
    theta[3 * q] = std::log(noise_variance);
    return theta;
}

SpectralMixtureParams SpectralMixtureParams::from_log_space(std::span<const double> theta) {
    if (theta.size() < 4 || (theta.size() - 1) % 3 != 0)
        throw InvalidInput("log-space vector must hold 3Q + 1 entries");
    const std::size_t q = (theta.size() - 1) / 3;
    SpectralMixtureParams p;
    for (std::size_t k = 0; k < q; ++k) {
        p.weights.push_back(std::exp(theta[k]));
        p.means.push_back(theta[q + k]);
        p.variances.push_back(std::exp(theta[2 * q + k]));
    }
    p.noise_variance = std::exp(theta[3 * q]);
    return p;
}

std::size_t SpectralMixtureParams::dominant() const {
    return static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin());
}

// ---------------------------------------------------------------------------
// Marginal likelihood
// ---------------------------------------------------------------------------

LmlValue log_marginal_likelihood(std::span<const double> values, double spacing, const SpectralMixtureParams& params,
                                 bool with_gradient) {
    const std::size_t m = values.size();
    const std::size_t q = params.size();
    if (m == 0)
        throw InvalidInput("marginal likelihood needs data");
    if (q == 0 || params.means.size() != q || params.variances.size() != q)
        throw InvalidInput("spectral mixture parameters are inconsistent");
    if (!(spacing > 0.0))
        throw InvalidInput("spacing must be positive");
    if (!(params.noise_variance >= 0.0))
        throw InvalidInput("noise variance must be non-negative");

    // Toeplitz structure: one kernel value (and derivative set) per lag.
    std::vector<double> k(m), cosine(m * q), sine(m * q), envelope(m * q);
    for (std::size_t l = 0; l < m; ++l) {
        const double tau = static_cast<double>(l) * spacing;
        double sum = 0.0;
        for (std::size_t c = 0; c < q; ++c) {
            const double arg = 2.0 * kPi * tau * params.means[c];
            const double env = std::exp(-2.0 * kPi * kPi * tau * tau * params.variances[c]);
            cosine[l * q + c] = std::cos(arg);
            sine[l * q + c] = std::sin(arg);
            envelope[l * q + c] = env;
            sum += params.weights[c] * cosine[l * q + c] * env;
        }
        k[l] = sum;
    }
    const auto n = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            K(i, j) = k[static_cast<std::size_t>(std::abs(i - j))];
    K.diagonal().array() += params.noise_variance;

    Factorized f = factorize(std::move(K), values);
    LmlValue out{f.value, {}, f.factor.jitter};
    if (!with_gradient)
        return out;

    // d/dtheta = 1/2 tr((alpha alpha^T - K^-1) dK/dtheta); sum W per lag first.
    const Eigen::MatrixXd inverse = [&] {
        Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
        const auto L = f.factor.lower.triangularView<Eigen::Lower>();
        L.solveInPlace(I);
        return Eigen::MatrixXd(I.transpose() * I);
    }();
    std::vector<double> lag_sum(m, 0.0);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            lag_sum[static_cast<std::size_t>(std::abs(i - j))] += f.alpha(i) * f.alpha(j) - inverse(i, j);

    out.gradient.assign(3 * q + 1, 0.0);
    for (std::size_t l = 0; l < m; ++l) {
        const double tau = static_cast<double>(l) * spacing;
        const double s = 0.5 * lag_sum[l];
        for (std::size_t c = 0; c < q; ++c) {
            const double w = params.weights[c];
            const double ce = cosine[l * q + c] * envelope[l * q + c];
            out.gradient[c] += s * w * ce;
            out.gradient[q + c] += s * (-w * 2.0 * kPi * tau * sine[l * q + c] * envelope[l * q + c]);
            out.gradient[2 * q + c] += s * (w * ce * (-2.0 * kPi * kPi * tau * tau * params.variances[c]));
        }
    }
    out.gradient[3 * q] = 0.5 * lag_sum[0] * params.noise_variance;
    return out;
}

double log_marginal_likelihood(const Profile& profile, const SpectralMixtureParams& params) {
    return log_marginal_likelihood(profile.heights(), profile.spacing(), params).value;
}

double log_marginal_likelihood(const SurfaceField& data, const Acvf& kernel, double noise_variance) {
    if (data.heights.size() != data.grid.size())
        throw InvalidInput("field height count does not match its grid");
    if (!(noise_variance >= 0.0))
        throw InvalidInput("noise variance must be non-negative");
    CovarianceMatrix R = build_covariance(data.grid, kernel);
    R.values.diagonal().array() += noise_variance;
    return factorize(std::move(R.values), data.heights).value;
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

std::vector<SpectralMixtureParams> init_from_psd(const PsdEstimate& psd, const FitConfig& cfg, std::uint64_t seed,
                                                 std::vector<std::string>* dropped) {
    validate_config(cfg);
    if (psd.frequencies.size() != psd.densities.size() || psd.frequencies.empty() || !(psd.bin_width > 0.0))
        throw InvalidInput("malformed PSD estimate");
    const double mass = psd.total_power();
    if (!(mass > 0.0))
        throw InvalidInput("PSD has no positive mass to initialize from");

    // Non-negative half as a pmf; positive bins carry their mirrored partner.
    std::vector<double> freq;
    std::vector<double> cumulative;
    double running = 0.0;
    const double top = psd.frequencies.back();
    for (std::size_t i = 0; i < psd.frequencies.size(); ++i) {
        const double f = psd.frequencies[i];
        if (f < 0.0)
            continue;
        const bool paired = f > 0.0 && -f >= psd.frequencies.front() - 0.5 * psd.bin_width;
        running += std::max(0.0, psd.densities[i]) * (paired ? 2.0 : 1.0);
        freq.push_back(f);
        cumulative.push_back(running);
    }
    if (!(running > 0.0))
        throw InvalidInput("PSD has no positive mass to initialize from");

    const double nyquist = std::max(top, psd.bin_width);
    const double variance_floor = 1e-12 * nyquist * nyquist;
    const double dw = psd.bin_width;

    std::vector<SpectralMixtureParams> out;
    for (std::size_t r = 0; r < cfg.n_restarts; ++r) {
        std::optional<Mixture> mix;
        for (std::uint64_t attempt = 0; attempt < 2 && !mix; ++attempt) {
            std::mt19937_64 rng(derive_seed(seed, r, attempt));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::vector<double> draws(cfg.n_psd_samples);
            for (double& d : draws) {
                const double u = unit(rng) * running;
                auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
                if (it == cumulative.end())
                    --it;
                const double f = freq[static_cast<std::size_t>(it - cumulative.begin())];
                const double v = unit(rng);
                d = f == 0.0 ? 0.5 * dw * v : f + (v - 0.5) * dw;
            }
            mix = fit_mixture(draws, cfg.q, rng, variance_floor, cfg.em_max_iterations, cfg.em_tolerance);
        }
        if (!mix) {
            if (dropped)
                dropped->push_back(to_string(psd.method) + " restart " + std::to_string(r) +
                                   ": degenerate mixture component after re-seeding");
            continue;
        }
        SpectralMixtureParams p;
        for (std::size_t k = 0; k < cfg.q; ++k) {
            p.weights.push_back(mix->weights[k] * mass);
            p.means.push_back(std::max(0.0, mix->means[k]));
            p.variances.push_back(std::max(mix->variances[k], kMinSpectralVariance));
        }
        p.noise_variance = 0.1 * mass;
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

FitReport fit_with_psds(const Profile& likelihood_data, std::span<const PsdEstimate> psds, const FitConfig& cfg) {
    validate_config(cfg);
    if (psds.empty())
        throw InvalidInput("fit needs at least one PSD estimate");

    const Profile window = likelihood_window(likelihood_data, cfg.max_likelihood_points);
    const std::vector<double> z = demeaned_values(window);
    const double variance = sample_variance(z);
    const Bounds bounds = parameter_bounds(cfg.q, variance, window.spacing());

    FitReport report;
    for (std::size_t s = 0; s < psds.size(); ++s) {
        const auto starts = init_from_psd(psds[s], cfg, derive_seed(cfg.seed, 0x5eed, s), &report.dropped);
        for (std::size_t r = 0; r < starts.size(); ++r) {
            CandidateResult c;
            c.source = to_string(psds[s].method);
            c.restart = r;
            c.initial = starts[r];
            try {
                auto objective = [&](const std::vector<double>& theta) {
                    const auto p = SpectralMixtureParams::from_log_space(theta);
                    LmlValue v = log_marginal_likelihood(z, window.spacing(), p, true);
                    return Objective{v.value, std::move(v.gradient)};
                };
                std::vector<double> theta0 = c.initial.to_log_space();
                for (std::size_t i = 0; i < theta0.size(); ++i)
                    theta0[i] = std::clamp(theta0[i], bounds.lower[i], bounds.upper[i]);
                c.initial = SpectralMixtureParams::from_log_space(theta0);
                c.initial_lml = log_marginal_likelihood(z, window.spacing(), c.initial).value;

                if (cfg.max_iterations == 0) {
                    c.final_params = clamp_means(c.initial);
                    c.final_lml = c.initial_lml;
                    c.trace = {c.initial_lml};
                    c.converged = false;
                } else {
                    AscentResult a = ascend(objective, theta0, bounds.lower, bounds.upper, cfg.max_iterations,
                                            cfg.tolerance);
                    c.final_params = clamp_means(SpectralMixtureParams::from_log_space(a.theta));
                    c.final_lml = a.value;
                    c.iterations = a.iterations;
                    c.converged = a.converged;
                    c.trace = std::move(a.trace);
                }
            } catch (const Error& e) {
                c.failed = true;
                c.diagnostic = e.what();
            }
            report.candidates.push_back(std::move(c));
        }
    }

    bool found = false;
    for (std::size_t i = 0; i < report.candidates.size(); ++i) {
        const auto& c = report.candidates[i];
        if (c.failed)
            continue;
        if (!found || c.final_lml > report.candidates[report.best_index].final_lml) {
            report.best_index = i;
            found = true;
        }
    }
    if (!found) {
        std::string why = "all fit candidates failed";
        for (const auto& c : report.candidates)
            why += "\n  " + c.source + " restart " + std::to_string(c.restart) + ": " + c.diagnostic;
        for (const auto& d : report.dropped)
            why += "\n  " + d;
        throw FitFailed(why + "\n  consider more data or a larger noise floor");
    }
    report.best = report.candidates[report.best_index].final_params;
    return report;
}

FitReport fit(const Profile& profile, const FitConfig& cfg) {
    validate_config(cfg);
    std::vector<PsdEstimate> psds{periodogram(profile)};
    if (cfg.use_welch)
        psds.push_back(welch(profile, cfg.welch));
    return fit_with_psds(profile, psds, cfg);
}

Profile profile_along_x(const SurfaceField& surface, std::size_t j) {
    const Grid& g = surface.grid;
    std::vector<double> h(g.nx());
    for (std::size_t i = 0; i < g.nx(); ++i)
        h[i] = surface.heights[g.index(i, j)];
    return Profile(std::move(h), g.dx());
}

Profile profile_along_y(const SurfaceField& surface, std::size_t i) {
    const Grid& g = surface.grid;
    std::vector<double> h(g.ny());
    for (std::size_t j = 0; j < g.ny(); ++j)
        h[j] = surface.heights[g.index(i, j)];
    return Profile(std::move(h), g.dy());
}

AdditiveAcvf AdditiveFit::kernel() const { return AdditiveAcvf{x.kernel(), y.kernel()}; }

double AdditiveFit::noise_variance() const { return 0.5 * (x.noise_variance + y.noise_variance); }

namespace {

struct AxisData {
    std::vector<PsdEstimate> psds;
    std::size_t representative;
};

AxisData axis_data(const std::vector<Profile>& profiles, const FitConfig& cfg) {
    std::vector<PsdEstimate> per, wel;
    std::vector<std::pair<double, std::size_t>> variances;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        per.push_back(periodogram(profiles[k]));
        if (cfg.use_welch)
            wel.push_back(welch(profiles[k], cfg.welch));
        variances.emplace_back(sample_variance(profiles[k].heights()), k);
    }
    std::sort(variances.begin(), variances.end());
    AxisData out{{average_psd(per)}, variances[(variances.size() - 1) / 2].second};
    if (cfg.use_welch) {
        PsdEstimate w = average_psd(wel);
        w.method = PsdMethod::welch;
        out.psds.push_back(std::move(w));
    }
    return out;
}

} // namespace

AdditiveFit fit_additive(const SurfaceField& surface, const FitConfig& cfg) {
    validate_config(cfg);
    const Grid& g = surface.grid;
    if (g.dim() != 2)
        throw InvalidInput("additive fitting needs 2-D grid data; use fit on a profile");
    if (g.nx() == 1 || g.ny() == 1)
        throw InvalidInput("degenerate 1-row grid; use fit on a profile");
    if (g.nx() < kMinProfileLength || g.ny() < kMinProfileLength)
        throw InvalidInput("additive fitting needs at least 8 points per axis");
    if (surface.heights.size() != g.size())
        throw InvalidInput("field height count does not match its grid");

    std::vector<Profile> along_x, along_y;
    for (std::size_t j = 0; j < g.ny(); ++j)
        along_x.push_back(profile_along_x(surface, j));
    for (std::size_t i = 0; i < g.nx(); ++i)
        along_y.push_back(profile_along_y(surface, i));

    const AxisData ax = axis_data(along_x, cfg);
    const AxisData ay = axis_data(along_y, cfg);

    FitConfig cfg_y = cfg;
    cfg_y.seed = derive_seed(cfg.seed, 0xa415, 1);

    AdditiveFit out;
    out.representative_x = ax.representative;
    out.representative_y = ay.representative;
    out.report_x = fit_with_psds(along_x[ax.representative], ax.psds, cfg);
    out.report_y = fit_with_psds(along_y[ay.representative], ay.psds, cfg_y);
    out.x = out.report_x.best;
    out.y = out.report_y.best;
    return out;
}

} // namespace roughgp
