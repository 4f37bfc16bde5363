#include "roughgp/kernels.hpp"

#include <cmath>
#include <numbers>

#include "roughgp/errors.hpp"

namespace roughgp {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void check_mixture(const SpectralMixtureAcvf& k, Validation& out, const std::string& prefix) {
    if (k.components.empty()) {
        out.problems.push_back(prefix + "spectral mixture needs at least one component");
        return;
    }
    const std::size_t d = k.components.front().mean.size();
    if (d != 1 && d != 2)
        out.problems.push_back(prefix + "spectral mixture dimension must be 1 or 2");
    for (std::size_t q = 0; q < k.components.size(); ++q) {
        const auto& c = k.components[q];
        const std::string at = prefix + "component " + std::to_string(q) + ": ";
        if (!positive_finite(c.weight))
            out.problems.push_back(at + "weight must be positive");
        if (c.mean.size() != d || c.variance.size() != d) {
            out.problems.push_back(at + "mean and variance must have one entry per dimension");
            continue;
        }
        for (double m : c.mean)
            if (!std::isfinite(m) || m < 0.0)
                out.problems.push_back(at + "mean frequency must be non-negative");
        for (double s : c.variance)
            if (!std::isfinite(s) || s < kMinSpectralVariance)
                out.problems.push_back(at + "spectral variance must be at least 1e-12");
    }
}

void check_axis(const AxisAcvf& k, Validation& out, const std::string& prefix) {
    std::visit(overloaded{
                   [&](const WhiteNoiseAcvf& w) {
                       if (!positive_finite(w.variance))
                           out.problems.push_back(prefix + "variance must be positive");
                   },
                   [&](const ExponentialRotatedAcvf& e) {
                       if (!positive_finite(e.variance))
                           out.problems.push_back(prefix + "variance must be positive");
                       if (!positive_finite(e.lengthscale_a) || !positive_finite(e.lengthscale_b))
                           out.problems.push_back(prefix + "lengthscale must be positive");
                       if (!std::isfinite(e.angle) || e.angle < -kPi || e.angle >= kPi)
                           out.problems.push_back(prefix + "angle must lie in [-pi, pi)");
                   },
                   [&](const SpectralMixtureAcvf& s) { check_mixture(s, out, prefix); },
               },
               k);
}

int axis_dim_ok(const AxisAcvf& k) {
    if (const auto* s = std::get_if<SpectralMixtureAcvf>(&k))
        return s->dim();
    return 1;
}

} // namespace

Lag::Lag(double tx) : dim_(1), c_{tx, 0.0} {
    if (!std::isfinite(tx))
        throw InvalidInput("lag components must be finite");
}

Lag::Lag(double tx, double ty) : dim_(2), c_{tx, ty} {
    if (!std::isfinite(tx) || !std::isfinite(ty))
        throw InvalidInput("lag components must be finite");
}

double Lag::norm() const noexcept { return std::hypot(c_[0], c_[1]); }

Lag Lag::operator-() const { return dim_ == 1 ? Lag(-c_[0]) : Lag(-c_[0], -c_[1]); }

int SpectralMixtureAcvf::dim() const {
    return components.empty() ? 0 : static_cast<int>(components.front().mean.size());
}

double SpectralMixtureAcvf::total_weight() const {
    double s = 0.0;
    for (const auto& c : components)
        s += c.weight;
    return s;
}

Lag rotate_lag(const Lag& tau, double angle) {
    if (tau.dim() != 2)
        throw InvalidInput("rotate_lag needs a 2-D lag");
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return Lag(c * tau.x() + s * tau.y(), -s * tau.x() + c * tau.y());
}

double evaluate(const WhiteNoiseAcvf& k, const Lag& tau) { return tau.is_zero() ? k.variance : 0.0; }

double evaluate(const ExponentialRotatedAcvf& k, const Lag& tau) {
    if (tau.dim() == 1)
        return k.variance * std::exp(-std::abs(tau.x()) / k.lengthscale_a);
    const Lag r = rotate_lag(tau, k.angle);
    const double u = r.x() / k.lengthscale_a;
    const double v = r.y() / k.lengthscale_b;
    return k.variance * std::exp(-std::sqrt(u * u + v * v));
}

double evaluate(const SpectralMixtureAcvf& k, const Lag& tau) {
    if (tau.dim() != k.dim())
        throw InvalidInput("lag dimension " + std::to_string(tau.dim()) +
                           " does not match spectral mixture dimension " + std::to_string(k.dim()));
    double sum = 0.0;
    for (const auto& c : k.components) {
        double phase = 0.0;
        double quad = 0.0;
        for (int d = 0; d < tau.dim(); ++d) {
            const auto i = static_cast<std::size_t>(d);
            phase += tau[d] * c.mean[i];
            quad += tau[d] * tau[d] * c.variance[i];
        }
        sum += c.weight * std::cos(2.0 * kPi * phase) * std::exp(-2.0 * kPi * kPi * quad);
    }
    return sum;
}

double evaluate(const AxisAcvf& k, const Lag& tau) {
    return std::visit([&](const auto& a) { return evaluate(a, tau); }, k);
}

double evaluate(const AdditiveAcvf& k, const Lag& tau) {
    if (tau.dim() != 2)
        throw InvalidInput("additive kernel needs a 2-D lag");
    return evaluate(k.x, Lag(tau.x())) + evaluate(k.y, Lag(tau.y()));
}

bool accepts_dimension(const Acvf& k, int dim) {
    return std::visit(overloaded{
                          [&](const WhiteNoiseAcvf&) { return dim == 1 || dim == 2; },
                          [&](const ExponentialRotatedAcvf&) { return dim == 1 || dim == 2; },
                          [&](const SpectralMixtureAcvf& s) { return s.dim() == dim; },
                          [&](const AdditiveAcvf&) { return dim == 2; },
                      },
                      k);
}

double evaluate(const Acvf& k, const Lag& tau) {
    if (!accepts_dimension(k, tau.dim()))
        throw InvalidInput(type_name(k) + " kernel does not accept a " + std::to_string(tau.dim()) +
                           "-D lag");
    return std::visit([&](const auto& a) { return evaluate(a, tau); }, k);
}

double variance_at_origin(const Acvf& k, int dim) {
    return evaluate(k, dim == 1 ? Lag(0.0) : Lag(0.0, 0.0));
}

double spectral_density(const SpectralMixtureAcvf& k, std::span<const double> frequency) {
    if (static_cast<int>(frequency.size()) != k.dim())
        throw InvalidInput("frequency dimension does not match spectral mixture dimension");
    double sum = 0.0;
    for (const auto& c : k.components) {
        double plus = 1.0;
        double minus = 1.0;
        for (std::size_t d = 0; d < frequency.size(); ++d) {
            const double s = c.variance[d];
            const double norm = 1.0 / std::sqrt(2.0 * kPi * s);
            const double dp = frequency[d] - c.mean[d];
            const double dm = frequency[d] + c.mean[d];
            plus *= norm * std::exp(-0.5 * dp * dp / s);
            minus *= norm * std::exp(-0.5 * dm * dm / s);
        }
        sum += 0.5 * c.weight * (plus + minus);
    }
    return sum;
}

double spectral_density(const SpectralMixtureAcvf& k, double frequency) {
    return spectral_density(k, std::span<const double>(&frequency, 1));
}

std::string Validation::message() const {
    std::string out;
    for (const auto& p : problems) {
        if (!out.empty())
            out += "; ";
        out += p;
    }
    return out;
}

Validation is_valid(const AxisAcvf& k) {
    Validation v;
    check_axis(k, v, "");
    return v;
}

Validation is_valid(const Acvf& k) {
    Validation v;
    std::visit(overloaded{
                   [&](const WhiteNoiseAcvf& w) { check_axis(w, v, ""); },
                   [&](const ExponentialRotatedAcvf& e) { check_axis(e, v, ""); },
                   [&](const SpectralMixtureAcvf& s) { check_axis(s, v, ""); },
                   [&](const AdditiveAcvf& a) {
                       check_axis(a.x, v, "x: ");
                       check_axis(a.y, v, "y: ");
                       if (axis_dim_ok(a.x) != 1)
                           v.problems.push_back("x: additive components must be 1-D");
                       if (axis_dim_ok(a.y) != 1)
                           v.problems.push_back("y: additive components must be 1-D");
                   },
               },
               k);
    return v;
}

void require_valid(const Acvf& k) {
    const Validation v = is_valid(k);
    if (!v)
        throw InvalidKernel("invalid " + type_name(k) + " kernel: " + v.message());
}

std::string type_name(const Acvf& k) {
    return std::visit(overloaded{
                          [](const WhiteNoiseAcvf&) { return std::string("white_noise"); },
                          [](const ExponentialRotatedAcvf&) { return std::string("exponential_rotated"); },
                          [](const SpectralMixtureAcvf&) { return std::string("spectral_mixture"); },
                          [](const AdditiveAcvf&) { return std::string("additive"); },
                      },
                      k);
}

} // namespace roughgp
