// roughgp: simulate, estimate-psd, fit, validate, compose.
//
// Exit codes: 0 ok, 1 usage or invalid argument, 2 grid above the sampling
// cap, 3 invalid kernel or config, 4 malformed or too-short input, 5 every
// fit candidate failed, 6 covariance not positive definite.
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "roughgp/composition.hpp"
#include "roughgp/errors.hpp"
#include "roughgp/gp_sampling.hpp"
#include "roughgp/io.hpp"
#include "roughgp/model_selection.hpp"
#include "roughgp/spectral_estimation.hpp"

using namespace roughgp;
using io::json;

namespace {

enum Exit : int {
    kOk = 0,
    kUsage = 1,
    kCap = 2,
    kBadKernel = 3,
    kBadInput = 4,
    kFitFailed = 5,
    kNotPd = 6,
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out;
    bool quiet = false;
};

Globals g;

void note(const std::string& msg) {
    if (!g.quiet)
        std::cerr << msg << '\n';
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    std::uint32_t w[2];
    seq.generate(w, w + 2);
    return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

std::string stem_of(const std::string& out) {
    const std::string ext = ".txt";
    if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0)
        return out.substr(0, out.size() - ext.size());
    return out;
}

void emit_grid(const std::string& path, const SurfaceField& f) {
    if (path == "-") {
        io::write_grid(std::cout, f);
        return;
    }
    io::write_grid_file(path, f);
    note("wrote " + path);
}

void emit_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << text;
    if (!out)
        throw Error("failed writing " + path);
    note("wrote " + path);
}

std::ifstream open(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io::ParseError(0, "cannot open " + path);
    return in;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::size_t count = 1;
    bool noisy_only = false;
    bool keep_intermediates = false;
    std::size_t max_points = kDefaultMaxPoints;
};

int run_simulate(const SimulateArgs& a) {
    if (a.count == 0)
        throw UsageError("--count must be >= 1");
    if (g.out.empty())
        throw UsageError("simulate needs --out");
    if (g.out == "-" && (a.count != 1 || a.keep_intermediates))
        throw UsageError("--out - writes a single noisy field; use --count 1 without --keep-intermediates");
    const io::SimulationConfig config = io::read_config_file(a.config);
    const std::string stem = stem_of(g.out);
    const auto name = [&](std::size_t k, const std::string& tag) {
        return stem + "-" + std::to_string(k) + "-" + tag + ".txt";
    };

    std::vector<SurfaceField> latent;
    std::vector<std::vector<SurfaceField>> constituents;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    if (const auto* m = std::get_if<io::ModelConfig>(&config)) {
        seed = g.seed.value_or(m->seed);
        noise_sigma = m->noise_sigma;
        const LatentSampler sampler(m->grid, m->kernel, a.max_points);
        latent = sampler.draw(seed, a.count);
        if (sampler.jitter() > 0.0)
            note("applied jitter " + io::format_double(sampler.jitter()));
    } else {
        io::HoningConfig h = std::get<io::HoningConfig>(config);
        seed = g.seed.value_or(h.seed);
        h.seed = seed;
        noise_sigma = h.noise_sigma;
        const auto base = h.resolved_steps();
        for (std::size_t k = 0; k < a.count; ++k) {
            std::vector<HoningStep> steps = base;
            if (k > 0)
                for (auto& s : steps) {
                    s.seed_plus = derive_seed(s.seed_plus, 0x4e, k);
                    s.seed_minus = derive_seed(s.seed_minus, 0x4e, k);
                }
            HoningResult r = simulate_honed(h.grid, steps, a.max_points);
            latent.push_back(std::move(r.surface));
            constituents.push_back(std::move(r.constituents));
        }
    }

    for (std::size_t k = 0; k < latent.size(); ++k) {
        const SurfaceField noisy = add_gaussian_noise(latent[k], noise_sigma, derive_seed(seed, 0x9015e, k));
        if (g.out == "-") {
            emit_grid("-", noisy);
            continue;
        }
        if (!a.noisy_only)
            emit_grid(name(k, "latent"), latent[k]);
        emit_grid(name(k, "noisy"), noisy);
        if (a.keep_intermediates && !constituents.empty())
            for (std::size_t c = 0; c < constituents[k].size(); ++c)
                emit_grid(name(k, "step" + std::to_string(c / 2) + (c % 2 == 0 ? "-plus" : "-minus")),
                          constituents[k][c]);
    }
    return kOk;
}

// --- estimate-psd -----------------------------------------------------------

struct PsdArgs {
    std::string input;
    std::string method = "periodogram";
    std::optional<std::size_t> segment_length;
    double overlap = 0.5;
    std::string window = "hann";
    double dx = 1.0;
};

int run_estimate_psd(const PsdArgs& a) {
    auto in = open(a.input);
    const Profile profile = io::read_profile(in, a.dx);
    io::PsdMetadata meta{profile.size(), profile.spacing(), std::nullopt, sample_variance(profile.heights())};
    PsdEstimate psd;
    if (a.method == "welch") {
        WelchOptions w;
        w.segment_length = a.segment_length;
        w.overlap = a.overlap;
        w.window = a.window == "rectangular" ? Window::rectangular : Window::hann;
        psd = welch(profile, w);
        w.segment_length = psd.segment_length;
        meta.welch = w;
    } else {
        psd = periodogram(profile);
    }
    std::ostringstream text;
    io::write_psd(text, psd, meta);
    emit_text(g.out.empty() ? "-" : g.out, text.str());
    return kOk;
}

// --- fit ---------------------------------------------------------------------

struct FitArgs {
    std::string input;
    std::size_t q = 1;
    std::string axis_mode = "profile";
    std::size_t restarts = 10;
    std::size_t psd_samples = 10000;
    std::size_t max_iter = 500;
    double tol = 1e-6;
    std::size_t max_points = 512;
    std::string report;
    double dx = 1.0;
};

int run_fit(const FitArgs& a) {
    if (a.q == 0)
        throw UsageError("Q must be >= 1");
    if (g.out.empty())
        throw UsageError("fit needs --out");
    FitConfig cfg;
    cfg.q = a.q;
    cfg.n_restarts = a.restarts;
    cfg.n_psd_samples = a.psd_samples;
    cfg.max_iterations = a.max_iter;
    cfg.tolerance = a.tol;
    cfg.max_likelihood_points = a.max_points;
    cfg.seed = g.seed.value_or(0);

    auto in = open(a.input);
    const SurfaceField data = io::read_surface_or_profile(in, a.dx);

    io::ModelConfig model{data.grid, WhiteNoiseAcvf{}, 0.0, cfg.seed};
    json report;
    if (a.axis_mode == "additive") {
        const AdditiveFit f = fit_additive(data, cfg);
        model.kernel = f.kernel();
        model.noise_sigma = std::sqrt(f.noise_variance());
        report = {{"mode", "additive"},
                  {"q", a.q},
                  {"noise_variance", f.noise_variance()},
                  {"x", io::to_json(f.report_x)},
                  {"y", io::to_json(f.report_y)},
                  {"representative_x", f.representative_x},
                  {"representative_y", f.representative_y}};
    } else {
        if (data.grid.dim() != 1)
            throw io::ParseError(0, "profile mode needs a 1-D input; use --axis-mode additive for grids");
        const Profile profile(data.heights, data.grid.dx());
        const FitReport r = fit(profile, cfg);
        model.kernel = r.best.kernel();
        model.noise_sigma = std::sqrt(r.best.noise_variance);
        report = {{"mode", "profile"}, {"q", a.q}, {"report", io::to_json(r)}};
    }
    report["model"] = io::to_json(model);

    emit_text(g.out, io::to_json(model).dump(2) + "\n");
    std::string report_path = a.report;
    if (report_path.empty() && g.out != "-")
        report_path = g.out + ".report.json";
    if (!report_path.empty())
        emit_text(report_path, report.dump(2) + "\n");
    return kOk;
}

// --- validate ----------------------------------------------------------------

struct ValidateArgs {
    std::string config;
    std::size_t samples = 50;
    std::size_t max_points = kDefaultMaxPoints;
};

int run_validate(const ValidateArgs& a) {
    if (a.samples < 2)
        throw UsageError("need at least 2 samples");
    const io::SimulationConfig config = io::read_config_file(a.config);
    const auto* m = std::get_if<io::ModelConfig>(&config);
    if (!m)
        throw io::ConfigError("config: validate needs a single-kernel config, not a honing config");
    const std::uint64_t seed = g.seed.value_or(m->seed);
    const double mae = sample_covariance_mae(m->grid, m->kernel, a.samples, seed, a.max_points);
    const double predicted = predicted_covariance_mae(m->grid, m->kernel, a.samples);
    const json r{{"points", m->grid.size()},
                 {"samples", a.samples},
                 {"seed", seed},
                 {"covariance_mae", mae},
                 {"predicted_mae", predicted},
                 {"ratio", mae / predicted}};
    std::cout << "points         " << m->grid.size() << '\n'
              << "samples        " << a.samples << '\n'
              << "covariance_mae " << io::format_double(mae) << '\n'
              << "predicted_mae  " << io::format_double(predicted) << '\n'
              << "ratio          " << io::format_double(mae / predicted) << '\n';
    if (!g.out.empty() && g.out != "-")
        emit_text(g.out, r.dump(2) + "\n");
    return kOk;
}

// --- compose -----------------------------------------------------------------

int run_compose(const std::vector<std::string>& inputs) {
    if (g.out.empty())
        throw UsageError("compose needs --out");
    std::vector<SurfaceField> fields;
    for (const auto& p : inputs)
        fields.push_back(io::read_grid_file(p));
    emit_grid(g.out, min_compose(fields));
    return kOk;
}

int fail(int code, const std::string& msg) {
    std::cerr << "roughgp: " << msg << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-process rough surface simulation and spectral-mixture fitting"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g.seed, "Seed (overrides the config seed)");
    app.add_option("--out", g.out, "Output path or stem; '-' for stdout");
    app.add_flag("--quiet", g.quiet, "Suppress progress messages");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Sample latent and noisy fields from a config");
    s->add_option("config", sim.config, "Model or honing config (JSON)")->required();
    s->add_option("--count", sim.count, "Number of realizations");
    s->add_flag("--noisy-only", sim.noisy_only, "Write only the noisy fields");
    s->add_flag("--keep-intermediates", sim.keep_intermediates, "Also write honing constituents");
    s->add_option("--max-points", sim.max_points, "Exact-sampling cap on grid points");

    PsdArgs psd;
    auto* e = app.add_subcommand("estimate-psd", "Estimate the PSD of a profile");
    e->add_option("input", psd.input, "Profile grid file or column of numbers")->required();
    e->add_option("--method", psd.method)->check(CLI::IsMember({"periodogram", "welch"}));
    e->add_option("--segment-len", psd.segment_length, "Welch segment length");
    e->add_option("--overlap", psd.overlap, "Welch fractional overlap");
    e->add_option("--window", psd.window)->check(CLI::IsMember({"hann", "rectangular"}));
    e->add_option("--dx", psd.dx, "Spacing of a headerless input");

    FitArgs fa;
    auto* f = app.add_subcommand("fit", "Fit a spectral-mixture model");
    f->add_option("input", fa.input, "Profile or grid file")->required();
    f->add_option("--q", fa.q, "Mixture components");
    f->add_option("--axis-mode", fa.axis_mode)->check(CLI::IsMember({"profile", "additive"}));
    f->add_option("--restarts", fa.restarts, "EM restarts per PSD estimate");
    f->add_option("--psd-samples", fa.psd_samples, "Frequencies drawn from each PSD");
    f->add_option("--max-iter", fa.max_iter, "Optimizer iterations per candidate");
    f->add_option("--tol", fa.tol, "Relative convergence tolerance");
    f->add_option("--max-points", fa.max_points, "Points entering the likelihood");
    f->add_option("--report", fa.report, "Report path (default <out>.report.json)");
    f->add_option("--dx", fa.dx, "Spacing of a headerless input");

    ValidateArgs va;
    auto* v = app.add_subcommand("validate", "Compare sample and target covariance");
    v->add_option("config", va.config, "Model config (JSON)")->required();
    v->add_option("--samples", va.samples, "Latent samples");
    v->add_option("--max-points", va.max_points, "Exact-sampling cap on grid points");

    std::vector<std::string> inputs;
    auto* c = app.add_subcommand("compose", "Pointwise minimum of grid files");
    c->add_option("inputs", inputs, "Grid files on one grid")->required()->expected(2, -1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? kOk : kUsage;
    }

    try {
        if (s->parsed())
            return run_simulate(sim);
        if (e->parsed())
            return run_estimate_psd(psd);
        if (f->parsed())
            return run_fit(fa);
        if (v->parsed())
            return run_validate(va);
        return run_compose(inputs);
    } catch (const UsageError& err) {
        return fail(kUsage, err.what());
    } catch (const CapExceeded& err) {
        return fail(kCap, err.what());
    } catch (const InvalidKernel& err) {
        return fail(kBadKernel, err.what());
    } catch (const io::ConfigError& err) {
        return fail(kBadKernel, err.what());
    } catch (const InvalidInput& err) {
        return fail(kBadInput, err.what());
    } catch (const FitFailed& err) {
        return fail(kFitFailed, err.what());
    } catch (const NotPositiveDefinite& err) {
        return fail(kNotPd, err.what());
    } catch (const std::exception& err) {
        return fail(kUsage, err.what());
    }
}
