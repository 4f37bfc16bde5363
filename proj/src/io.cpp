#include "roughgp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace roughgp::io {

namespace {

/// Reads one JSON object and rejects keys that were never asked for.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key))
            throw ConfigError(field(key) + ": missing required field");
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number())
            throw ConfigError(field(key) + ": expected a number");
        return v.get<double>();
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key))
            return std::nullopt;
        return number(key);
    }

    std::uint64_t unsigned_integer(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number_unsigned())
            throw ConfigError(field(key) + ": expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::optional<std::uint64_t> optional_unsigned(const std::string& key) {
        if (!has(key) || j_.at(key).is_null()) {
            seen_.insert(key);
            return std::nullopt;
        }
        return unsigned_integer(key);
    }

    std::string string(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string())
            throw ConfigError(field(key) + ": expected a string");
        return v.get<std::string>();
    }

    /// Number or array of numbers.
    std::vector<double> numbers(const std::string& key) {
        const json& v = at(key);
        if (v.is_number())
            return {v.get<double>()};
        if (!v.is_array())
            throw ConfigError(field(key) + ": expected a number or an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number())
                throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    void ignore(const std::string& key) { seen_.insert(key); }

    std::string field(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key))
                throw ConfigError(field(key) + ": unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

AxisAcvf axis_from_json(const json& j, const std::string& path) {
    Acvf k = acvf_from_json(j, path);
    if (std::holds_alternative<AdditiveAcvf>(k))
        throw ConfigError(path + ": additive kernels cannot be nested");
    return std::visit(
        [](auto&& v) -> AxisAcvf {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, AdditiveAcvf>)
                throw ConfigError("unreachable");
            else
                return v;
        },
        k);
}

std::string kind_name(FieldKind k) { return k == FieldKind::latent ? "latent" : "noisy"; }

double parse_double(std::string_view token, std::size_t line) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError(line, "not a number: '" + std::string(token) + "'");
    if (!std::isfinite(v))
        throw ParseError(line, "non-finite value");
    return v;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',' || line[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < line.size() && !(line[j] == ' ' || line[j] == '\t' || line[j] == ',' || line[j] == '\r'))
            ++j;
        if (j > i)
            out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

struct RawGrid {
    std::optional<json> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> row_lines;
};

RawGrid read_raw(std::istream& in) {
    RawGrid raw;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        if (line[first] == '#') {
            if (raw.header || !raw.rows.empty())
                continue;
            // Only a JSON object opens a header; anything else is a comment.
            const std::string body = line.substr(first + 1);
            const auto start = body.find_first_not_of(" \t\r");
            if (start == std::string::npos || body[start] != '{')
                continue;
            try {
                raw.header = json::parse(body);
            } catch (const json::parse_error& e) {
                throw ParseError(number, std::string("bad header JSON: ") + e.what());
            }
            continue;
        }
        std::vector<double> row;
        for (auto tok : split(line))
            row.push_back(parse_double(tok, number));
        raw.rows.push_back(std::move(row));
        raw.row_lines.push_back(number);
    }
    return raw;
}

SurfaceField field_from_raw(const RawGrid& raw) {
    const json& h = *raw.header;
    StrictObject o(h, "header");
    try {
        if (o.string("format") != "roughgp-grid")
            throw ParseError(1, "header format is not roughgp-grid");
        o.ignore("version");
        const auto n = o.numbers("n");
        const auto spacing = o.numbers("spacing");
        std::vector<double> origin = o.has("origin") ? o.numbers("origin") : std::vector<double>(n.size(), 0.0);
        if (n.empty() || n.size() > 2 || spacing.size() != n.size() || origin.size() != n.size())
            throw ParseError(1, "header n/spacing/origin must have one entry per dimension");
        for (double v : n)
            if (!(v >= 1.0) || v != std::floor(v))
                throw ParseError(1, "header n must hold positive integers");
        const Grid grid = n.size() == 1
                              ? Grid::line(static_cast<std::size_t>(n[0]), spacing[0], origin[0])
                              : Grid::plane(static_cast<std::size_t>(n[0]), static_cast<std::size_t>(n[1]),
                                            spacing[0], spacing[1], origin[0], origin[1]);
        o.ignore("dimension");
        SurfaceField f{grid, {}, FieldKind::latent, {}};
        const std::string kind = o.has("kind") ? o.string("kind") : "noisy";
        if (kind != "latent" && kind != "noisy")
            throw ParseError(1, "header kind must be latent or noisy");
        f.kind = kind == "latent" ? FieldKind::latent : FieldKind::noisy;
        f.provenance.seed = o.optional_unsigned("seed");
        f.provenance.noise_seed = o.optional_unsigned("noise_seed");
        f.provenance.jitter = o.optional_number("jitter").value_or(0.0);
        f.provenance.noise_sigma = o.optional_number("noise_sigma").value_or(0.0);
        if (o.has("kernel") && !h.at("kernel").is_null())
            f.provenance.kernel = acvf_from_json(o.at("kernel"), "header.kernel");
        else
            o.ignore("kernel");
        o.finish();

        const std::size_t per_row = grid.dim() == 1 ? 1 : grid.ny();
        const std::size_t expected_rows = grid.nx();
        if (raw.rows.size() != expected_rows)
            throw ParseError(raw.row_lines.empty() ? 1 : raw.row_lines.back(),
                             "expected " + std::to_string(expected_rows) + " data rows, found " +
                                 std::to_string(raw.rows.size()));
        f.heights.reserve(grid.size());
        for (std::size_t r = 0; r < raw.rows.size(); ++r) {
            if (raw.rows[r].size() != per_row)
                throw ParseError(raw.row_lines[r], "expected " + std::to_string(per_row) + " values, found " +
                                                       std::to_string(raw.rows[r].size()));
            f.heights.insert(f.heights.end(), raw.rows[r].begin(), raw.rows[r].end());
        }
        return f;
    } catch (const ParseError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ParseError(1, e.what());
    }
}

std::vector<double> column_from_raw(const RawGrid& raw) {
    std::vector<double> out;
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        if (raw.rows[r].size() != 1)
            throw ParseError(raw.row_lines[r], "expected one value per line in a bare profile");
        out.push_back(raw.rows[r][0]);
    }
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(0, "cannot open " + path);
    return in;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc())
        throw Error("cannot format number");
    return std::string(buf, ptr);
}

// --- kernels ----------------------------------------------------------------

json to_json(const AxisAcvf& k) {
    return std::visit([](const auto& v) { return to_json(Acvf{v}); }, k);
}

json to_json(const Acvf& k) {
    json j;
    j["type"] = type_name(k);
    if (const auto* w = std::get_if<WhiteNoiseAcvf>(&k)) {
        j["variance"] = w->variance;
    } else if (const auto* e = std::get_if<ExponentialRotatedAcvf>(&k)) {
        j["variance"] = e->variance;
        j["lengthscale_a"] = e->lengthscale_a;
        j["lengthscale_b"] = e->lengthscale_b;
        j["angle"] = e->angle;
    } else if (const auto* s = std::get_if<SpectralMixtureAcvf>(&k)) {
        json comps = json::array();
        for (const auto& c : s->components)
            comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
        j["components"] = comps;
    } else if (const auto* a = std::get_if<AdditiveAcvf>(&k)) {
        j["x"] = to_json(a->x);
        j["y"] = to_json(a->y);
    }
    return j;
}

Acvf acvf_from_json(const json& j, const std::string& path) {
    StrictObject o(j, path);
    const std::string type = o.string("type");
    Acvf k;
    if (type == "white_noise") {
        k = WhiteNoiseAcvf{o.number("variance")};
    } else if (type == "exponential_rotated") {
        ExponentialRotatedAcvf e;
        e.variance = o.number("variance");
        e.lengthscale_a = o.number("lengthscale_a");
        e.lengthscale_b = o.optional_number("lengthscale_b").value_or(e.lengthscale_a);
        e.angle = o.optional_number("angle").value_or(0.0);
        k = e;
    } else if (type == "spectral_mixture") {
        const json& comps = o.at("components");
        if (!comps.is_array() || comps.empty())
            throw ConfigError(o.field("components") + ": expected a non-empty array");
        SpectralMixtureAcvf s;
        for (std::size_t q = 0; q < comps.size(); ++q) {
            StrictObject c(comps[q], o.field("components") + "[" + std::to_string(q) + "]");
            s.components.push_back(SpectralComponent{c.number("weight"), c.numbers("mean"), c.numbers("variance")});
            c.finish();
        }
        k = s;
    } else if (type == "additive") {
        k = AdditiveAcvf{axis_from_json(o.at("x"), o.field("x")), axis_from_json(o.at("y"), o.field("y"))};
    } else {
        throw ConfigError(o.field("type") + ": unknown kernel type '" + type + "'");
    }
    o.finish();
    const Validation v = is_valid(k);
    if (!v)
        throw InvalidKernel(path + ": " + v.message());
    return k;
}

// --- grid -------------------------------------------------------------------

json to_json(const Grid& g) {
    if (g.dim() == 1)
        return {{"n", {g.nx()}}, {"spacing", {g.dx()}}, {"origin", {g.origin_x()}}};
    return {{"n", {g.nx(), g.ny()}}, {"spacing", {g.dx(), g.dy()}}, {"origin", {g.origin_x(), g.origin_y()}}};
}

Grid grid_from_json(const json& j, const std::string& path) {
    StrictObject o(j, path);
    const json& n = o.at("n");
    if (!n.is_array() || n.empty() || n.size() > 2)
        throw ConfigError(o.field("n") + ": expected an array of 1 or 2 point counts");
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (!n[i].is_number_unsigned() || n[i].get<std::uint64_t>() < 1)
            throw ConfigError(o.field("n") + "[" + std::to_string(i) + "]: expected a positive integer");
        counts.push_back(n[i].get<std::size_t>());
    }
    const auto spacing = o.numbers("spacing");
    const auto origin = o.has("origin") ? o.numbers("origin") : std::vector<double>(counts.size(), 0.0);
    o.finish();
    if (spacing.size() != counts.size())
        throw ConfigError(o.field("spacing") + ": expected one entry per dimension");
    if (origin.size() != counts.size())
        throw ConfigError(o.field("origin") + ": expected one entry per dimension");
    try {
        return counts.size() == 1 ? Grid::line(counts[0], spacing[0], origin[0])
                                  : Grid::plane(counts[0], counts[1], spacing[0], spacing[1], origin[0], origin[1]);
    } catch (const InvalidInput& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// --- fitting ----------------------------------------------------------------

json to_json(const SpectralMixtureParams& p) {
    return {{"weights", p.weights}, {"means", p.means}, {"variances", p.variances}, {"noise_variance", p.noise_variance}};
}

SpectralMixtureParams params_from_json(const json& j, const std::string& path) {
    StrictObject o(j, path);
    SpectralMixtureParams p;
    p.weights = o.numbers("weights");
    p.means = o.numbers("means");
    p.variances = o.numbers("variances");
    p.noise_variance = o.number("noise_variance");
    o.finish();
    if (p.means.size() != p.weights.size() || p.variances.size() != p.weights.size())
        throw ConfigError(path + ": weights, means and variances must have equal length");
    return p;
}

json to_json(const FitReport& r) {
    json cands = json::array();
    for (const auto& c : r.candidates) {
        json jc{{"source", c.source},
                {"restart", c.restart},
                {"failed", c.failed},
                {"initial", to_json(c.initial)},
                {"initial_lml", c.initial_lml}};
        if (c.failed) {
            jc["diagnostic"] = c.diagnostic;
        } else {
            jc["final"] = to_json(c.final_params);
            jc["final_lml"] = c.final_lml;
            jc["iterations"] = c.iterations;
            jc["converged"] = c.converged;
            jc["trace"] = c.trace;
        }
        cands.push_back(std::move(jc));
    }
    return {{"best_index", r.best_index}, {"best", to_json(r.best)}, {"candidates", cands}, {"dropped", r.dropped}};
}

// --- grid files --------------------------------------------------------------

void write_grid(std::ostream& out, const SurfaceField& f) {
    if (f.heights.size() != f.grid.size())
        throw InvalidInput("field height count does not match its grid");
    json h{{"format", "roughgp-grid"}, {"version", 1}, {"dimension", f.grid.dim()}};
    const json g = to_json(f.grid);
    h["n"] = g["n"];
    h["spacing"] = g["spacing"];
    h["origin"] = g["origin"];
    h["kind"] = kind_name(f.kind);
    if (f.provenance.seed)
        h["seed"] = *f.provenance.seed;
    if (f.provenance.noise_seed)
        h["noise_seed"] = *f.provenance.noise_seed;
    h["noise_sigma"] = f.provenance.noise_sigma;
    h["jitter"] = f.provenance.jitter;
    if (f.provenance.kernel)
        h["kernel"] = to_json(*f.provenance.kernel);
    out << "# " << h.dump() << '\n';
    const std::size_t per_row = f.grid.dim() == 1 ? 1 : f.grid.ny();
    for (std::size_t r = 0; r < f.grid.nx(); ++r) {
        for (std::size_t c = 0; c < per_row; ++c) {
            if (c)
                out << ' ';
            out << format_double(f.heights[r * per_row + c]);
        }
        out << '\n';
    }
}

SurfaceField read_grid(std::istream& in) {
    const RawGrid raw = read_raw(in);
    if (!raw.header)
        throw ParseError(1, "missing '# {...}' grid header");
    return field_from_raw(raw);
}

void write_grid_file(const std::string& path, const SurfaceField& field) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    write_grid(out, field);
    if (!out)
        throw Error("failed writing " + path);
}

SurfaceField read_grid_file(const std::string& path) {
    auto in = open_input(path);
    return read_grid(in);
}

SurfaceField read_surface_or_profile(std::istream& in, double spacing) {
    const RawGrid raw = read_raw(in);
    if (raw.header)
        return field_from_raw(raw);
    const auto values = column_from_raw(raw);
    if (values.empty())
        throw ParseError(0, "no data values");
    SurfaceField f{Grid::line(values.size(), spacing), values, FieldKind::noisy, {}};
    return f;
}

Profile read_profile(std::istream& in, double spacing) {
    const SurfaceField f = read_surface_or_profile(in, spacing);
    if (f.grid.dim() != 1)
        throw ParseError(1, "expected a profile (1-D grid)");
    try {
        return Profile(f.heights, f.grid.dx());
    } catch (const InvalidInput& e) {
        throw ParseError(0, e.what());
    }
}

// --- PSD files ---------------------------------------------------------------

json psd_header(const PsdEstimate& psd, const PsdMetadata& meta) {
    const double total = psd.total_power();
    const double rel = meta.sample_variance > 0.0 ? std::abs(total - meta.sample_variance) / meta.sample_variance
                                                  : std::abs(total);
    json h{{"format", "roughgp-psd"},
           {"version", 1},
           {"method", to_string(psd.method)},
           {"points", meta.points},
           {"spacing", meta.spacing},
           {"segment_length", psd.segment_length},
           {"bin_width", psd.bin_width},
           {"peak_frequency", psd.peak_frequency()},
           {"parseval",
            {{"total_power", total},
             {"sample_variance", meta.sample_variance},
             {"relative_error", rel},
             {"ok", rel <= kParsevalTolerance}}}};
    if (meta.welch) {
        h["overlap"] = meta.welch->overlap;
        h["window"] = to_string(meta.welch->window);
    }
    return h;
}

void write_psd(std::ostream& out, const PsdEstimate& psd, const PsdMetadata& meta) {
    out << "# " << psd_header(psd, meta).dump() << '\n';
    for (std::size_t i = 0; i < psd.frequencies.size(); ++i)
        out << format_double(psd.frequencies[i]) << ' ' << format_double(psd.densities[i]) << '\n';
}

PsdEstimate read_psd(std::istream& in) {
    const RawGrid raw = read_raw(in);
    if (!raw.header)
        throw ParseError(1, "missing '# {...}' PSD header");
    const json& h = *raw.header;
    PsdEstimate psd;
    try {
        const std::string method = h.at("method").get<std::string>();
        psd.method = method == "welch" ? PsdMethod::welch
                     : method == "averaged" ? PsdMethod::averaged
                                            : PsdMethod::periodogram;
        psd.bin_width = h.at("bin_width").get<double>();
        psd.segment_length = h.at("segment_length").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ParseError(1, std::string("bad PSD header: ") + e.what());
    }
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        if (raw.rows[r].size() != 2)
            throw ParseError(raw.row_lines[r], "expected 'frequency density'");
        psd.frequencies.push_back(raw.rows[r][0]);
        psd.densities.push_back(raw.rows[r][1]);
    }
    return psd;
}

// --- configs -----------------------------------------------------------------

std::vector<HoningStep> HoningConfig::resolved_steps() const {
    std::vector<HoningStep> out;
    for (std::size_t p = 0; p < steps.size(); ++p) {
        HoningStep s = HoningStep::from_master(steps[p].kernel, seed, p);
        if (steps[p].seed_plus)
            s.seed_plus = *steps[p].seed_plus;
        if (steps[p].seed_minus)
            s.seed_minus = *steps[p].seed_minus;
        out.push_back(s);
    }
    return out;
}

SimulationConfig config_from_json(const json& j) {
    StrictObject o(j, "config");
    const Grid grid = grid_from_json(o.at("grid"), "config.grid");
    const double sigma = o.optional_number("noise_sigma").value_or(0.0);
    if (!(sigma >= 0.0))
        throw ConfigError("config.noise_sigma: must be non-negative");
    const std::uint64_t seed = o.optional_unsigned("seed").value_or(0);

    if (o.has("steps")) {
        if (o.has("kernel"))
            throw ConfigError("config: give either kernel or steps, not both");
        const json& steps = o.at("steps");
        if (!steps.is_array() || steps.empty())
            throw ConfigError("config.steps: expected a non-empty array");
        HoningConfig c{grid, {}, sigma, seed};
        for (std::size_t p = 0; p < steps.size(); ++p) {
            const std::string path = "config.steps[" + std::to_string(p) + "]";
            StrictObject s(steps[p], path);
            const Acvf k = acvf_from_json(s.at("kernel"), path + ".kernel");
            const auto* e = std::get_if<ExponentialRotatedAcvf>(&k);
            if (!e)
                throw InvalidKernel(path + ".kernel: honing steps use the exponential_rotated kernel");
            if (e->angle == 0.0)
                throw InvalidKernel(path + ".kernel.angle: must be non-zero for mirrored grooves");
            HoningStepConfig step{*e, std::nullopt, std::nullopt};
            if (s.has("seeds")) {
                const json& seeds = s.at("seeds");
                if (!seeds.is_array() || seeds.size() != 2 || !seeds[0].is_number_unsigned() ||
                    !seeds[1].is_number_unsigned())
                    throw ConfigError(path + ".seeds: expected [seed_plus, seed_minus]");
                step.seed_plus = seeds[0].get<std::uint64_t>();
                step.seed_minus = seeds[1].get<std::uint64_t>();
            }
            s.finish();
            c.steps.push_back(step);
        }
        o.finish();
        if (grid.dim() != 2)
            throw ConfigError("config.grid: honing needs a 2-D grid");
        return c;
    }

    ModelConfig c{grid, acvf_from_json(o.at("kernel"), "config.kernel"), sigma, seed};
    o.finish();
    if (!accepts_dimension(c.kernel, grid.dim()))
        throw InvalidKernel("config.kernel: " + type_name(c.kernel) + " kernel does not match a " +
                            std::to_string(grid.dim()) + "-D grid");
    return c;
}

json to_json(const ModelConfig& c) {
    return {{"grid", to_json(c.grid)}, {"kernel", to_json(c.kernel)}, {"noise_sigma", c.noise_sigma}, {"seed", c.seed}};
}

json to_json(const HoningConfig& c) {
    json steps = json::array();
    for (const auto& s : c.steps) {
        json js{{"kernel", to_json(Acvf{s.kernel})}};
        if (s.seed_plus && s.seed_minus)
            js["seeds"] = {*s.seed_plus, *s.seed_minus};
        steps.push_back(std::move(js));
    }
    return {{"grid", to_json(c.grid)}, {"steps", steps}, {"noise_sigma", c.noise_sigma}, {"seed", c.seed}};
}

json parse_json(std::istream& in, const std::string& what) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

SimulationConfig read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path);
    return config_from_json(parse_json(in, path));
}

} // namespace roughgp::io
