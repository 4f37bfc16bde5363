// Text file formats and JSON documents shared by the CLI and the library.
//
// Grid file:  one "# {json}" header line, then heights row-major. A 2-D grid
//             has nx lines of ny values; a 1-D grid one value per line.
// PSD file:   one "# {json}" header line, then "frequency density" lines.
// Configs:    JSON objects; unknown fields are rejected with their path.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "roughgp/errors.hpp"
#include "roughgp/composition.hpp"
#include "roughgp/gp_sampling.hpp"
#include "roughgp/kernels.hpp"
#include "roughgp/model_selection.hpp"
#include "roughgp/spectral_estimation.hpp"

namespace roughgp::io {

using json = nlohmann::json;

/// Malformed data file; `line` is 1-based, 0 when not tied to a line.
class ParseError : public InvalidInput {
public:
    ParseError(std::size_t line, const std::string& what)
        : InvalidInput(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Schema violation in a JSON config or kernel document.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

json to_json(const Acvf& k);
json to_json(const AxisAcvf& k);
Acvf acvf_from_json(const json& j, const std::string& path = "kernel");

json to_json(const Grid& g);
Grid grid_from_json(const json& j, const std::string& path = "grid");

json to_json(const SpectralMixtureParams& p);
SpectralMixtureParams params_from_json(const json& j, const std::string& path = "params");

json to_json(const FitReport& r);

// --- surface grids --------------------------------------------------------

void write_grid(std::ostream& out, const SurfaceField& field);
SurfaceField read_grid(std::istream& in);
void write_grid_file(const std::string& path, const SurfaceField& field);
SurfaceField read_grid_file(const std::string& path);

/// A 1-D grid file, or a bare column of numbers sampled at `spacing`.
Profile read_profile(std::istream& in, double spacing = 1.0);

/// A grid file of either dimension, or a bare column read as a 1-D grid.
SurfaceField read_surface_or_profile(std::istream& in, double spacing = 1.0);

// --- PSD estimates --------------------------------------------------------

struct PsdMetadata {
    std::size_t points = 0;
    double spacing = 1.0;
    std::optional<WelchOptions> welch;
    double sample_variance = 0.0;
};

/// Header records Parseval total power vs sample variance and the peak bin.
void write_psd(std::ostream& out, const PsdEstimate& psd, const PsdMetadata& meta);
PsdEstimate read_psd(std::istream& in);
json psd_header(const PsdEstimate& psd, const PsdMetadata& meta);

// --- configs --------------------------------------------------------------

/// Relative Parseval tolerance reported in PSD headers.
inline constexpr double kParsevalTolerance = 1e-10;

struct ModelConfig {
    Grid grid;
    Acvf kernel;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const ModelConfig&) const = default;
};

struct HoningStepConfig {
    ExponentialRotatedAcvf kernel;
    std::optional<std::uint64_t> seed_plus;
    std::optional<std::uint64_t> seed_minus;

    bool operator==(const HoningStepConfig&) const = default;
};

struct HoningConfig {
    Grid grid;
    std::vector<HoningStepConfig> steps;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    /// Steps with missing seeds derived from `seed`.
    std::vector<HoningStep> resolved_steps() const;

    bool operator==(const HoningConfig&) const = default;
};

using SimulationConfig = std::variant<ModelConfig, HoningConfig>;

SimulationConfig config_from_json(const json& j);
json to_json(const ModelConfig& c);
json to_json(const HoningConfig& c);

json parse_json(std::istream& in, const std::string& what);
SimulationConfig read_config_file(const std::string& path);

} // namespace roughgp::io
