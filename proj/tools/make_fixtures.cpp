// Regenerates the checked-in fixtures: make_fixtures <dir>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include "roughgp/fixtures.hpp"
#include "roughgp/io.hpp"

using namespace roughgp;
using io::json;

namespace {

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out)
        throw Error("cannot write " + path);
}

SurfaceField as_field(const Profile& p) {
    const auto h = p.heights();
    SurfaceField f{Grid::line(p.size(), p.spacing()), {h.begin(), h.end()}, FieldKind::noisy, {}};
    return f;
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <dir>\n";
        return 1;
    }
    const std::string dir = argv[1];
    try {
        const fixtures::TurnedProfileOptions tp;
        SurfaceField turned = as_field(fixtures::turned_profile(tp));
        turned.provenance.seed = tp.seed;
        turned.provenance.noise_sigma = tp.noise_sigma;
        io::write_grid_file(dir + "/turned_profile.txt", turned);
        io::write_grid_file(dir + "/turned_surface.txt", fixtures::turned_surface());
        io::write_grid_file(dir + "/cosine_profile.txt", as_field(fixtures::cosine_profile(256, 16)));

        // Illustrative demo parameters; the measured ones are not published.
        const ExponentialRotatedAcvf ground{1.0, 10.0, 2.0, std::numbers::pi / 6};
        write_json(dir + "/ground_demo.json",
                   io::to_json(io::ModelConfig{Grid::plane(128, 128, 1.0, 1.0), ground, 0.05, 7}));

        io::HoningConfig honing{Grid::plane(128, 128, 1.0, 1.0), {}, 0.02, 11};
        honing.steps.push_back({ExponentialRotatedAcvf{1.0, 12.0, 3.0, std::numbers::pi / 4}, {}, {}});
        honing.steps.push_back({ExponentialRotatedAcvf{0.25, 6.0, 1.5, std::numbers::pi / 3}, {}, {}});
        write_json(dir + "/honing_demo.json", io::to_json(honing));

        write_json(dir + "/overcap_512.json",
                   io::to_json(io::ModelConfig{Grid::plane(512, 512, 1.0, 1.0), ground, 0.05, 7}));
        write_json(dir + "/white_noise_1d.json",
                   io::to_json(io::ModelConfig{Grid::line(16, 1.0), WhiteNoiseAcvf{1.0}, 0.1, 42}));
        write_json(dir + "/exponential_100.json",
                   io::to_json(io::ModelConfig{Grid::plane(100, 100, 1.0, 1.0), ground, 0.0, 1}));
    } catch (const std::exception& e) {
        std::cerr << "make_fixtures: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
