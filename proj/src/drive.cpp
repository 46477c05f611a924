// Multi-tone flux-drive synthesis.

#include "toricsim/drive.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "toricsim/io.hpp"

namespace toricsim {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

constexpr int kToneSigns[8][4] = {
    {+1, +1, +1, +1}, {+1, +1, -1, -1}, {+1, -1, +1, -1}, {+1, -1, -1, +1},
    {+1, +1, +1, -1}, {+1, +1, -1, +1}, {+1, -1, +1, +1}, {-1, +1, +1, +1},
};

}  // namespace

std::array<double, 8> drive_frequencies(const std::array<double, 4>& cell_freqs_ghz) {
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (cell_freqs_ghz[i] == cell_freqs_ghz[j])
                throw std::invalid_argument(
                    "drive_frequencies: cell frequencies must be pairwise distinct");
    std::array<double, 8> tones{};
    for (int k = 0; k < 8; ++k) {
        double nu = 0.0;
        for (int i = 0; i < 4; ++i) nu += kToneSigns[k][i] * cell_freqs_ghz[i];
        tones[k] = nu;
    }
    return tones;
}

AmpMode amp_mode_from(const std::string& name) {
    if (name == "nominal") return AmpMode::Nominal;
    if (name == "unit") return AmpMode::Unit;
    if (name == "split") return AmpMode::Split;
    throw std::invalid_argument("amp_mode_from: unknown amplitude mode '" + name + "'");
}

std::string amp_mode_name(AmpMode mode) {
    switch (mode) {
        case AmpMode::Nominal: return "nominal";
        case AmpMode::Unit: return "unit";
        default: return "split";
    }
}

DriveSpec build_drive(const DeviceModel& device, int cell_id, AmpMode mode) {
    const CellParams& cell = device.cell(cell_id);
    std::array<double, 4> freqs{};
    for (int i = 0; i < 4; ++i) freqs[i] = device.lattice.freq_of(cell.corners[i]);
    const auto tones = drive_frequencies(freqs);

    const double phi_ac = device.config.squid.phi_ac_rad;
    double amp = phi_ac;
    if (mode == AmpMode::Nominal) amp = -2.0 * phi_ac;
    else if (mode == AmpMode::Split) amp = phi_ac / 8.0;

    DriveSpec spec;
    spec.cell_id = cell_id;
    spec.kind = cell.kind;
    spec.corners = cell.corners;
    spec.phi_ac_rad = phi_ac;
    spec.amp_mode = mode;
    for (int k = 0; k < 8; ++k) {
        spec.components[k].k = k + 1;
        spec.components[k].nu_ghz = tones[k];
        spec.components[k].amp_rad = amp;
        spec.components[k].sign = (cell.kind == CellKind::Plaquette && k >= 4) ? -1 : +1;
    }
    return spec;
}

std::vector<DriveSpec> build_drives(const DeviceModel& device, AmpMode mode) {
    std::vector<DriveSpec> out;
    for (const auto& [cell_id, cell] : device.cells) {
        (void)cell;
        out.push_back(build_drive(device, cell_id, mode));
    }
    return out;
}

double waveform(const DriveSpec& spec, double t_ns) {
    double f = 0.0;
    for (const auto& c : spec.components)
        f += c.amp_rad * c.sign * std::cos(kTau * c.nu_ghz * t_ns);
    return f;
}

double min_tone_detuning_ghz(const DriveSpec& spec) {
    double best = 1e300;
    for (int i = 0; i < 8; ++i)
        for (int k = i + 1; k < 8; ++k) {
            const double a = spec.components[i].nu_ghz;
            const double b = spec.components[k].nu_ghz;
            best = std::min(best, std::min(std::abs(a - b), std::abs(a + b)));
        }
    return best;
}

std::string drive_table_csv(const std::vector<DriveSpec>& specs) {
    std::ostringstream out;
    out << "cell,kind,k,nu_ghz,amp_rad,sign\n";
    for (const auto& spec : specs) {
        const std::string kind = (spec.kind == CellKind::Star) ? "star" : "plaquette";
        for (const auto& c : spec.components)
            out << spec.cell_id << "," << kind << "," << c.k << "," << format_g17(c.nu_ghz)
                << "," << format_g17(c.amp_rad) << "," << c.sign << "\n";
    }
    return out.str();
}

}  // namespace toricsim
