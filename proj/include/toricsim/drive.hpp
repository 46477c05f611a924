#pragma once

// Multi-tone flux-drive synthesis: per-cell tone tables, component signs,
// amplitude partitioning, and time-domain waveforms.

#include <array>
#include <string>
#include <vector>

#include "toricsim/device.hpp"
#include "toricsim/lattice.hpp"

namespace toricsim {

// The eight tones are the signed sums of the four cell frequencies, taken
// in corner order: patterns (++++), (++--), (+-+-), (+--+), (+++-),
// (++-+), (+-++), (-+++) for nu_1..nu_8.
std::array<double, 8> drive_frequencies(const std::array<double, 4>& cell_freqs_ghz);

// per-component amplitude partition of the total drive strength phi_ac
enum class AmpMode {
    Nominal,  // -2 phi_ac per component, reproduces the intended coupling J
    Unit,     // +phi_ac per component
    Split,    // +phi_ac/8 per component, bounds the peak excursion
};

AmpMode amp_mode_from(const std::string& name);
std::string amp_mode_name(AmpMode mode);

struct DriveComponent {
    int k = 0;            // 1..8
    double nu_ghz = 0.0;
    double amp_rad = 0.0;
    int sign = +1;        // relative phase of 0 (+1) or pi (-1)
};

struct DriveSpec {
    int cell_id = 0;
    CellKind kind = CellKind::Star;
    std::array<int, 4> corners{};
    double phi_ac_rad = 0.0;
    AmpMode amp_mode = AmpMode::Nominal;
    std::array<DriveComponent, 8> components{};
};

// star cells drive all components in phase; plaquette cells flip the sign
// of components 5..8
DriveSpec build_drive(const DeviceModel& device, int cell_id, AmpMode mode = AmpMode::Nominal);
std::vector<DriveSpec> build_drives(const DeviceModel& device, AmpMode mode = AmpMode::Nominal);

// drive waveform phi_ac F(t) in radians at time t (ns)
double waveform(const DriveSpec& spec, double t_ns);

// smallest |nu_j +- nu_k| over distinct component pairs
double min_tone_detuning_ghz(const DriveSpec& spec);

// CSV export, one row per component: cell,kind,k,nu_ghz,amp_rad,sign
std::string drive_table_csv(const std::vector<DriveSpec>& specs);

}  // namespace toricsim
