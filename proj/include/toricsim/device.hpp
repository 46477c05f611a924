#pragma once

// Circuit-parameter pipeline: raw qubit and coupler values to derived
// frequencies, zero-point amplitudes, coupling strengths, drive-induced
// frequency shifts, and validity-condition reports.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "toricsim/lattice.hpp"
#include "toricsim/units.hpp"

namespace toricsim {

struct QubitRaw {
    int id = 0;
    double ejq_ghz = 0.0;
    double cq_ff = 0.0;
};

struct SquidRaw {
    double ej_ghz = 10.0;
    double cj_ff = 3.47;
    double cg_ff = 0.1;
    double l_nh = 108.0;
    double phi_dc_rad = 3.14159265358979323846;
    double phi_ac_rad = 0.093;
    EcMinusConvention ec_minus_convention = EcMinusConvention::Half;
};

struct DeviceConfig {
    SquidRaw squid;
    std::vector<QubitRaw> qubits;
};

// qubit oscillator parameters, energies in GHz
struct QubitDerived {
    int id = 0;
    double e_cq_ghz = 0.0;
    double e_jq_ghz = 0.0;
    double e_l_ghz = 0.0;
    double freq_ghz = 0.0;         // sqrt(8 E_Cq (E_Jq + 4 E_L))
    double phibar = 0.0;           // zero-point phase amplitude
    double anharmonicity_ghz = 0.0;
};

// coupler mode parameters for one cell
struct SquidDerived {
    double ec_minus_ghz = 0.0;     // bare E_C-
    double ec_plus_ghz = 0.0;      // bare E_C+
    double ecm_tilde_ghz = 0.0;    // renormalized by the four cell qubits
    double ecp_tilde_ghz = 0.0;
    double f_minus_ghz = 0.0;      // 4 sqrt(Ec- E_L)
    double f_plus_ghz = 0.0;
    double phibar_minus = 0.0;
    double phibar_plus = 0.0;
    double chi = 0.0;              // exp(-phibar_minus^2/2)
    double ej_tilde_ghz = 0.0;     // chi E_J phi_ac
};

struct CellParams {
    int cell_id = 0;
    CellKind kind = CellKind::Star;
    std::array<int, 4> corners{};
    SquidDerived squid;
    double j_int_ghz = 0.0;        // four-body coupling strength
};

// validation of a raw config, independent of any lattice
void check_qubit_raw(const QubitRaw& raw);
void check_squid_raw(const SquidRaw& raw);

QubitDerived derive_qubit(const QubitRaw& raw, double l_nh);

// junction energy that places the qubit at the requested frequency
double ejq_for_frequency(double freq_ghz, double cq_ff, double l_nh);

SquidDerived derive_squid(const SquidRaw& raw, const std::array<QubitRaw, 4>& cell_qubits);

// J = (Ej_tilde / 16) prod_i phibar_i, in GHz
double coupling_strength_ghz(const SquidDerived& squid,
                             const std::array<QubitDerived, 4>& cell_qubits);

struct DeviceModel {
    LatticeSpec lattice;
    DeviceConfig config;
    std::map<int, QubitDerived> qubits;
    std::map<int, CellParams> cells;

    double e_l_ghz() const;
    const QubitDerived& qubit(int id) const;
    const CellParams& cell(int cell_id) const;
};

// derives every qubit and cell; throws if the config does not cover the
// lattice or derived qubit frequencies disagree with the lattice targets
DeviceModel build_device(const LatticeSpec& lattice, const DeviceConfig& config);

// default operating point for any lattice built here: junction energies
// inverted from the lattice frequencies, shunt capacitance by band
DeviceConfig default_device_config(const LatticeSpec& lattice);

DeviceConfig device_config_from_json(const std::string& text);
std::string device_config_to_json(const DeviceConfig& config);

struct QubitShifts {
    int id = 0;
    double d1_mhz = 0.0;   // qubit-coupler dispersive shift
    double d2_mhz = 0.0;   // drive-induced coupler shift
    double d3_mhz = 0.0;   // residual chain-neighbor hopping shift
    double d4_mhz = 0.0;   // drive-induced four-body residual shift
    double total_mhz() const { return d1_mhz + d2_mhz + d3_mhz + d4_mhz; }
};

std::vector<QubitShifts> frequency_shifts(const DeviceModel& device);

struct ValidityEntry {
    std::string condition;
    double ratio = 0.0;        // worst-case value of the expansion parameter
    double threshold = 0.0;
    bool pass = false;         // ratio < threshold
    std::string worst;         // where the worst case occurs
};

struct ValidityReport {
    std::vector<ValidityEntry> entries;
    double min_tone_detuning_ghz = 0.0;
    double detuning_floor_ghz = 0.0;
    bool detuning_pass = false;
    bool all_pass() const;
};

ValidityReport validity_report(const DeviceModel& device, double threshold = 0.3,
                               double detuning_floor_ghz = 0.3);

std::string validity_report_to_json(const ValidityReport& report);
std::string shifts_to_json(const std::vector<QubitShifts>& shifts);

}  // namespace toricsim
