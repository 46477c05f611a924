// Derived circuit parameters, drive-induced frequency shifts, and
// validity-condition reports.

#include "toricsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "toricsim/drive.hpp"

namespace toricsim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSingularGhz = 1e-3;  // 1 MHz proximity trips the shift formulas

[[noreturn]] void singular(const std::string& what) {
    throw std::runtime_error("frequency_shifts: near-resonant denominator, " + what);
}

void check_detuned(double a, double b, const std::string& what) {
    if (std::abs(a - b) < kSingularGhz || std::abs(a + b) < kSingularGhz) singular(what);
}

std::array<double, 8> cell_tones(const DeviceModel& dev, const CellParams& cell) {
    std::array<double, 4> freqs{};
    for (int i = 0; i < 4; ++i) freqs[i] = dev.lattice.freq_of(cell.corners[i]);
    return drive_frequencies(freqs);
}

}  // namespace

void check_qubit_raw(const QubitRaw& raw) {
    if (raw.ejq_ghz <= 0.0)
        throw std::invalid_argument("qubit " + std::to_string(raw.id) +
                                    ": junction energy must be positive");
    if (raw.cq_ff < 1.0 || raw.cq_ff > 1000.0)
        throw std::invalid_argument("qubit " + std::to_string(raw.id) +
                                    ": shunt capacitance outside [1, 1000] fF");
}

void check_squid_raw(const SquidRaw& raw) {
    if (raw.ej_ghz <= 0.0)
        throw std::invalid_argument("coupler: junction energy must be positive");
    if (raw.cj_ff <= 0.0)
        throw std::invalid_argument("coupler: junction capacitance must be positive");
    if (raw.cg_ff <= 0.0)
        throw std::invalid_argument("coupler: ground capacitance must be positive");
    if (raw.l_nh <= 0.0)
        throw std::invalid_argument("coupler: chain inductance must be positive");
    if (!(raw.cg_ff < raw.cj_ff / 10.0))
        throw std::invalid_argument("coupler: ground capacitance must stay below C_J/10");
    if (raw.phi_ac_rad < 0.0 || raw.phi_ac_rad >= 0.5)
        throw std::invalid_argument("coupler: drive amplitude must lie in [0, 0.5) rad");
    if (std::abs(raw.phi_dc_rad - kPi) > 1e-9)
        throw std::invalid_argument("coupler: only the pi flux bias point is modeled");
}

QubitDerived derive_qubit(const QubitRaw& raw, double l_nh) {
    check_qubit_raw(raw);
    QubitDerived q;
    q.id = raw.id;
    q.e_cq_ghz = charging_energy_ghz(raw.cq_ff);
    q.e_jq_ghz = raw.ejq_ghz;
    q.e_l_ghz = inductive_energy_ghz(l_nh);
    const double stiffness = raw.ejq_ghz + 4.0 * q.e_l_ghz;
    q.freq_ghz = std::sqrt(8.0 * q.e_cq_ghz * stiffness);
    q.phibar = std::pow(2.0 * q.e_cq_ghz / stiffness, 0.25);
    q.anharmonicity_ghz = 0.5 * q.e_cq_ghz * raw.ejq_ghz / stiffness;
    return q;
}

double ejq_for_frequency(double freq_ghz, double cq_ff, double l_nh) {
    if (freq_ghz <= 0.0)
        throw std::invalid_argument("ejq_for_frequency: frequency must be positive");
    const double ecq = charging_energy_ghz(cq_ff);
    const double el = inductive_energy_ghz(l_nh);
    const double ejq = freq_ghz * freq_ghz / (8.0 * ecq) - 4.0 * el;
    if (ejq <= 0.0)
        throw std::invalid_argument("ejq_for_frequency: target " + std::to_string(freq_ghz) +
                                    " GHz is below the inductive floor for this capacitance");
    return ejq;
}

SquidDerived derive_squid(const SquidRaw& raw, const std::array<QubitRaw, 4>& cell_qubits) {
    check_squid_raw(raw);
    double ecq_sum = 0.0;
    for (const auto& q : cell_qubits) {
        check_qubit_raw(q);
        ecq_sum += charging_energy_ghz(q.cq_ff);
    }
    const double el = inductive_energy_ghz(raw.l_nh);
    SquidDerived s;
    s.ec_minus_ghz = squid_ec_minus_ghz(raw.cj_ff, raw.ec_minus_convention);
    s.ec_plus_ghz = squid_ec_plus_ghz(raw.cg_ff);
    s.ecm_tilde_ghz = s.ec_minus_ghz + ecq_sum / 4.0;
    s.ecp_tilde_ghz = s.ec_plus_ghz + ecq_sum / 4.0;
    s.f_minus_ghz = 4.0 * std::sqrt(s.ecm_tilde_ghz * el);
    s.f_plus_ghz = 4.0 * std::sqrt(s.ecp_tilde_ghz * el);
    s.phibar_minus = std::pow(s.ecm_tilde_ghz / el, 0.25);
    s.phibar_plus = std::pow(s.ecp_tilde_ghz / el, 0.25);
    s.chi = std::exp(-0.5 * s.phibar_minus * s.phibar_minus);
    s.ej_tilde_ghz = s.chi * raw.ej_ghz * raw.phi_ac_rad;
    return s;
}

double coupling_strength_ghz(const SquidDerived& squid,
                             const std::array<QubitDerived, 4>& cell_qubits) {
    double j = squid.ej_tilde_ghz / 16.0;
    for (const auto& q : cell_qubits) j *= q.phibar;
    return j;
}

double DeviceModel::e_l_ghz() const { return inductive_energy_ghz(config.squid.l_nh); }

const QubitDerived& DeviceModel::qubit(int id) const {
    const auto it = qubits.find(id);
    if (it == qubits.end())
        throw std::invalid_argument("DeviceModel: unknown qubit id " + std::to_string(id));
    return it->second;
}

const CellParams& DeviceModel::cell(int cell_id) const {
    const auto it = cells.find(cell_id);
    if (it == cells.end())
        throw std::invalid_argument("DeviceModel: unknown cell id " + std::to_string(cell_id));
    return it->second;
}

DeviceModel build_device(const LatticeSpec& lattice, const DeviceConfig& config) {
    lattice.validate();
    check_squid_raw(config.squid);

    std::map<int, QubitRaw> raw;
    for (const auto& q : config.qubits)
        if (!raw.emplace(q.id, q).second)
            throw std::invalid_argument("device config repeats qubit " + std::to_string(q.id));

    DeviceModel dev;
    dev.lattice = lattice;
    dev.config = config;
    for (const auto& q : lattice.qubits) {
        const auto it = raw.find(q.id);
        if (it == raw.end())
            throw std::invalid_argument("device config is missing qubit " + std::to_string(q.id));
        QubitDerived d = derive_qubit(it->second, config.squid.l_nh);
        if (std::abs(d.freq_ghz - q.freq_ghz) > 1e-6)
            throw std::invalid_argument(
                "device config puts qubit " + std::to_string(q.id) + " at " +
                std::to_string(d.freq_ghz) + " GHz but the lattice expects " +
                std::to_string(q.freq_ghz) + " GHz");
        dev.qubits.emplace(q.id, d);
    }
    for (const auto& c : lattice.cells) {
        std::array<QubitRaw, 4> corner_raw{};
        std::array<QubitDerived, 4> corner_derived{};
        for (int i = 0; i < 4; ++i) {
            corner_raw[i] = raw.at(c.corners[i]);
            corner_derived[i] = dev.qubits.at(c.corners[i]);
        }
        CellParams p;
        p.cell_id = c.id;
        p.kind = c.kind;
        p.corners = c.corners;
        p.squid = derive_squid(config.squid, corner_raw);
        p.j_int_ghz = coupling_strength_ghz(p.squid, corner_derived);
        dev.cells.emplace(c.id, p);
    }
    return dev;
}

DeviceConfig default_device_config(const LatticeSpec& lattice) {
    DeviceConfig config;
    for (const auto& q : lattice.qubits) {
        QubitRaw raw;
        raw.id = q.id;
        // high band uses heavier shunts; the 4.2 GHz qubits get a slightly
        // heavier shunt than the rest of the low band to keep their
        // dispersive shift inside the intended window
        if (q.freq_ghz > 8.0) raw.cq_ff = 77.0;
        else if (std::abs(q.freq_ghz - 4.2) < 0.05) raw.cq_ff = 57.0;
        else raw.cq_ff = 52.0;
        raw.ejq_ghz = ejq_for_frequency(q.freq_ghz, raw.cq_ff, config.squid.l_nh);
        config.qubits.push_back(raw);
    }
    return config;
}

std::string device_config_to_json(const DeviceConfig& config) {
    nlohmann::json j;
    j["squid"] = {
        {"ej_ghz", config.squid.ej_ghz},
        {"cj_ff", config.squid.cj_ff},
        {"cg_ff", config.squid.cg_ff},
        {"l_nh", config.squid.l_nh},
        {"phi_dc_rad", config.squid.phi_dc_rad},
        {"phi_ac_rad", config.squid.phi_ac_rad},
        {"ec_minus_convention",
         config.squid.ec_minus_convention == EcMinusConvention::Half ? "half" : "quarter"},
    };
    j["qubits"] = nlohmann::json::array();
    for (const auto& q : config.qubits)
        j["qubits"].push_back({{"id", q.id}, {"ejq_ghz", q.ejq_ghz}, {"cq_ff", q.cq_ff}});
    return j.dump(2) + "\n";
}

DeviceConfig device_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("device config: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "squid" && key != "qubits")
            throw std::invalid_argument("device config: unknown key '" + key + "'");
    }
    DeviceConfig config;
    const auto& s = j.at("squid");
    for (const auto& [key, value] : s.items()) {
        if (key == "ej_ghz") config.squid.ej_ghz = value.get<double>();
        else if (key == "cj_ff") config.squid.cj_ff = value.get<double>();
        else if (key == "cg_ff") config.squid.cg_ff = value.get<double>();
        else if (key == "l_nh") config.squid.l_nh = value.get<double>();
        else if (key == "phi_dc_rad") config.squid.phi_dc_rad = value.get<double>();
        else if (key == "phi_ac_rad") config.squid.phi_ac_rad = value.get<double>();
        else if (key == "ec_minus_convention") {
            const std::string conv = value.get<std::string>();
            if (conv == "half") config.squid.ec_minus_convention = EcMinusConvention::Half;
            else if (conv == "quarter") config.squid.ec_minus_convention = EcMinusConvention::Quarter;
            else throw std::invalid_argument("device config: unknown convention '" + conv + "'");
        } else {
            throw std::invalid_argument("device config: unknown squid key '" + key + "'");
        }
    }
    for (const auto& q : j.at("qubits")) {
        QubitRaw raw;
        for (const auto& [key, value] : q.items()) {
            if (key == "id") raw.id = value.get<int>();
            else if (key == "ejq_ghz") raw.ejq_ghz = value.get<double>();
            else if (key == "cq_ff") raw.cq_ff = value.get<double>();
            else throw std::invalid_argument("device config: unknown qubit key '" + key + "'");
        }
        config.qubits.push_back(raw);
    }
    return config;
}

std::vector<QubitShifts> frequency_shifts(const DeviceModel& device) {
    std::vector<QubitShifts> out;
    const double el = device.e_l_ghz();
    for (const auto& lq : device.lattice.qubits) {
        const int j = lq.id;
        const QubitDerived& qj = device.qubit(j);
        const double fj = lq.freq_ghz;
        QubitShifts shifts;
        shifts.id = j;

        double d1 = 0.0, d2 = 0.0, d4 = 0.0;
        for (const Cell* cptr : device.lattice.cells_of(j)) {
            const CellParams& cell = device.cell(cptr->id);
            const SquidDerived& sq = cell.squid;
            const auto tones = cell_tones(device, cell);
            const std::string cell_tag = "cell " + std::to_string(cell.cell_id);

            if (std::abs(sq.f_minus_ghz - fj) < kSingularGhz)
                singular("qubit " + std::to_string(j) + " against the coupler of " + cell_tag);
            d1 += -qj.e_cq_ghz * qj.e_cq_ghz /
                  ((sq.f_minus_ghz - fj) * qj.phibar * qj.phibar * sq.phibar_minus *
                   sq.phibar_minus);

            const double ej2 = sq.ej_tilde_ghz * sq.ej_tilde_ghz;
            double sideband_sum = 0.0;
            for (int k = 0; k < 8; ++k) {
                for (const double sgn : {1.0, -1.0}) {
                    const double g = sq.f_minus_ghz + sgn * fj;
                    check_detuned(g, tones[k],
                                  "tone " + std::to_string(k + 1) + " of " + cell_tag +
                                      " against the coupler sideband of qubit " +
                                      std::to_string(j));
                    sideband_sum += g / (g * g - tones[k] * tones[k]);
                }
            }
            d2 += -0.5 * ej2 * qj.phibar * qj.phibar * sideband_sum;

            double self_sum = 0.0;
            for (int k = 0; k < 8; ++k) {
                check_detuned(2.0 * fj, tones[k],
                              "tone " + std::to_string(k + 1) + " of " + cell_tag +
                                  " against twice qubit " + std::to_string(j));
                self_sum += 2.0 * fj / (4.0 * fj * fj - tones[k] * tones[k]);
            }
            d4 += -(ej2 / 4.0) * std::pow(qj.phibar, 4) * self_sum;

            for (const int l : device.lattice.in_cell_neighbors(*cptr, j)) {
                const double fl = device.lattice.freq_of(l);
                const double pb2 = qj.phibar * qj.phibar * device.qubit(l).phibar *
                                   device.qubit(l).phibar;
                double sum_p = 0.0, sum_m = 0.0;
                for (int k = 0; k < 8; ++k) {
                    const std::string pair_tag = "tone " + std::to_string(k + 1) + " of " +
                                                 cell_tag + " against qubits " +
                                                 std::to_string(j) + "," + std::to_string(l);
                    check_detuned(fj + fl, tones[k], pair_tag);
                    check_detuned(fj - fl, tones[k], pair_tag);
                    sum_p += (fj + fl) / ((fj + fl) * (fj + fl) - tones[k] * tones[k]);
                    sum_m += (fj - fl) / ((fj - fl) * (fj - fl) - tones[k] * tones[k]);
                }
                d4 += -(ej2 / 32.0) * pb2 * sum_p;
                d4 += +(ej2 / 32.0) * pb2 * sum_m;
            }
        }

        double d3 = 0.0;
        for (const int l : device.lattice.chain_neighbors(j)) {
            const double fl = device.lattice.freq_of(l);
            if (std::abs(fj - fl) < kSingularGhz)
                singular("chain neighbors " + std::to_string(j) + "," + std::to_string(l));
            const double pbl = device.qubit(l).phibar;
            d3 += 4.0 * el * el * qj.phibar * qj.phibar * pbl * pbl / (fj - fl);
        }

        shifts.d1_mhz = d1 * 1000.0;
        shifts.d2_mhz = d2 * 1000.0;
        shifts.d3_mhz = d3 * 1000.0;
        shifts.d4_mhz = d4 * 1000.0;
        out.push_back(shifts);
    }
    return out;
}

bool ValidityReport::all_pass() const {
    if (!detuning_pass) return false;
    return std::all_of(entries.begin(), entries.end(),
                       [](const ValidityEntry& e) { return e.pass; });
}

ValidityReport validity_report(const DeviceModel& device, double threshold,
                               double detuning_floor_ghz) {
    struct Tracker {
        double ratio = 0.0;
        std::string worst;
        void consider(double value, const std::string& where) {
            if (value > ratio) {
                ratio = value;
                worst = where;
            }
        }
    };
    Tracker sw, rw1, rw1_pair, rw2, rw3, rw3a, rw4;
    const auto& lat = device.lattice;

    for (const auto& [cell_id, cell] : device.cells) {
        const SquidDerived& sq = cell.squid;
        const auto tones = cell_tones(device, cell);
        const std::string cell_tag = "cell " + std::to_string(cell_id);
        for (const int j : cell.corners) {
            const QubitDerived& qj = device.qubit(j);
            const double fj = lat.freq_of(j);
            const std::string tag = "qubit " + std::to_string(j) + " in " + cell_tag;
            sw.consider(qj.phibar / (4.0 * sq.phibar_minus), tag);
            rw1.consider(std::abs(qj.e_cq_ghz / ((sq.f_minus_ghz - fj) * qj.phibar *
                                                 sq.phibar_minus)),
                         tag);
            for (const int l : cell.corners) {
                if (l == j) continue;
                const QubitDerived& ql = device.qubit(l);
                const double fl = lat.freq_of(l);
                rw1_pair.consider(
                    std::abs(qj.e_cq_ghz * ql.e_cq_ghz /
                             ((fl - fj) * (sq.f_minus_ghz - fj) * qj.phibar * ql.phibar *
                              sq.phibar_minus * sq.phibar_minus)),
                    "qubits " + std::to_string(j) + "," + std::to_string(l) + " in " + cell_tag);
            }
            for (int k = 0; k < 8; ++k) {
                for (const double s1 : {1.0, -1.0})
                    for (const double s2 : {1.0, -1.0}) {
                        const double den = sq.f_minus_ghz + s1 * fj + s2 * tones[k];
                        if (std::abs(den) < 1e-9) continue;
                        rw2.consider(std::abs(sq.ej_tilde_ghz * qj.phibar / (2.0 * den)),
                                     tag + ", tone " + std::to_string(k + 1));
                    }
            }
            for (const int l : cell.corners) {
                if (l == j) continue;
                const QubitDerived& ql = device.qubit(l);
                const double fl = lat.freq_of(l);
                for (int k = 0; k < 8; ++k) {
                    for (const double s1 : {1.0, -1.0})
                        for (const double s2 : {1.0, -1.0}) {
                            const double den = fj + s1 * fl + s2 * tones[k];
                            if (std::abs(den) < 1e-9) continue;
                            rw4.consider(
                                std::abs(sq.ej_tilde_ghz * qj.phibar * ql.phibar / (8.0 * den)),
                                "qubits " + std::to_string(j) + "," + std::to_string(l) + " in " +
                                    cell_tag + ", tone " + std::to_string(k + 1));
                        }
                }
            }
        }
    }

    const double el = device.e_l_ghz();
    for (const auto& lq : lat.qubits) {
        const int j = lq.id;
        const double fj = lq.freq_ghz;
        const double pbj = device.qubit(j).phibar;
        const auto nbrs = lat.chain_neighbors(j);
        for (const int l : nbrs) {
            const double fl = lat.freq_of(l);
            const double pbl = device.qubit(l).phibar;
            rw3.consider(std::abs(2.0 * el * pbj * pbl / (fj - fl)),
                         "chain neighbors " + std::to_string(j) + "," + std::to_string(l));
        }
        // second-order hopping across the middle qubit of a chain triple
        for (const int jm : nbrs)
            for (const int jp : nbrs) {
                if (jm == jp) continue;
                const double fp = lat.freq_of(jp);
                const double num = 4.0 * el * el * device.qubit(jm).phibar * pbj * pbj *
                                   device.qubit(jp).phibar;
                const double den = (fj - fp) * (lat.freq_of(jm) - fp);
                rw3a.consider(std::abs(num / den),
                              "chain triple " + std::to_string(jm) + "," + std::to_string(j) +
                                  "," + std::to_string(jp));
            }
    }

    double min_detuning = 1e300;
    for (const auto& [cell_id, cell] : device.cells) {
        (void)cell_id;
        const auto tones = cell_tones(device, cell);
        for (int i = 0; i < 8; ++i)
            for (int k = i + 1; k < 8; ++k)
                min_detuning = std::min(
                    min_detuning, std::abs(std::abs(tones[i]) - std::abs(tones[k])));
    }

    ValidityReport report;
    auto add = [&](const std::string& condition, const Tracker& t) {
        report.entries.push_back({condition, t.ratio, threshold, t.ratio < threshold, t.worst});
    };
    add("sw_amplitude", sw);
    add("rw1_qubit_squid", rw1);
    add("rw1_cell_pair", rw1_pair);
    add("rw2_squid_sideband", rw2);
    add("rw3_residual_hopping", rw3);
    add("rw3a_second_order_hopping", rw3a);
    add("rw4_fourbody_offres", rw4);
    report.min_tone_detuning_ghz = min_detuning;
    report.detuning_floor_ghz = detuning_floor_ghz;
    report.detuning_pass = min_detuning >= detuning_floor_ghz;
    return report;
}

std::string validity_report_to_json(const ValidityReport& report) {
    nlohmann::json j;
    j["conditions"] = nlohmann::json::array();
    for (const auto& e : report.entries)
        j["conditions"].push_back({{"condition", e.condition},
                                   {"ratio", e.ratio},
                                   {"threshold", e.threshold},
                                   {"pass", e.pass},
                                   {"worst", e.worst}});
    j["min_tone_detuning_ghz"] = report.min_tone_detuning_ghz;
    j["detuning_floor_ghz"] = report.detuning_floor_ghz;
    j["detuning_pass"] = report.detuning_pass;
    j["all_pass"] = report.all_pass();
    return j.dump(2) + "\n";
}

std::string shifts_to_json(const std::vector<QubitShifts>& shifts) {
    nlohmann::json j;
    j["qubits"] = nlohmann::json::array();
    for (const auto& s : shifts)
        j["qubits"].push_back({{"id", s.id},
                               {"d1_mhz", s.d1_mhz},
                               {"d2_mhz", s.d2_mhz},
                               {"d3_mhz", s.d3_mhz},
                               {"d4_mhz", s.d4_mhz},
                               {"total_mhz", s.total_mhz()}});
    return j.dump(2) + "\n";
}

}  // namespace toricsim
