// Device-parameter pipeline tests with independently computed references.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "json.hpp"

#include "toricsim/device.hpp"
#include "toricsim/lattice.hpp"
#include "toricsim/units.hpp"

using namespace toricsim;

namespace {

void check_rel(double got, double want, double tol = 1e-12) {
    CHECK(std::abs(got - want) <= tol * (1.0 + std::abs(want)));
}

DeviceModel default_8q_device() {
    const LatticeSpec lat = minimal_lattice_8q();
    return build_device(lat, default_device_config(lat));
}

}  // namespace

TEST_CASE("energy conversions") {
    check_rel(charging_energy_ghz(77.0), 0.25156141980076788);
    check_rel(charging_energy_ghz(57.0), 0.33982858464314257);
    check_rel(charging_energy_ghz(52.0), 0.37250441008959859);
    check_rel(inductive_energy_ghz(108.0), 0.75676626299435712);
    check_rel(inductive_energy_ghz(100.0), 0.81730756403390568);
    check_rel(squid_ec_minus_ghz(3.47, EcMinusConvention::Half), 5.5821986526395178);
    check_rel(squid_ec_minus_ghz(3.47, EcMinusConvention::Quarter), 2.7910993263197589);
    check_rel(squid_ec_plus_ghz(0.1), 387.40458649318253);
    check_rel(flux_quantum_reduced(), 3.2910597847545328e-16);
    // flux-quantum identity against the exact h-derived hbar
    CHECK(std::abs(flux_quantum_reduced() * 2.0 * kElementaryCharge - kPlanck / kTwoPi) < 1e-40);
    CHECK(std::abs(kPlanck / kTwoPi - kHbar) < 1e-43);
    CHECK_THROWS_AS((void)charging_energy_ghz(0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)inductive_energy_ghz(-1.0), std::invalid_argument);
}

TEST_CASE("unit-route invariance") {
    // same quantities evaluated through SI joules instead of the GHz shortcut
    const double e = 1.602176634e-19;
    const double h = 6.62607015e-34;
    const double ecq_si = e * e / (2.0 * 77.0e-15) / h / 1e9;
    check_rel(charging_energy_ghz(77.0), ecq_si, 1e-9);
    const double p0 = h / (2.0 * 3.14159265358979323846) / (2.0 * e);
    const double el_si = p0 * p0 / (2.0 * 108.0e-9) / h / 1e9;
    check_rel(inductive_energy_ghz(108.0), el_si, 1e-9);
}

TEST_CASE("derive_qubit worked example") {
    const QubitDerived q = derive_qubit({1, 94.0, 77.0}, 100.0);
    check_rel(q.freq_ghz, 13.991193134586138);
    check_rel(q.phibar, 0.26817892060253734);
    check_rel(q.anharmonicity_ghz, 0.12155320546386544);
    check_rel(q.e_cq_ghz, 0.25156141980076788);
    check_rel(q.e_l_ghz, 0.81730756403390568);
}

TEST_CASE("derive_qubit approaches the bare transmon at large inductance") {
    const QubitDerived q = derive_qubit({1, 94.0, 77.0}, 1e9);
    const double bare = std::sqrt(8.0 * charging_energy_ghz(77.0) * 94.0);
    check_rel(q.freq_ghz, bare, 1e-6);
}

TEST_CASE("derive_qubit input guards") {
    CHECK_THROWS_AS((void)derive_qubit({1, -1.0, 77.0}, 108.0), std::invalid_argument);
    CHECK_THROWS_AS((void)derive_qubit({1, 94.0, 0.5}, 108.0), std::invalid_argument);
    CHECK_THROWS_AS((void)derive_qubit({1, 94.0, 1500.0}, 108.0), std::invalid_argument);
    CHECK_THROWS_AS((void)ejq_for_frequency(1.0, 52.0, 108.0), std::invalid_argument);
    CHECK_THROWS_AS((void)ejq_for_frequency(-3.0, 52.0, 108.0), std::invalid_argument);
}

TEST_CASE("junction energies inverted from the minimal lattice") {
    const std::map<int, double> ejq = {
        {1, 91.601912709609114}, {2, 80.948450815004958}, {3, 1.0836245359168142},
        {4, 2.6138077621043854}, {5, 82.245350793779065}, {6, 90.235447214732181},
        {7, 3.4615003590679454}, {8, 0.8520836530068528}};
    const std::map<int, double> cq = {{1, 77}, {2, 77}, {3, 52}, {4, 52},
                                      {5, 77}, {6, 77}, {7, 57}, {8, 52}};
    const LatticeSpec lat = minimal_lattice_8q();
    const DeviceConfig config = default_device_config(lat);
    for (const auto& raw : config.qubits) {
        CHECK(raw.cq_ff == cq.at(raw.id));
        check_rel(raw.ejq_ghz, ejq.at(raw.id));
        const QubitDerived d = derive_qubit(raw, 108.0);
        check_rel(d.freq_ghz, lat.freq_of(raw.id));
    }
}

TEST_CASE("derived qubit amplitudes and anharmonicities") {
    const std::map<int, std::pair<double, double>> expected = {
        {1, {0.2700302826822206, 0.12175713910675625}},
        {2, {0.27821486981261741, 0.12124669320252325}},
        {3, {0.65247170499316221, 0.049098199934513385}},
        {4, {0.60284238128451048, 0.086303569553960366}},
        {5, {0.27715094671931041, 0.12131565062680748}},
        {6, {0.27101400281692445, 0.12169818647378446}},
        {7, {0.56889917480051526, 0.090645365596636029}},
        {8, {0.66199734324115779, 0.040911671947826769}}};
    const DeviceModel dev = default_8q_device();
    for (const auto& [id, want] : expected) {
        check_rel(dev.qubit(id).phibar, want.first);
        check_rel(dev.qubit(id).anharmonicity_ghz, want.second);
        CHECK(dev.qubit(id).phibar < 0.7);
    }
}

TEST_CASE("coupler modes and coupling strengths") {
    const DeviceModel dev = default_8q_device();
    // two coupler frequencies on the lattice, grouped by the per-cell qubit sets
    const std::map<int, double> f_minus = {{1, 8.4480109816447996}, {2, 8.4421548017516031},
                                           {3, 8.4480109816447996}, {4, 8.4421548017516031},
                                           {5, 8.4480109816447996}, {6, 8.4480109816447996},
                                           {7, 8.4421548017516031}, {8, 8.4421548017516031}};
    const std::map<int, double> j_mhz = {{1, 0.43171356476292008}, {2, 0.40193215600816981},
                                         {3, 0.43162936434826767}, {4, 0.40185376409056442},
                                         {5, 0.42387437204973672}, {6, 0.42705163673134513},
                                         {7, 0.40624061843386309}, {8, 0.40928570455912952}};
    for (const auto& [cell_id, f] : f_minus) {
        const CellParams& c = dev.cell(cell_id);
        check_rel(c.squid.f_minus_ghz, f);
        check_rel(c.j_int_ghz * 1000.0, j_mhz.at(cell_id));
        CHECK(c.squid.phibar_minus > 1.65);
        CHECK(c.squid.f_plus_ghz > c.squid.f_minus_ghz);
        check_rel(c.squid.chi, std::exp(-0.5 * c.squid.phibar_minus * c.squid.phibar_minus));
    }
    const CellParams& p00 = dev.cell(5);
    check_rel(p00.squid.ecm_tilde_ghz, 5.894231567584701);
    check_rel(p00.squid.phibar_minus, 1.6705764612517768);
    check_rel(p00.squid.ej_tilde_ghz, 0.23038958635839948);
}

TEST_CASE("coupler at the 100 nH operating point") {
    const LatticeSpec lat = minimal_lattice_8q();
    const DeviceConfig config = default_device_config(lat);
    SquidRaw squid = config.squid;
    squid.l_nh = 100.0;

    std::map<int, QubitRaw> raw;
    for (const auto& q : config.qubits) raw[q.id] = q;
    const std::map<int, std::pair<double, double>> at_l100 = {
        {1, {13.817646521049633, 0.2698577997123997}},
        {3, {3.6016191986595977, 0.64320114474933459}},
        {7, {4.2776579186081692, 0.56371153709870272}},
        {8, {3.5045200601727768, 0.65205079672480767}}};
    for (const auto& [id, want] : at_l100) {
        const QubitDerived d = derive_qubit(raw.at(id), 100.0);
        check_rel(d.freq_ghz, want.first);
        check_rel(d.phibar, want.second);
    }

    const std::array<int, 4> p00_corners = {1, 3, 5, 4};
    std::array<QubitRaw, 4> cell_raw{};
    std::array<QubitDerived, 4> cell_derived{};
    for (int i = 0; i < 4; ++i) {
        cell_raw[i] = raw.at(p00_corners[i]);
        cell_derived[i] = derive_qubit(cell_raw[i], 100.0);
    }
    const SquidDerived s = derive_squid(squid, cell_raw);
    check_rel(s.f_minus_ghz, 8.7794305458651713);
    check_rel(s.phibar_minus, 1.6387413750586709);
    CHECK(std::abs(s.f_minus_ghz / 8.45 - 1.0) < 0.05);
    check_rel(coupling_strength_ghz(s, cell_derived), 0.00043526128319405328);

    const std::array<int, 4> s00_corners = {1, 8, 2, 4};
    for (int i = 0; i < 4; ++i) {
        cell_raw[i] = raw.at(s00_corners[i]);
        cell_derived[i] = derive_qubit(cell_raw[i], 100.0);
    }
    const SquidDerived s2 = derive_squid(squid, cell_raw);
    check_rel(coupling_strength_ghz(s2, cell_derived), 0.00044293896104096241);
}

TEST_CASE("coupling strength is linear in the drive amplitude") {
    const LatticeSpec lat = minimal_lattice_8q();
    DeviceConfig config = default_device_config(lat);
    const DeviceModel base = build_device(lat, config);

    config.squid.phi_ac_rad = 2.0 * 0.093;
    const DeviceModel doubled = build_device(lat, config);
    check_rel(doubled.cell(5).j_int_ghz, 2.0 * base.cell(5).j_int_ghz);

    config.squid.phi_ac_rad = 0.0;
    const DeviceModel off = build_device(lat, config);
    CHECK(off.cell(5).j_int_ghz == 0.0);
}

TEST_CASE("squid input guards") {
    SquidRaw squid;
    std::array<QubitRaw, 4> qs = {QubitRaw{1, 91.6, 77.0}, QubitRaw{3, 1.08, 52.0},
                                  QubitRaw{5, 82.2, 77.0}, QubitRaw{4, 2.61, 52.0}};
    CHECK_NOTHROW((void)derive_squid(squid, qs));
    squid.cg_ff = 1.0;  // violates C_g << C_J
    CHECK_THROWS_AS((void)derive_squid(squid, qs), std::invalid_argument);
    squid = SquidRaw{};
    squid.phi_ac_rad = 0.6;
    CHECK_THROWS_AS((void)derive_squid(squid, qs), std::invalid_argument);
    squid = SquidRaw{};
    squid.phi_ac_rad = -0.1;
    CHECK_THROWS_AS((void)derive_squid(squid, qs), std::invalid_argument);
    squid = SquidRaw{};
    squid.phi_dc_rad = 0.0;
    CHECK_THROWS_AS((void)derive_squid(squid, qs), std::invalid_argument);
    squid = SquidRaw{};
    squid.ej_ghz = 0.0;
    CHECK_THROWS_AS((void)derive_squid(squid, qs), std::invalid_argument);
}

TEST_CASE("build_device rejects inconsistent configs") {
    const LatticeSpec lat = minimal_lattice_8q();
    DeviceConfig config = default_device_config(lat);

    DeviceConfig missing = config;
    missing.qubits.pop_back();
    CHECK_THROWS_AS((void)build_device(lat, missing), std::invalid_argument);

    DeviceConfig dup = config;
    dup.qubits.push_back(dup.qubits.front());
    CHECK_THROWS_AS((void)build_device(lat, dup), std::invalid_argument);

    DeviceConfig off = config;
    off.qubits[0].ejq_ghz *= 1.05;  // detunes qubit 1 from the lattice target
    CHECK_THROWS_AS((void)build_device(lat, off), std::invalid_argument);

    const DeviceModel dev = build_device(lat, config);
    CHECK_THROWS_AS((void)dev.qubit(99), std::invalid_argument);
    CHECK_THROWS_AS((void)dev.cell(99), std::invalid_argument);
}

TEST_CASE("frequency shifts on the default device") {
    const std::map<int, std::array<double, 4>> expected = {
        {1, {232.37441432603905, -1.6243111702720433, 11.889414869079405, -0.55344167729726285}},
        {2, {257.35042145996551, -0.52196194818300578, 16.040330448222393, 1.2983553939406592}},
        {3, {-94.502656817029359, -19.149673339190589, -15.749037442210887, -23.74034162377236}},
        {4, {-125.86121721140535, -19.695949255763077, -12.627595672962858, 12.855318612706934}},
        {5, {253.75893785274702, -0.69460403815158862, 15.752936483798776, -0.34980327004619663}},
        {6, {235.08053753476995, -1.2805860112284464, 12.101572964268414, 0.86528629778720992}},
        {7, {-120.63994410531145, -18.827057585614166, -11.363392160384961, -17.535216794758331}},
        {8, {-89.982934653897588, -17.868953606483583, -16.044229489810283, 25.490542280806977}}};
    const DeviceModel dev = default_8q_device();
    const auto shifts = frequency_shifts(dev);
    REQUIRE(shifts.size() == 8);
    for (const auto& s : shifts) {
        const auto& want = expected.at(s.id);
        check_rel(s.d1_mhz, want[0], 1e-9);
        check_rel(s.d2_mhz, want[1], 1e-9);
        check_rel(s.d3_mhz, want[2], 1e-9);
        check_rel(s.d4_mhz, want[3], 1e-9);
        check_rel(s.total_mhz(), want[0] + want[1] + want[2] + want[3], 1e-9);
    }
}

TEST_CASE("chain-hopping shift under frequency reflection") {
    // reflecting every frequency about the band center maps the default
    // device onto a relabeled copy of itself (qubit j takes the role of
    // 9-j), so with band-matched shunts the chain shift is permuted
    LatticeSpec mirrored = minimal_lattice_8q();
    for (auto& q : mirrored.qubits) q.freq_ghz = 17.2 - q.freq_ghz;
    mirrored.validate();
    const DeviceModel dev = default_8q_device();
    const auto base = frequency_shifts(dev);
    const auto relabeled =
        frequency_shifts(build_device(mirrored, default_device_config(mirrored)));
    for (int j = 1; j <= 8; ++j) check_rel(relabeled[j - 1].d3_mhz, base[(9 - j) - 1].d3_mhz, 1e-9);

    // holding every zero-point amplitude fixed while the detunings flip
    // exposes the oddness of the formula itself; any (frequency, amplitude)
    // pair is reachable through E_Cq = f phibar^2 / 4
    const double el = inductive_energy_ghz(108.0);
    DeviceConfig synthetic;
    for (const auto& q : mirrored.qubits) {
        const double phibar = dev.qubit(q.id).phibar;  // same id keeps its old amplitude
        const double ecq = q.freq_ghz * phibar * phibar / 4.0;
        QubitRaw raw;
        raw.id = q.id;
        raw.cq_ff = kElementaryCharge * kElementaryCharge / (2.0 * ecq * 1e9 * kPlanck) * 1e15;
        raw.ejq_ghz = q.freq_ghz / (2.0 * phibar * phibar) - 4.0 * el;
        synthetic.qubits.push_back(raw);
    }
    const auto odd = frequency_shifts(build_device(mirrored, synthetic));
    for (int j = 1; j <= 8; ++j) check_rel(odd[j - 1].d3_mhz, -base[j - 1].d3_mhz, 1e-9);
}

TEST_CASE("shift formulas flag near-resonant denominators") {
    // base frequencies tuned so a drive tone lands within 1 MHz of twice
    // a qubit frequency
    const std::array<double, 4> base = {13.8, 13.0, 4.1, 3.3005};
    const LatticeSpec lat = build_torus_lattice(2, 4, base);
    const DeviceModel dev = build_device(lat, default_device_config(lat));
    CHECK_THROWS_AS((void)frequency_shifts(dev), std::runtime_error);
}

TEST_CASE("validity report on the default device") {
    const std::map<std::string, double> expected = {
        {"sw_amplitude", 0.099101556703952042},
        {"rw1_qubit_squid", 0.11890390987795792},
        {"rw1_cell_pair", 0.10815767188142258},
        {"rw2_squid_sideband", 0.046161715479060292},
        {"rw3_residual_hopping", 0.029037358736212189},
        {"rw3a_second_order_hopping", 0.080634608445551036},
        {"rw4_fourbody_offres", 0.022655221531080207}};
    const DeviceModel dev = default_8q_device();
    const ValidityReport report = validity_report(dev);
    REQUIRE(report.entries.size() == expected.size());
    for (const auto& e : report.entries) {
        check_rel(e.ratio, expected.at(e.condition), 1e-9);
        CHECK(e.threshold == 0.3);
        CHECK(e.pass);
        CHECK(!e.worst.empty());
    }
    check_rel(report.min_tone_detuning_ghz, 1.2, 1e-9);
    CHECK(report.detuning_pass);
    CHECK(report.all_pass());

    const ValidityReport strict = validity_report(dev, 0.01);
    CHECK(!strict.all_pass());
    for (const auto& e : strict.entries) CHECK(!e.pass);
}

TEST_CASE("drive-term condition scales with the drive amplitude") {
    const LatticeSpec lat = minimal_lattice_8q();
    DeviceConfig config = default_device_config(lat);
    const ValidityReport base = validity_report(build_device(lat, config));
    config.squid.phi_ac_rad = 0.49;
    const ValidityReport hot = validity_report(build_device(lat, config), 0.05);
    for (size_t i = 0; i < base.entries.size(); ++i) {
        const auto& b = base.entries[i];
        const auto& h = hot.entries[i];
        if (b.condition == "rw2_squid_sideband" || b.condition == "rw4_fourbody_offres") {
            check_rel(h.ratio, b.ratio * 0.49 / 0.093, 1e-9);
            CHECK(!h.pass);
        }
    }
}

TEST_CASE("device config json round trip") {
    const LatticeSpec lat = minimal_lattice_8q();
    DeviceConfig config = default_device_config(lat);
    config.squid.ec_minus_convention = EcMinusConvention::Quarter;
    const DeviceConfig back = device_config_from_json(device_config_to_json(config));
    CHECK(back.squid.ej_ghz == config.squid.ej_ghz);
    CHECK(back.squid.cj_ff == config.squid.cj_ff);
    CHECK(back.squid.cg_ff == config.squid.cg_ff);
    CHECK(back.squid.l_nh == config.squid.l_nh);
    CHECK(back.squid.phi_ac_rad == config.squid.phi_ac_rad);
    CHECK(back.squid.ec_minus_convention == EcMinusConvention::Quarter);
    REQUIRE(back.qubits.size() == config.qubits.size());
    for (size_t i = 0; i < config.qubits.size(); ++i) {
        CHECK(back.qubits[i].id == config.qubits[i].id);
        CHECK(back.qubits[i].ejq_ghz == config.qubits[i].ejq_ghz);
        CHECK(back.qubits[i].cq_ff == config.qubits[i].cq_ff);
    }
}

TEST_CASE("device config json rejects unknown or malformed input") {
    CHECK_THROWS_AS((void)device_config_from_json("nope"), std::invalid_argument);
    CHECK_THROWS_AS((void)device_config_from_json(R"({"squid":{},"qubits":[],"extra":1})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        (void)device_config_from_json(R"({"squid":{"voltage":1},"qubits":[]})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)device_config_from_json(R"({"squid":{},"qubits":[{"id":1,"color":"red"}]})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)device_config_from_json(
            R"({"squid":{"ec_minus_convention":"third"},"qubits":[]})"),
        std::invalid_argument);
}

TEST_CASE("report serializers produce well-formed json") {
    const DeviceModel dev = default_8q_device();
    const auto shifts_json = nlohmann::json::parse(shifts_to_json(frequency_shifts(dev)));
    REQUIRE(shifts_json.at("qubits").size() == 8);
    const auto& first = shifts_json.at("qubits").front();
    const double total = first.at("d1_mhz").get<double>() + first.at("d2_mhz").get<double>() +
                         first.at("d3_mhz").get<double>() + first.at("d4_mhz").get<double>();
    CHECK(first.at("total_mhz").get<double>() == doctest::Approx(total).epsilon(1e-12));

    const auto validity_json = nlohmann::json::parse(validity_report_to_json(validity_report(dev)));
    CHECK(validity_json.at("all_pass").get<bool>());
    CHECK(validity_json.at("conditions").size() == 7);
    CHECK(validity_json.at("min_tone_detuning_ghz").get<double>() ==
          doctest::Approx(1.2).epsilon(1e-9));
}
