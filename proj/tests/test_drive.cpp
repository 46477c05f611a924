// Drive-synthesis tests: tone tables, signs, amplitude modes, waveforms.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <sstream>

#include "toricsim/device.hpp"
#include "toricsim/drive.hpp"
#include "toricsim/lattice.hpp"

using namespace toricsim;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

void check_rel(double got, double want, double tol = 1e-12) {
    CHECK(std::abs(got - want) <= tol * (1.0 + std::abs(want)));
}

DeviceModel default_8q_device() {
    const LatticeSpec lat = minimal_lattice_8q();
    return build_device(lat, default_device_config(lat));
}

std::multiset<long long> abs_tone_keys(const std::array<double, 8>& tones) {
    std::multiset<long long> keys;
    for (double t : tones) keys.insert(llround(std::abs(t) * 1e6));
    return keys;
}

}  // namespace

TEST_CASE("tone table for the reference cell") {
    const auto tones = drive_frequencies({13.8, 3.5, 13.1, 4.1});
    const std::array<double, 8> expected = {34.5, 0.1, 19.3, 1.3, 26.3, 8.3, 27.5, 6.9};
    for (int k = 0; k < 8; ++k) check_rel(tones[k], expected[k], 1e-12);
}

TEST_CASE("tone table permutation action") {
    const std::array<double, 4> freqs = {13.8, 3.5, 13.1, 4.1};
    const auto base = drive_frequencies(freqs);
    // swapping the last two cell frequencies swaps nu3/nu4 and nu5/nu6
    const auto swapped = drive_frequencies({13.8, 3.5, 4.1, 13.1});
    check_rel(swapped[0], base[0]);
    check_rel(swapped[1], base[1]);
    check_rel(swapped[2], base[3]);
    check_rel(swapped[3], base[2]);
    check_rel(swapped[4], base[5]);
    check_rel(swapped[5], base[4]);
    check_rel(swapped[6], base[6]);
    check_rel(swapped[7], base[7]);
    // any reordering preserves the multiset of absolute tone frequencies
    std::array<double, 4> perm = freqs;
    std::sort(perm.begin(), perm.end());
    do {
        CHECK(abs_tone_keys(drive_frequencies(perm)) == abs_tone_keys(base));
    } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("tone synthesis rejects degenerate cells") {
    CHECK_THROWS_AS((void)drive_frequencies({13.8, 3.5, 13.8, 4.1}), std::invalid_argument);
}

TEST_CASE("per-cell drive specs") {
    const DeviceModel dev = default_8q_device();

    const DriveSpec star = build_drive(dev, 1, AmpMode::Unit);
    CHECK(star.kind == CellKind::Star);
    CHECK(star.corners == std::array<int, 4>{1, 8, 2, 4});
    const std::array<double, 8> star_tones = {34.3, 0.1, 19.3, 1.5, 26.1, 8.3, 27.5, 6.7};
    for (int k = 0; k < 8; ++k) {
        CHECK(star.components[k].k == k + 1);
        check_rel(star.components[k].nu_ghz, star_tones[k], 1e-12);
        CHECK(star.components[k].sign == +1);
        check_rel(star.components[k].amp_rad, 0.093);
    }

    const DriveSpec plaq = build_drive(dev, 5, AmpMode::Unit);
    CHECK(plaq.kind == CellKind::Plaquette);
    const std::array<double, 8> plaq_tones = {34.5, 0.1, 19.3, 1.3, 26.3, 8.3, 27.5, 6.9};
    for (int k = 0; k < 8; ++k) {
        check_rel(plaq.components[k].nu_ghz, plaq_tones[k], 1e-12);
        CHECK(plaq.components[k].sign == (k < 4 ? +1 : -1));
    }

    CHECK_THROWS_AS((void)build_drive(dev, 99), std::invalid_argument);
    CHECK(build_drives(dev).size() == 8);
}

TEST_CASE("amplitude partition modes") {
    const DeviceModel dev = default_8q_device();
    const DriveSpec nominal = build_drive(dev, 5, AmpMode::Nominal);
    const DriveSpec unit = build_drive(dev, 5, AmpMode::Unit);
    const DriveSpec split = build_drive(dev, 5, AmpMode::Split);
    for (int k = 0; k < 8; ++k) {
        check_rel(nominal.components[k].amp_rad, -2.0 * 0.093);
        check_rel(unit.components[k].amp_rad, 0.093);
        check_rel(split.components[k].amp_rad, 0.093 / 8.0);
    }
    CHECK(amp_mode_from("nominal") == AmpMode::Nominal);
    CHECK(amp_mode_from("unit") == AmpMode::Unit);
    CHECK(amp_mode_from("split") == AmpMode::Split);
    CHECK(amp_mode_name(AmpMode::Split) == "split");
    CHECK_THROWS_AS((void)amp_mode_from("loud"), std::invalid_argument);
}

TEST_CASE("waveform values and averages") {
    const DeviceModel dev = default_8q_device();
    const DriveSpec star = build_drive(dev, 1, AmpMode::Unit);
    const DriveSpec plaq = build_drive(dev, 5, AmpMode::Unit);
    check_rel(waveform(star, 0.0), 8.0 * 0.093, 1e-12);
    CHECK(std::abs(waveform(plaq, 0.0)) < 1e-14);
    const DriveSpec nominal = build_drive(dev, 1, AmpMode::Nominal);
    check_rel(waveform(nominal, 0.0), -16.0 * 0.093, 1e-12);

    // zero-mean over a long window
    const double t_final = 1000.0;
    const int n = 200000;
    const double dt = t_final / n;
    double acc = 0.5 * (waveform(star, 0.0) + waveform(star, t_final));
    for (int i = 1; i < n; ++i) acc += waveform(star, i * dt);
    CHECK(std::abs(acc * dt / t_final) < 1e-3);
}

TEST_CASE("rotating-frame resonance selectivity") {
    const DeviceModel dev = default_8q_device();
    for (const int cell_id : {1, 5}) {
        const DriveSpec spec = build_drive(dev, cell_id, AmpMode::Unit);
        const double t_final = 200.0;
        const int n = 40000;
        const double dt = t_final / n;
        for (int j = 0; j < 8; ++j) {
            for (int k = 0; k < 8; ++k) {
                std::complex<double> acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double t = (i + 0.5) * dt;
                    const double f = std::cos(kTau * spec.components[j].nu_ghz * t);
                    acc += f * std::exp(std::complex<double>(0.0, -kTau * spec.components[k].nu_ghz * t));
                }
                const std::complex<double> avg = acc * dt / t_final;
                if (j == k) CHECK(std::abs(avg - std::complex<double>(0.5, 0.0)) < 5e-3);
                else CHECK(std::abs(avg) < 1e-3);
            }
        }
    }
}

TEST_CASE("tone detuning audit") {
    const DeviceModel dev = default_8q_device();
    double worst = 1e300;
    for (const auto& spec : build_drives(dev))
        worst = std::min(worst, min_tone_detuning_ghz(spec));
    check_rel(worst, 1.2, 1e-9);
    check_rel(min_tone_detuning_ghz(build_drive(dev, 1)), 1.4, 1e-9);
}

TEST_CASE("drive table export") {
    const DeviceModel dev = default_8q_device();
    const std::string csv = drive_table_csv(build_drives(dev, AmpMode::Unit));
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "cell,kind,k,nu_ghz,amp_rad,sign");
    int rows = 0, minus = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.find(",-1") == line.size() - 3) ++minus;
        const bool star_row = line.find(",star,") != std::string::npos;
        const bool plaq_row = line.find(",plaquette,") != std::string::npos;
        CHECK((star_row || plaq_row));
    }
    CHECK(rows == 64);
    CHECK(minus == 16);  // four plaquette cells, components 5..8
}
