#pragma once

// Hamiltonian models and time evolution.
//
// A HamiltonianModel is a static sparse operator plus a list of Hermitian
// time-dependent terms, each written as coeff(t) * op with a real-valued
// coefficient function.  Energies are in GHz, times in ns, and propagation
// follows d/dt psi = -2*pi*i H(t) psi.
//
// Builders cover the idealized stabilizer Hamiltonians on a lattice, the
// interpolating sweep Hamiltonian, the rotating-frame model of one driven
// cell, and the non-rotating circuit model of one isolated cell.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "toricsim/device.hpp"
#include "toricsim/drive.hpp"
#include "toricsim/lattice.hpp"
#include "toricsim/ops.hpp"

namespace toricsim {

// Relaxation and pure-dephasing rates in 1/ns.  kappa is the energy
// relaxation rate 1/T1; kappa_prime is the pure dephasing rate, related to
// the total dephasing time by 1/T2 = kappa/2 + 2*kappa_prime.
struct NoiseConfig {
    double kappa_per_ns = 0.0;
    double kappa_prime_per_ns = 0.0;

    static NoiseConfig from_rates(double kappa_per_ns, double kappa_prime_per_ns);
    // T2 may not exceed 2*T1; pass t2_us <= 0 to set kappa_prime = 0.
    static NoiseConfig from_times_us(double t1_us, double t2_us);

    bool enabled() const { return kappa_per_ns > 0.0 || kappa_prime_per_ns > 0.0; }
};

// One time-dependent Hamiltonian term coeff(t) * op.  The operator must be
// Hermitian and the coefficient real so the total stays Hermitian.
struct TimeTerm {
    SparseOp op;
    std::function<double(double)> coeff;  // takes t in ns, returns GHz multiplier
};

struct HamiltonianModel {
    HilbertSpace space;
    SparseOp static_part;
    std::vector<TimeTerm> time_terms;

    bool is_static() const { return time_terms.empty(); }
    // Assembled H(t) as one sparse matrix.
    SparseOp at(double t_ns) const;
    // out = H(t) * in without assembling the sum.
    void apply(double t_ns, const Vec& in, Vec& out) const;
};

// Hilbert space with one qubit site per lattice qubit, labeled "q<id>",
// ordered as in lattice.qubits.
HilbertSpace lattice_space(const LatticeSpec& lattice);

// Four-body Pauli product for one cell: sigma_x on every corner for a star,
// sigma_y for a plaquette.
SparseOp stabilizer_operator(const HilbertSpace& space, const LatticeSpec& lattice,
                             const Cell& cell);

// H = -J_s sum_s A_s - J_p sum_p B_p on the full lattice.
HamiltonianModel build_toric_hamiltonian(const LatticeSpec& lattice, double j_star_ghz,
                                         double j_plaq_ghz);

// Interpolating Hamiltonian at a fixed point lambda in [0, 1]:
// H = (1-lambda) * (delta/2) sum_j sigma_z_j - lambda * (J_s sum A + J_p sum B).
HamiltonianModel build_sweep_hamiltonian(const LatticeSpec& lattice, double lambda,
                                         double delta_ghz, double j_star_ghz,
                                         double j_plaq_ghz);

// Time-dependent version of the interpolation with a caller-supplied
// schedule lambda(t); the schedule takes t in ns.
HamiltonianModel build_interpolated_model(const LatticeSpec& lattice, double delta_ghz,
                                          double j_star_ghz, double j_plaq_ghz,
                                          std::function<double(double)> lambda_of_t);

// Polynomial sweep schedule lambda(x) = (1+zeta) x^6 / (1 + zeta x^6) for
// x = t/T in [0, 1]; flat near both endpoints, exactly 0 and 1 at the ends.
double ramp_lambda(double x, double zeta = 100.0);

// Term selection for the rotating-frame cell Hamiltonian: h1 keeps the
// quartic monomials with one ladder operator per qubit, h2 the full
// quadratic part, h3 the remaining quartic monomials.
struct CellTerms {
    bool h1 = true;
    bool h2 = true;
    bool h3 = true;
};

// Rotating-frame Hamiltonian of one driven cell.  Sites are the four corner
// qubits in corner order ("q<id>"), each truncated to `levels` states
// (2 or 3); levels = 3 adds the static anharmonic correction.  The qubits
// array must match drive.corners position by position.
HamiltonianModel build_cell_hamiltonian(const std::array<QubitDerived, 4>& qubits,
                                        const SquidDerived& squid, const DriveSpec& drive,
                                        CellTerms terms, int levels = 2);

// Mode data for one isolated-cell build: per-qubit phase matrices in the
// kept eigenbasis (dimensionless), the bare mode frequencies before the
// coupler hybridizes them, and the coupler parameters.
struct FullCellDetails {
    std::array<DenseOp, 4> qubit_phi;    // 3x3 per corner
    std::array<double, 4> f_bare_ghz{};  // physical units
    double f_minus_ghz = 0.0;
    double phibar_minus = 0.0;
};

// Non-rotating circuit model of one isolated cell: four anharmonic qubit
// modes ("q<id>", 3 levels each, exact low-level matrix elements), one
// coupler mode ("squid", squid_levels >= 8 harmonic levels), bilinear
// phase coupling, and the modulated junction drive.  All energies are
// divided by `scale`; drive tone frequencies are interpreted in the same
// rescaled units, so the caller rescales the DriveSpec to match.
HamiltonianModel build_full_cell_model(const std::array<QubitRaw, 4>& qubits,
                                       const SquidRaw& squid, const DriveSpec& drive,
                                       int squid_levels, double scale = 1.0,
                                       FullCellDetails* details = nullptr);

enum class SpectrumMethod { Auto, Dense, Iterative };

struct SpectrumResult {
    std::vector<double> eigenvalues;     // ascending
    std::vector<double> residuals;       // ||H v - e v||_2 per pair
    double norm_estimate = 0.0;          // spectral norm estimate of H
    std::string method;                  // "dense" or "lanczos"
};

// Lowest k eigenvalues of a static model with explicit residuals.  Auto
// picks the dense solver below dimension 4096 and block Lanczos at or
// above.  Throws for time-dependent models and on non-convergence.
SpectrumResult spectrum(const HamiltonianModel& model, int k,
                        SpectrumMethod method = SpectrumMethod::Auto);

struct EvolveOptions {
    double t_final_ns = 0.0;
    double dt_ns = 0.0;          // 0 selects the step automatically
    double tol = 1e-6;           // step-halving acceptance on all series
    int max_halvings = 14;
    int output_points = 101;     // uniform sample grid including both ends
    bool store_states = false;
    bool check_positivity = true;
    double positivity_floor = -1e-6;  // tolerated most-negative eigenvalue
    double trace_tol = 1e-6;
};

struct TrajectoryRecord {
    std::vector<double> t_ns;
    // Ordered series, one value per sample time; a "purity" series is
    // always present after the requested observables.
    std::vector<std::pair<std::string, std::vector<double>>> series;
    std::vector<QuantumState> states;  // filled only when requested

    double dt_ns = 0.0;          // accepted step after halving
    int halvings = 0;
    double convergence_delta = 0.0;  // series change at the accepted halving
    double max_trace_drift = 0.0;

    const std::vector<double>& series_named(const std::string& name) const;
};

// Integrate the Schroedinger or Lindblad equation with classic RK4,
// halving the step until every recorded series is stable within tol.
// Noise terms require a space made of qubit sites only.
TrajectoryRecord evolve(const HamiltonianModel& model, const QuantumState& initial,
                        const std::optional<NoiseConfig>& noise,
                        const std::vector<std::pair<std::string, SparseOp>>& observables,
                        const EvolveOptions& options);

// Render a trajectory as CSV with a t_ns column followed by one column per
// series, 17 significant digits.
std::string trajectory_csv(const TrajectoryRecord& record);

}  // namespace toricsim
