#pragma once

// Lattice-scale experiments: construction of the protected ground states,
// their correlation signatures, adiabatic and quench-style preparation
// sweeps with optional dissipation, and robustness under weak local
// perturbations.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "toricsim/dynamics.hpp"
#include "toricsim/lattice.hpp"
#include "toricsim/ops.hpp"

namespace toricsim {

// plaquette-projected |+...+> state, a stabilizer ground state on any
// torus lattice
Vec reference_ground_state(const LatticeSpec& lattice);

// the four orthonormal ground states of the minimal lattice; the last
// three apply the sigma_y loop strings {5,6}, {4,8}, and both in turn
// to the first
std::array<Vec, 4> ground_states_8q();

// projector onto the protected subspace as an explicit sparse operator;
// the operator form is limited to 12 qubits because its fill grows with
// the full stabilizer group
SparseOp topological_projector(const LatticeSpec& lattice);

// y |-> product over cells of (1 + S)/2 applied to y, without forming
// the projector matrix; usable at sizes the explicit operator is not
Vec apply_topological_projector(const LatticeSpec& lattice, const Vec& y);

// protected-subspace dimension, from deterministic random probes of the
// projector map and the rank of their Gram matrix
int topological_rank(const LatticeSpec& lattice);

// Tr(P rho) for a projector P, clamped into [0, 1] against roundoff
double subspace_fidelity(const SparseOp& projector, const QuantumState& state);

struct SweepConfig {
    double ts_us = 10.0;     // ramp duration
    double delta_mhz = 5.0;  // initial detuning
    double js_mhz = 2.0;
    double jp_mhz = 2.0;
    double zeta = 100.0;     // ramp stiffness
    std::optional<NoiseConfig> noise;
    EvolveOptions evolve;    // t_final_ns is derived from ts_us
};

struct SweepResult {
    TrajectoryRecord record;  // series: fidelity, then purity
    double fidelity_final = 0.0;
    double purity_final = 0.0;
};

// ramp of the stabilizer couplings against the vanishing detuning,
// starting from the qubit vacuum; ts_us = 0 reduces to the sudden quench,
// whose fidelity is the vacuum weight inside the protected subspace
SweepResult adiabatic_sweep(const LatticeSpec& lattice, const SweepConfig& config);

struct HammaConfig {
    double ts_us = 10.0;   // duration of the closing ramp
    double bx_mhz = 5.0;   // transverse field holding |+...+> in place
    double js_mhz = 2.0;
    double jp_mhz = 2.0;
    double zeta = 100.0;
    std::optional<NoiseConfig> noise;
    EvolveOptions evolve;
};

// quench-style preparation: rotate the vacuum onto |+...+> with half-pi
// pulses, switch on the stars and the transverse field abruptly, then
// trade the field for the plaquettes along the ramp
SweepResult hamma_sweep(const LatticeSpec& lattice, const HammaConfig& config);

// the published two-qubit correlation columns of the minimal lattice
inline constexpr std::array<std::array<int, 2>, 8> kCorrelationPairs8q = {
    {{1, 2}, {3, 4}, {5, 6}, {7, 8}, {3, 7}, {1, 5}, {4, 8}, {2, 6}}};

struct CorrelationEntry {
    std::string name;
    double value = 0.0;
};

struct CorrelationTable {
    std::vector<CorrelationEntry> singles;  // sigma x/y/z per qubit
    std::vector<CorrelationEntry> pairs;    // the 8q table columns, in order
    std::vector<CorrelationEntry> loops;    // sigma_x products on each loop
};

// exact expectation values; the pair block is filled for the eight-qubit
// lattice only, in the published column order
CorrelationTable measure_correlations(const QuantumState& state,
                                      const LatticeSpec& lattice);

// long-form rendering: observable,value with 17 significant digits
std::string correlation_csv(const CorrelationTable& table);

enum class PerturbAxis { Plus, Minus, Z };

// Weak single-site term g(t) * sigma^axis.  The raising and lowering
// variants enter through their Hermitian combination, so both act as the
// transverse Pauli with the phase absorbed into the envelope.
struct PerturbationSpec {
    int site = 1;  // qubit id
    PerturbAxis axis = PerturbAxis::Z;
    std::function<double(double)> g_ghz;  // envelope, t in ns
    double max_g_ghz = 0.0;               // recorded bound of |g|
    double duration_ns = 0.0;

    static PerturbationSpec constant(int site, PerturbAxis axis, double g_ghz,
                                     double duration_ns);
};

struct PerturbationResult {
    TrajectoryRecord record;  // series: state_fidelity, subspace_fidelity, purity
    double comparison_ratio = 0.0;  // max|g| / (4 J)
    double state_fidelity_final = 0.0;
    double subspace_fidelity_final = 0.0;
};

// evolve a pure protected state under the stabilizer Hamiltonian plus the
// local perturbation and track how far it leaves the initial state and
// the protected subspace
PerturbationResult perturbation_robustness(const QuantumState& state,
                                           const LatticeSpec& lattice,
                                           const PerturbationSpec& pert, double j_ghz);

struct SweepGrid {
    std::vector<double> ts_us;
    std::vector<double> delta_mhz;
    double js_mhz = 2.0;
    double jp_mhz = 2.0;
    double zeta = 100.0;
    std::optional<NoiseConfig> noise;
};

struct SweepMapPoint {
    double ts_us = 0.0;
    double delta_mhz = 0.0;
    double f_final = 0.0;  // NaN when the point failed
    double p_final = 0.0;
};

// Grid of sweep endpoints, row-major over (ts, delta).  The step size is
// calibrated once by full halving at the stiffest corner (largest detuning
// and longest ramp) and then pinned for every point, so the map cost stays
// bounded; points run on `parallelism` worker threads and are merged in
// grid order.  A failed point becomes a NaN row rather than an abort.
std::vector<SweepMapPoint> sweep_map(const LatticeSpec& lattice, const SweepGrid& grid,
                                     const EvolveOptions& base, int parallelism = 1);

// header T_S_us,Delta_MHz,F_final,P_final
std::string sweep_map_csv(const std::vector<SweepMapPoint>& points);

}  // namespace toricsim
