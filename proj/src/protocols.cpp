#include "toricsim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "toricsim/io.hpp"

namespace toricsim {

namespace {

constexpr double kGhzPerMhz = 1e-3;
constexpr double kNsPerUs = 1e3;

SparseOp sparse_identity(long long dim) {
    SparseOp id(dim, dim);
    id.setIdentity();
    return id;
}

SparseOp outer_projector(const Vec& psi) {
    const long long dim = psi.size();
    std::vector<Eigen::Triplet<cplx>> trips;
    for (long long r = 0; r < dim; ++r) {
        if (std::abs(psi(r)) < 1e-14) continue;
        for (long long c = 0; c < dim; ++c) {
            if (std::abs(psi(c)) < 1e-14) continue;
            trips.push_back({static_cast<int>(r), static_cast<int>(c),
                             psi(r) * std::conj(psi(c))});
        }
    }
    SparseOp op(dim, dim);
    op.setFromTriplets(trips.begin(), trips.end());
    return op;
}

SparseOp cell_sum(const HilbertSpace& space, const LatticeSpec& lattice, CellKind kind) {
    SparseOp sum(space.dim(), space.dim());
    for (const auto& c : lattice.cells)
        if (c.kind == kind) sum = sum + stabilizer_operator(space, lattice, c);
    return sum;
}

SparseOp sigma_sum(const HilbertSpace& space, const LatticeSpec& lattice, PauliAxis axis) {
    SparseOp sum(space.dim(), space.dim());
    const DenseOp local = pauli_matrix(axis);
    for (int i = 0; i < lattice.num_qubits(); ++i)
        sum = sum + embed(space, i, local);
    return sum;
}

// single-sample record for the zero-duration protocols
TrajectoryRecord instant_record(double fidelity, double purity) {
    TrajectoryRecord rec;
    rec.t_ns = {0.0};
    rec.series.push_back({"fidelity", {fidelity}});
    rec.series.push_back({"purity", {purity}});
    return rec;
}

SweepResult finish_sweep(TrajectoryRecord&& rec) {
    SweepResult out;
    out.record = std::move(rec);
    out.fidelity_final = out.record.series_named("fidelity").back();
    out.purity_final = out.record.series_named("purity").back();
    return out;
}

}  // namespace

Vec reference_ground_state(const LatticeSpec& lattice) {
    lattice.validate();
    const HilbertSpace space = lattice_space(lattice);
    const long long dim = space.dim();
    Vec psi = Vec::Constant(dim, cplx(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
    for (const auto& c : lattice.cells) {
        if (c.kind != CellKind::Plaquette) continue;
        const SparseOp b = stabilizer_operator(space, lattice, c);
        psi = psi + b * psi;
    }
    const double n = psi.norm();
    if (n < 1e-12)
        throw std::runtime_error("reference_ground_state: plaquette projection annihilated the state");
    return psi / n;
}

std::array<Vec, 4> ground_states_8q() {
    const LatticeSpec lattice = minimal_lattice_8q();
    const HilbertSpace space = lattice_space(lattice);
    const Vec psi1 = reference_ground_state(lattice);

    auto loop_y = [&](const std::vector<int>& ids, const Vec& v) {
        Vec out = v;
        for (int id : ids)
            out = embed(space, lattice.qubit_index(id), pauli_matrix(PauliAxis::Y)) * out;
        return out;
    };
    const Vec psi2 = loop_y({5, 6}, psi1);
    const Vec psi3 = loop_y({4, 8}, psi1);
    const Vec psi4 = loop_y({5, 6}, psi3);
    return {psi1, psi2, psi3, psi4};
}

SparseOp topological_projector(const LatticeSpec& lattice) {
    lattice.validate();
    if (lattice.num_qubits() > 12)
        throw std::invalid_argument(
            "topological_projector: explicit operator is limited to 12 qubits");
    const HilbertSpace space = lattice_space(lattice);
    SparseOp p = sparse_identity(space.dim());
    for (const auto& c : lattice.cells) {
        const SparseOp s = stabilizer_operator(space, lattice, c);
        p = 0.5 * (p + SparseOp(s * p));
        p.prune(cplx(1.0, 0.0), 1e-15);
    }
    return p;
}

Vec apply_topological_projector(const LatticeSpec& lattice, const Vec& y) {
    const HilbertSpace space = lattice_space(lattice);
    if (y.size() != space.dim())
        throw std::invalid_argument("apply_topological_projector: dimension mismatch");
    Vec out = y;
    for (const auto& c : lattice.cells) {
        const SparseOp s = stabilizer_operator(space, lattice, c);
        out = 0.5 * (out + s * out);
    }
    return out;
}

int topological_rank(const LatticeSpec& lattice) {
    lattice.validate();
    const HilbertSpace space = lattice_space(lattice);
    const long long dim = space.dim();
    const int probes = 8;
    std::mt19937 gen(0x70c1);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXcd cols(dim, probes);
    for (int c = 0; c < probes; ++c) {
        Vec y(dim);
        for (long long i = 0; i < dim; ++i) y(i) = cplx(dist(gen), dist(gen));
        cols.col(c) = apply_topological_projector(lattice, y);
    }
    const Eigen::MatrixXcd gram = cols.adjoint() * cols;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    const double floor = 1e-8 * std::max(es.eigenvalues().maxCoeff(), 1e-300);
    int rank = 0;
    for (int i = 0; i < probes; ++i)
        if (es.eigenvalues()(i) > floor) ++rank;
    return rank;
}

double subspace_fidelity(const SparseOp& projector, const QuantumState& state) {
    const double f = expectation(projector, state).real();
    return std::clamp(f, 0.0, 1.0);
}

SweepResult adiabatic_sweep(const LatticeSpec& lattice, const SweepConfig& config) {
    if (config.ts_us < 0.0)
        throw std::invalid_argument("adiabatic_sweep: negative duration");
    const HilbertSpace space = lattice_space(lattice);
    const SparseOp p = topological_projector(lattice);
    const QuantumState vac = QuantumState::vacuum(space);

    if (config.ts_us == 0.0) {
        // sudden limit: the vacuum is quenched straight into the final
        // Hamiltonian, so the preparation fidelity is its projector weight
        return finish_sweep(instant_record(subspace_fidelity(p, vac), 1.0));
    }

    const double t_final = config.ts_us * kNsPerUs;
    const double zeta = config.zeta;
    HamiltonianModel model = build_interpolated_model(
        lattice, config.delta_mhz * kGhzPerMhz, config.js_mhz * kGhzPerMhz,
        config.jp_mhz * kGhzPerMhz,
        [t_final, zeta](double t) { return ramp_lambda(t / t_final, zeta); });

    EvolveOptions opts = config.evolve;
    opts.t_final_ns = t_final;
    TrajectoryRecord rec = evolve(model, vac, config.noise, {{"fidelity", p}}, opts);
    return finish_sweep(std::move(rec));
}

SweepResult hamma_sweep(const LatticeSpec& lattice, const HammaConfig& config) {
    if (config.ts_us < 0.0)
        throw std::invalid_argument("hamma_sweep: negative duration");
    const HilbertSpace space = lattice_space(lattice);
    const SparseOp p = topological_projector(lattice);

    // half-pi pulses rotate every qubit from the vacuum onto |+...+>
    Vec plus = QuantumState::vacuum(space).amplitudes();
    const DenseOp rot = (1.0 / std::sqrt(2.0)) *
                        (DenseOp::Identity(2, 2) - cplx(0.0, 1.0) * pauli_matrix(PauliAxis::Y));
    for (int i = 0; i < lattice.num_qubits(); ++i) plus = embed(space, i, rot) * plus;
    const QuantumState start = QuantumState::pure(space, plus);

    if (config.ts_us == 0.0)
        return finish_sweep(instant_record(subspace_fidelity(p, start), 1.0));

    const double t_final = config.ts_us * kNsPerUs;
    const double zeta = config.zeta;
    const double js = config.js_mhz * kGhzPerMhz;
    const double jp = config.jp_mhz * kGhzPerMhz;
    const double bx = config.bx_mhz * kGhzPerMhz;

    HamiltonianModel model;
    model.space = space;
    model.static_part = SparseOp(-js * cell_sum(space, lattice, CellKind::Star));
    auto ramp = [t_final, zeta](double t) { return ramp_lambda(t / t_final, zeta); };
    model.time_terms.push_back(
        {SparseOp(-bx * sigma_sum(space, lattice, PauliAxis::X)),
         [ramp](double t) { return 1.0 - ramp(t); }});
    model.time_terms.push_back(
        {SparseOp(-jp * cell_sum(space, lattice, CellKind::Plaquette)), ramp});

    EvolveOptions opts = config.evolve;
    opts.t_final_ns = t_final;
    TrajectoryRecord rec = evolve(model, start, config.noise, {{"fidelity", p}}, opts);
    return finish_sweep(std::move(rec));
}

CorrelationTable measure_correlations(const QuantumState& state,
                                      const LatticeSpec& lattice) {
    const HilbertSpace space = lattice_space(lattice);
    if (state.space().dim() != space.dim())
        throw std::invalid_argument("measure_correlations: state does not match lattice");
    CorrelationTable table;

    const std::array<std::pair<const char*, PauliAxis>, 3> axes = {
        {{"sx", PauliAxis::X}, {"sy", PauliAxis::Y}, {"sz", PauliAxis::Z}}};
    for (const auto& q : lattice.qubits) {
        const int idx = lattice.qubit_index(q.id);
        for (const auto& [tag, axis] : axes) {
            const SparseOp op = embed(space, idx, pauli_matrix(axis));
            table.singles.push_back({std::string(tag) + "_q" + std::to_string(q.id),
                                     expectation(op, state).real()});
        }
    }

    if (lattice.num_qubits() == 8) {
        for (const auto& pair : kCorrelationPairs8q) {
            const SparseOp op =
                SparseOp(embed(space, lattice.qubit_index(pair[0]), pauli_matrix(PauliAxis::X)) *
                         embed(space, lattice.qubit_index(pair[1]), pauli_matrix(PauliAxis::X)));
            table.pairs.push_back(
                {"xx_q" + std::to_string(pair[0]) + "_q" + std::to_string(pair[1]),
                 expectation(op, state).real()});
        }
    }

    for (const auto& loop : noncontractible_loops(lattice)) {
        SparseOp op = sparse_identity(space.dim());
        std::string name = "xloop";
        for (int id : loop.qubits) {
            op = SparseOp(op * embed(space, lattice.qubit_index(id), pauli_matrix(PauliAxis::X)));
            name += "_q" + std::to_string(id);
        }
        table.loops.push_back({name, expectation(op, state).real()});
    }
    return table;
}

std::string correlation_csv(const CorrelationTable& table) {
    std::ostringstream out;
    out << "observable,value\n";
    auto emit = [&](const std::vector<CorrelationEntry>& entries) {
        for (const auto& e : entries) out << e.name << ',' << format_g17(e.value) << '\n';
    };
    emit(table.singles);
    emit(table.pairs);
    emit(table.loops);
    return out.str();
}

PerturbationSpec PerturbationSpec::constant(int site, PerturbAxis axis, double g_ghz,
                                            double duration_ns) {
    PerturbationSpec spec;
    spec.site = site;
    spec.axis = axis;
    spec.g_ghz = [g_ghz](double) { return g_ghz; };
    spec.max_g_ghz = std::abs(g_ghz);
    spec.duration_ns = duration_ns;
    return spec;
}

PerturbationResult perturbation_robustness(const QuantumState& state,
                                           const LatticeSpec& lattice,
                                           const PerturbationSpec& pert, double j_ghz) {
    if (!state.is_pure())
        throw std::invalid_argument("perturbation_robustness: expects a pure state");
    if (!(pert.duration_ns > 0.0))
        throw std::invalid_argument("perturbation_robustness: duration must be positive");
    if (!pert.g_ghz)
        throw std::invalid_argument("perturbation_robustness: missing envelope");
    if (pert.max_g_ghz < 0.0)
        throw std::invalid_argument("perturbation_robustness: negative amplitude bound");
    if (!(j_ghz > 0.0))
        throw std::invalid_argument("perturbation_robustness: coupling must be positive");

    const HilbertSpace space = lattice_space(lattice);
    if (state.space().dim() != space.dim())
        throw std::invalid_argument("perturbation_robustness: state does not match lattice");

    HamiltonianModel model = build_toric_hamiltonian(lattice, j_ghz, j_ghz);
    const int idx = lattice.qubit_index(pert.site);
    const DenseOp local = (pert.axis == PerturbAxis::Z)
                              ? pauli_matrix(PauliAxis::Z)
                              : pauli_matrix(PauliAxis::X);
    model.time_terms.push_back({embed(space, idx, local), pert.g_ghz});

    const SparseOp p = topological_projector(lattice);
    const SparseOp self = outer_projector(state.amplitudes());

    EvolveOptions opts;
    opts.t_final_ns = pert.duration_ns;
    TrajectoryRecord rec = evolve(model, state, std::nullopt,
                                  {{"state_fidelity", self}, {"subspace_fidelity", p}}, opts);

    PerturbationResult out;
    out.record = std::move(rec);
    out.comparison_ratio = pert.max_g_ghz / (4.0 * j_ghz);
    out.state_fidelity_final = out.record.series_named("state_fidelity").back();
    out.subspace_fidelity_final = out.record.series_named("subspace_fidelity").back();
    return out;
}

std::vector<SweepMapPoint> sweep_map(const LatticeSpec& lattice, const SweepGrid& grid,
                                     const EvolveOptions& base, int parallelism) {
    if (grid.ts_us.empty() || grid.delta_mhz.empty())
        throw std::invalid_argument("sweep_map: empty grid axis");
    if (parallelism < 1) throw std::invalid_argument("sweep_map: parallelism must be >= 1");

    auto config_for = [&](double ts, double delta) {
        SweepConfig c;
        c.ts_us = ts;
        c.delta_mhz = delta;
        c.js_mhz = grid.js_mhz;
        c.jp_mhz = grid.jp_mhz;
        c.zeta = grid.zeta;
        c.noise = grid.noise;
        c.evolve = base;
        return c;
    };

    // calibrate the step once at the stiffest corner, then pin it so no
    // other point pays for halving runs
    const double ts_max = *std::max_element(grid.ts_us.begin(), grid.ts_us.end());
    const double delta_max = *std::max_element(grid.delta_mhz.begin(), grid.delta_mhz.end());
    SweepConfig probe = config_for(ts_max, delta_max);
    const SweepResult probe_result = adiabatic_sweep(lattice, probe);
    EvolveOptions pinned = base;
    pinned.dt_ns = probe_result.record.dt_ns;
    pinned.max_halvings = 0;

    const int n_ts = static_cast<int>(grid.ts_us.size());
    const int n_delta = static_cast<int>(grid.delta_mhz.size());
    const int total = n_ts * n_delta;
    std::vector<SweepMapPoint> points(total);

    parallel_for(
        total,
        [&](long long idx) {
            const double ts = grid.ts_us[idx / n_delta];
            const double delta = grid.delta_mhz[idx % n_delta];
            SweepMapPoint pt;
            pt.ts_us = ts;
            pt.delta_mhz = delta;
            try {
                SweepConfig c = config_for(ts, delta);
                c.evolve = pinned;
                const SweepResult r = adiabatic_sweep(lattice, c);
                pt.f_final = r.fidelity_final;
                pt.p_final = r.purity_final;
            } catch (const std::exception&) {
                pt.f_final = std::numeric_limits<double>::quiet_NaN();
                pt.p_final = std::numeric_limits<double>::quiet_NaN();
            }
            points[idx] = pt;
        },
        parallelism);
    return points;
}

std::string sweep_map_csv(const std::vector<SweepMapPoint>& points) {
    std::ostringstream out;
    out << "T_S_us,Delta_MHz,F_final,P_final\n";
    for (const auto& pt : points) {
        out << format_g17(pt.ts_us) << ',' << format_g17(pt.delta_mhz) << ','
            << format_g17(pt.f_final) << ',' << format_g17(pt.p_final) << '\n';
    }
    return out.str();
}

}  // namespace toricsim
