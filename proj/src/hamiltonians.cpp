// Hamiltonian model builders: stabilizer lattice models, the interpolating
// sweep, the rotating-frame driven cell, and the isolated-cell circuit model.

#include "toricsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include <Eigen/Eigenvalues>

#include "toricsim/units.hpp"

namespace toricsim {

SparseOp HamiltonianModel::at(double t_ns) const {
    std::vector<std::pair<cplx, SparseOp>> terms;
    terms.reserve(time_terms.size() + 1);
    terms.push_back({cplx(1.0, 0.0), static_part});
    for (const auto& term : time_terms)
        terms.push_back({cplx(term.coeff(t_ns), 0.0), term.op});
    return compose(terms);
}

void HamiltonianModel::apply(double t_ns, const Vec& in, Vec& out) const {
    out.noalias() = static_part * in;
    for (const auto& term : time_terms) {
        const double c = term.coeff(t_ns);
        if (c != 0.0) out.noalias() += c * (term.op * in);
    }
}

HilbertSpace lattice_space(const LatticeSpec& lattice) {
    std::vector<Subsystem> subs;
    subs.reserve(lattice.qubits.size());
    for (const auto& q : lattice.qubits) subs.push_back({"q" + std::to_string(q.id), 2});
    return HilbertSpace(std::move(subs));
}

SparseOp stabilizer_operator(const HilbertSpace& space, const LatticeSpec& lattice,
                             const Cell& cell) {
    const PauliAxis axis = (cell.kind == CellKind::Star) ? PauliAxis::X : PauliAxis::Y;
    std::vector<std::pair<int, PauliAxis>> factors;
    factors.reserve(4);
    for (int id : cell.corners) factors.push_back({lattice.qubit_index(id), axis});
    return pauli_string(space, factors);
}

HamiltonianModel build_toric_hamiltonian(const LatticeSpec& lattice, double j_star_ghz,
                                         double j_plaq_ghz) {
    lattice.validate();
    HamiltonianModel model;
    model.space = lattice_space(lattice);
    std::vector<std::pair<cplx, SparseOp>> terms;
    for (const auto& cell : lattice.cells) {
        const double j = (cell.kind == CellKind::Star) ? j_star_ghz : j_plaq_ghz;
        if (j != 0.0)
            terms.push_back({cplx(-j, 0.0), stabilizer_operator(model.space, lattice, cell)});
    }
    model.static_part = terms.empty() ? SparseOp(model.space.dim(), model.space.dim())
                                      : compose(terms);
    return model;
}

namespace {

SparseOp sigma_z_sum(const HilbertSpace& space, double coeff) {
    std::vector<std::pair<cplx, SparseOp>> terms;
    for (int site = 0; site < space.num_subsystems(); ++site)
        terms.push_back({cplx(coeff, 0.0),
                         pauli_string(space, {{site, PauliAxis::Z}})});
    return compose(terms);
}

SparseOp stabilizer_sum(const HilbertSpace& space, const LatticeSpec& lattice,
                        double j_star_ghz, double j_plaq_ghz) {
    std::vector<std::pair<cplx, SparseOp>> terms;
    for (const auto& cell : lattice.cells) {
        const double j = (cell.kind == CellKind::Star) ? j_star_ghz : j_plaq_ghz;
        if (j != 0.0)
            terms.push_back({cplx(-j, 0.0), stabilizer_operator(space, lattice, cell)});
    }
    return terms.empty() ? SparseOp(space.dim(), space.dim()) : compose(terms);
}

}  // namespace

HamiltonianModel build_sweep_hamiltonian(const LatticeSpec& lattice, double lambda,
                                         double delta_ghz, double j_star_ghz,
                                         double j_plaq_ghz) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("build_sweep_hamiltonian: lambda must lie in [0, 1]");
    lattice.validate();
    HamiltonianModel model;
    model.space = lattice_space(lattice);
    std::vector<std::pair<cplx, SparseOp>> terms;
    const double field = (1.0 - lambda) * 0.5 * delta_ghz;
    if (field != 0.0) terms.push_back({cplx(1.0, 0.0), sigma_z_sum(model.space, field)});
    for (const auto& cell : lattice.cells) {
        const double j = lambda * ((cell.kind == CellKind::Star) ? j_star_ghz : j_plaq_ghz);
        if (j != 0.0)
            terms.push_back({cplx(-j, 0.0), stabilizer_operator(model.space, lattice, cell)});
    }
    model.static_part = terms.empty() ? SparseOp(model.space.dim(), model.space.dim())
                                      : compose(terms);
    return model;
}

HamiltonianModel build_interpolated_model(const LatticeSpec& lattice, double delta_ghz,
                                          double j_star_ghz, double j_plaq_ghz,
                                          std::function<double(double)> lambda_of_t) {
    if (!lambda_of_t)
        throw std::invalid_argument("build_interpolated_model: schedule must be callable");
    lattice.validate();
    HamiltonianModel model;
    model.space = lattice_space(lattice);
    model.static_part = SparseOp(model.space.dim(), model.space.dim());

    SparseOp field = sigma_z_sum(model.space, 0.5 * delta_ghz);
    SparseOp stab = stabilizer_sum(model.space, lattice, j_star_ghz, j_plaq_ghz);
    if (field.nonZeros() > 0)
        model.time_terms.push_back(
            {std::move(field), [lambda_of_t](double t) { return 1.0 - lambda_of_t(t); }});
    if (stab.nonZeros() > 0)
        model.time_terms.push_back({std::move(stab), lambda_of_t});
    return model;
}

double ramp_lambda(double x, double zeta) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("ramp_lambda: argument must lie in [0, 1]");
    if (zeta < 0.0) throw std::invalid_argument("ramp_lambda: zeta must be nonnegative");
    const double x6 = x * x * x * x * x * x;
    return (1.0 + zeta) * x6 / (1.0 + zeta * x6);
}

// ---------------------------------------------------------------------------
// rotating-frame driven cell

namespace {

// One ordered monomial of the interaction polynomial: per-site ladder
// products (matrix order preserved within a site), with the factor count and
// the net creation excess per site.  The rotating phase of the monomial is
// exp(+2 pi i (sum_j kexc_j f_j) t).
struct CellMono {
    std::array<Eigen::MatrixXd, 4> site;
    std::array<int, 4> nfac{};
    std::array<int, 4> kexc{};
};

// Ordered expansion of Phi^power with Phi = sum_j s_j phibar_j (a_j + a_j^dag).
std::vector<CellMono> phi_power_monomials(int power, int levels,
                                          const std::array<double, 4>& phibar,
                                          const std::array<int, 4>& sgn) {
    const Eigen::MatrixXd a = mode_matrix(levels, ModeKind::Annihilate).real();
    const Eigen::MatrixXd ad = a.transpose();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(levels, levels);
    std::vector<CellMono> monos(1);
    monos[0].site = {id, id, id, id};
    for (int step = 0; step < power; ++step) {
        std::vector<CellMono> next;
        next.reserve(monos.size() * 8);
        for (const auto& m : monos) {
            for (int j = 0; j < 4; ++j) {
                for (int dag = 0; dag <= 1; ++dag) {
                    CellMono nm = m;
                    nm.site[j] = nm.site[j] * ((sgn[j] * phibar[j]) * (dag ? ad : a));
                    nm.nfac[j] += 1;
                    nm.kexc[j] += dag ? +1 : -1;
                    next.push_back(std::move(nm));
                }
            }
        }
        monos = std::move(next);
    }
    return monos;
}

// Accumulated coefficient of exp(+2 pi i freq t).
struct FreqSlot {
    double freq_ghz = 0.0;
    SparseOp op;
};

long long freq_key(double freq_ghz) { return std::llround(freq_ghz * 1e7); }

void add_to_slot(std::map<long long, FreqSlot>& slots, long long dim, double freq_ghz,
                 double weight, const SparseOp& op) {
    const long long key = freq_key(freq_ghz);
    auto it = slots.find(key);
    if (it == slots.end()) {
        FreqSlot slot;
        slot.freq_ghz = freq_ghz;
        slot.op = SparseOp(dim, dim);
        it = slots.emplace(key, std::move(slot)).first;
    }
    it->second.op = (it->second.op + cplx(weight, 0.0) * op).pruned(0.0, 1.0);
}

// Group selected monomials by net excess vector, attach the drive tones, and
// accumulate every resulting frequency component.
void fold_monomials(const std::vector<CellMono>& monos,
                    const std::function<bool(const CellMono&)>& keep, double prefactor,
                    const std::array<double, 4>& freqs, const DriveSpec& drive,
                    double chi_ej_ghz, long long dim, std::map<long long, FreqSlot>& slots) {
    std::map<std::array<int, 4>, DenseOp> bare;
    for (const auto& m : monos) {
        if (!keep(m)) continue;
        DenseOp full = tensor_dense(
            tensor_dense(tensor_dense(m.site[0].cast<cplx>(), m.site[1].cast<cplx>()),
                         m.site[2].cast<cplx>()),
            m.site[3].cast<cplx>());
        auto it = bare.find(m.kexc);
        if (it == bare.end()) {
            bare.emplace(m.kexc, (prefactor * full).eval());
        } else {
            it->second += prefactor * full;
        }
    }
    for (const auto& [kvec, dense] : bare) {
        SparseOp group = to_sparse(dense, 1e-15);
        if (group.nonZeros() == 0) continue;
        double g = 0.0;
        for (int j = 0; j < 4; ++j) g += kvec[j] * freqs[j];
        for (const auto& c : drive.components) {
            const double w = 0.5 * c.amp_rad * c.sign * chi_ej_ghz;
            if (w == 0.0) continue;
            add_to_slot(slots, dim, g + c.nu_ghz, w, group);
            add_to_slot(slots, dim, g - c.nu_ghz, w, group);
        }
    }
}

}  // namespace

HamiltonianModel build_cell_hamiltonian(const std::array<QubitDerived, 4>& qubits,
                                        const SquidDerived& squid, const DriveSpec& drive,
                                        CellTerms terms, int levels) {
    if (levels != 2 && levels != 3)
        throw std::invalid_argument("build_cell_hamiltonian: levels must be 2 or 3");
    if (!terms.h1 && !terms.h2 && !terms.h3)
        throw std::invalid_argument("build_cell_hamiltonian: no interaction terms selected");
    for (int i = 0; i < 4; ++i) {
        if (qubits[i].id != drive.corners[i])
            throw std::invalid_argument(
                "build_cell_hamiltonian: qubit order must match drive corners");
        for (int j = i + 1; j < 4; ++j)
            if (qubits[i].freq_ghz == qubits[j].freq_ghz)
                throw std::invalid_argument(
                    "build_cell_hamiltonian: qubit frequencies must be pairwise distinct");
    }

    std::array<double, 4> freqs{};
    std::array<double, 4> phibar{};
    for (int i = 0; i < 4; ++i) {
        freqs[i] = qubits[i].freq_ghz;
        phibar[i] = qubits[i].phibar;
    }
    // corner parity of the port the qubit couples to, fixed by the layout
    const std::array<int, 4> sgn = {+1, -1, -1, +1};

    HamiltonianModel model;
    std::vector<Subsystem> subs;
    for (int i = 0; i < 4; ++i)
        subs.push_back({"q" + std::to_string(qubits[i].id), levels});
    model.space = HilbertSpace(std::move(subs));
    const long long dim = model.space.dim();

    // chi * E_J recovered from the dressed junction energy; zero drive
    // amplitude carries no interaction at all
    const double chi_ej =
        (drive.phi_ac_rad != 0.0) ? squid.ej_tilde_ghz / drive.phi_ac_rad : 0.0;

    std::map<long long, FreqSlot> slots;
    if (terms.h2) {
        const auto quad = phi_power_monomials(2, levels, phibar, sgn);
        fold_monomials(quad, [](const CellMono&) { return true; }, -1.0 / 8.0, freqs, drive,
                       chi_ej, dim, slots);
    }
    if (terms.h1 || terms.h3) {
        const auto quart = phi_power_monomials(4, levels, phibar, sgn);
        const auto one_per_site = [](const CellMono& m) {
            return m.nfac == std::array<int, 4>{1, 1, 1, 1};
        };
        if (terms.h1 && terms.h3) {
            fold_monomials(quart, [](const CellMono&) { return true; }, 1.0 / 384.0, freqs,
                           drive, chi_ej, dim, slots);
        } else if (terms.h1) {
            fold_monomials(quart, one_per_site, 1.0 / 384.0, freqs, drive, chi_ej, dim,
                           slots);
        } else {
            fold_monomials(quart, [&](const CellMono& m) { return !one_per_site(m); },
                           1.0 / 384.0, freqs, drive, chi_ej, dim, slots);
        }
    }

    // static anharmonic correction for the third level
    std::vector<std::pair<cplx, SparseOp>> static_terms;
    if (levels == 3) {
        DenseOp corr = DenseOp::Zero(3, 3);
        corr(2, 2) = 2.0;
        for (int i = 0; i < 4; ++i)
            static_terms.push_back(
                {cplx(-qubits[i].anharmonicity_ghz, 0.0), embed(model.space, i, corr)});
    }
    model.static_part = static_terms.empty() ? SparseOp(dim, dim) : compose(static_terms);

    for (const auto& [key, slot] : slots) {
        if (key < 0) continue;  // folded into the positive-frequency partner
        if (key == 0) {
            SparseOp op = slot.op.pruned(1e-15, 1.0);
            if (op.nonZeros() > 0)
                model.time_terms.push_back({std::move(op), [](double) { return 1.0; }});
            continue;
        }
        const auto partner = slots.find(-key);
        const SparseOp& zp = slot.op;
        SparseOp zm = (partner != slots.end()) ? partner->second.op : SparseOp(dim, dim);
        SparseOp op_cos = (zp + zm).pruned(1e-15, 1.0);
        SparseOp op_sin = (cplx(0.0, 1.0) * (zp - zm)).pruned(1e-15, 1.0);
        const double f = slot.freq_ghz;
        if (op_cos.nonZeros() > 0)
            model.time_terms.push_back(
                {std::move(op_cos), [f](double t) { return std::cos(kTwoPi * f * t); }});
        if (op_sin.nonZeros() > 0)
            model.time_terms.push_back(
                {std::move(op_sin), [f](double t) { return std::sin(kTwoPi * f * t); }});
    }
    return model;
}

// ---------------------------------------------------------------------------
// isolated-cell circuit model

HamiltonianModel build_full_cell_model(const std::array<QubitRaw, 4>& qubits,
                                       const SquidRaw& squid, const DriveSpec& drive,
                                       int squid_levels, double scale,
                                       FullCellDetails* details) {
    if (squid_levels < 8)
        throw std::invalid_argument("build_full_cell_model: at least 8 coupler levels needed");
    if (!(scale > 0.0))
        throw std::invalid_argument("build_full_cell_model: scale must be positive");
    for (int i = 0; i < 4; ++i)
        if (qubits[i].id != drive.corners[i])
            throw std::invalid_argument(
                "build_full_cell_model: qubit order must match drive corners");

    const SquidDerived derived = derive_squid(squid, qubits);
    const double el = inductive_energy_ghz(squid.l_nh) / scale;
    const double ecm = derived.ecm_tilde_ghz / scale;
    const double ej = squid.ej_ghz / scale;
    const std::array<int, 4> sgn = {+1, -1, -1, +1};

    HamiltonianModel model;
    std::vector<Subsystem> subs;
    for (int i = 0; i < 4; ++i) subs.push_back({"q" + std::to_string(qubits[i].id), 3});
    subs.push_back({"squid", squid_levels});
    model.space = HilbertSpace(std::move(subs));
    const long long dim = model.space.dim();

    std::vector<std::pair<cplx, SparseOp>> static_terms;
    std::vector<std::pair<cplx, SparseOp>> coupling_terms;

    // each qubit: keep the three lowest interior eigenstates of the anharmonic
    // mode with exact phase matrix elements; the quadratic part carries the
    // full inductive stiffness of the node on top of the junction term.  the
    // quartic truncation of the junction cosine leaves the potential unbounded
    // at large phase, so the oscillator basis is fixed at 30 levels, which
    // spans the well without resolving the runaway region beyond the barrier;
    // any state living out there has almost no weight on low oscillator levels
    // and is rejected by the interior-character test below
    const int d0 = 30;
    for (int i = 0; i < 4; ++i) {
        const double ecq = charging_energy_ghz(qubits[i].cq_ff) / scale;
        const double ejq = qubits[i].ejq_ghz / scale;
        const double k_lab = ejq + 8.0 * el;
        const double phibar0 = std::pow(2.0 * ecq / k_lab, 0.25);

        const Eigen::MatrixXd a = mode_matrix(d0, ModeKind::Annihilate).real();
        const Eigen::MatrixXd diff = (a.transpose() - a).eval();
        const Eigen::MatrixXd phi = (phibar0 * (a.transpose() + a)).eval();
        const Eigen::MatrixXd phi2 = (phi * phi).eval();
        const Eigen::MatrixXd h = (-(ecq / (phibar0 * phibar0)) * (diff * diff) +
                                   0.5 * k_lab * phi2 - (ejq / 24.0) * phi2 * phi2)
                                      .eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("build_full_cell_model: qubit mode diagonalization failed");
        std::vector<int> kept;
        for (int c = 0; c < d0 && static_cast<int>(kept.size()) < 3; ++c) {
            if (es.eigenvectors().col(c).head(12).squaredNorm() >= 0.5) kept.push_back(c);
        }
        if (kept.size() < 3)
            throw std::runtime_error("build_full_cell_model: fewer than three interior qubit states");
        Eigen::MatrixXd vecs(d0, 3);
        for (int c = 0; c < 3; ++c) vecs.col(c) = es.eigenvectors().col(kept[c]);
        for (int c = 0; c < 3; ++c) {
            int imax = 0;
            vecs.col(c).cwiseAbs().maxCoeff(&imax);
            if (vecs(imax, c) < 0.0) vecs.col(c) = -vecs.col(c);
        }
        DenseOp site_h = DenseOp::Zero(3, 3);
        for (int c = 0; c < 3; ++c)
            site_h(c, c) = es.eigenvalues()(kept[c]) - es.eigenvalues()(kept[0]);
        const DenseOp site_phi = (vecs.transpose() * phi * vecs).cast<cplx>();

        static_terms.push_back({cplx(1.0, 0.0), embed(model.space, i, site_h)});
        coupling_terms.push_back({cplx(sgn[i], 0.0), embed(model.space, i, site_phi)});
        if (details) {
            details->qubit_phi[i] = site_phi;
            details->f_bare_ghz[i] = (site_h(1, 1).real() - site_h(0, 0).real()) * scale;
        }
    }

    // coupler: harmonic minus mode with the renormalized charging energy
    const double f_minus = 4.0 * std::sqrt(ecm * el);
    const double phibar_minus = std::pow(ecm / el, 0.25);
    if (details) {
        details->f_minus_ghz = f_minus * scale;
        details->phibar_minus = phibar_minus;
    }
    DenseOp squid_h = DenseOp::Zero(squid_levels, squid_levels);
    for (int n = 0; n < squid_levels; ++n) squid_h(n, n) = f_minus * n;
    static_terms.push_back({cplx(1.0, 0.0), embed(model.space, 4, squid_h)});

    const SparseOp phi_q = compose(coupling_terms);
    const SparseOp phi_sq =
        mode_operator(model.space, 4, ModeKind::Phase, phibar_minus);
    SparseOp coupling = (phi_q * phi_sq).pruned(1e-15, 1.0);
    static_terms.push_back({cplx(-el, 0.0), std::move(coupling)});
    model.static_part = compose(static_terms);

    // junction drive, linear in the modulated external flux; the cosine is
    // evaluated in a larger basis so truncation stays interior
    double amp_max = 0.0;
    for (const auto& c : drive.components) amp_max = std::max(amp_max, std::abs(c.amp_rad));
    if (amp_max > 0.0) {
        const int d_big = squid_levels + 32;
        const DenseOp cos_big = mode_matrix(d_big, ModeKind::CosPhase, phibar_minus);
        const DenseOp cos_small = cos_big.topLeftCorner(squid_levels, squid_levels);
        SparseOp drive_op = (cplx(ej, 0.0) * embed(model.space, 4, cos_small)).pruned(1e-15, 1.0);
        DriveSpec captured = drive;
        model.time_terms.push_back(
            {std::move(drive_op), [captured](double t) { return waveform(captured, t); }});
    }
    (void)dim;
    return model;
}

}  // namespace toricsim
