#include "toricsim/braid.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "json.hpp"

#include "toricsim/dynamics.hpp"

namespace toricsim {

namespace {

// the two star cells whose corners include the given qubit
std::array<const Cell*, 2> stars_of(const LatticeSpec& lattice, int qubit_id) {
    std::array<const Cell*, 2> out{nullptr, nullptr};
    int found = 0;
    for (const Cell* c : lattice.cells_of(qubit_id)) {
        if (c->kind != CellKind::Star) continue;
        if (found == 2)
            throw std::runtime_error("braid: qubit touches more than two stars");
        out[found++] = c;
    }
    if (found != 2)
        throw std::runtime_error("braid: qubit does not touch exactly two stars");
    return out;
}

// odd-multiplicity qubit indices of the full sigma_x string, creation
// step included
std::vector<std::uint8_t> string_support(const LatticeSpec& lattice,
                                         const BraidPlan& plan) {
    std::vector<std::uint8_t> t(lattice.num_qubits(), 0);
    t[lattice.qubit_index(plan.m_site)] ^= 1;
    for (int id : plan.loop) t[lattice.qubit_index(id)] ^= 1;
    return t;
}

// Decide whether the closed string winds around the e-pair.  A closed
// sigma_x string is contractible exactly when it is a product of star
// supports; solving for that product over GF(2) and counting how many of
// the two e-pair stars it uses gives the winding parity.  The kernel of
// the system is {empty, all stars}, and swapping one solution for the
// other changes the count by two, so the parity is unambiguous.
bool winding_parity(const LatticeSpec& lattice, const std::vector<std::uint8_t>& t,
                    const Cell& s0, const Cell& s1) {
    std::vector<int> star_cells;
    for (int c = 0; c < static_cast<int>(lattice.cells.size()); ++c)
        if (lattice.cells[c].kind == CellKind::Star) star_cells.push_back(c);
    const int n = lattice.num_qubits();
    const int ns = static_cast<int>(star_cells.size());

    std::vector<std::vector<std::uint8_t>> a(n, std::vector<std::uint8_t>(ns + 1, 0));
    for (int col = 0; col < ns; ++col)
        for (int corner : lattice.cells[star_cells[col]].corners)
            a[lattice.qubit_index(corner)][col] ^= 1;
    for (int q = 0; q < n; ++q) a[q][ns] = t[q];

    std::vector<int> pivot_col;
    int row = 0;
    for (int col = 0; col < ns && row < n; ++col) {
        int pr = -1;
        for (int r = row; r < n; ++r) {
            if (a[r][col]) {
                pr = r;
                break;
            }
        }
        if (pr < 0) continue;
        std::swap(a[row], a[pr]);
        for (int r = 0; r < n; ++r) {
            if (r == row || !a[r][col]) continue;
            for (int k = col; k <= ns; ++k) a[r][k] ^= a[row][k];
        }
        pivot_col.push_back(col);
        ++row;
    }
    for (int r = row; r < n; ++r) {
        if (a[r][ns])
            throw std::invalid_argument(
                "braid_anyons: string is non-contractible, winding is ambiguous");
    }

    std::vector<std::uint8_t> x(ns, 0);
    for (int r = 0; r < row; ++r) x[pivot_col[r]] = a[r][ns];
    int count = 0;
    for (int col = 0; col < ns; ++col) {
        if (!x[col]) continue;
        const int id = lattice.cells[star_cells[col]].id;
        if (id == s0.id || id == s1.id) ++count;
    }
    return count % 2 == 1;
}

}  // namespace

BraidOutcome braid_anyons(const LatticeSpec& lattice, const Vec& state,
                          const BraidPlan& plan) {
    lattice.validate();
    const HilbertSpace space = lattice_space(lattice);
    if (state.size() != space.dim())
        throw std::invalid_argument("braid_anyons: state does not match lattice");

    const auto e_stars = stars_of(lattice, plan.e_site);
    const Cell& readout = lattice.cell(plan.readout_cell);
    if (readout.kind != CellKind::Star)
        throw std::invalid_argument("braid_anyons: readout cell is not a star");
    if (readout.id != e_stars[0]->id && readout.id != e_stars[1]->id)
        throw std::invalid_argument(
            "braid_anyons: readout star does not touch the e-pair site");

    const std::vector<std::uint8_t> t = string_support(lattice, plan);
    for (const auto& c : lattice.cells) {
        if (c.kind != CellKind::Plaquette) continue;
        int parity = 0;
        for (int corner : c.corners) parity ^= t[lattice.qubit_index(corner)];
        if (parity)
            throw std::invalid_argument(
                "braid_anyons: sigma_x string does not close, m-pair is not re-fused");
    }
    const bool encloses = winding_parity(lattice, t, *e_stars[0], *e_stars[1]);

    const SparseOp a_readout = stabilizer_operator(space, lattice, readout);
    const DenseOp half_y =
        (1.0 / std::sqrt(2.0)) *
        (DenseOp::Identity(2, 2) - cplx(0.0, 1.0) * DenseOp(pauli_matrix(PauliAxis::Y)));
    const SparseOp rot = embed(space, lattice.qubit_index(plan.e_site), half_y);

    BraidOutcome out;
    out.before = expectation(a_readout, state).real();
    out.encloses = encloses;

    Vec psi = rot * state;
    psi = embed(space, lattice.qubit_index(plan.m_site), pauli_matrix(PauliAxis::X)) * psi;
    for (int id : plan.loop)
        psi = embed(space, lattice.qubit_index(id), pauli_matrix(PauliAxis::X)) * psi;
    out.pre_readout_state = psi;
    out.final_state = rot * psi;
    out.after = expectation(a_readout, out.final_state).real();
    return out;
}

BraidPlan enclosing_plan(const LatticeSpec& lattice) {
    const int e_site = lattice.qubits.front().id;
    const Cell& s0 = *stars_of(lattice, e_site)[0];
    int j = 0;
    while (s0.corners[j] != e_site) ++j;
    BraidPlan plan;
    plan.e_site = e_site;
    plan.m_site = s0.corners[(j + 1) % 4];
    plan.loop = {s0.corners[(j + 2) % 4], s0.corners[(j + 3) % 4], s0.corners[j]};
    plan.readout_cell = s0.id;
    return plan;
}

BraidPlan control_plan(const LatticeSpec& lattice) {
    BraidPlan plan = enclosing_plan(lattice);
    const auto e_stars = stars_of(lattice, plan.e_site);
    std::vector<std::uint8_t> excluded(lattice.num_qubits(), 0);
    for (const Cell* s : e_stars)
        for (int corner : s->corners) excluded[lattice.qubit_index(corner)] = 1;

    for (const auto& c : lattice.cells) {
        if (c.kind != CellKind::Star) continue;
        bool touches = false;
        for (int corner : c.corners)
            if (excluded[lattice.qubit_index(corner)]) touches = true;
        if (touches) continue;
        plan.m_site = c.corners[0];
        plan.loop = {c.corners[1], c.corners[2], c.corners[3]};
        return plan;
    }
    throw std::runtime_error(
        "control_plan: no star clears the e-pair, lattice is too small");
}

BraidPlan doubled_plan(const LatticeSpec& lattice) {
    BraidPlan plan = enclosing_plan(lattice);
    std::vector<int> twice = plan.loop;
    twice.push_back(plan.m_site);
    twice.insert(twice.end(), plan.loop.begin(), plan.loop.end());
    plan.loop = std::move(twice);
    return plan;
}

BraidPlan null_plan(const LatticeSpec& lattice) {
    BraidPlan plan = enclosing_plan(lattice);
    plan.loop = {plan.m_site};
    return plan;
}

BraidReport braid_report(const LatticeSpec& lattice, const Vec& state) {
    const BraidOutcome enclosing = braid_anyons(lattice, state, enclosing_plan(lattice));
    const BraidOutcome control = braid_anyons(lattice, state, control_plan(lattice));
    BraidReport report;
    report.before = enclosing.before;
    report.after = enclosing.after;
    report.control = control.after;
    report.contrast = enclosing.after - control.after;
    return report;
}

std::string braid_report_json(const BraidReport& report) {
    nlohmann::json j;
    j["before"] = report.before;
    j["after"] = report.after;
    j["control"] = report.control;
    j["contrast"] = report.contrast;
    return j.dump(2) + "\n";
}

}  // namespace toricsim
