// Lattice construction, validation, and stabilizer-structure tests.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "toricsim/lattice.hpp"
#include "toricsim/ops.hpp"

using namespace toricsim;

namespace {

// symplectic GF2 row vector of a cell stabilizer: sigma^x -> (1|0),
// sigma^y -> (1|1) on the supported qubits
std::vector<int> symplectic_row(const LatticeSpec& lat, const Cell& c) {
    const int n = lat.num_qubits();
    std::vector<int> row(2 * n, 0);
    for (int q : c.corners) {
        const int i = lat.qubit_index(q);
        row[i] = 1;
        if (c.kind == CellKind::Plaquette) row[n + i] = 1;
    }
    return row;
}

int gf2_rank(std::vector<std::vector<int>> rows) {
    if (rows.empty()) return 0;
    const int cols = static_cast<int>(rows[0].size());
    int rank = 0;
    for (int c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
        int pivot = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (rows[r][c]) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = 0; r < static_cast<int>(rows.size()); ++r)
            if (r != rank && rows[r][c])
                for (int k = 0; k < cols; ++k) rows[r][k] ^= rows[rank][k];
        ++rank;
    }
    return rank;
}

SparseOp cell_operator(const HilbertSpace& space, const LatticeSpec& lat, const Cell& c) {
    const PauliAxis axis = (c.kind == CellKind::Star) ? PauliAxis::X : PauliAxis::Y;
    std::vector<std::pair<int, PauliAxis>> factors;
    for (int q : c.corners) factors.push_back({lat.qubit_index(q), axis});
    return pauli_string(space, factors);
}

}  // namespace

TEST_CASE("minimal 8q lattice frequencies") {
    const LatticeSpec lat = minimal_lattice_8q();
    REQUIRE(lat.num_qubits() == 8);
    const std::map<int, double> expected = {{1, 13.8}, {2, 13.0}, {3, 3.5}, {4, 4.1},
                                            {5, 13.1}, {6, 13.7}, {7, 4.2}, {8, 3.4}};
    for (const auto& [id, f] : expected) CHECK(lat.freq_of(id) == doctest::Approx(f).epsilon(1e-12));
    for (int i = 0; i < 8; ++i) CHECK(lat.qubits[i].id == i + 1);
}

TEST_CASE("minimal 8q lattice cells") {
    const LatticeSpec lat = minimal_lattice_8q();
    REQUIRE(lat.cells.size() == 8);
    const std::map<int, std::array<int, 4>> corners = {
        {1, {1, 8, 2, 4}}, {2, {1, 3, 2, 7}}, {3, {4, 5, 8, 6}}, {4, {3, 6, 7, 5}},
        {5, {1, 3, 5, 4}}, {6, {2, 4, 6, 3}}, {7, {1, 8, 5, 7}}, {8, {2, 7, 6, 8}}};
    for (const auto& [id, expect] : corners) {
        const Cell& c = lat.cell(id);
        CHECK(c.kind == (id <= 4 ? CellKind::Star : CellKind::Plaquette));
        CHECK(c.corners == expect);
    }
    // unordered stabilizer supports
    auto support = [&](int id) {
        const auto& c = lat.cell(id).corners;
        return std::set<int>(c.begin(), c.end());
    };
    CHECK(support(5) == std::set<int>{1, 4, 5, 3});
    CHECK(support(6) == std::set<int>{2, 3, 6, 4});
    CHECK(support(7) == std::set<int>{5, 8, 1, 7});
    CHECK(support(8) == std::set<int>{6, 7, 2, 8});
    CHECK(support(1) == std::set<int>{1, 2, 8, 4});
    CHECK(support(2) == std::set<int>{1, 2, 3, 7});
    CHECK(support(3) == std::set<int>{4, 5, 8, 6});
    CHECK(support(4) == std::set<int>{3, 6, 7, 5});
}

TEST_CASE("minimal 8q lattice equals 2x4 torus build") {
    const LatticeSpec a = minimal_lattice_8q();
    const LatticeSpec b = build_torus_lattice(2, 4);
    REQUIRE(a.num_qubits() == b.num_qubits());
    for (int i = 0; i < a.num_qubits(); ++i) {
        CHECK(a.qubits[i].id == b.qubits[i].id);
        CHECK(a.qubits[i].freq_ghz == b.qubits[i].freq_ghz);
    }
    REQUIRE(a.cells.size() == b.cells.size());
    for (size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].id == b.cells[i].id);
        CHECK(a.cells[i].kind == b.cells[i].kind);
        CHECK(a.cells[i].corners == b.cells[i].corners);
    }
}

TEST_CASE("minimal 8q lattice loops") {
    const LatticeSpec lat = minimal_lattice_8q();
    const auto loops = noncontractible_loops(lat);
    REQUIRE(loops.size() == 4);
    std::vector<std::vector<int>> horizontal, vertical;
    for (const auto& l : loops)
        (l.direction == LoopDirection::Horizontal ? horizontal : vertical).push_back(l.qubits);
    REQUIRE(horizontal.size() == 2);
    REQUIRE(vertical.size() == 2);
    CHECK(std::count(horizontal.begin(), horizontal.end(), std::vector<int>{3, 4}) == 1);
    CHECK(std::count(horizontal.begin(), horizontal.end(), std::vector<int>{7, 8}) == 1);
    CHECK(std::count(vertical.begin(), vertical.end(), std::vector<int>{1, 5}) == 1);
    CHECK(std::count(vertical.begin(), vertical.end(), std::vector<int>{2, 6}) == 1);
}

TEST_CASE("chain structure of the 8q lattice") {
    const LatticeSpec lat = minimal_lattice_8q();
    // two closed chains 1-7-6-4 and 2-3-5-8
    const std::map<int, std::set<int>> expected = {{1, {7, 4}}, {7, {1, 6}}, {6, {7, 4}},
                                                   {4, {6, 1}}, {2, {3, 8}}, {3, {2, 5}},
                                                   {5, {3, 8}}, {8, {5, 2}}};
    for (const auto& [q, nbrs] : expected) {
        const auto got = lat.chain_neighbors(q);
        CHECK(std::set<int>(got.begin(), got.end()) == nbrs);
    }
    // port pairs of every cell are chain edges
    for (const auto& c : lat.cells) {
        for (const auto& pair : lat.port_pairs(c)) {
            const auto nbrs = lat.chain_neighbors(pair[0]);
            CHECK(std::count(nbrs.begin(), nbrs.end(), pair[1]) == 1);
        }
    }
}

TEST_CASE("in-cell adjacency helpers") {
    const LatticeSpec lat = minimal_lattice_8q();
    const Cell& p00 = lat.cell(5);
    const auto nbrs = lat.in_cell_neighbors(p00, 1);
    CHECK(std::set<int>(nbrs.begin(), nbrs.end()) == std::set<int>{3, 4});
    CHECK(lat.in_cell_opposite(p00, 1) == 5);
    CHECK(lat.in_cell_opposite(p00, 3) == 4);
    CHECK_THROWS_AS((void)lat.in_cell_neighbors(p00, 2), std::invalid_argument);
    CHECK_THROWS_AS((void)lat.in_cell_opposite(p00, 2), std::invalid_argument);

    // tuple neighbors cross the frequency bands, tuple opposites do not
    for (const auto& c : lat.cells) {
        for (int q : c.corners) {
            const bool high = lat.freq_of(q) > 8.0;
            for (int n : lat.in_cell_neighbors(c, q)) CHECK((lat.freq_of(n) > 8.0) != high);
            CHECK((lat.freq_of(lat.in_cell_opposite(c, q)) > 8.0) == high);
        }
    }
}

TEST_CASE("qubit and cell lookups reject unknown ids") {
    const LatticeSpec lat = minimal_lattice_8q();
    CHECK_THROWS_AS((void)lat.qubit_index(9), std::invalid_argument);
    CHECK_THROWS_AS((void)lat.freq_of(0), std::invalid_argument);
    CHECK_THROWS_AS((void)lat.cell(9), std::invalid_argument);
    CHECK(lat.cells_of(1).size() == 4);
    CHECK(lat.cells_of(99).empty());
}

TEST_CASE("each qubit sits in two stars and two plaquettes") {
    for (const auto& lat : {build_torus_lattice(2, 4), build_torus_lattice(2, 6),
                            build_torus_lattice(2, 8), build_torus_lattice(4, 4)}) {
        for (const auto& q : lat.qubits) {
            int stars = 0, plaqs = 0;
            for (const Cell* c : lat.cells_of(q.id))
                (c->kind == CellKind::Star ? stars : plaqs)++;
            CHECK(stars == 2);
            CHECK(plaqs == 2);
        }
    }
}

TEST_CASE("stabilizers commute and multiply to identity on 8q") {
    const LatticeSpec lat = minimal_lattice_8q();
    const HilbertSpace space = HilbertSpace::qubits(8);
    std::vector<SparseOp> ops;
    for (const auto& c : lat.cells) ops.push_back(cell_operator(space, lat, c));
    for (size_t i = 0; i < ops.size(); ++i)
        for (size_t j = i + 1; j < ops.size(); ++j) {
            const SparseOp comm = (ops[i] * ops[j] - ops[j] * ops[i]).pruned();
            CHECK(max_abs(comm) < 1e-12);
        }
    SparseOp star_product = ops[0];
    SparseOp plaq_product = ops[4];
    for (int i = 1; i < 4; ++i) {
        star_product = (star_product * ops[i]).pruned();
        plaq_product = (plaq_product * ops[4 + i]).pruned();
    }
    const SparseOp eye = identity_op(space.dim());
    CHECK(max_abs(SparseOp(star_product - eye)) < 1e-12);
    CHECK(max_abs(SparseOp(plaq_product - eye)) < 1e-12);
}

TEST_CASE("loop operators commute with all stabilizers on 8q") {
    const LatticeSpec lat = minimal_lattice_8q();
    const HilbertSpace space = HilbertSpace::qubits(8);
    for (const auto& loop : noncontractible_loops(lat)) {
        std::vector<std::pair<int, PauliAxis>> factors;
        for (int q : loop.qubits) factors.push_back({lat.qubit_index(q), PauliAxis::X});
        const SparseOp w = pauli_string(space, factors);
        for (const auto& c : lat.cells) {
            const SparseOp op = cell_operator(space, lat, c);
            CHECK(max_abs(SparseOp((w * op - op * w).pruned())) < 1e-12);
        }
    }
}

TEST_CASE("stabilizer group has rank n minus 2") {
    for (const auto& lat : {build_torus_lattice(2, 4), build_torus_lattice(2, 6),
                            build_torus_lattice(2, 8), build_torus_lattice(4, 4)}) {
        std::vector<std::vector<int>> rows;
        for (const auto& c : lat.cells) rows.push_back(symplectic_row(lat, c));
        CHECK(gf2_rank(rows) == lat.num_qubits() - 2);
    }
}

TEST_CASE("larger torus builds validate") {
    const LatticeSpec t26 = build_torus_lattice(2, 6);
    CHECK(t26.num_qubits() == 12);
    CHECK(t26.cells.size() == 12);
    CHECK(noncontractible_loops(t26).size() == 5);

    const LatticeSpec t28 = build_torus_lattice(2, 8);
    CHECK(t28.num_qubits() == 16);
    CHECK(t28.cells.size() == 16);

    const LatticeSpec t44 = build_torus_lattice(4, 4);
    CHECK(t44.num_qubits() == 16);
    CHECK(t44.cells.size() == 16);
    CHECK(noncontractible_loops(t44).size() == 8);

    const LatticeSpec t88 = build_torus_lattice(8, 8);
    CHECK(t88.num_qubits() == 64);
    CHECK(t88.cells.size() == 64);
}

TEST_CASE("transposed two-row build swaps loop directions") {
    const LatticeSpec lat = build_torus_lattice(8, 2);
    CHECK(lat.num_qubits() == 16);
    CHECK(lat.n_cols == 8);
    CHECK(lat.n_rows == 2);
    int horizontal = 0, vertical = 0;
    for (const auto& l : noncontractible_loops(lat))
        (l.direction == LoopDirection::Horizontal ? horizontal : vertical)++;
    CHECK(horizontal == 2);
    CHECK(vertical == 4);
}

TEST_CASE("square tiling frequency pattern") {
    const LatticeSpec lat = build_torus_lattice(4, 4);
    // within every cell: two high-band and two low-band qubits on opposite corners
    for (const auto& c : lat.cells) {
        int high = 0;
        for (int q : c.corners)
            if (lat.freq_of(q) > 8.0) ++high;
        CHECK(high == 2);
        CHECK((lat.freq_of(c.corners[0]) > 8.0) == (lat.freq_of(c.corners[2]) > 8.0));
    }
    // chain next-nearest neighbors stay detuned
    for (const auto& q : lat.qubits)
        for (int n1 : lat.chain_neighbors(q.id))
            for (int n2 : lat.chain_neighbors(n1))
                if (n2 != q.id) CHECK(lat.freq_of(n2) != lat.freq_of(q.id));
}

TEST_CASE("invalid build requests are rejected") {
    CHECK_THROWS_AS((void)build_torus_lattice(3, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)build_torus_lattice(4, 5), std::invalid_argument);
    CHECK_THROWS_AS((void)build_torus_lattice(2, 2), std::invalid_argument);
    CHECK_THROWS_AS((void)build_torus_lattice(6, 6), std::invalid_argument);
    CHECK_THROWS_AS((void)build_torus_lattice(2, 10), std::invalid_argument);
    CHECK_THROWS_AS((void)build_torus_lattice(20, 16), std::invalid_argument);
    CHECK_THROWS_AS((void)build_torus_lattice(1, 8), std::invalid_argument);
}

TEST_CASE("json round trip") {
    const LatticeSpec lat = minimal_lattice_8q();
    const std::string text = lattice_to_json(lat);
    const LatticeSpec back = lattice_from_json(text);
    CHECK(back.n_cols == lat.n_cols);
    CHECK(back.n_rows == lat.n_rows);
    REQUIRE(back.num_qubits() == lat.num_qubits());
    for (int i = 0; i < lat.num_qubits(); ++i) {
        CHECK(back.qubits[i].id == lat.qubits[i].id);
        CHECK(back.qubits[i].freq_ghz == lat.qubits[i].freq_ghz);
    }
    REQUIRE(back.cells.size() == lat.cells.size());
    for (size_t i = 0; i < lat.cells.size(); ++i) {
        CHECK(back.cells[i].id == lat.cells[i].id);
        CHECK(back.cells[i].kind == lat.cells[i].kind);
        CHECK(back.cells[i].corners == lat.cells[i].corners);
    }
    REQUIRE(back.loops.size() == lat.loops.size());
    for (size_t i = 0; i < lat.loops.size(); ++i) {
        CHECK(back.loops[i].direction == lat.loops[i].direction);
        CHECK(back.loops[i].qubits == lat.loops[i].qubits);
    }
}

TEST_CASE("json parsing rejects malformed input") {
    CHECK_THROWS_AS((void)lattice_from_json("not json"), std::invalid_argument);
    CHECK_THROWS_AS((void)lattice_from_json("{}"), std::exception);
    std::string text = lattice_to_json(minimal_lattice_8q());
    const auto pos = text.find("\"star\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 6, "\"ring\"");
    CHECK_THROWS_AS((void)lattice_from_json(text), std::invalid_argument);
}

TEST_CASE("validation catches broken lattices") {
    LatticeSpec lat = minimal_lattice_8q();
    lat.qubits[1].freq_ghz = lat.qubits[0].freq_ghz;
    CHECK_THROWS_AS(lat.validate(), std::runtime_error);

    lat = minimal_lattice_8q();
    lat.cells[0].corners[0] = lat.cells[0].corners[1];
    CHECK_THROWS_AS(lat.validate(), std::runtime_error);

    lat = minimal_lattice_8q();
    lat.cells.pop_back();
    CHECK_THROWS_AS(lat.validate(), std::runtime_error);

    lat = minimal_lattice_8q();
    lat.loops[0].qubits = {1, 3};
    CHECK_THROWS_AS(lat.validate(), std::runtime_error);
}
