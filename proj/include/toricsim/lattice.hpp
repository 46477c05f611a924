#pragma once

// Torus lattice geometry: qubits with transition frequencies, star and
// plaquette cells with canonical corner tuples, inductive chains, and
// non-contractible loops.
//
// Corner tuples are geometric cycles around each cell, normalized so the
// smallest qubit id sits at position 1 while the port pairs (positions
// (1,4) and (2,3)) remain edges of the inductive chains.  Tuple-adjacent
// corners are lattice nearest neighbors; tuple-opposite corners are
// next-nearest (same-band) neighbors.  Drive synthesis and the shift
// formulas all key off this order.

#include <array>
#include <string>
#include <vector>

namespace toricsim {

enum class CellKind { Star, Plaquette };

struct LatticeQubit {
    int id = 0;
    double freq_ghz = 0.0;
};

struct Cell {
    int id = 0;
    CellKind kind = CellKind::Star;
    std::array<int, 4> corners{};  // cyclic order 1 -> 2 -> 3 -> 4
};

enum class LoopDirection { Horizontal, Vertical };

struct Loop {
    LoopDirection direction = LoopDirection::Horizontal;
    std::vector<int> qubits;
};

struct LatticeSpec {
    int n_cols = 0;
    int n_rows = 0;
    std::vector<LatticeQubit> qubits;
    std::vector<Cell> cells;
    std::vector<Loop> loops;

    int num_qubits() const { return static_cast<int>(qubits.size()); }
    // 0-based position of a qubit id in the qubits list
    int qubit_index(int id) const;
    double freq_of(int id) const;
    const Cell& cell(int id) const;
    std::vector<const Cell*> cells_of(int qubit_id) const;

    // port pairs (positions (1,4) and (2,3)) of a cell
    std::array<std::array<int, 2>, 2> port_pairs(const Cell& c) const;
    // the two chain neighbors of a qubit, from the port pairs of its cells
    std::array<int, 2> chain_neighbors(int qubit_id) const;
    // tuple-cyclic neighbors of a qubit within one cell (lattice nearest
    // neighbors) and the tuple-opposite corner (next-nearest neighbor)
    std::array<int, 2> in_cell_neighbors(const Cell& c, int qubit_id) const;
    int in_cell_opposite(const Cell& c, int qubit_id) const;

    // throws std::runtime_error naming the first violated invariant
    void validate() const;
};

inline constexpr int kMaxLatticeQubits = 256;

// the eight-qubit torus with the published transition frequencies
LatticeSpec minimal_lattice_8q();

inline constexpr std::array<double, 4> kDefaultBaseFreqsGhz = {13.8, 13.0, 4.1, 3.4};
inline constexpr std::array<double, 4> kDefaultOffsetsMhz = {0.0, 100.0, 200.0, 300.0};

// General torus builder.  n_cols x n_rows counts qubits; both must be even.
// Supported shapes: two-row tori (one dimension equal to 2, the other 2k
// with 2 <= k <= 4) and square-tiling tori with both dimensions divisible
// by 4.  base_frequencies lists the four principal frequencies (two per
// band); offsets are the 100 MHz-scale detunings that separate
// next-nearest neighbors.
LatticeSpec build_torus_lattice(int n_cols, int n_rows,
                                const std::array<double, 4>& base_frequencies_ghz = kDefaultBaseFreqsGhz,
                                const std::array<double, 4>& offsets_mhz = kDefaultOffsetsMhz);

// loops whose sigma^x products commute with every stabilizer but are not
// stabilizer products; one per row and one per column of the torus
std::vector<Loop> noncontractible_loops(const LatticeSpec& lattice);

std::string lattice_to_json(const LatticeSpec& lattice);
LatticeSpec lattice_from_json(const std::string& text);

}  // namespace toricsim
