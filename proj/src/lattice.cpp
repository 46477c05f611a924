// Lattice construction and validation.

#include "toricsim/lattice.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace toricsim {

namespace {

// split-preserving symmetries of a corner tuple: rotation by two and
// reversal keep the port pairs {pos1,pos4}, {pos2,pos3} intact
std::array<int, 4> canonical_corners(const std::array<int, 4>& t) {
    const int pos = static_cast<int>(std::min_element(t.begin(), t.end()) - t.begin());
    switch (pos) {
        case 0: return {t[0], t[1], t[2], t[3]};
        case 1: return {t[1], t[0], t[3], t[2]};
        case 2: return {t[2], t[3], t[0], t[1]};
        default: return {t[3], t[2], t[1], t[0]};
    }
}

struct TwoRowIds {
    int k;
    int h(int x, int y) const { return 4 * ((y % k + k) % k) + ((x % 2 + 2) % 2) + 1; }
    int v(int x, int y) const { return 4 * ((y % k + k) % k) + 4 - ((x % 2 + 2) % 2); }
};

LatticeSpec build_two_row(int k, bool transposed, const std::array<double, 4>& base,
                          const std::array<double, 4>& off_mhz) {
    if (k < 2)
        throw std::invalid_argument("build_torus_lattice: two-row torus needs at least 4 rows "
                                    "(cells would double-cover the qubits)");
    if (k > 4)
        throw std::invalid_argument("build_torus_lattice: frequency-pattern violation "
                                    "(two-row frequency pools cover at most 16 qubits)");
    const double b0 = base[0], b1 = base[1], b2 = base[2], b3 = base[3];
    std::array<double, 4> o{};
    for (int i = 0; i < 4; ++i) o[i] = off_mhz[i] / 1000.0;

    // frequency assignment for the high (h edges) and low (v edges) bands
    auto h_freq = [&](int x, int y) {
        if (k % 2 == 0) {
            const std::array<double, 4> pool = {b0, b1, b1 + o[1], b0 - o[1]};
            return pool[x + 2 * (y % 2)];
        }
        const std::array<double, 8> pool = {b0, b1, b1 + o[1], b0 - o[1],
                                            b1 + o[2], b0 - o[2], b1 + o[3], b0 - o[3]};
        return pool[2 * y + x];
    };
    auto v_freq = [&](int x, int y) {
        if (k % 2 == 0) {
            const std::array<double, 4> pool = {b2, b3 + o[1], b3, b2 + o[1]};
            return pool[x + 2 * (y % 2)];
        }
        const std::array<double, 8> pool = {b2, b3, b3 + o[1], b2 - o[1],
                                            b3 + o[2], b2 - o[2], b3 + o[3], b2 - o[3]};
        return pool[2 * y + x];
    };

    const TwoRowIds ids{k};
    LatticeSpec lat;
    lat.n_cols = transposed ? 2 * k : 2;
    lat.n_rows = transposed ? 2 : 2 * k;
    lat.qubits.resize(4 * k);
    for (int y = 0; y < k; ++y)
        for (int x = 0; x < 2; ++x) {
            lat.qubits[ids.h(x, y) - 1] = {ids.h(x, y), h_freq(x, y)};
            lat.qubits[ids.v(x, y) - 1] = {ids.v(x, y), v_freq(x, y)};
        }

    // stars sit at vertices, plaquettes at faces of the 2 x k vertex torus
    int next_id = 1;
    for (int y = 0; y < k; ++y)
        for (int x = 0; x < 2; ++x) {
            Cell c;
            c.id = next_id++;
            c.kind = CellKind::Star;
            c.corners = canonical_corners(
                {ids.h(x, y), ids.v(x, y - 1), ids.h(x - 1, y), ids.v(x, y)});
            lat.cells.push_back(c);
        }
    for (int y = 0; y < k; ++y)
        for (int x = 0; x < 2; ++x) {
            Cell c;
            c.id = next_id++;
            c.kind = CellKind::Plaquette;
            c.corners = canonical_corners(
                {ids.h(x, y), ids.v(x + 1, y), ids.h(x, y + 1), ids.v(x, y)});
            lat.cells.push_back(c);
        }

    const LoopDirection row_dir = transposed ? LoopDirection::Vertical : LoopDirection::Horizontal;
    const LoopDirection col_dir = transposed ? LoopDirection::Horizontal : LoopDirection::Vertical;
    for (int y = 0; y < k; ++y) {
        Loop l;
        l.direction = row_dir;
        l.qubits = {ids.v(0, y), ids.v(1, y)};
        std::sort(l.qubits.begin(), l.qubits.end());
        lat.loops.push_back(l);
    }
    for (int x = 0; x < 2; ++x) {
        Loop l;
        l.direction = col_dir;
        for (int y = 0; y < k; ++y) l.qubits.push_back(ids.h(x, y));
        std::sort(l.qubits.begin(), l.qubits.end());
        lat.loops.push_back(l);
    }
    return lat;
}

LatticeSpec build_square_tiling(int n_cols, int n_rows, const std::array<double, 4>& base,
                                const std::array<double, 4>& off_mhz) {
    const int N = n_cols, M = n_rows;
    auto qid = [&](int n, int m) {
        const int nn = (n % N + N) % N;
        const int mm = (m % M + M) % M;
        return mm * N + nn + 1;
    };
    // principal frequency alternates band with the corner parity
    const std::array<double, 4> principal = {base[0], base[2], base[1], base[3]};
    std::array<double, 4> o{};
    for (int i = 0; i < 4; ++i) o[i] = off_mhz[i] / 1000.0;

    LatticeSpec lat;
    lat.n_cols = N;
    lat.n_rows = M;
    lat.qubits.resize(N * M);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n)
            lat.qubits[qid(n, m) - 1] = {qid(n, m), principal[(n + m) % 4] + o[n % 4]};

    int star_id = 1;
    int plaq_id = N * M / 2 + 1;
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) {
            Cell c;
            c.kind = ((n + m) % 2 == 0) ? CellKind::Star : CellKind::Plaquette;
            c.id = (c.kind == CellKind::Star) ? star_id++ : plaq_id++;
            c.corners = canonical_corners(
                {qid(n, m), qid(n + 1, m), qid(n + 1, m + 1), qid(n, m + 1)});
            lat.cells.push_back(c);
        }
    std::sort(lat.cells.begin(), lat.cells.end(),
              [](const Cell& a, const Cell& b) { return a.id < b.id; });

    for (int m = 0; m < M; ++m) {
        Loop l;
        l.direction = LoopDirection::Horizontal;
        for (int n = 0; n < N; ++n) l.qubits.push_back(qid(n, m));
        lat.loops.push_back(l);
    }
    for (int n = 0; n < N; ++n) {
        Loop l;
        l.direction = LoopDirection::Vertical;
        for (int m = 0; m < M; ++m) l.qubits.push_back(qid(n, m));
        std::sort(l.qubits.begin(), l.qubits.end());
        lat.loops.push_back(l);
    }
    return lat;
}

}  // namespace

int LatticeSpec::qubit_index(int id) const {
    for (int i = 0; i < num_qubits(); ++i)
        if (qubits[i].id == id) return i;
    throw std::invalid_argument("LatticeSpec: unknown qubit id " + std::to_string(id));
}

double LatticeSpec::freq_of(int id) const { return qubits[qubit_index(id)].freq_ghz; }

const Cell& LatticeSpec::cell(int id) const {
    for (const auto& c : cells)
        if (c.id == id) return c;
    throw std::invalid_argument("LatticeSpec: unknown cell id " + std::to_string(id));
}

std::vector<const Cell*> LatticeSpec::cells_of(int qubit_id) const {
    std::vector<const Cell*> out;
    for (const auto& c : cells)
        if (std::find(c.corners.begin(), c.corners.end(), qubit_id) != c.corners.end())
            out.push_back(&c);
    return out;
}

std::array<std::array<int, 2>, 2> LatticeSpec::port_pairs(const Cell& c) const {
    return {{{c.corners[0], c.corners[3]}, {c.corners[1], c.corners[2]}}};
}

std::array<int, 2> LatticeSpec::chain_neighbors(int qubit_id) const {
    std::map<int, int> partner_count;
    for (const Cell* c : cells_of(qubit_id)) {
        for (const auto& pair : port_pairs(*c)) {
            if (pair[0] == qubit_id) ++partner_count[pair[1]];
            else if (pair[1] == qubit_id) ++partner_count[pair[0]];
        }
    }
    if (partner_count.size() != 2)
        throw std::runtime_error("LatticeSpec: qubit " + std::to_string(qubit_id) +
                                 " does not sit on two chain edges");
    auto it = partner_count.begin();
    const int a = it->first;
    ++it;
    return {a, it->first};
}

std::array<int, 2> LatticeSpec::in_cell_neighbors(const Cell& c, int qubit_id) const {
    for (int i = 0; i < 4; ++i)
        if (c.corners[i] == qubit_id) return {c.corners[(i + 3) % 4], c.corners[(i + 1) % 4]};
    throw std::invalid_argument("LatticeSpec: qubit not in cell");
}

int LatticeSpec::in_cell_opposite(const Cell& c, int qubit_id) const {
    for (int i = 0; i < 4; ++i)
        if (c.corners[i] == qubit_id) return c.corners[(i + 2) % 4];
    throw std::invalid_argument("LatticeSpec: qubit not in cell");
}

void LatticeSpec::validate() const {
    std::ostringstream err;
    if (qubits.empty()) throw std::runtime_error("lattice: no qubits");
    if (num_qubits() > kMaxLatticeQubits)
        throw std::runtime_error("lattice: qubit budget exceeded");

    std::set<int> ids;
    for (const auto& q : qubits) {
        if (q.id <= 0) throw std::runtime_error("lattice: non-positive qubit id");
        if (!ids.insert(q.id).second)
            throw std::runtime_error("lattice: duplicate qubit id " + std::to_string(q.id));
    }

    int n_star = 0, n_plaq = 0;
    std::map<int, int> star_count, plaq_count;
    for (const auto& c : cells) {
        std::set<int> corner_set(c.corners.begin(), c.corners.end());
        if (corner_set.size() != 4)
            throw std::runtime_error("lattice: cell " + std::to_string(c.id) + " repeats a corner");
        for (int q : c.corners) {
            if (!ids.count(q))
                throw std::runtime_error("lattice: cell " + std::to_string(c.id) +
                                         " references unknown qubit " + std::to_string(q));
            (c.kind == CellKind::Star ? star_count[q] : plaq_count[q])++;
        }
        (c.kind == CellKind::Star ? n_star : n_plaq)++;
    }
    for (const auto& q : qubits) {
        if (star_count[q.id] != 2 || plaq_count[q.id] != 2)
            throw std::runtime_error("lattice: qubit " + std::to_string(q.id) +
                                     " is not in exactly 2 star and 2 plaquette cells");
    }
    if (n_star != n_plaq)
        throw std::runtime_error("lattice: star/plaquette count mismatch");

    // star-plaquette overlaps must be even for the stabilizers to commute
    for (const auto& a : cells) {
        if (a.kind != CellKind::Star) continue;
        for (const auto& b : cells) {
            if (b.kind != CellKind::Plaquette) continue;
            int shared = 0;
            for (int q : a.corners)
                if (std::find(b.corners.begin(), b.corners.end(), q) != b.corners.end()) ++shared;
            if (shared % 2 != 0)
                throw std::runtime_error("lattice: cells " + std::to_string(a.id) + " and " +
                                         std::to_string(b.id) + " share an odd number of qubits");
        }
    }

    // frequency pattern: distinct inside every cell, and distinct for
    // nearest (tuple-adjacent) and next-nearest (tuple-opposite and
    // chain-second) neighbors
    auto same_freq = [&](int a, int b) { return freq_of(a) == freq_of(b); };
    for (const auto& c : cells) {
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (same_freq(c.corners[i], c.corners[j]))
                    throw std::runtime_error("lattice: cell " + std::to_string(c.id) +
                                             " has two qubits at the same frequency");
    }
    for (const auto& q : qubits) {
        const auto nbrs = chain_neighbors(q.id);
        for (int n1 : nbrs) {
            for (int n2 : chain_neighbors(n1)) {
                if (n2 != q.id && same_freq(q.id, n2))
                    throw std::runtime_error("lattice: chain next-nearest neighbors " +
                                             std::to_string(q.id) + "," + std::to_string(n2) +
                                             " share a frequency");
            }
        }
    }

    // every chain edge must belong to exactly two cells
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& c : cells)
        for (const auto& pair : port_pairs(c))
            edge_count[{std::min(pair[0], pair[1]), std::max(pair[0], pair[1])}]++;
    for (const auto& [edge, count] : edge_count)
        if (count != 2)
            throw std::runtime_error("lattice: chain edge (" + std::to_string(edge.first) + "," +
                                     std::to_string(edge.second) + ") is in " +
                                     std::to_string(count) + " cells instead of 2");

    // loop supports must overlap every plaquette evenly (sigma^x products
    // then commute with all stabilizers)
    for (const auto& l : loops) {
        if (l.qubits.empty()) throw std::runtime_error("lattice: empty loop");
        for (const auto& c : cells) {
            if (c.kind != CellKind::Plaquette) continue;
            int shared = 0;
            for (int q : l.qubits)
                if (std::find(c.corners.begin(), c.corners.end(), q) != c.corners.end()) ++shared;
            if (shared % 2 != 0)
                throw std::runtime_error("lattice: loop crosses plaquette " + std::to_string(c.id) +
                                         " an odd number of times");
        }
    }
}

LatticeSpec minimal_lattice_8q() { return build_torus_lattice(2, 4); }

LatticeSpec build_torus_lattice(int n_cols, int n_rows, const std::array<double, 4>& base,
                                const std::array<double, 4>& off_mhz) {
    if (n_cols < 2 || n_rows < 2)
        throw std::invalid_argument("build_torus_lattice: dimensions must be at least 2");
    if (n_cols % 2 != 0 || n_rows % 2 != 0)
        throw std::invalid_argument("build_torus_lattice: odd dimensions are not a torus tiling");
    if (static_cast<long long>(n_cols) * n_rows > kMaxLatticeQubits)
        throw std::invalid_argument("build_torus_lattice: qubit budget exceeded");

    LatticeSpec lat;
    if (n_cols == 2 || n_rows == 2) {
        const bool transposed = (n_cols != 2);
        lat = build_two_row((transposed ? n_cols : n_rows) / 2, transposed, base, off_mhz);
    } else if (n_cols % 4 == 0 && n_rows % 4 == 0) {
        lat = build_square_tiling(n_cols, n_rows, base, off_mhz);
    } else {
        throw std::invalid_argument(
            "build_torus_lattice: frequency-pattern violation (dimensions must be two-row or "
            "divisible by 4 for the 16-frequency tiling)");
    }
    lat.validate();
    return lat;
}

std::vector<Loop> noncontractible_loops(const LatticeSpec& lattice) { return lattice.loops; }

std::string lattice_to_json(const LatticeSpec& lattice) {
    nlohmann::json j;
    j["n_cols"] = lattice.n_cols;
    j["n_rows"] = lattice.n_rows;
    j["qubits"] = nlohmann::json::array();
    for (const auto& q : lattice.qubits)
        j["qubits"].push_back({{"id", q.id}, {"freq_ghz", q.freq_ghz}});
    j["cells"] = nlohmann::json::array();
    for (const auto& c : lattice.cells)
        j["cells"].push_back({{"id", c.id},
                              {"kind", c.kind == CellKind::Star ? "star" : "plaquette"},
                              {"corners", c.corners}});
    j["loops"] = nlohmann::json::array();
    for (const auto& l : lattice.loops)
        j["loops"].push_back(
            {{"direction", l.direction == LoopDirection::Horizontal ? "horizontal" : "vertical"},
             {"qubits", l.qubits}});
    return j.dump(2) + "\n";
}

LatticeSpec lattice_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("lattice_from_json: ") + e.what());
    }
    LatticeSpec lat;
    lat.n_cols = j.value("n_cols", 0);
    lat.n_rows = j.value("n_rows", 0);
    for (const auto& q : j.at("qubits"))
        lat.qubits.push_back({q.at("id").get<int>(), q.at("freq_ghz").get<double>()});
    for (const auto& c : j.at("cells")) {
        Cell cell;
        cell.id = c.at("id").get<int>();
        const std::string kind = c.at("kind").get<std::string>();
        if (kind == "star") cell.kind = CellKind::Star;
        else if (kind == "plaquette") cell.kind = CellKind::Plaquette;
        else throw std::invalid_argument("lattice_from_json: unknown cell kind " + kind);
        const auto corners = c.at("corners").get<std::vector<int>>();
        if (corners.size() != 4)
            throw std::invalid_argument("lattice_from_json: cells need exactly 4 corners");
        std::copy(corners.begin(), corners.end(), cell.corners.begin());
        lat.cells.push_back(cell);
    }
    for (const auto& l : j.at("loops")) {
        Loop loop;
        const std::string dir = l.at("direction").get<std::string>();
        if (dir == "horizontal") loop.direction = LoopDirection::Horizontal;
        else if (dir == "vertical") loop.direction = LoopDirection::Vertical;
        else throw std::invalid_argument("lattice_from_json: unknown loop direction " + dir);
        loop.qubits = l.at("qubits").get<std::vector<int>>();
        lat.loops.push_back(loop);
    }
    lat.validate();
    return lat;
}

}  // namespace toricsim
