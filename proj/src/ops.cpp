// Operator core implementation.

#include "toricsim/ops.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include <Eigen/Eigenvalues>

namespace toricsim {

HilbertSpace::HilbertSpace(std::vector<Subsystem> subsystems) : subs_(std::move(subsystems)) {
    if (subs_.empty()) throw std::invalid_argument("HilbertSpace: needs at least one subsystem");
    std::unordered_set<std::string> seen;
    dim_ = 1;
    for (const auto& s : subs_) {
        if (s.dim < 1) throw std::invalid_argument("HilbertSpace: subsystem dim must be >= 1");
        if (s.label.empty()) throw std::invalid_argument("HilbertSpace: empty subsystem label");
        if (!seen.insert(s.label).second)
            throw std::invalid_argument("HilbertSpace: duplicate label " + s.label);
        dim_ *= s.dim;
    }
    strides_.assign(subs_.size(), 1);
    for (int i = static_cast<int>(subs_.size()) - 2; i >= 0; --i)
        strides_[i] = strides_[i + 1] * subs_[i + 1].dim;
}

HilbertSpace HilbertSpace::qubits(int n) {
    if (n < 1) throw std::invalid_argument("HilbertSpace::qubits: n must be >= 1");
    std::vector<Subsystem> subs;
    subs.reserve(n);
    for (int i = 0; i < n; ++i) subs.push_back({"q" + std::to_string(i + 1), 2});
    return HilbertSpace(std::move(subs));
}

const Subsystem& HilbertSpace::subsystem(int site) const {
    if (site < 0 || site >= num_subsystems())
        throw std::invalid_argument("HilbertSpace: site index out of range");
    return subs_[site];
}

int HilbertSpace::site_of(const std::string& label) const {
    for (int i = 0; i < num_subsystems(); ++i)
        if (subs_[i].label == label) return i;
    throw std::invalid_argument("HilbertSpace: unknown label " + label);
}

long long HilbertSpace::stride(int site) const {
    subsystem(site);
    return strides_[site];
}

long long HilbertSpace::basis_index(const std::vector<int>& levels) const {
    if (static_cast<int>(levels.size()) != num_subsystems())
        throw std::invalid_argument("basis_index: level count mismatch");
    long long idx = 0;
    for (int i = 0; i < num_subsystems(); ++i) {
        if (levels[i] < 0 || levels[i] >= subs_[i].dim)
            throw std::invalid_argument("basis_index: level out of range");
        idx += levels[i] * strides_[i];
    }
    return idx;
}

bool HilbertSpace::operator==(const HilbertSpace& other) const {
    if (subs_.size() != other.subs_.size()) return false;
    for (size_t i = 0; i < subs_.size(); ++i)
        if (subs_[i].label != other.subs_[i].label || subs_[i].dim != other.subs_[i].dim)
            return false;
    return true;
}

PauliAxis pauli_axis_from(const std::string& name) {
    if (name == "x") return PauliAxis::X;
    if (name == "y") return PauliAxis::Y;
    if (name == "z") return PauliAxis::Z;
    if (name == "+") return PauliAxis::Plus;
    if (name == "-") return PauliAxis::Minus;
    throw std::invalid_argument("pauli_axis_from: unknown axis " + name);
}

Eigen::Matrix2cd pauli_matrix(PauliAxis axis) {
    // basis order (ground, excited); sigma_z|0> = -|0>
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    const cplx i(0.0, 1.0);
    switch (axis) {
        case PauliAxis::X: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
        case PauliAxis::Y: m(0, 1) = i;   m(1, 0) = -i;  break;
        case PauliAxis::Z: m(0, 0) = -1.0; m(1, 1) = 1.0; break;
        case PauliAxis::Plus: m(1, 0) = 1.0; break;
        case PauliAxis::Minus: m(0, 1) = 1.0; break;
    }
    return m;
}

SparseOp identity_op(long long dim) {
    if (dim < 1) throw std::invalid_argument("identity_op: dim must be >= 1");
    SparseOp id(dim, dim);
    id.setIdentity();
    return id;
}

SparseOp to_sparse(const DenseOp& dense, double drop_tol) {
    SparseOp out(dense.rows(), dense.cols());
    std::vector<Eigen::Triplet<cplx>> trips;
    for (Eigen::Index r = 0; r < dense.rows(); ++r)
        for (Eigen::Index c = 0; c < dense.cols(); ++c)
            if (std::abs(dense(r, c)) > drop_tol) trips.emplace_back(r, c, dense(r, c));
    out.setFromTriplets(trips.begin(), trips.end());
    out.makeCompressed();
    return out;
}

DenseOp to_dense(const SparseOp& op) { return DenseOp(op); }

SparseOp tensor(const SparseOp& a, const SparseOp& b) {
    SparseOp out(a.rows() * b.rows(), a.cols() * b.cols());
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<size_t>(a.nonZeros()) * b.nonZeros());
    for (int ra = 0; ra < a.outerSize(); ++ra) {
        for (SparseOp::InnerIterator ia(a, ra); ia; ++ia) {
            for (int rb = 0; rb < b.outerSize(); ++rb) {
                for (SparseOp::InnerIterator ib(b, rb); ib; ++ib) {
                    trips.emplace_back(ia.row() * b.rows() + ib.row(),
                                       ia.col() * b.cols() + ib.col(),
                                       ia.value() * ib.value());
                }
            }
        }
    }
    out.setFromTriplets(trips.begin(), trips.end());
    out.makeCompressed();
    return out;
}

DenseOp tensor_dense(const DenseOp& a, const DenseOp& b) {
    DenseOp out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
}

SparseOp compose(const std::vector<std::pair<cplx, SparseOp>>& terms) {
    if (terms.empty()) throw std::invalid_argument("compose: empty term list");
    const auto rows = terms.front().second.rows();
    const auto cols = terms.front().second.cols();
    SparseOp out(rows, cols);
    for (const auto& [coeff, op] : terms) {
        if (op.rows() != rows || op.cols() != cols)
            throw std::invalid_argument("compose: operator dimension mismatch");
        out += coeff * op;
    }
    out.prune(0.0, 0.0);
    out.makeCompressed();
    return out;
}

SparseOp embed(const HilbertSpace& space, int site, const DenseOp& local) {
    const int d = space.dim_of(site);
    if (local.rows() != d || local.cols() != d)
        throw std::invalid_argument("embed: local operator does not match subsystem dim");
    long long before = 1, after = 1;
    for (int i = 0; i < site; ++i) before *= space.dim_of(i);
    for (int i = site + 1; i < space.num_subsystems(); ++i) after *= space.dim_of(i);

    SparseOp out(space.dim(), space.dim());
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            if (local(r, c) == cplx(0.0, 0.0)) continue;
            for (long long b = 0; b < before; ++b)
                for (long long a = 0; a < after; ++a)
                    trips.emplace_back((b * d + r) * after + a, (b * d + c) * after + a, local(r, c));
        }
    out.setFromTriplets(trips.begin(), trips.end());
    out.makeCompressed();
    return out;
}

SparseOp pauli_string(const HilbertSpace& space,
                      const std::vector<std::pair<int, PauliAxis>>& factors) {
    std::unordered_set<int> seen;
    for (const auto& [site, axis] : factors) {
        (void)axis;
        if (space.dim_of(site) != 2)
            throw std::invalid_argument("pauli_string: site " + std::to_string(site) + " is not two-level");
        if (!seen.insert(site).second)
            throw std::invalid_argument("pauli_string: duplicate site " + std::to_string(site));
    }
    // every single-site Pauli has at most one entry per column, so the string
    // maps each basis column to at most one row
    const long long dim = space.dim();
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(dim);
    std::vector<Eigen::Matrix2cd> mats;
    mats.reserve(factors.size());
    for (const auto& [site, axis] : factors) {
        (void)site;
        mats.push_back(pauli_matrix(axis));
    }
    for (long long col = 0; col < dim; ++col) {
        long long row = col;
        cplx val(1.0, 0.0);
        bool dead = false;
        for (size_t k = 0; k < factors.size(); ++k) {
            const int site = factors[k].first;
            const long long stride = space.stride(site);
            const int bit = static_cast<int>((col / stride) % 2);
            int out_bit = -1;
            cplx entry(0.0, 0.0);
            for (int r = 0; r < 2; ++r) {
                if (mats[k](r, bit) != cplx(0.0, 0.0)) {
                    out_bit = r;
                    entry = mats[k](r, bit);
                }
            }
            if (out_bit < 0) { dead = true; break; }
            val *= entry;
            row += static_cast<long long>(out_bit - bit) * stride;
        }
        if (!dead) trips.emplace_back(row, col, val);
    }
    SparseOp out(dim, dim);
    out.setFromTriplets(trips.begin(), trips.end());
    out.makeCompressed();
    return out;
}

DenseOp mode_matrix(int d, ModeKind kind, double amp) {
    if (d < 2) throw std::invalid_argument("mode_matrix: oscillator dim must be >= 2");
    const cplx i(0.0, 1.0);
    DenseOp m = DenseOp::Zero(d, d);
    switch (kind) {
        case ModeKind::Annihilate:
            for (int n = 1; n < d; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
            return m;
        case ModeKind::Create:
            for (int n = 1; n < d; ++n) m(n, n - 1) = std::sqrt(static_cast<double>(n));
            return m;
        case ModeKind::Number:
            for (int n = 0; n < d; ++n) m(n, n) = static_cast<double>(n);
            return m;
        case ModeKind::Phase:
            if (amp <= 0.0) throw std::invalid_argument("mode_matrix: amplitude must be positive");
            for (int n = 1; n < d; ++n) {
                const double v = amp * std::sqrt(static_cast<double>(n));
                m(n - 1, n) = v;
                m(n, n - 1) = v;
            }
            return m;
        case ModeKind::Momentum:
            if (amp <= 0.0) throw std::invalid_argument("mode_matrix: amplitude must be positive");
            for (int n = 1; n < d; ++n) {
                const double v = std::sqrt(static_cast<double>(n)) / (2.0 * amp);
                m(n, n - 1) = i * v;
                m(n - 1, n) = -i * v;
            }
            return m;
        case ModeKind::CosPhase:
            return hermitian_function(mode_matrix(d, ModeKind::Phase, amp),
                                      [](double x) { return std::cos(x); });
        case ModeKind::SinPhase:
            return hermitian_function(mode_matrix(d, ModeKind::Phase, amp),
                                      [](double x) { return std::sin(x); });
    }
    throw std::logic_error("mode_matrix: unreachable");
}

SparseOp mode_operator(const HilbertSpace& space, int site, ModeKind kind, double amp) {
    if (space.dim_of(site) < 2)
        throw std::invalid_argument("mode_operator: subsystem is not an oscillator (dim < 2)");
    return embed(space, site, mode_matrix(space.dim_of(site), kind, amp));
}

DenseOp hermitian_function(const DenseOp& h, const std::function<double(double)>& f) {
    Eigen::SelfAdjointEigenSolver<DenseOp> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hermitian_function: eigendecomposition failed");
    Eigen::VectorXd vals = es.eigenvalues();
    for (Eigen::Index k = 0; k < vals.size(); ++k) vals[k] = f(vals[k]);
    return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

DenseOp hermitian_phase_exp(const DenseOp& h, double s) {
    Eigen::SelfAdjointEigenSolver<DenseOp> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hermitian_phase_exp: eigendecomposition failed");
    Vec phases(es.eigenvalues().size());
    const cplx i(0.0, 1.0);
    for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases[k] = std::exp(i * (s * es.eigenvalues()[k]));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

DenseOp unitary_log_generator(const DenseOp& u) {
    // a unitary is normal, so its Schur form is diagonal up to roundoff
    Eigen::ComplexSchur<DenseOp> schur(u);
    if (schur.info() != Eigen::Success)
        throw std::runtime_error("unitary_log_generator: Schur decomposition failed");
    const DenseOp& t = schur.matrixT();
    Eigen::VectorXd phases(t.rows());
    for (Eigen::Index k = 0; k < t.rows(); ++k) {
        const double mod = std::abs(t(k, k));
        if (std::abs(mod - 1.0) > 1e-6)
            throw std::invalid_argument("unitary_log_generator: input is not unitary");
        phases[k] = std::arg(t(k, k));
    }
    DenseOp g = schur.matrixU() * phases.cast<cplx>().asDiagonal() * schur.matrixU().adjoint();
    return 0.5 * (g + DenseOp(g.adjoint()));
}

bool is_hermitian(const SparseOp& op, double tol) {
    if (op.rows() != op.cols()) return false;
    SparseOp diff = op - SparseOp(op.adjoint());
    return max_abs(diff) < tol;
}

double max_abs(const SparseOp& op) {
    double m = 0.0;
    for (int r = 0; r < op.outerSize(); ++r)
        for (SparseOp::InnerIterator it(op, r); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

QuantumState QuantumState::pure(HilbertSpace space, Vec amplitudes) {
    if (amplitudes.size() != space.dim())
        throw std::invalid_argument("QuantumState::pure: amplitude size mismatch");
    QuantumState s;
    s.kind_ = StateKind::Pure;
    s.space_ = std::move(space);
    s.amp_ = std::move(amplitudes);
    return s;
}

QuantumState QuantumState::density(HilbertSpace space, DenseOp rho) {
    if (rho.rows() != space.dim() || rho.cols() != space.dim())
        throw std::invalid_argument("QuantumState::density: matrix size mismatch");
    QuantumState s;
    s.kind_ = StateKind::Density;
    s.space_ = std::move(space);
    s.rho_ = std::move(rho);
    return s;
}

QuantumState QuantumState::basis_state(const HilbertSpace& space, const std::vector<int>& levels) {
    Vec amp = Vec::Zero(space.dim());
    amp[space.basis_index(levels)] = 1.0;
    return pure(space, std::move(amp));
}

QuantumState QuantumState::vacuum(const HilbertSpace& space) {
    return basis_state(space, std::vector<int>(space.num_subsystems(), 0));
}

const Vec& QuantumState::amplitudes() const {
    if (kind_ != StateKind::Pure) throw std::logic_error("QuantumState: not a pure state");
    return amp_;
}

const DenseOp& QuantumState::rho() const {
    if (kind_ != StateKind::Density) throw std::logic_error("QuantumState: not a density matrix");
    return rho_;
}

QuantumState QuantumState::to_density() const {
    if (kind_ == StateKind::Density) return *this;
    return density(space_, amp_ * amp_.adjoint());
}

double QuantumState::purity() const {
    if (kind_ == StateKind::Pure) {
        const double n = amp_.squaredNorm();
        return n * n;
    }
    return (rho_ * rho_).trace().real();
}

void QuantumState::validate(double tol) const {
    if (kind_ == StateKind::Pure) {
        if (std::abs(amp_.norm() - 1.0) > tol)
            throw std::runtime_error("QuantumState: pure state not normalized");
        return;
    }
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw std::runtime_error("QuantumState: density matrix not Hermitian");
    if (std::abs(rho_.trace().real() - 1.0) > tol || std::abs(rho_.trace().imag()) > tol)
        throw std::runtime_error("QuantumState: density matrix trace != 1");
    Eigen::SelfAdjointEigenSolver<DenseOp> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::runtime_error("QuantumState: density matrix has negative eigenvalue");
}

cplx expectation(const SparseOp& op, const QuantumState& state) {
    if (op.rows() != state.space().dim() || op.cols() != state.space().dim())
        throw std::invalid_argument("expectation: operator/state dimension mismatch");
    if (state.is_pure()) return expectation(op, state.amplitudes());
    cplx tr(0.0, 0.0);
    const DenseOp& rho = state.rho();
    for (int r = 0; r < op.outerSize(); ++r)
        for (SparseOp::InnerIterator it(op, r); it; ++it)
            tr += it.value() * rho(it.col(), it.row());
    return tr;
}

cplx expectation(const SparseOp& op, const Vec& psi) {
    if (op.rows() != psi.size())
        throw std::invalid_argument("expectation: operator/vector dimension mismatch");
    return psi.dot(op * psi);
}

DenseOp reduced_density(const QuantumState& state, int site) {
    const HilbertSpace& sp = state.space();
    const int d = sp.dim_of(site);
    long long before = 1, after = 1;
    for (int i = 0; i < site; ++i) before *= sp.dim_of(i);
    for (int i = site + 1; i < sp.num_subsystems(); ++i) after *= sp.dim_of(i);

    DenseOp red = DenseOp::Zero(d, d);
    if (state.is_pure()) {
        const Vec& psi = state.amplitudes();
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l)
                for (long long b = 0; b < before; ++b)
                    for (long long a = 0; a < after; ++a)
                        red(k, l) += psi[(b * d + k) * after + a] * std::conj(psi[(b * d + l) * after + a]);
        return red;
    }
    const DenseOp& rho = state.rho();
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            for (long long b = 0; b < before; ++b)
                for (long long a = 0; a < after; ++a)
                    red(k, l) += rho((b * d + k) * after + a, (b * d + l) * after + a);
    return red;
}

}  // namespace toricsim
