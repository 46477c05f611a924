#pragma once

// Operator core: composite Hilbert spaces, sparse operators, states,
// Pauli strings, oscillator mode operators, and exact matrix functions.
//
// Conventions fixed here and relied on everywhere else:
//   - |0> is the qubit ground state, sigma_z|0> = -|0>, sigma_plus|0> = |1>.
//   - The first-listed subsystem is the slowest-varying index (big-endian
//     Kronecker order).
//   - Sparse operators are stored row-major with sorted coordinates, so
//     serialization is deterministic.

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace toricsim {

using cplx = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using DenseOp = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct Subsystem {
    std::string label;
    int dim = 2;
};

class HilbertSpace {
public:
    HilbertSpace() = default;
    explicit HilbertSpace(std::vector<Subsystem> subsystems);

    // n two-level subsystems labelled q1..qn
    static HilbertSpace qubits(int n);

    int num_subsystems() const { return static_cast<int>(subs_.size()); }
    long long dim() const { return dim_; }
    const Subsystem& subsystem(int site) const;
    int dim_of(int site) const { return subsystem(site).dim; }
    int site_of(const std::string& label) const;

    // big-endian stride: basis index = sum_i level_i * stride(i)
    long long stride(int site) const;
    long long basis_index(const std::vector<int>& levels) const;

    bool operator==(const HilbertSpace& other) const;
    bool operator!=(const HilbertSpace& other) const { return !(*this == other); }

private:
    std::vector<Subsystem> subs_;
    std::vector<long long> strides_;
    long long dim_ = 1;
};

enum class PauliAxis { X, Y, Z, Plus, Minus };
PauliAxis pauli_axis_from(const std::string& name);

// 2x2 single-qubit matrices in the (ground, excited) basis
Eigen::Matrix2cd pauli_matrix(PauliAxis axis);

SparseOp identity_op(long long dim);
SparseOp to_sparse(const DenseOp& dense, double drop_tol = 0.0);
DenseOp to_dense(const SparseOp& op);

// Kronecker product, a slowest (big-endian)
SparseOp tensor(const SparseOp& a, const SparseOp& b);
DenseOp tensor_dense(const DenseOp& a, const DenseOp& b);

// Linear combination sum_i coeff_i * op_i over a shared space
SparseOp compose(const std::vector<std::pair<cplx, SparseOp>>& terms);

// Single-site operator embedded with identities on all other subsystems
SparseOp embed(const HilbertSpace& space, int site, const DenseOp& local);

// Product of single-qubit Paulis on distinct sites, identity elsewhere
SparseOp pauli_string(const HilbertSpace& space,
                      const std::vector<std::pair<int, PauliAxis>>& factors);

// Truncated oscillator operators on a d-dimensional subsystem.
// amp is the zero-point amplitude: phase = amp (a + a^dag),
// momentum = i/(2 amp) (a^dag - a), so [phase, momentum] = i holds in the
// untruncated limit.  cos/sin are exact matrix functions of phase.
enum class ModeKind { Annihilate, Create, Number, Phase, Momentum, CosPhase, SinPhase };
DenseOp mode_matrix(int d, ModeKind kind, double amp = 1.0);
SparseOp mode_operator(const HilbertSpace& space, int site, ModeKind kind, double amp = 1.0);

// f applied to a Hermitian matrix through its eigendecomposition
DenseOp hermitian_function(const DenseOp& h, const std::function<double(double)>& f);
// exp(i s H) for Hermitian H
DenseOp hermitian_phase_exp(const DenseOp& h, double s);
// principal log of a unitary, returned as Hermitian generator:
// U = exp(i G) with eigenphases in (-pi, pi]
DenseOp unitary_log_generator(const DenseOp& u);

bool is_hermitian(const SparseOp& op, double tol = 1e-12);
double max_abs(const SparseOp& op);

// ---------------------------------------------------------------------------
// states

enum class StateKind { Pure, Density };

class QuantumState {
public:
    static QuantumState pure(HilbertSpace space, Vec amplitudes);
    static QuantumState density(HilbertSpace space, DenseOp rho);
    // product basis state |levels...>
    static QuantumState basis_state(const HilbertSpace& space, const std::vector<int>& levels);
    static QuantumState vacuum(const HilbertSpace& space);

    StateKind kind() const { return kind_; }
    bool is_pure() const { return kind_ == StateKind::Pure; }
    const HilbertSpace& space() const { return space_; }
    const Vec& amplitudes() const;
    const DenseOp& rho() const;

    QuantumState to_density() const;
    double purity() const;
    // invariant check: normalization, Hermiticity, positivity
    void validate(double tol = 1e-10) const;

private:
    QuantumState() = default;
    StateKind kind_ = StateKind::Pure;
    HilbertSpace space_;
    Vec amp_;
    DenseOp rho_;
};

cplx expectation(const SparseOp& op, const QuantumState& state);
cplx expectation(const SparseOp& op, const Vec& psi);

// partial trace onto one subsystem (returns dim_of(site) square matrix)
DenseOp reduced_density(const QuantumState& state, int site);

}  // namespace toricsim
