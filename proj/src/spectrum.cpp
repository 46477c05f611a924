// Lowest eigenvalues of static Hamiltonian models: dense solver for small
// dimensions, block Lanczos with full reorthogonalization above.
//
// The iterative path keeps H applied to the whole basis, so Ritz values,
// convergence checks, and residuals all come from exact projections; the
// Lanczos recurrence only supplies the next search directions.  When part of
// a block closes its Krylov space, only the dependent columns are replaced
// by fresh deterministic directions, so no invariant subspace is truncated.
// Start vectors are deterministic, so repeated runs agree to the bit.

#include "toricsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace toricsim {

namespace {

constexpr long long kDenseLimit = 4096;

// Per-column generator with entries uniform in [-1, 1] built from raw
// 32-bit draws, identical across platforms.
DenseOp deterministic_block(long long dim, int cols, int seed_offset) {
    DenseOp block(dim, cols);
    for (int c = 0; c < cols; ++c) {
        std::mt19937 gen(0x5eedu + static_cast<unsigned>(seed_offset + c));
        for (long long r = 0; r < dim; ++r) {
            const double re = 2.0 * (gen() / 4294967295.0) - 1.0;
            const double im = 2.0 * (gen() / 4294967295.0) - 1.0;
            block(r, c) = cplx(re, im);
        }
    }
    return block;
}

SpectrumResult dense_spectrum(const SparseOp& h, int k) {
    const DenseOp dense = to_dense(h);
    Eigen::SelfAdjointEigenSolver<DenseOp> es(dense);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectrum: dense eigensolver failed");
    SpectrumResult result;
    result.method = "dense";
    const long long dim = h.rows();
    result.norm_estimate =
        std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(dim - 1)));
    for (int i = 0; i < k; ++i) {
        const double ev = es.eigenvalues()(i);
        const Vec v = es.eigenvectors().col(i);
        result.eigenvalues.push_back(ev);
        result.residuals.push_back((h * v - ev * v).norm());
    }
    return result;
}

// Project w against the first q_cols columns of q (two passes), then keep an
// orthonormal basis of the numerically independent columns.  Deficient
// directions are dropped, never replaced by noise.
DenseOp orth_keep(const DenseOp& w_in, const DenseOp& q, long long q_cols,
                  double floor_abs) {
    DenseOp w = w_in;
    for (int pass = 0; pass < 2; ++pass) {
        if (q_cols > 0)
            w.noalias() -= q.leftCols(q_cols) * (q.leftCols(q_cols).adjoint() * w).eval();
    }
    Eigen::ColPivHouseholderQR<DenseOp> qr(w);
    qr.setThreshold(1e-8);
    long long rank = qr.rank();
    // absolute guard against keeping pure roundoff directions
    const double top = std::abs(qr.matrixR()(0, 0));
    if (top < floor_abs) rank = 0;
    if (rank == 0) return DenseOp(w.rows(), 0);
    DenseOp thin = DenseOp::Identity(w.rows(), w.cols());
    thin = qr.householderQ() * thin;
    return thin.leftCols(rank);
}

SpectrumResult lanczos_spectrum(const SparseOp& h, int k) {
    const long long dim = h.rows();
    const int b = std::max(4, std::min(8, k));
    if (k + b > dim) return dense_spectrum(h, k);
    const int max_blocks =
        std::max(2, static_cast<int>(std::min<long long>(60, dim / b)));
    const long long cap = static_cast<long long>(max_blocks) * b;

    DenseOp basis(dim, cap);
    DenseOp hq(dim, cap);
    DenseOp t = DenseOp::Zero(cap, cap);

    // assemble the next block: keep the independent Krylov columns, pad the
    // rest with fresh deterministic directions
    int fresh_cols = 0;
    long long nb = 0;
    auto next_block = [&](const DenseOp& seed, double floor_abs) -> DenseOp {
        DenseOp block(dim, b);
        long long have = 0;
        if (seed.cols() > 0) {
            DenseOp kept = orth_keep(seed, basis, nb, floor_abs);
            have = kept.cols();
            if (have > 0) block.leftCols(have) = kept;
        }
        int attempts = 0;
        while (have < b && attempts < 4) {
            DenseOp pad = deterministic_block(dim, static_cast<int>(b - have), fresh_cols);
            fresh_cols += static_cast<int>(b - have);
            // orthogonalize against the basis and the columns already kept
            DenseOp ortho = orth_keep(pad, basis, nb, 1e-8);
            if (ortho.cols() > 0 && have > 0) {
                DenseOp again = orth_keep(ortho, block, have, 1e-8);
                ortho = again;
            }
            if (ortho.cols() > 0) {
                const long long take = std::min<long long>(ortho.cols(), b - have);
                block.middleCols(have, take) = ortho.leftCols(take);
                have += take;
            }
            ++attempts;
        }
        return block.leftCols(have).eval();
    };

    DenseOp v = next_block(DenseOp(dim, 0), 0.0);
    if (v.cols() < b) throw std::runtime_error("spectrum: degenerate start block");

    bool converged = false;
    double norm_est = 0.0;
    double worst = 1e300;
    Eigen::VectorXd ritz;
    DenseOp ritz_vecs;

    while (true) {
        const long long bcols = v.cols();
        basis.middleCols(nb, bcols) = v;
        hq.middleCols(nb, bcols).noalias() = h * v;
        nb += bcols;

        t.block(0, nb - bcols, nb, bcols).noalias() =
            basis.leftCols(nb).adjoint() * hq.middleCols(nb - bcols, bcols);
        t.block(nb - bcols, 0, bcols, nb - bcols) =
            t.block(0, nb - bcols, nb - bcols, bcols).adjoint();

        DenseOp tview =
            0.5 * (t.topLeftCorner(nb, nb) + t.topLeftCorner(nb, nb).adjoint());
        Eigen::SelfAdjointEigenSolver<DenseOp> es(tview);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("spectrum: projected eigensolver failed");
        norm_est = std::max(std::abs(es.eigenvalues()(0)),
                            std::abs(es.eigenvalues()(nb - 1)));

        if (nb >= k) {
            ritz = es.eigenvalues().head(k);
            ritz_vecs = es.eigenvectors().leftCols(k);
            worst = 0.0;
            for (int i = 0; i < k; ++i) {
                const Vec x = basis.leftCols(nb) * ritz_vecs.col(i);
                const Vec r = hq.leftCols(nb) * ritz_vecs.col(i) - ritz(i) * x;
                worst = std::max(worst, r.norm());
            }
            if (worst <= 1e-9 * std::max(norm_est, 1e-300)) converged = true;
        }
        if (converged || nb + b > std::min(dim, cap)) break;

        const DenseOp seed = hq.middleCols(nb - bcols, bcols);
        v = next_block(seed, 1e-10 * std::max(norm_est, 1e-20));
        if (v.cols() == 0) break;  // space exhausted
    }

    if (nb < k || ritz.size() < k)
        throw std::runtime_error("spectrum: Lanczos basis smaller than requested count");
    if (worst > 1e-8 * std::max(norm_est, 1e-300))
        throw std::runtime_error("spectrum: Lanczos did not converge, residual " +
                                 std::to_string(worst));

    SpectrumResult result;
    result.method = "lanczos";
    result.norm_estimate = norm_est;
    for (int i = 0; i < k; ++i) {
        const double ev = ritz(i);
        const Vec x = basis.leftCols(nb) * ritz_vecs.col(i);
        result.eigenvalues.push_back(ev);
        result.residuals.push_back((h * x - ev * x).norm() / x.norm());
    }
    return result;
}

}  // namespace

SpectrumResult spectrum(const HamiltonianModel& model, int k, SpectrumMethod method) {
    if (!model.is_static())
        throw std::invalid_argument("spectrum: model must be time independent");
    const long long dim = model.space.dim();
    if (k < 1 || k > dim) throw std::invalid_argument("spectrum: k out of range");

    SpectrumMethod chosen = method;
    if (chosen == SpectrumMethod::Auto)
        chosen = (dim < kDenseLimit) ? SpectrumMethod::Dense : SpectrumMethod::Iterative;
    if (chosen == SpectrumMethod::Dense) return dense_spectrum(model.static_part, k);
    return lanczos_spectrum(model.static_part, k);
}

}  // namespace toricsim
