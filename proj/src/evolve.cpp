// Time evolution: classic RK4 for the Schroedinger and Lindblad equations
// with step-halving acceptance over every recorded series.
//
// The density path stores real and imaginary planes separately and uses one
// sparse product per stage: with M = H rho, the coherent derivative is
// -2 pi i (M - M^dag), and the dissipators act through index arithmetic on
// the qubit register.

#include "toricsim/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "toricsim/io.hpp"
#include "toricsim/units.hpp"

namespace toricsim {

NoiseConfig NoiseConfig::from_rates(double kappa_per_ns, double kappa_prime_per_ns) {
    if (kappa_per_ns < 0.0 || kappa_prime_per_ns < 0.0)
        throw std::invalid_argument("NoiseConfig: rates must be nonnegative");
    NoiseConfig cfg;
    cfg.kappa_per_ns = kappa_per_ns;
    cfg.kappa_prime_per_ns = kappa_prime_per_ns;
    return cfg;
}

NoiseConfig NoiseConfig::from_times_us(double t1_us, double t2_us) {
    if (t1_us <= 0.0) throw std::invalid_argument("NoiseConfig: T1 must be positive");
    NoiseConfig cfg;
    cfg.kappa_per_ns = 1e-3 / t1_us;
    if (t2_us > 0.0) {
        if (t2_us > 2.0 * t1_us * (1.0 + 1e-12))
            throw std::invalid_argument("NoiseConfig: T2 may not exceed 2 T1");
        const double total = 1e-3 / t2_us;
        cfg.kappa_prime_per_ns = std::max(0.0, 0.5 * (total - 0.5 * cfg.kappa_per_ns));
    }
    return cfg;
}

const std::vector<double>& TrajectoryRecord::series_named(const std::string& name) const {
    for (const auto& [n, values] : series)
        if (n == name) return values;
    throw std::invalid_argument("TrajectoryRecord: no series named '" + name + "'");
}

std::string trajectory_csv(const TrajectoryRecord& record) {
    std::ostringstream out;
    out << "t_ns";
    for (const auto& [name, values] : record.series) out << "," << name;
    out << "\n";
    for (size_t i = 0; i < record.t_ns.size(); ++i) {
        out << format_g17(record.t_ns[i]);
        for (const auto& [name, values] : record.series) out << "," << format_g17(values[i]);
        out << "\n";
    }
    return out.str();
}

namespace {

using RowMatd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Invariant violation during one integration pass.  With halving levels
// left this marks the step as too coarse; otherwise it escapes to the
// caller as an ordinary runtime error.
struct StepRejected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Union-pattern CSR with the static values as baseline and one scatter list
// per time term, so H(t) refreshes without reassembly.
struct Csr {
    long long dim = 0;
    std::vector<long long> rp;
    std::vector<int> ci;
    std::vector<double> base_r, base_i;
    std::vector<double> vr, vi;
    struct Scatter {
        const std::function<double(double)>* coeff = nullptr;
        std::vector<long long> pos;
        std::vector<double> tr, ti;
    };
    std::vector<Scatter> scat;
    bool has_time = false;
    bool fresh = false;

    void refresh(double t) {
        if (!has_time) {
            if (!fresh) {
                vr = base_r;
                vi = base_i;
                fresh = true;
            }
            return;
        }
        vr = base_r;
        vi = base_i;
        for (const auto& s : scat) {
            const double c = (*s.coeff)(t);
            if (c == 0.0) continue;
            for (size_t k = 0; k < s.pos.size(); ++k) {
                vr[s.pos[k]] += c * s.tr[k];
                vi[s.pos[k]] += c * s.ti[k];
            }
        }
    }
};

long long find_pos(const Csr& m, long long row, int col) {
    auto lo = m.ci.begin() + m.rp[row];
    auto hi = m.ci.begin() + m.rp[row + 1];
    auto it = std::lower_bound(lo, hi, col);
    if (it == hi || *it != col)
        throw std::runtime_error("evolve: pattern union is inconsistent");
    return it - m.ci.begin();
}

Csr compile_model(const HamiltonianModel& model) {
    SparseOp pattern = model.static_part;
    for (const auto& term : model.time_terms) pattern = pattern + term.op;
    pattern.makeCompressed();

    Csr m;
    m.dim = pattern.rows();
    m.rp.assign(m.dim + 1, 0);
    for (long long i = 0; i <= m.dim; ++i) m.rp[i] = pattern.outerIndexPtr()[i];
    const long long nnz = pattern.nonZeros();
    m.ci.resize(nnz);
    for (long long p = 0; p < nnz; ++p) m.ci[p] = pattern.innerIndexPtr()[p];
    m.base_r.assign(nnz, 0.0);
    m.base_i.assign(nnz, 0.0);

    for (long long i = 0; i < model.static_part.rows(); ++i)
        for (SparseOp::InnerIterator it(model.static_part, i); it; ++it) {
            const long long p = find_pos(m, i, static_cast<int>(it.col()));
            m.base_r[p] = it.value().real();
            m.base_i[p] = it.value().imag();
        }
    for (const auto& term : model.time_terms) {
        Csr::Scatter s;
        s.coeff = &term.coeff;
        for (long long i = 0; i < term.op.rows(); ++i)
            for (SparseOp::InnerIterator it(term.op, i); it; ++it) {
                s.pos.push_back(find_pos(m, i, static_cast<int>(it.col())));
                s.tr.push_back(it.value().real());
                s.ti.push_back(it.value().imag());
            }
        m.scat.push_back(std::move(s));
    }
    m.has_time = !model.time_terms.empty();
    m.refresh(0.0);
    return m;
}

// y = H x on split planes, rows contiguous
void csr_mul_planes(const Csr& m, const RowMatd& xr, const RowMatd& xi, RowMatd& yr,
                    RowMatd& yi) {
    const long long cols = xr.cols();
    yr.setZero();
    yi.setZero();
    for (long long i = 0; i < m.dim; ++i) {
        double* out_r = yr.data() + i * cols;
        double* out_i = yi.data() + i * cols;
        for (long long p = m.rp[i]; p < m.rp[i + 1]; ++p) {
            const double ar = m.vr[p];
            const double ai = m.vi[p];
            const double* in_r = xr.data() + static_cast<long long>(m.ci[p]) * cols;
            const double* in_i = xi.data() + static_cast<long long>(m.ci[p]) * cols;
            if (ai == 0.0) {
                for (long long c = 0; c < cols; ++c) {
                    out_r[c] += ar * in_r[c];
                    out_i[c] += ar * in_i[c];
                }
            } else {
                for (long long c = 0; c < cols; ++c) {
                    out_r[c] += ar * in_r[c] - ai * in_i[c];
                    out_i[c] += ar * in_i[c] + ai * in_r[c];
                }
            }
        }
    }
}

void csr_mul_vec(const Csr& m, const Vec& x, Vec& y) {
    for (long long i = 0; i < m.dim; ++i) {
        cplx acc(0.0, 0.0);
        for (long long p = m.rp[i]; p < m.rp[i + 1]; ++p)
            acc += cplx(m.vr[p], m.vi[p]) * x(m.ci[p]);
        y(i) = acc;
    }
}

struct NoiseGeometry {
    int n_qubits = 0;
    std::vector<long long> strides;
    std::vector<int> pop;  // set bits per basis index
};

NoiseGeometry noise_geometry(const HilbertSpace& space) {
    NoiseGeometry geom;
    geom.n_qubits = space.num_subsystems();
    for (int q = 0; q < geom.n_qubits; ++q) {
        if (space.dim_of(q) != 2)
            throw std::invalid_argument("evolve: noise model needs two-level subsystems");
        geom.strides.push_back(space.stride(q));
    }
    geom.pop.resize(space.dim());
    for (long long i = 0; i < space.dim(); ++i)
        geom.pop[i] = std::popcount(static_cast<unsigned long long>(i));
    return geom;
}

void add_dissipators(const NoiseGeometry& geom, double kappa, double kp, const RowMatd& rr,
                     const RowMatd& ri, RowMatd& dr, RowMatd& di) {
    const long long dim = rr.rows();
    for (long long i = 0; i < dim; ++i) {
        const double* in_r = rr.data() + i * dim;
        const double* in_i = ri.data() + i * dim;
        double* out_r = dr.data() + i * dim;
        double* out_i = di.data() + i * dim;
        const int pi = geom.pop[i];
        for (long long j = 0; j < dim; ++j) {
            const int hx = std::popcount(static_cast<unsigned long long>(i ^ j));
            const double f = -0.5 * kappa * (pi + geom.pop[j]) - 2.0 * kp * hx;
            out_r[j] += f * in_r[j];
            out_i[j] += f * in_i[j];
        }
    }
    if (kappa == 0.0) return;
    for (long long s : geom.strides) {
        for (long long i = 0; i < dim; ++i) {
            if (i & s) continue;
            const double* in_r = rr.data() + (i | s) * dim;
            const double* in_i = ri.data() + (i | s) * dim;
            double* out_r = dr.data() + i * dim;
            double* out_i = di.data() + i * dim;
            for (long long j = 0; j < dim; ++j) {
                if (j & s) continue;
                out_r[j] += kappa * in_r[j | s];
                out_i[j] += kappa * in_i[j | s];
            }
        }
    }
}

struct RunContext {
    const HamiltonianModel* model = nullptr;
    const std::vector<std::pair<std::string, SparseOp>>* observables = nullptr;
    const EvolveOptions* options = nullptr;
    Csr csr;
    bool density = false;
    NoiseGeometry geom;
    double kappa = 0.0;
    double kp = 0.0;
};

// sample times with exact endpoints
std::vector<double> sample_grid(double t_final, int points) {
    std::vector<double> t(points);
    for (int i = 0; i < points; ++i) t[i] = t_final * static_cast<double>(i) / (points - 1);
    t.back() = t_final;
    return t;
}

void record_density_sample(RunContext& ctx, int sample, int total_samples, double t,
                           const RowMatd& rr, const RowMatd& ri, TrajectoryRecord& rec) {
    const long long dim = rr.rows();
    size_t col = 0;
    for (const auto& [name, op] : *ctx.observables) {
        cplx acc(0.0, 0.0);
        for (long long i = 0; i < op.rows(); ++i)
            for (SparseOp::InnerIterator it(op, i); it; ++it)
                acc += it.value() * cplx(rr(it.col(), i), ri(it.col(), i));
        rec.series[col++].second.push_back(acc.real());
    }
    double purity = 0.0;
    double trace = 0.0;
    for (long long i = 0; i < dim; ++i) trace += rr(i, i);
    purity = rr.squaredNorm() + ri.squaredNorm();
    rec.series[col].second.push_back(purity);
    rec.t_ns.push_back(t);

    const double drift = std::abs(trace - 1.0);
    rec.max_trace_drift = std::max(rec.max_trace_drift, drift);
    if (drift > ctx.options->trace_tol)
        throw StepRejected("evolve: trace drift " + std::to_string(drift) +
                           " exceeds tolerance at t=" + std::to_string(t));

    const int stride = std::max(1, (total_samples - 1) / 8);
    const bool check_now = ctx.options->check_positivity &&
                           (sample == total_samples - 1 || sample % stride == 0);
    if (check_now) {
        DenseOp rho(dim, dim);
        for (long long i = 0; i < dim; ++i)
            for (long long j = 0; j < dim; ++j) rho(i, j) = cplx(rr(i, j), ri(i, j));
        Eigen::SelfAdjointEigenSolver<DenseOp> es(rho, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        if (lo < ctx.options->positivity_floor)
            throw StepRejected("evolve: density lost positivity, min eigenvalue " +
                               std::to_string(lo) + " at t=" + std::to_string(t));
    }
    if (ctx.options->store_states) {
        DenseOp rho(dim, dim);
        for (long long i = 0; i < dim; ++i)
            for (long long j = 0; j < dim; ++j) rho(i, j) = cplx(rr(i, j), ri(i, j));
        rho = 0.5 * (rho + rho.adjoint()).eval();
        rec.states.push_back(QuantumState::density(ctx.model->space, rho));
    }
}

void record_pure_sample(RunContext& ctx, double t, const Vec& psi, TrajectoryRecord& rec) {
    size_t col = 0;
    for (const auto& [name, op] : *ctx.observables)
        rec.series[col++].second.push_back(expectation(op, psi).real());
    const double n2 = psi.squaredNorm();
    rec.series[col].second.push_back(n2 * n2);
    rec.t_ns.push_back(t);
    const double drift = std::abs(std::sqrt(n2) - 1.0);
    rec.max_trace_drift = std::max(rec.max_trace_drift, drift);
    if (drift > ctx.options->trace_tol)
        throw StepRejected("evolve: norm drift " + std::to_string(drift) +
                           " exceeds tolerance at t=" + std::to_string(t));
    if (ctx.options->store_states)
        rec.states.push_back(QuantumState::pure(ctx.model->space, psi / std::sqrt(n2)));
}

TrajectoryRecord init_record(const RunContext& ctx, double dt) {
    TrajectoryRecord rec;
    for (const auto& [name, op] : *ctx.observables) rec.series.push_back({name, {}});
    rec.series.push_back({"purity", {}});
    rec.dt_ns = dt;
    return rec;
}

TrajectoryRecord run_density(RunContext& ctx, const DenseOp& rho0, double dt) {
    const auto grid = sample_grid(ctx.options->t_final_ns, ctx.options->output_points);
    const long long dim = ctx.csr.dim;
    TrajectoryRecord rec = init_record(ctx, dt);

    RowMatd rr = rho0.real(), ri = rho0.imag();
    RowMatd mr(dim, dim), mi(dim, dim);
    RowMatd k1r(dim, dim), k1i(dim, dim), k2r(dim, dim), k2i(dim, dim);
    RowMatd k3r(dim, dim), k3i(dim, dim), k4r(dim, dim), k4i(dim, dim);
    RowMatd tr(dim, dim), ti(dim, dim);

    auto rhs = [&](double t, const RowMatd& xr, const RowMatd& xi, RowMatd& dr,
                   RowMatd& di) {
        ctx.csr.refresh(t);
        csr_mul_planes(ctx.csr, xr, xi, mr, mi);
        dr = mi;
        dr += mi.transpose();
        dr *= kTwoPi;
        di = mr.transpose().eval();
        di -= mr;
        di *= kTwoPi;
        if (ctx.kappa != 0.0 || ctx.kp != 0.0)
            add_dissipators(ctx.geom, ctx.kappa, ctx.kp, xr, xi, dr, di);
    };

    record_density_sample(ctx, 0, ctx.options->output_points, 0.0, rr, ri, rec);
    for (int seg = 0; seg + 1 < static_cast<int>(grid.size()); ++seg) {
        const double span = grid[seg + 1] - grid[seg];
        const int nsteps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
        const double h = span / nsteps;
        for (int s = 0; s < nsteps; ++s) {
            const double t = grid[seg] + s * h;
            rhs(t, rr, ri, k1r, k1i);
            tr = rr + (0.5 * h) * k1r;
            ti = ri + (0.5 * h) * k1i;
            rhs(t + 0.5 * h, tr, ti, k2r, k2i);
            tr = rr + (0.5 * h) * k2r;
            ti = ri + (0.5 * h) * k2i;
            rhs(t + 0.5 * h, tr, ti, k3r, k3i);
            tr = rr + h * k3r;
            ti = ri + h * k3i;
            rhs(t + h, tr, ti, k4r, k4i);
            rr += (h / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
            ri += (h / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
        }
        record_density_sample(ctx, seg + 1, ctx.options->output_points, grid[seg + 1], rr,
                              ri, rec);
    }
    return rec;
}

TrajectoryRecord run_pure(RunContext& ctx, const Vec& psi0, double dt) {
    const auto grid = sample_grid(ctx.options->t_final_ns, ctx.options->output_points);
    const long long dim = ctx.csr.dim;
    TrajectoryRecord rec = init_record(ctx, dt);

    Vec psi = psi0;
    Vec z(dim), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    auto rhs = [&](double t, const Vec& x, Vec& dx) {
        ctx.csr.refresh(t);
        csr_mul_vec(ctx.csr, x, z);
        for (long long i = 0; i < dim; ++i)
            dx(i) = cplx(kTwoPi * z(i).imag(), -kTwoPi * z(i).real());
    };

    record_pure_sample(ctx, 0.0, psi, rec);
    for (int seg = 0; seg + 1 < static_cast<int>(grid.size()); ++seg) {
        const double span = grid[seg + 1] - grid[seg];
        const int nsteps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
        const double h = span / nsteps;
        for (int s = 0; s < nsteps; ++s) {
            const double t = grid[seg] + s * h;
            rhs(t, psi, k1);
            tmp = psi + (0.5 * h) * k1;
            rhs(t + 0.5 * h, tmp, k2);
            tmp = psi + (0.5 * h) * k2;
            rhs(t + 0.5 * h, tmp, k3);
            tmp = psi + h * k3;
            rhs(t + h, tmp, k4);
            psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        record_pure_sample(ctx, grid[seg + 1], psi, rec);
    }
    return rec;
}

double series_difference(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    double worst = 0.0;
    for (size_t s = 0; s < a.series.size(); ++s)
        for (size_t i = 0; i < a.series[s].second.size(); ++i)
            worst = std::max(worst,
                             std::abs(a.series[s].second[i] - b.series[s].second[i]));
    return worst;
}

double auto_step(const HamiltonianModel& model, double t_final) {
    double hmax = 0.0;
    for (double frac : {0.0, 0.137, 0.5, 0.863, 1.0}) {
        const SparseOp h = model.at(frac * t_final);
        for (long long i = 0; i < h.rows(); ++i) {
            double row = 0.0;
            for (SparseOp::InnerIterator it(h, i); it; ++it) row += std::abs(it.value());
            hmax = std::max(hmax, row);
        }
    }
    if (hmax <= 0.0) return t_final;
    return 0.02 / hmax;  // about an eighth of a radian of phase per step
}

}  // namespace

TrajectoryRecord evolve(const HamiltonianModel& model, const QuantumState& initial,
                        const std::optional<NoiseConfig>& noise,
                        const std::vector<std::pair<std::string, SparseOp>>& observables,
                        const EvolveOptions& options) {
    if (!(options.t_final_ns > 0.0))
        throw std::invalid_argument("evolve: final time must be positive");
    if (options.output_points < 2)
        throw std::invalid_argument("evolve: at least two output points needed");
    if (initial.space() != model.space)
        throw std::invalid_argument("evolve: state and model spaces differ");
    for (const auto& [name, op] : observables)
        if (op.rows() != model.space.dim() || op.cols() != model.space.dim())
            throw std::invalid_argument("evolve: observable '" + name +
                                        "' has mismatched dimension");
    initial.validate(1e-8);

    RunContext ctx;
    ctx.model = &model;
    ctx.observables = &observables;
    ctx.options = &options;
    ctx.csr = compile_model(model);
    const bool noisy = noise.has_value() && noise->enabled();
    ctx.density = noisy || !initial.is_pure();
    if (noisy) {
        ctx.geom = noise_geometry(model.space);
        ctx.kappa = noise->kappa_per_ns;
        ctx.kp = noise->kappa_prime_per_ns;
    }

    const double span = options.t_final_ns / (options.output_points - 1);
    double dt0 = options.dt_ns > 0.0 ? options.dt_ns : auto_step(model, options.t_final_ns);
    dt0 = std::min(dt0, span);

    DenseOp rho0;
    Vec psi0;
    if (ctx.density)
        rho0 = initial.is_pure() ? initial.to_density().rho() : initial.rho();
    else
        psi0 = initial.amplitudes();

    auto run_once = [&](double dt) {
        return ctx.density ? run_density(ctx, rho0, dt) : run_pure(ctx, psi0, dt);
    };

    if (options.max_halvings == 0) return run_once(dt0);

    // A rejected pass (norm, trace, or positivity out of tolerance) counts
    // as a step that was too coarse while levels remain.
    bool have_prev = false;
    TrajectoryRecord prev;
    for (int level = 0; level <= options.max_halvings; ++level) {
        TrajectoryRecord next;
        try {
            next = run_once(dt0 / std::pow(2.0, level));
        } catch (const StepRejected&) {
            if (level == options.max_halvings) throw;
            have_prev = false;
            continue;
        }
        if (have_prev) {
            const double delta = series_difference(prev, next);
            if (delta <= options.tol) {
                next.halvings = level;
                next.convergence_delta = delta;
                return next;
            }
        }
        have_prev = true;
        prev = std::move(next);
    }
    throw std::runtime_error("evolve: step halving did not converge within " +
                             std::to_string(options.max_halvings) + " levels");
}

}  // namespace toricsim
