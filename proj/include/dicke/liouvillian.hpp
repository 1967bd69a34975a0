// liouvillian.hpp — superoperator assembly, dense spectrum and subradiant classification
//
// Vectorization is column stacking: vec(A X B) = (Bᵀ ⊗ A) vec(X).

#pragma once

#include "operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace dicke {

inline constexpr int kMaxDenseAtoms = 6;

struct Superoperator {
    int atom_count = 0;
    double decay_rate = 1.0;
    Operator matrix;

    static constexpr const char* vectorization = "column-stacking";

    Eigen::Index dim() const { return matrix.rows(); }
};

inline Vector vectorize(const Operator& rho) {
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

inline Operator unvectorize(const Vector& v) {
    const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (dim * dim != v.size()) throw std::invalid_argument("vector length is not a perfect square");
    return Eigen::Map<const Operator>(v.data(), dim, dim);
}

namespace detail {

// out += coeff · (a ⊗ b)
inline void add_kron(Operator& out, cplx coeff, const Operator& a, const Operator& b) {
    const Eigen::Index br = b.rows(), bc = b.cols();
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const cplx f = coeff * a(i, j);
            if (f == cplx{0.0, 0.0}) continue;
            out.block(i * br, j * bc, br, bc) += f * b;
        }
}

} // namespace detail

/// 𝓛ρ = −i[H, ρ] + (γ/2)(2J₋ρJ₊ − ρJ₊J₋ − J₊J₋ρ). γ = 0 is allowed here
/// (pure Hamiltonian evolution); physical models go through ModelParams.
inline Superoperator build_liouvillian(const Operator& hamiltonian, const Operator& jminus, double gamma) {
    const Eigen::Index d = hamiltonian.rows();
    if (hamiltonian.cols() != d || jminus.rows() != d || jminus.cols() != d)
        throw std::invalid_argument("hamiltonian and jump operator must be square and equal-sized");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
    const int atom_count = static_cast<int>(std::lround(std::log2(static_cast<double>(d))));
    if (atom_count > kMaxDenseAtoms)
        throw std::invalid_argument("dense superoperator for N = " + std::to_string(atom_count) +
                                    " exceeds the supported limit N <= " + std::to_string(kMaxDenseAtoms));
    const Operator id = Operator::Identity(d, d);
    const Operator jplus = jminus.adjoint();
    const Operator number = jplus * jminus;
    Superoperator L{atom_count, gamma, Operator::Zero(d * d, d * d)};
    detail::add_kron(L.matrix, -I_unit, id, hamiltonian);
    detail::add_kron(L.matrix, I_unit, hamiltonian.transpose(), id);
    if (gamma > 0.0) {
        detail::add_kron(L.matrix, gamma, jplus.transpose(), jminus);
        detail::add_kron(L.matrix, -0.5 * gamma, number.transpose(), id);
        detail::add_kron(L.matrix, -0.5 * gamma, id, number);
    }
    return L;
}

inline Superoperator build_liouvillian(const ModelParams& params) {
    params.validate();
    if (params.atom_count > kMaxDenseAtoms)
        throw std::invalid_argument("dense superoperator for N = " + std::to_string(params.atom_count) +
                                    " exceeds the supported limit N <= " + std::to_string(kMaxDenseAtoms));
    const CollectiveOps ops = collective_ops(params.atom_count);
    Superoperator L = build_liouvillian(hamiltonian(params), ops.jminus, params.decay_rate);
    L.decay_rate = params.decay_rate;
    return L;
}

/// Matrix-free action of the same generator on an operator.
inline Operator apply_liouvillian(const Operator& hamiltonian, const Operator& jminus, double gamma,
                                  const Operator& rho) {
    const Operator jplus = jminus.adjoint();
    const Operator number = jplus * jminus;
    return -I_unit * (hamiltonian * rho - rho * hamiltonian) +
           0.5 * gamma * (2.0 * jminus * rho * jplus - rho * number - number * rho);
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

struct LiouvillianSpectrum {
    int atom_count = 0;
    double decay_rate = 1.0;
    Vector eigenvalues;
    Operator right;      // columns: right eigenvectors, unit 2-norm
    Operator left;       // rows: left eigenvectors, left.row(i) * right.col(j) = δ_ij
    RealVector residuals; // ‖𝓛ρ_i − λ_iρ_i‖
    double norm = 0.0;    // Frobenius norm of 𝓛
    double biorth_error = 0.0;
    double condition_estimate = 0.0;

    static constexpr const char* sort_order =
        "steady state first; then ascending -Re; ties by ascending |Im|, Im >= 0 first";

    Eigen::Index size() const { return eigenvalues.size(); }

    Operator eigenmatrix(Eigen::Index i) const { return unvectorize(right.col(i)); }

    double decay(Eigen::Index i) const { return -eigenvalues(i).real(); }
};

namespace detail {

inline std::vector<Eigen::Index> spectral_order(const Vector& ev, double tie_tol) {
    const Eigen::Index n = ev.size();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    if (n == 0) return idx;
    const auto steady = static_cast<std::size_t>(
        *std::min_element(idx.begin(), idx.end(),
                          [&](Eigen::Index a, Eigen::Index b) { return std::abs(ev(a)) < std::abs(ev(b)); }));
    std::swap(idx[0], idx[steady]);
    std::stable_sort(idx.begin() + 1, idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return -ev(a).real() < -ev(b).real(); });
    // Runs of equal decay rate are re-sorted by |Im|, then positive Im first.
    std::size_t start = 1;
    while (start < idx.size()) {
        std::size_t stop = start + 1;
        while (stop < idx.size() && std::abs(ev(idx[stop]).real() - ev(idx[start]).real()) <= tie_tol) ++stop;
        std::stable_sort(idx.begin() + static_cast<std::ptrdiff_t>(start), idx.begin() + static_cast<std::ptrdiff_t>(stop),
                         [&](Eigen::Index a, Eigen::Index b) {
                             const double ia = std::abs(ev(a).imag()), ib = std::abs(ev(b).imag());
                             if (std::abs(ia - ib) > tie_tol) return ia < ib;
                             return ev(a).imag() > ev(b).imag();
                         });
        start = stop;
    }
    return idx;
}

} // namespace detail

/// Full dense eigendecomposition. Throws NumericalError when an eigenpair
/// residual or the left/right biorthogonality misses tolerance, which is how
/// (near-)Jordan blocks show up.
inline LiouvillianSpectrum spectrum(const Superoperator& L, double residual_tol = 1e-8,
                                    double biorth_tol = 1e-6) {
    const Eigen::Index n = L.dim();
    Eigen::ComplexEigenSolver<Operator> solver(L.matrix, true);
    if (solver.info() != Eigen::Success) throw NumericalError("complex eigensolver did not converge");

    LiouvillianSpectrum out;
    out.atom_count = L.atom_count;
    out.decay_rate = L.decay_rate;
    out.norm = L.matrix.norm();
    const double scale = std::max(out.norm, 1e-300);

    const auto order = detail::spectral_order(solver.eigenvalues(), 1e-10 * std::max(1.0, scale));
    out.eigenvalues.resize(n);
    out.right.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.eigenvalues(k) = solver.eigenvalues()(src);
        Vector v = solver.eigenvectors().col(src);
        v.normalize();
        out.right.col(k) = v;
    }

    out.residuals.resize(n);
    const Operator applied = L.matrix * out.right;
    for (Eigen::Index k = 0; k < n; ++k) {
        out.residuals(k) = (applied.col(k) - out.eigenvalues(k) * out.right.col(k)).norm();
        if (out.residuals(k) > residual_tol * scale)
            throw NumericalError("eigenpair " + std::to_string(k) + " residual " + std::to_string(out.residuals(k)) +
                                 " exceeds tolerance");
    }

    Eigen::PartialPivLU<Operator> lu(out.right);
    out.left = lu.inverse();
    out.condition_estimate = out.right.norm() * out.left.norm();
    out.biorth_error = (out.left * out.right - Operator::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!std::isfinite(out.biorth_error) || out.biorth_error > biorth_tol)
        throw NumericalError("left/right eigenvectors fail biorthonormalization (error " +
                             std::to_string(out.biorth_error) + ", condition ~" +
                             std::to_string(out.condition_estimate) + "); spectrum is defective or nearly so");
    return out;
}

/// Eigenvalues with |λ| below `tol`·γ.
inline int zero_eigenvalue_count(const LiouvillianSpectrum& spec, double tol = 1e-9) {
    int c = 0;
    for (Eigen::Index i = 0; i < spec.size(); ++i)
        if (std::abs(spec.eigenvalues(i)) < tol * spec.decay_rate) ++c;
    return c;
}

class DegenerateSteadyState : public NumericalError {
public:
    DegenerateSteadyState(int multiplicity, Operator subspace)
        : NumericalError("steady state is not unique: " + std::to_string(multiplicity) +
                         " eigenvalues at zero"),
          multiplicity_(multiplicity), subspace_(std::move(subspace)) {}

    int multiplicity() const { return multiplicity_; }
    /// Columns: vectorized right eigenvectors spanning the zero eigenspace.
    const Operator& subspace() const { return subspace_; }

private:
    int multiplicity_;
    Operator subspace_;
};

/// Unique stationary density matrix: Hermitized, unit trace.
inline Operator steady_state(const LiouvillianSpectrum& spec, double zero_tol = 1e-9) {
    const int zeros = zero_eigenvalue_count(spec, zero_tol);
    if (zeros > 1) throw DegenerateSteadyState(zeros, spec.right.leftCols(zeros));
    Operator rho = spec.eigenmatrix(0);
    const cplx tr = rho.trace();
    if (std::abs(tr) < 1e-14) throw NumericalError("steady-state eigenvector has vanishing trace");
    rho /= tr;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return rho;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Sorted values merged when within `tol` of the first member of their run.
inline std::vector<double> distinct_values(std::vector<double> values, double tol) {
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    for (double v : values)
        if (out.empty() || v - out.back() > tol) out.push_back(v);
    return out;
}

struct SubradiantReport {
    cplx lambda1{0.0, 0.0};
    int count_inclusive = 0; // −Re λ < threshold, steady state included
    int count_exclusive = 0;
    std::vector<double> frequencies; // distinct |Im λ| > freq_tol within the subradiant set
    double threshold = 0.05;
    double freq_tol = 1e-6;
    double dedup_tol = 1e-6;
};

/// Thresholds are fractions of γ.
inline SubradiantReport classify_subradiant(const LiouvillianSpectrum& spec, double threshold = 0.05,
                                            double freq_tol = 1e-6, double dedup_tol = 1e-6) {
    SubradiantReport r;
    r.threshold = threshold;
    r.freq_tol = freq_tol;
    r.dedup_tol = dedup_tol;
    const double g = spec.decay_rate;
    if (spec.size() > 1) r.lambda1 = spec.eigenvalues(1) / g;
    std::vector<double> freqs;
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
        if (spec.decay(i) >= threshold * g) continue;
        ++r.count_inclusive;
        if (i > 0) ++r.count_exclusive;
        const double f = std::abs(spec.eigenvalues(i).imag()) / g;
        if (f > freq_tol) freqs.push_back(f);
    }
    r.frequencies = distinct_values(std::move(freqs), dedup_tol);
    return r;
}

/// Distinct |Im λ|/γ among the first `k` sorted eigenvalues.
inline std::vector<double> cluster_frequencies(const LiouvillianSpectrum& spec, Eigen::Index k, double freq_tol = 1e-6,
                                               double dedup_tol = 1e-6) {
    std::vector<double> freqs;
    for (Eigen::Index i = 0; i < std::min(k, spec.size()); ++i) {
        const double f = std::abs(spec.eigenvalues(i).imag()) / spec.decay_rate;
        if (f > freq_tol) freqs.push_back(f);
    }
    return distinct_values(std::move(freqs), dedup_tol);
}

/// Ratio of the (k+1)-th to the k-th smallest decay rate (1-based), i.e. how
/// cleanly the first k eigenvalues separate from the rest.
inline double cluster_gap_ratio(const LiouvillianSpectrum& spec, Eigen::Index k) {
    if (k < 1 || k >= spec.size()) throw std::invalid_argument("cluster size out of range");
    return spec.decay(k) / std::max(spec.decay(k - 1), 1e-300);
}

struct DriveLimitCount {
    int inclusive = 0;
    int exclusive = 0;
    double drive_factor = 10.0;
    double threshold = 0.05;
};

/// Solves the model again at `factor`·Ω and counts decay rates below
/// threshold·γ/factor.
inline DriveLimitCount drive_limit_dark_count(ModelParams params, double factor = 10.0, double threshold = 0.05) {
    if (!(factor > 1.0)) throw std::invalid_argument("drive factor must exceed 1");
    params.drive *= factor;
    const LiouvillianSpectrum spec = spectrum(build_liouvillian(params));
    DriveLimitCount c;
    c.drive_factor = factor;
    c.threshold = threshold;
    const double bound = threshold * params.decay_rate / factor;
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
        if (spec.decay(i) >= bound) continue;
        ++c.inclusive;
        if (i > 0) ++c.exclusive;
    }
    return c;
}

/// Expansion coefficients c_i of ρ0 in the right eigenvectors.
inline Vector decompose_initial(const LiouvillianSpectrum& spec, const Operator& rho0, double tol = 1e-8) {
    const Vector v = vectorize(rho0);
    if (v.size() != spec.right.rows()) throw std::invalid_argument("initial state dimension mismatch");
    Vector c = spec.left * v;
    const double err = (spec.right * c - v).norm();
    if (err > tol * std::max(1.0, v.norm()))
        throw NumericalError("biorthogonal decomposition is ill-conditioned (reconstruction error " +
                             std::to_string(err) + ")");
    return c;
}

} // namespace dicke
