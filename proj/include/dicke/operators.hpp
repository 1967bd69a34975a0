// operators.hpp — spin operators, Hamiltonian and Dicke bases on the full 2^N space
//
// Basis convention: product states |s_1 ... s_N>, atom 1 is the most
// significant factor, and each atom is ordered |e> (bit 0) before |g> (bit 1).
// Every matrix in this library, and every serialized matrix, follows it.

#pragma once

#include "types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dicke {

enum class Boundary { none, periodic, open };

inline std::string to_string(Boundary b) {
    switch (b) {
        case Boundary::none: return "none";
        case Boundary::periodic: return "periodic";
        case Boundary::open: return "open";
    }
    return "none";
}

inline Boundary boundary_from_string(const std::string& s) {
    if (s == "none") return Boundary::none;
    if (s == "periodic") return Boundary::periodic;
    if (s == "open") return Boundary::open;
    throw std::invalid_argument("unknown boundary '" + s + "' (expected none|periodic|open)");
}

/// Physical configuration of the driven, disordered Dicke model. All rates
/// and frequencies share the unit of `decay_rate`.
struct ModelParams {
    int atom_count = 1;
    double decay_rate = 1.0;
    double drive = 0.0;
    std::vector<double> detunings;
    double dd_strength = 0.0;
    Boundary boundary = Boundary::none;

    void validate() const {
        if (atom_count < 1) throw std::invalid_argument("atom_count must be >= 1");
        if (static_cast<int>(detunings.size()) != atom_count)
            throw std::invalid_argument("detunings has " + std::to_string(detunings.size()) +
                                        " entries, expected " + std::to_string(atom_count));
        if (!(decay_rate > 0.0)) throw std::invalid_argument("decay_rate must be > 0");
        if (!(drive >= 0.0)) throw std::invalid_argument("drive must be >= 0");
        for (double w : detunings)
            if (!std::isfinite(w)) throw std::invalid_argument("detunings must be finite");
        if (!std::isfinite(dd_strength)) throw std::invalid_argument("dd_strength must be finite");
        const bool has_geometry = boundary != Boundary::none;
        if (has_geometry != (dd_strength != 0.0))
            throw std::invalid_argument("boundary must be 'none' exactly when dd_strength == 0");
    }
};

/// ω_n = −δω + 2δω(n−1)/(N−1); a single atom sits at zero.
inline std::vector<double> equidistant_detunings(int atom_count, double spread) {
    if (atom_count < 1) throw std::invalid_argument("atom_count must be >= 1");
    std::vector<double> w(static_cast<std::size_t>(atom_count), 0.0);
    if (atom_count == 1) return w;
    for (int n = 0; n < atom_count; ++n) w[n] = -spread + 2.0 * spread * n / (atom_count - 1);
    return w;
}

enum class SpinKind { x, y, z, lower, raise };

namespace detail {

inline int bit_of(int state, int atom, int atom_count) { return (state >> (atom_count - 1 - atom)) & 1; }

inline int flip(int state, int atom, int atom_count) { return state ^ (1 << (atom_count - 1 - atom)); }

inline void check_atom_count(int atom_count) {
    if (atom_count < 1 || atom_count > 12) throw std::invalid_argument("atom_count must be in [1, 12]");
}

} // namespace detail

/// σ^{kind} acting on atom `n` (1-based) inside the N-atom space.
inline Operator single_atom_op(int n, SpinKind kind, int atom_count) {
    detail::check_atom_count(atom_count);
    if (n < 1 || n > atom_count)
        throw std::invalid_argument("atom index " + std::to_string(n) + " out of range [1, " +
                                    std::to_string(atom_count) + "]");
    const int dim = hilbert_dim(atom_count);
    const int a = n - 1;
    Operator op = Operator::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
        const bool excited = detail::bit_of(s, a, atom_count) == 0;
        const int t = detail::flip(s, a, atom_count);
        switch (kind) {
            case SpinKind::z: op(s, s) = excited ? 1.0 : -1.0; break;
            case SpinKind::x: op(t, s) = 1.0; break;
            // <e|σy|g> = −i, <g|σy|e> = +i
            case SpinKind::y: op(t, s) = excited ? I_unit : -I_unit; break;
            case SpinKind::lower:
                if (excited) op(t, s) = 1.0;
                break;
            case SpinKind::raise:
                if (!excited) op(t, s) = 1.0;
                break;
        }
    }
    return op;
}

struct CollectiveOps {
    Operator jx, jy, jz, jminus;

    Operator jplus() const { return jminus.adjoint(); }
    Operator j_squared() const { return jx * jx + jy * jy + jz * jz; }
};

inline CollectiveOps collective_ops(int atom_count) {
    detail::check_atom_count(atom_count);
    const int dim = hilbert_dim(atom_count);
    CollectiveOps ops{Operator::Zero(dim, dim), Operator::Zero(dim, dim), Operator::Zero(dim, dim),
                      Operator::Zero(dim, dim)};
    for (int n = 1; n <= atom_count; ++n) {
        ops.jx += 0.5 * single_atom_op(n, SpinKind::x, atom_count);
        ops.jy += 0.5 * single_atom_op(n, SpinKind::y, atom_count);
        ops.jz += 0.5 * single_atom_op(n, SpinKind::z, atom_count);
        ops.jminus += single_atom_op(n, SpinKind::lower, atom_count);
    }
    return ops;
}

/// Nearest-neighbour bonds (0-based pairs). A two-atom ring has one bond.
inline std::vector<std::pair<int, int>> dipole_bonds(int atom_count, Boundary boundary) {
    std::vector<std::pair<int, int>> bonds;
    if (boundary == Boundary::none) return bonds;
    for (int n = 0; n + 1 < atom_count; ++n) bonds.emplace_back(n, n + 1);
    if (boundary == Boundary::periodic && atom_count >= 3) bonds.emplace_back(atom_count - 1, 0);
    return bonds;
}

/// Δ Σ_bonds (σ_n† σ_{n+1} + h.c.)
inline Operator dipole_hamiltonian(int atom_count, double strength, Boundary boundary) {
    const int dim = hilbert_dim(atom_count);
    Operator h = Operator::Zero(dim, dim);
    for (auto [a, b] : dipole_bonds(atom_count, boundary)) {
        Operator hop = single_atom_op(a + 1, SpinKind::raise, atom_count) *
                       single_atom_op(b + 1, SpinKind::lower, atom_count);
        h += strength * (hop + hop.adjoint());
    }
    return h;
}

/// Σ_n ω_n σ_n^z (no ½: a lone atom's splitting is 2ω_n).
inline Operator disorder_hamiltonian(const std::vector<double>& detunings) {
    const int atom_count = static_cast<int>(detunings.size());
    detail::check_atom_count(atom_count);
    const int dim = hilbert_dim(atom_count);
    Operator h = Operator::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
        double e = 0.0;
        for (int a = 0; a < atom_count; ++a) e += detail::bit_of(s, a, atom_count) == 0 ? detunings[a] : -detunings[a];
        h(s, s) = e;
    }
    return h;
}

/// H = 2Ω J_x + Σ ω_n σ_n^z + Δ Σ_NN (σ_n†σ_{n+1} + h.c.)
inline Operator hamiltonian(const ModelParams& params) {
    params.validate();
    detail::check_atom_count(params.atom_count);
    const CollectiveOps ops = collective_ops(params.atom_count);
    Operator h = 2.0 * params.drive * ops.jx + disorder_hamiltonian(params.detunings);
    if (params.boundary != Boundary::none)
        h += dipole_hamiltonian(params.atom_count, params.dd_strength, params.boundary);
    return h;
}

// ---------------------------------------------------------------------------
// Dicke bases
// ---------------------------------------------------------------------------

/// Multiplicity d_j of spin j among N spin-½: N!(2j+1)/((N/2+j+1)!(N/2−j)!).
inline std::uint64_t degeneracy_dj(int atom_count, HalfInt j) {
    if (atom_count < 1 || atom_count > 60) throw std::invalid_argument("atom_count must be in [1, 60]");
    if (j.twice < 0 || j.twice > atom_count || (atom_count - j.twice) % 2 != 0)
        throw std::invalid_argument("j = " + j.str() + " is not a valid total spin for N = " +
                                    std::to_string(atom_count));
    // N!/((N/2+j+1)!(N/2−j)!) = C(N+1, N/2−j)/(N+1)
    const int k = (atom_count - j.twice) / 2;
    return binomial(atom_count + 1, k) * static_cast<std::uint64_t>(j.twice + 1) /
           static_cast<std::uint64_t>(atom_count + 1);
}

/// Allowed j values, largest first.
inline std::vector<HalfInt> spin_values(int atom_count) {
    std::vector<HalfInt> js;
    for (int t = atom_count; t >= 0; t -= 2) js.push_back(HalfInt::from_twice(t));
    return js;
}

enum class Axis { z, x };

struct DickeState {
    HalfInt j;
    HalfInt m;
    int nu = 1; // 1..d_j
    Vector vec;
};

struct DickeBasis {
    Axis axis = Axis::z;
    int atom_count = 0;
    std::vector<DickeState> states;

    /// Columns are the basis vectors in `states` order.
    Operator matrix() const {
        const int dim = hilbert_dim(atom_count);
        Operator m(dim, static_cast<Eigen::Index>(states.size()));
        for (std::size_t i = 0; i < states.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = states[i].vec;
        return m;
    }

    const DickeState& find(HalfInt j, HalfInt m, int nu) const {
        for (const auto& s : states)
            if (s.j == j && s.m == m && s.nu == nu) return s;
        throw std::invalid_argument("no Dicke state with j=" + j.str() + " m=" + m.str() +
                                    " nu=" + std::to_string(nu));
    }

    int multiplicity(HalfInt j) const {
        int d = 0;
        for (const auto& s : states)
            if (s.j == j && s.m == j) ++d;
        return d;
    }
};

namespace detail {

/// Orthonormal highest-weight vectors (J_z v = j v, J_+ v = 0) in the
/// z-quantized frame. ν order comes from Gram–Schmidt of
/// the kernel projector applied to product states in increasing index order.
inline Operator highest_weight_vectors(int atom_count, HalfInt j, const CollectiveOps& ops) {
    const int dim = hilbert_dim(atom_count);
    const int excited = (atom_count + j.twice) / 2;
    std::vector<int> sector;
    for (int s = 0; s < dim; ++s) {
        int e = 0;
        for (int a = 0; a < atom_count; ++a) e += bit_of(s, a, atom_count) == 0 ? 1 : 0;
        if (e == excited) sector.push_back(s);
    }
    const int sdim = static_cast<int>(sector.size());
    const Operator jplus = ops.jplus();
    Operator restricted(dim, sdim);
    for (int c = 0; c < sdim; ++c) restricted.col(c) = jplus.col(sector[c]);
    const Operator gram = restricted.adjoint() * restricted;
    Eigen::SelfAdjointEigenSolver<Operator> es(gram);
    std::vector<int> kernel_cols;
    for (int i = 0; i < sdim; ++i)
        if (es.eigenvalues()(i) < 1e-9) kernel_cols.push_back(i);
    Operator kernel(sdim, static_cast<Eigen::Index>(kernel_cols.size()));
    for (std::size_t i = 0; i < kernel_cols.size(); ++i)
        kernel.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(kernel_cols[i]);
    const Operator projector = kernel * kernel.adjoint();

    const auto want = static_cast<Eigen::Index>(degeneracy_dj(atom_count, j));
    std::vector<Vector> found;
    for (int c = 0; c < sdim && static_cast<Eigen::Index>(found.size()) < want; ++c) {
        Vector v = projector.col(c);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : found) v -= u.dot(v) * u;
        const double nrm = v.norm();
        if (nrm > 1e-6) found.push_back(v / nrm);
    }
    if (static_cast<Eigen::Index>(found.size()) != want)
        throw NumericalError("highest-weight space for j=" + j.str() + " has dimension " +
                             std::to_string(found.size()) + ", expected " + std::to_string(want));
    Operator out = Operator::Zero(dim, want);
    for (Eigen::Index i = 0; i < want; ++i)
        for (int c = 0; c < sdim; ++c) out(sector[c], i) = found[static_cast<std::size_t>(i)](c);
    return out;
}

/// ⊗_n exp(−iπσ^y_n/4) = exp(−iπJ_y/2); maps J_z eigenvectors onto J_x eigenvectors.
inline Operator rotation_z_to_x(int atom_count) {
    const double c = std::sqrt(0.5);
    Operator r(2, 2);
    r << c, -c, c, c;
    Operator u = Operator::Identity(1, 1);
    for (int n = 0; n < atom_count; ++n) {
        Operator next(u.rows() * 2, u.cols() * 2);
        for (Eigen::Index i = 0; i < u.rows(); ++i)
            for (Eigen::Index k = 0; k < u.cols(); ++k) next.block(2 * i, 2 * k, 2, 2) = u(i, k) * r;
        u = std::move(next);
    }
    return u;
}

} // namespace detail

/// Complete |j, m, ν> basis quantized along `axis`; ordered by j descending,
/// then ν, then m descending. ν labels are shared across a ladder: each
/// |j, m−1, ν> is the normalized J_− image of |j, m, ν>.
inline DickeBasis dicke_basis(int atom_count, Axis axis = Axis::z) {
    if (atom_count < 1 || atom_count > 8) throw std::invalid_argument("dicke_basis supports 1 <= N <= 8");
    const CollectiveOps ops = collective_ops(atom_count);
    DickeBasis basis;
    basis.axis = axis;
    basis.atom_count = atom_count;
    const Operator rot = axis == Axis::x ? detail::rotation_z_to_x(atom_count) : Operator();
    for (HalfInt j : spin_values(atom_count)) {
        const Operator hw = detail::highest_weight_vectors(atom_count, j, ops);
        for (Eigen::Index nu = 0; nu < hw.cols(); ++nu) {
            Vector v = hw.col(nu);
            for (int tm = j.twice; tm >= -j.twice; tm -= 2) {
                DickeState st{j, HalfInt::from_twice(tm), static_cast<int>(nu) + 1,
                              axis == Axis::x ? Vector(rot * v) : v};
                basis.states.push_back(std::move(st));
                if (tm > -j.twice) {
                    const double jj = j.value(), mm = tm / 2.0;
                    v = ops.jminus * v / std::sqrt(jj * (jj + 1) - mm * (mm - 1));
                }
            }
        }
    }
    return basis;
}

/// (1/(2j+1)) Σ_{m_x} |j, m_x, ν><j, m_x, ν'|
inline Operator dark_mixture(HalfInt j, int nu, int nu_prime, const DickeBasis& basis) {
    if (basis.axis != Axis::x) throw std::invalid_argument("dark_mixture requires an x-quantized Dicke basis");
    const int d = basis.multiplicity(j);
    if (d == 0) throw std::invalid_argument("j = " + j.str() + " does not occur for this basis");
    if (nu < 1 || nu > d || nu_prime < 1 || nu_prime > d)
        throw std::invalid_argument("multiplicity label out of range [1, " + std::to_string(d) + "]");
    const int dim = hilbert_dim(basis.atom_count);
    Operator rho = Operator::Zero(dim, dim);
    for (int tm = j.twice; tm >= -j.twice; tm -= 2) {
        const HalfInt m = HalfInt::from_twice(tm);
        rho += basis.find(j, m, nu).vec * basis.find(j, m, nu_prime).vec.adjoint();
    }
    return rho / static_cast<double>(j.twice + 1);
}

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

} // namespace dicke
