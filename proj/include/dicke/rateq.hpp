// rateq.hpp — secular rate equation and first-order frequency predictions

#pragma once

#include "liouvillian.hpp"
#include "symmetry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace dicke {

struct DegenerateSubspace {
    double energy = 0.0;
    int dim = 0;
    HalfInt j;
    bool j_defined = true;
    std::string method; // "J2", "reference" or "unresolved"
};

struct RateMatrix {
    double decay_rate = 1.0;
    RealVector energies;
    Operator states;               // columns |α>
    std::vector<HalfInt> j_labels; // from <α|J²|α>
    std::vector<bool> j_defined;
    RealMatrix matrix;             // R_{αβ}
    std::vector<DegenerateSubspace> degeneracies;

    bool fully_resolved() const {
        for (const auto& d : degeneracies)
            if (d.method == "unresolved") return false;
        return true;
    }
};

struct RateOptions {
    double degeneracy_tol = 1e-8; // relative to max(1, ‖H‖)
    Axis reference_axis = Axis::x; // Dicke basis used to fix degenerate subspaces
};

namespace detail {

inline Operator orthonormal_columns(const Operator& m, double tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Operator> es(m);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i)
        if (es.eigenvalues()(i) > 1.0 - tol) keep.push_back(i);
    Operator out(m.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]);
    return out;
}

inline HalfInt spin_from_casimir(double value, bool& ok) {
    const double jv = 0.5 * (std::sqrt(1.0 + 4.0 * std::max(value, 0.0)) - 1.0);
    const int twice = static_cast<int>(std::lround(2.0 * jv));
    const double back = twice / 2.0 * (twice / 2.0 + 1.0);
    ok = std::abs(back - value) < 1e-6;
    return HalfInt::from_twice(twice);
}

} // namespace detail

/// Eigenbasis of H with degenerate eigenspaces split by J², then fixed by
/// projecting the reference Dicke vectors |j, m, ν> in basis order.
inline RateMatrix build_rate_matrix(const Operator& hamiltonian, const Operator& jminus, double gamma = 1.0,
                                    RateOptions opt = {}) {
    if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() != jminus.rows())
        throw std::invalid_argument("operator dimensions do not match");
    if ((hamiltonian - hamiltonian.adjoint()).norm() > 1e-10 * std::max(1.0, hamiltonian.norm()))
        throw std::invalid_argument("Hamiltonian is not Hermitian");
    const int dim = static_cast<int>(hamiltonian.rows());
    const int atom_count = static_cast<int>(std::lround(std::log2(static_cast<double>(dim))));
    if (hilbert_dim(atom_count) != dim) throw std::invalid_argument("dimension is not a power of two");

    const CollectiveOps ops = collective_ops(atom_count);
    const Operator j2 = ops.j_squared();
    const DickeBasis reference = dicke_basis(atom_count, opt.reference_axis);

    Eigen::SelfAdjointEigenSolver<Operator> es(hamiltonian);
    const RealVector& e = es.eigenvalues();
    const double tol = opt.degeneracy_tol * std::max(1.0, hamiltonian.norm());

    RateMatrix out;
    out.decay_rate = gamma;
    out.energies = e;
    out.states = es.eigenvectors();

    for (int start = 0; start < dim;) {
        int stop = start + 1;
        while (stop < dim && e(stop) - e(stop - 1) <= tol) ++stop;
        const int k = stop - start;
        if (k > 1) {
            const Operator q = es.eigenvectors().middleCols(start, k);
            Eigen::SelfAdjointEigenSolver<Operator> js(Operator(q.adjoint() * j2 * q));
            Operator rotated = q * js.eigenvectors();
            const RealVector& jv = js.eigenvalues();
            int col = 0;
            for (int a = 0; a < k;) {
                int b = a + 1;
                while (b < k && jv(b) - jv(b - 1) < 1e-6) ++b;
                const int sub = b - a;
                bool ok = true;
                const HalfInt j = detail::spin_from_casimir(jv(a), ok);
                DegenerateSubspace rec{e(start), sub, j, ok, "J2"};
                Operator block = rotated.middleCols(a, sub);
                if (sub > 1) {
                    const Operator proj = block * block.adjoint();
                    std::vector<Vector> found;
                    for (const auto& st : reference.states) {
                        if (static_cast<int>(found.size()) == sub) break;
                        if (ok && st.j != j) continue;
                        Vector v = proj * st.vec;
                        for (int pass = 0; pass < 2; ++pass)
                            for (const auto& u : found) v -= u.dot(v) * u;
                        if (v.norm() > 1e-6) found.push_back(v.normalized());
                    }
                    if (static_cast<int>(found.size()) == sub) {
                        for (int c = 0; c < sub; ++c) block.col(c) = found[static_cast<std::size_t>(c)];
                        rec.method = "reference";
                    } else {
                        rec.method = "unresolved";
                    }
                }
                out.states.middleCols(start + col, sub) = block;
                col += sub;
                if (k > 1) out.degeneracies.push_back(rec);
                a = b;
            }
        }
        start = stop;
    }

    for (int a = 0; a < dim; ++a) {
        bool ok = true;
        const double c = (out.states.col(a).adjoint() * j2 * out.states.col(a))(0, 0).real();
        out.j_labels.push_back(detail::spin_from_casimir(c, ok));
        out.j_defined.push_back(ok);
    }

    const Operator lower = out.states.adjoint() * jminus * out.states;
    const Operator jpjm = jminus.adjoint() * jminus;
    out.matrix = gamma * lower.cwiseAbs2();
    for (int a = 0; a < dim; ++a)
        out.matrix(a, a) -= gamma * (out.states.col(a).adjoint() * jpjm * out.states.col(a))(0, 0).real();
    return out;
}

/// Undriven models take the z-quantized reference basis.
inline RateMatrix build_rate_matrix(const ModelParams& params, RateOptions opt = {}) {
    params.validate();
    if (params.drive == 0.0) opt.reference_axis = Axis::z;
    return build_rate_matrix(hamiltonian(params), collective_ops(params.atom_count).jminus, params.decay_rate, opt);
}

struct NullSpace {
    int dimension = 0;
    double threshold = 0.0;          // tol·‖R‖₂
    double largest_below = 0.0;      // largest singular value counted as zero
    double smallest_above = 0.0;     // smallest singular value counted as nonzero
    bool ambiguous = false;          // a singular value within two decades of the threshold
    RealMatrix basis;                // columns span {c : Rc = 0}
};

inline NullSpace stationary_count(const RateMatrix& r, double tol = 1e-9) {
    Eigen::JacobiSVD<RealMatrix> svd(r.matrix, Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    NullSpace ns;
    ns.threshold = tol * std::max(s.size() ? s(0) : 0.0, 1e-300);
    std::vector<Eigen::Index> zero;
    ns.smallest_above = s.size() ? s(0) : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) < ns.threshold) {
            zero.push_back(i);
            ns.largest_below = std::max(ns.largest_below, s(i));
        } else {
            ns.smallest_above = std::min(ns.smallest_above, s(i));
        }
        if (s(i) > ns.threshold / 100.0 && s(i) < ns.threshold * 100.0) ns.ambiguous = true;
    }
    ns.dimension = static_cast<int>(zero.size());
    ns.basis.resize(r.matrix.cols(), ns.dimension);
    for (std::size_t c = 0; c < zero.size(); ++c) ns.basis.col(static_cast<Eigen::Index>(c)) = svd.matrixV().col(zero[c]);
    return ns;
}

/// Population vector c_α = 1/(2j+1) on the states of the (j, ν) ladder of
/// the rate basis (diagonal of the uniform dark mixture).
inline RealVector ladder_population(const RateMatrix& r, const DickeBasis& basis_x, HalfInt j, int nu) {
    const Operator rho = dark_mixture(j, nu, nu, basis_x);
    return (r.states.adjoint() * rho * r.states).diagonal().real();
}

// ---------------------------------------------------------------------------
// First-order secular energies of the long-lived coherences
// ---------------------------------------------------------------------------

struct SecularBlock {
    HalfInt j;
    std::string irrep;
    int copy = 1;        // 1..multiplicity
    int dim = 1;
    double energy = 0.0; // multiplet-averaged first-order shift
};

struct FrequencyPair {
    std::size_t a = 0;
    std::size_t b = 0;
    double frequency = 0.0;
};

struct FrequencyPrediction {
    std::string group_name;
    std::vector<SecularBlock> blocks;
    std::vector<FrequencyPair> pairs; // same j, different blocks
    std::vector<double> distinct;     // deduplicated frequencies
    double dedup_tol = 1e-6;
};

/// M_j[ν,ν'] = (1/(2j+1)) Σ_m <j m ν|V|j m ν'>, V = H − 2ΩJ_x.
inline Operator secular_operator(const ModelParams& params, const DickeBasis& basis_z, HalfInt j) {
    const int d = basis_z.multiplicity(j);
    const Operator v = hamiltonian(params) - 2.0 * params.drive * collective_ops(params.atom_count).jx;
    Operator m = Operator::Zero(d, d);
    for (int tm = j.twice; tm >= -j.twice; tm -= 2) {
        const HalfInt mm = HalfInt::from_twice(tm);
        for (int a = 1; a <= d; ++a)
            for (int b = 1; b <= d; ++b)
                m(a - 1, b - 1) += basis_z.find(j, mm, a).vec.dot(v * basis_z.find(j, mm, b).vec);
    }
    return m / static_cast<double>(j.twice + 1);
}

inline FrequencyPrediction predicted_frequencies(const ModelParams& params, const PermGroup& group,
                                                 double dedup_tol = 1e-6) {
    params.validate();
    if (group.atom_count != params.atom_count) throw std::invalid_argument("group and model differ in N");
    const DickeBasis basis_z = dicke_basis(params.atom_count, Axis::z);
    FrequencyPrediction out;
    out.group_name = group.name();
    out.dedup_tol = dedup_tol;

    for (HalfInt j : spin_values(params.atom_count)) {
        const DecompositionRow row = irrep_multiplicities(group, j);
        const auto reps = multiplicity_representation(group, j);
        const Operator m = secular_operator(params, basis_z, j);
        const std::size_t first = out.blocks.size();
        for (const auto& term : row.terms) {
            const std::size_t a = group.irrep_index(term.name);
            Operator proj = Operator::Zero(reps.front().rows(), reps.front().cols());
            for (int g = 0; g < group.order(); ++g) proj += group.character(a, g) * reps[g];
            proj *= static_cast<double>(term.dim) / group.order();
            const Operator iso = detail::orthonormal_columns(0.5 * (proj + proj.adjoint()));
            if (iso.cols() != term.dim * term.multiplicity)
                throw NumericalError("isotypic projector rank mismatch for " + term.name + " at j = " + j.str());
            Eigen::SelfAdjointEigenSolver<Operator> es(Operator(iso.adjoint() * m * iso));
            for (int c = 0; c < term.multiplicity; ++c) {
                double energy = 0.0;
                for (int k = 0; k < term.dim; ++k) energy += es.eigenvalues()(c * term.dim + k);
                out.blocks.push_back({j, term.name, c + 1, term.dim, energy / term.dim});
            }
        }
        for (std::size_t a = first; a < out.blocks.size(); ++a)
            for (std::size_t b = a + 1; b < out.blocks.size(); ++b)
                out.pairs.push_back({a, b, std::abs(out.blocks[a].energy - out.blocks[b].energy)});
    }
    std::vector<double> f;
    for (const auto& p : out.pairs) f.push_back(p.frequency);
    out.distinct = distinct_values(f, dedup_tol);
    return out;
}

inline FrequencyPrediction predicted_frequencies(const ModelParams& params, double dedup_tol = 1e-6) {
    return predicted_frequencies(params, build_group(group_for_boundary(params.boundary), params.atom_count),
                                 dedup_tol);
}

struct FrequencyMatch {
    double predicted = 0.0;
    double observed = 0.0; // nearest observed value
    double relative_error = 0.0;
    bool matched = false;
};

struct FrequencyComparison {
    std::vector<FrequencyMatch> forward;  // each predicted value against the observed set
    std::vector<FrequencyMatch> backward; // each observed value >= floor against the predicted set
    double rel_tol = 0.1;
    double floor = 0.05;

    bool ok() const {
        for (const auto& m : forward)
            if (!m.matched) return false;
        for (const auto& m : backward)
            if (!m.matched) return false;
        return true;
    }
};

/// Two-way nearest-value match; observed values below `floor` are not required
/// to have a first-order counterpart.
inline FrequencyComparison compare_frequencies(const std::vector<double>& predicted,
                                               const std::vector<double>& observed, double rel_tol = 0.1,
                                               double floor = 0.05) {
    auto nearest = [](double x, const std::vector<double>& set) {
        FrequencyMatch m;
        m.predicted = x;
        double best = std::numeric_limits<double>::infinity();
        for (double y : set)
            if (std::abs(y - x) < best) {
                best = std::abs(y - x);
                m.observed = y;
            }
        return m;
    };
    FrequencyComparison c;
    c.rel_tol = rel_tol;
    c.floor = floor;
    for (double p : predicted) {
        FrequencyMatch m = nearest(p, observed);
        m.relative_error = std::abs(m.observed - p) / std::max(std::abs(p), 1e-300);
        m.matched = !observed.empty() && m.relative_error <= rel_tol;
        c.forward.push_back(m);
    }
    for (double o : observed) {
        if (o < floor) continue;
        FrequencyMatch m = nearest(o, predicted);
        std::swap(m.predicted, m.observed);
        m.relative_error = std::abs(m.observed - m.predicted) / std::max(std::abs(m.predicted), 1e-300);
        m.matched = !predicted.empty() && m.relative_error <= rel_tol;
        c.backward.push_back(m);
    }
    return c;
}

} // namespace dicke
