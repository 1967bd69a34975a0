// symmetry.hpp — atom-permutation groups, characters and Dicke-ladder decompositions

#pragma once

#include "operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace dicke {

enum class GroupKind { S, D, Cs };

inline std::string to_string(GroupKind k) {
    switch (k) {
    case GroupKind::S: return "S";
    case GroupKind::D: return "D";
    case GroupKind::Cs: return "Cs";
    }
    return "?";
}

inline GroupKind group_kind_from_string(const std::string& s) {
    if (s == "S" || s == "s" || s == "SN") return GroupKind::S;
    if (s == "D" || s == "d" || s == "DN") return GroupKind::D;
    if (s == "Cs" || s == "cs" || s == "CS") return GroupKind::Cs;
    throw std::invalid_argument("unknown group '" + s + "' (expected S|D|Cs)");
}

/// Group matching a dipole geometry: no coupling keeps full permutation symmetry.
inline GroupKind group_for_boundary(Boundary b) {
    switch (b) {
    case Boundary::none: return GroupKind::S;
    case Boundary::periodic: return GroupKind::D;
    case Boundary::open: return GroupKind::Cs;
    }
    return GroupKind::S;
}

/// 0-based image list: atom i moves to slot map[i].
struct Permutation {
    std::vector<int> map;

    int size() const { return static_cast<int>(map.size()); }

    static Permutation identity(int n) {
        Permutation p;
        p.map.resize(static_cast<std::size_t>(n));
        std::iota(p.map.begin(), p.map.end(), 0);
        return p;
    }

    /// (*this ∘ other): apply other first.
    Permutation compose(const Permutation& other) const {
        Permutation p;
        p.map.resize(map.size());
        for (std::size_t i = 0; i < map.size(); ++i) p.map[i] = map[static_cast<std::size_t>(other.map[i])];
        return p;
    }

    Permutation inverse() const {
        Permutation p;
        p.map.resize(map.size());
        for (std::size_t i = 0; i < map.size(); ++i) p.map[static_cast<std::size_t>(map[i])] = static_cast<int>(i);
        return p;
    }

    int fixed_points() const {
        int c = 0;
        for (std::size_t i = 0; i < map.size(); ++i) c += map[i] == static_cast<int>(i);
        return c;
    }

    /// Cycle lengths, descending.
    std::vector<int> cycle_type() const {
        std::vector<int> lengths;
        std::vector<bool> seen(map.size(), false);
        for (std::size_t i = 0; i < map.size(); ++i) {
            if (seen[i]) continue;
            int len = 0;
            for (std::size_t k = i; !seen[k]; k = static_cast<std::size_t>(map[k])) {
                seen[k] = true;
                ++len;
            }
            lengths.push_back(len);
        }
        std::sort(lengths.rbegin(), lengths.rend());
        return lengths;
    }

    bool operator==(const Permutation&) const = default;
    auto operator<=>(const Permutation&) const = default;
};

struct Irrep {
    std::string name;
    int dim = 1;
    std::vector<double> characters; // per conjugacy class
};

struct ConjugacyClass {
    std::string name;
    std::vector<int> members; // element indices
};

/// Abstract group acting on atoms. Elements are kept abstractly so that D_2
/// can hold four elements although only two distinct permutations exist.
struct PermGroup {
    GroupKind kind = GroupKind::S;
    int atom_count = 0;
    std::vector<Permutation> elements; // action of each element
    std::vector<std::vector<int>> table; // table[a][b] = index of a·b
    std::vector<ConjugacyClass> classes;
    std::vector<int> class_of; // element index -> class index
    std::vector<Irrep> irreps;

    std::string name() const {
        if (kind == GroupKind::Cs) return "Cs";
        return to_string(kind) + std::to_string(atom_count);
    }

    int order() const { return static_cast<int>(elements.size()); }

    int identity_index() const { return 0; }

    const Irrep& irrep(const std::string& n) const {
        for (const auto& r : irreps)
            if (r.name == n) return r;
        throw std::invalid_argument("group " + name() + " has no irrep " + n);
    }

    std::size_t irrep_index(const std::string& n) const {
        for (std::size_t i = 0; i < irreps.size(); ++i)
            if (irreps[i].name == n) return i;
        throw std::invalid_argument("group " + name() + " has no irrep " + n);
    }

    double character(std::size_t irrep_idx, int element) const {
        return irreps[irrep_idx].characters[static_cast<std::size_t>(class_of[static_cast<std::size_t>(element)])];
    }
};

namespace detail {

inline std::vector<Permutation> all_permutations(int n) {
    std::vector<Permutation> out;
    Permutation p = Permutation::identity(n);
    do out.push_back(p);
    while (std::next_permutation(p.map.begin(), p.map.end()));
    return out;
}

inline std::string cycle_type_name(const std::vector<int>& type) {
    std::string s;
    int next = 1;
    for (int len : type) {
        if (len == 1) continue;
        s += "(";
        for (int k = 0; k < len; ++k) s += std::to_string(next++);
        s += ")";
    }
    return s.empty() ? "E" : s;
}

inline void finish_classes(PermGroup& g, const std::vector<std::string>& element_class_name) {
    const int n = g.order();
    g.class_of.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> inverse(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (g.table[a][b] == 0) inverse[a] = b;
    for (int a = 0; a < n; ++a) {
        if (g.class_of[a] >= 0) continue;
        std::set<int> orbit;
        for (int h = 0; h < n; ++h) orbit.insert(g.table[g.table[h][a]][inverse[h]]);
        ConjugacyClass c;
        c.name = element_class_name[static_cast<std::size_t>(a)];
        for (int m : orbit) {
            c.members.push_back(m);
            g.class_of[m] = static_cast<int>(g.classes.size());
        }
        g.classes.push_back(std::move(c));
    }
}

inline void table_from_permutations(PermGroup& g) {
    const int n = g.order();
    std::map<Permutation, int> index;
    for (int i = 0; i < n; ++i) index[g.elements[i]] = i;
    g.table.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n)));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            auto it = index.find(g.elements[a].compose(g.elements[b]));
            if (it == index.end()) throw std::logic_error("permutation set not closed");
            g.table[a][b] = it->second;
        }
}

// ---- S_N ----

inline double symmetric_character(int atom_count, const std::string& irrep, const std::vector<int>& type) {
    // rows indexed by cycle type, hard-coded for N = 2..5
    static const std::map<int, std::vector<std::vector<int>>> types = {
        {2, {{1, 1}, {2}}},
        {3, {{1, 1, 1}, {2, 1}, {3}}},
        {4, {{1, 1, 1, 1}, {2, 1, 1}, {2, 2}, {3, 1}, {4}}},
        {5, {{1, 1, 1, 1, 1}, {2, 1, 1, 1}, {2, 2, 1}, {3, 1, 1}, {3, 2}, {4, 1}, {5}}},
    };
    static const std::map<int, std::map<std::string, std::vector<int>>> chars = {
        {2, {{"A", {1, 1}}, {"B1", {1, -1}}}},
        {3, {{"A1", {1, 1, 1}}, {"A2", {1, -1, 1}}, {"E", {2, 0, -1}}}},
        {4,
         {{"A1", {1, 1, 1, 1, 1}},
          {"A2", {1, -1, 1, 1, -1}},
          {"E", {2, 0, 2, -1, 0}},
          {"T1", {3, 1, -1, 0, -1}},
          {"T2", {3, -1, -1, 0, 1}}}},
        {5,
         {{"A", {1, 1, 1, 1, 1, 1, 1}},
          {"A'", {1, -1, 1, 1, -1, -1, 1}},
          {"T", {4, 2, 0, 1, -1, 0, -1}},
          {"T'", {4, -2, 0, 1, 1, 0, -1}},
          {"H", {5, 1, 1, -1, 1, -1, 0}},
          {"H'", {5, -1, 1, -1, -1, 1, 0}},
          {"G", {6, 0, -2, 0, 0, 0, 1}}}},
    };
    const auto& t = types.at(atom_count);
    const auto pos = std::find(t.begin(), t.end(), type) - t.begin();
    return chars.at(atom_count).at(irrep).at(static_cast<std::size_t>(pos));
}

inline std::vector<std::string> symmetric_irrep_names(int atom_count) {
    switch (atom_count) {
    case 2: return {"A", "B1"};
    case 3: return {"A1", "A2", "E"};
    case 4: return {"A1", "A2", "E", "T1", "T2"};
    default: return {"A", "A'", "T", "T'", "H", "H'", "G"};
    }
}

inline PermGroup build_symmetric(int atom_count) {
    PermGroup g;
    g.kind = GroupKind::S;
    g.atom_count = atom_count;
    g.elements = all_permutations(atom_count);
    table_from_permutations(g);
    std::vector<std::string> names;
    for (const auto& p : g.elements) names.push_back(cycle_type_name(p.cycle_type()));
    finish_classes(g, names);
    for (const auto& name : symmetric_irrep_names(atom_count)) {
        Irrep r;
        r.name = name;
        for (const auto& c : g.classes)
            r.characters.push_back(symmetric_character(atom_count, name, g.elements[c.members.front()].cycle_type()));
        r.dim = static_cast<int>(std::lround(r.characters.front()));
        g.irreps.push_back(std::move(r));
    }
    return g;
}

// ---- D_N ----

struct DihedralElement {
    int k = 0;      // rotation power
    bool flip = false;
};

/// f = 0: i → i + k; f = 1: i → N − 1 − (i + k)  (0-based, mod N)
inline Permutation dihedral_permutation(DihedralElement e, int n) {
    Permutation p;
    p.map.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int shifted = (i + e.k) % n;
        p.map[static_cast<std::size_t>(i)] = e.flip ? ((n - 1 - shifted) % n + n) % n : shifted;
    }
    return p;
}

inline DihedralElement dihedral_product(DihedralElement a, DihedralElement b, int n) {
    auto mod = [n](int x) { return ((x % n) + n) % n; };
    if (!a.flip) return b.flip ? DihedralElement{mod(b.k - a.k), true} : DihedralElement{mod(a.k + b.k), false};
    return b.flip ? DihedralElement{mod(b.k - a.k), false} : DihedralElement{mod(a.k + b.k), true};
}

inline std::string dihedral_class_name(DihedralElement e, int n) {
    if (n == 2) {
        if (!e.flip) return e.k == 0 ? "E" : "C2(y)";
        return e.k == 1 ? "C2(z)" : "C2(x)";
    }
    if (!e.flip) {
        if (e.k == 0) return "E";
        const int k = std::min(e.k, n - e.k);
        const int g = std::gcd(k, n);
        const int order = n / g;
        const int power = k / g;
        return "C" + std::to_string(order) + (power > 1 ? "^" + std::to_string(power) : "");
    }
    if (n % 2 == 1) return "C2'";
    return dihedral_permutation(e, n).fixed_points() == 0 ? "C2'" : "C2''";
}

inline double dihedral_character(const std::string& irrep, DihedralElement e, int n) {
    if (n == 2) {
        // order E, C2(z), C2(y), C2(x)
        const std::string cls = dihedral_class_name(e, n);
        const int col = cls == "E" ? 0 : cls == "C2(z)" ? 1 : cls == "C2(y)" ? 2 : 3;
        static const std::map<std::string, std::vector<int>> d2 = {
            {"A", {1, 1, 1, 1}}, {"B1", {1, 1, -1, -1}}, {"B2", {1, -1, 1, -1}}, {"B3", {1, -1, -1, 1}}};
        return d2.at(irrep).at(static_cast<std::size_t>(col));
    }
    if (irrep == "A1") return 1.0;
    if (irrep == "A2") return e.flip ? -1.0 : 1.0;
    if (irrep == "B1" || irrep == "B2") {
        if (!e.flip) return e.k % 2 == 0 ? 1.0 : -1.0;
        const bool edge = dihedral_permutation(e, n).fixed_points() == 0;
        return (edge == (irrep == "B1")) ? 1.0 : -1.0;
    }
    // E or E_h
    int h = 1;
    if (irrep.size() > 1) h = std::stoi(irrep.substr(1));
    if (e.flip) return 0.0;
    return 2.0 * std::cos(2.0 * std::numbers::pi * h * e.k / n);
}

inline std::vector<std::string> dihedral_irrep_names(int n) {
    switch (n) {
    case 2: return {"A", "B1", "B2", "B3"};
    case 3: return {"A1", "A2", "E"};
    case 4: return {"A1", "A2", "B1", "B2", "E"};
    default: return {"A1", "A2", "E1", "E2"};
    }
}

inline PermGroup build_dihedral(int n) {
    PermGroup g;
    g.kind = GroupKind::D;
    g.atom_count = n;
    std::vector<DihedralElement> abstract;
    for (int f = 0; f < 2; ++f)
        for (int k = 0; k < n; ++k) abstract.push_back({k, f == 1});
    const int order = static_cast<int>(abstract.size());
    auto index_of = [&](DihedralElement e) {
        for (int i = 0; i < order; ++i)
            if (abstract[i].k == e.k && abstract[i].flip == e.flip) return i;
        throw std::logic_error("dihedral element not found");
    };
    g.table.assign(static_cast<std::size_t>(order), std::vector<int>(static_cast<std::size_t>(order)));
    for (int a = 0; a < order; ++a)
        for (int b = 0; b < order; ++b) g.table[a][b] = index_of(dihedral_product(abstract[a], abstract[b], n));
    std::vector<std::string> names;
    for (auto e : abstract) {
        g.elements.push_back(dihedral_permutation(e, n));
        names.push_back(dihedral_class_name(e, n));
    }
    finish_classes(g, names);
    for (const auto& name : dihedral_irrep_names(n)) {
        Irrep r;
        r.name = name;
        for (const auto& c : g.classes)
            r.characters.push_back(dihedral_character(name, abstract[static_cast<std::size_t>(c.members.front())], n));
        r.dim = static_cast<int>(std::lround(r.characters.front()));
        g.irreps.push_back(std::move(r));
    }
    return g;
}

// ---- C_s ----

inline PermGroup build_mirror(int n) {
    PermGroup g;
    g.kind = GroupKind::Cs;
    g.atom_count = n;
    Permutation mirror;
    for (int i = 0; i < n; ++i) mirror.map.push_back(n - 1 - i);
    g.elements = {Permutation::identity(n), mirror};
    g.table = {{0, 1}, {1, 0}};
    finish_classes(g, {"E", "σh"});
    g.irreps = {{"A'", 1, {1, 1}}, {"A''", 1, {1, -1}}};
    return g;
}

} // namespace detail

inline PermGroup build_group(GroupKind kind, int atom_count) {
    if (atom_count < 2 || atom_count > 5)
        throw std::invalid_argument("character tables are tabulated for 2 <= N <= 5, got N = " +
                                    std::to_string(atom_count));
    switch (kind) {
    case GroupKind::S: return detail::build_symmetric(atom_count);
    case GroupKind::D: return detail::build_dihedral(atom_count);
    case GroupKind::Cs: return detail::build_mirror(atom_count);
    }
    throw std::invalid_argument("unknown group kind");
}

/// P_g|s_1…s_N> = |s_{g⁻¹(1)}…s_{g⁻¹(N)}>
inline Operator permutation_operator(const Permutation& p) {
    const int n = p.size();
    detail::check_atom_count(n);
    const int dim = hilbert_dim(n);
    Operator op = Operator::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
        int t = 0;
        for (int i = 0; i < n; ++i)
            if (detail::bit_of(s, i, n)) t |= 1 << (n - 1 - p.map[static_cast<std::size_t>(i)]);
        op(t, s) = 1.0;
    }
    return op;
}

// ---------------------------------------------------------------------------
// Decomposition of the multiplicity spaces
// ---------------------------------------------------------------------------

struct IrrepTerm {
    std::string name;
    int dim = 1;
    int multiplicity = 0;
};

struct DecompositionRow {
    HalfInt j;
    int degeneracy = 0; // d_j
    std::vector<IrrepTerm> terms;
    double max_rounding = 0.0; // largest |projection − round(projection)|

    int blocks() const {
        int b = 0;
        for (const auto& t : terms) b += t.multiplicity;
        return b;
    }

    /// e.g. "A'⊕2A''"
    std::string label() const {
        std::string s;
        for (const auto& t : terms) {
            if (!s.empty()) s += "⊕";
            if (t.multiplicity > 1) s += std::to_string(t.multiplicity);
            s += t.name;
        }
        return s;
    }
};

/// Representation matrices of the group on the multiplicity space of spin j,
/// taken on the orthonormal highest-weight vectors (m = j).
inline std::vector<Operator> multiplicity_representation(const PermGroup& group, HalfInt j) {
    const CollectiveOps ops = collective_ops(group.atom_count);
    const Operator v = detail::highest_weight_vectors(group.atom_count, j, ops);
    std::vector<Operator> reps;
    reps.reserve(group.elements.size());
    for (const auto& p : group.elements) reps.push_back(v.adjoint() * permutation_operator(p) * v);
    return reps;
}

inline DecompositionRow irrep_multiplicities(const PermGroup& group, HalfInt j) {
    const auto reps = multiplicity_representation(group, j);
    DecompositionRow row;
    row.j = j;
    row.degeneracy = static_cast<int>(degeneracy_dj(group.atom_count, j));
    for (std::size_t a = 0; a < group.irreps.size(); ++a) {
        double sum = 0.0;
        for (int g = 0; g < group.order(); ++g) sum += group.character(a, g) * reps[g].trace().real();
        const double mult = sum / group.order();
        const double rounded = std::round(mult);
        row.max_rounding = std::max(row.max_rounding, std::abs(mult - rounded));
        if (std::abs(mult - rounded) > 1e-6)
            throw NumericalError("non-integer multiplicity " + std::to_string(mult) + " for " + group.irreps[a].name +
                                 " at j = " + j.str());
        if (rounded < 0.0) throw NumericalError("negative multiplicity for " + group.irreps[a].name);
        if (rounded > 0.0) row.terms.push_back({group.irreps[a].name, group.irreps[a].dim, static_cast<int>(rounded)});
    }
    int total = 0;
    for (const auto& t : row.terms) total += t.dim * t.multiplicity;
    if (total != row.degeneracy)
        throw NumericalError("decomposition at j = " + j.str() + " sums to " + std::to_string(total) + ", expected " +
                             std::to_string(row.degeneracy));
    return row;
}

struct LadderDecomposition {
    GroupKind kind = GroupKind::S;
    std::string group_name;
    int atom_count = 0;
    std::vector<DecompositionRow> rows; // j descending
};

inline LadderDecomposition decompose_ladder(const PermGroup& group) {
    LadderDecomposition d;
    d.kind = group.kind;
    d.group_name = group.name();
    d.atom_count = group.atom_count;
    for (HalfInt j : spin_values(group.atom_count)) d.rows.push_back(irrep_multiplicities(group, j));
    return d;
}

/// Catalan(N) = 4^N Γ(N+½) / (√π Γ(N+2)) = Σ_j d_j²
inline std::uint64_t count_strong_drive(int atom_count) {
    if (atom_count < 1) throw std::invalid_argument("N must be >= 1");
    if (atom_count > 33) throw std::invalid_argument("count exceeds 64-bit range");
    // C(2N, N)/(N+1), built incrementally to stay exact
    std::uint64_t c = 1;
    for (int k = 0; k < atom_count; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
    return c;
}

/// Σ over distinct irreps appearing in the ladder of dim².
inline int count_stationary(const LadderDecomposition& d) {
    std::map<std::string, int> seen;
    for (const auto& row : d.rows)
        for (const auto& t : row.terms) seen[t.name] = t.dim;
    int total = 0;
    for (const auto& [name, dim] : seen) total += dim * dim;
    return total;
}

/// Σ_j n_j(n_j − 1)/2 with n_j the irrep blocks at j.
inline int count_oscillation_frequencies(const LadderDecomposition& d) {
    int total = 0;
    for (const auto& row : d.rows) total += row.blocks() * (row.blocks() - 1) / 2;
    return total;
}

inline int count_stationary(int atom_count, GroupKind kind) {
    return count_stationary(decompose_ladder(build_group(kind, atom_count)));
}

inline int count_oscillation_frequencies(int atom_count, GroupKind kind) {
    return count_oscillation_frequencies(decompose_ladder(build_group(kind, atom_count)));
}

} // namespace dicke
