#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "geometry.hpp"

namespace infl {

struct DigitDecomposition {
    std::vector<LVec> positions;  // ascending by embedded position
    std::vector<IMat> matrices;   // matrices[k] = D_x for x = positions[k]
    int n = 0;

    IMat sum() const {
        IMat S(n, std::vector<long long>(n, 0));
        for (auto& D : matrices)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) S[i][j] += D[i][j];
        return S;
    }
};

inline DigitDecomposition digit_matrices(const DisplacementMatrix& T) {
    DigitDecomposition dd;
    dd.n = T.n;
    std::set<LVec> all;
    for (auto& row : T.sets)
        for (auto& s : row) all.insert(s.begin(), s.end());
    dd.positions.assign(all.begin(), all.end());
    std::sort(dd.positions.begin(), dd.positions.end(), [&](const LVec& a, const LVec& b) { return lattice_less(T.lat, a, b); });
    std::map<LVec, std::size_t> index;
    for (std::size_t k = 0; k < dd.positions.size(); ++k) index[dd.positions[k]] = k;
    dd.matrices.assign(dd.positions.size(), IMat(T.n, std::vector<long long>(T.n, 0)));
    for (int i = 0; i < T.n; ++i)
        for (int j = 0; j < T.n; ++j)
            for (auto& t : T.sets[i][j]) dd.matrices[index[t]][i][j] = 1;
    return dd;
}

inline Eigen::MatrixXd to_eigen(const IMat& A) {
    Eigen::MatrixXd M(A.size(), A.empty() ? 0 : A[0].size());
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < A[i].size(); ++j) M(i, j) = static_cast<double>(A[i][j]);
    return M;
}

struct AlgebraClosure {
    std::vector<Eigen::MatrixXd> basis;  // orthonormal in the Frobenius inner product
    int dim = 0;
};

namespace detail {

// modified Gram-Schmidt step; true if X enlarged the span
inline bool mgs_add(std::vector<Eigen::MatrixXd>& basis, Eigen::MatrixXd X, double tol) {
    double n0 = X.norm();
    if (n0 == 0) return false;
    X /= n0;
    for (int pass = 0; pass < 2; ++pass)
        for (auto& B : basis) X -= (B.array() * X.array()).sum() * B;
    double r = X.norm();
    if (r <= tol) return false;
    basis.push_back(X / r);
    return true;
}

} // namespace detail

/// Dimension of the algebra generated by the digit matrices.
/// The generators are real, so the real span closure has the complex dimension.
inline AlgebraClosure ida_dimension(const DigitDecomposition& dd, double tol = 1e-9) {
    AlgebraClosure A;
    std::vector<Eigen::MatrixXd> gens;
    for (auto& D : dd.matrices) gens.push_back(to_eigen(D));
    for (auto& G : gens) detail::mgs_add(A.basis, G, tol);
    std::size_t done = 0;
    const std::size_t cap = static_cast<std::size_t>(dd.n) * dd.n;
    while (done < A.basis.size() && A.basis.size() < cap) {
        Eigen::MatrixXd X = A.basis[done++];
        for (auto& G : gens) {
            detail::mgs_add(A.basis, X * G, tol);
            if (A.basis.size() >= cap) break;
        }
    }
    A.dim = static_cast<int>(A.basis.size());
    return A;
}

inline bool is_irreducible(const AlgebraClosure& A, int n) { return A.dim == n * n; }

struct ColumnGroup {
    enum class ColumnKind { bijective, constant, other };
    std::vector<ColumnKind> columns;       // per position of the image
    std::vector<std::vector<int>> generators;
    std::vector<std::vector<int>> elements;
    bool bijective = false;                // every column a permutation
    bool bijective_or_constant = false;
    bool abelian = false;
    bool transitive = false;
    std::size_t order = 0;
    std::vector<std::vector<int>> orbits;
};

inline const char* column_kind_name(ColumnGroup::ColumnKind k) {
    switch (k) {
    case ColumnGroup::ColumnKind::bijective: return "bijective";
    case ColumnGroup::ColumnKind::constant: return "constant";
    default: return "other";
    }
}

inline constexpr std::size_t kGroupCap = 1'000'000;

inline ColumnGroup column_group(const SubstitutionRule& r) {
    auto L = constant_length(r);
    if (!L) throw error(errc::not_constant_length, "ida", "column group needs a constant-length rule");
    const int n = r.size();
    ColumnGroup g;
    for (int c = 0; c < *L; ++c) {
        std::vector<int> col(n);
        for (int j = 0; j < n; ++j) col[j] = r.images[j][c];
        std::vector<int> seen(n, 0);
        bool perm = true;
        for (int x : col) {
            if (seen[x]) perm = false;
            seen[x] = 1;
        }
        bool constant = std::all_of(col.begin(), col.end(), [&](int x) { return x == col[0]; });
        if (perm) {
            std::vector<int> inv(n);
            for (int j = 0; j < n; ++j) inv[col[j]] = j;
            g.generators.push_back(inv);
            g.columns.push_back(ColumnGroup::ColumnKind::bijective);
        } else {
            g.columns.push_back(constant && n > 1 ? ColumnGroup::ColumnKind::constant : ColumnGroup::ColumnKind::other);
        }
    }
    g.bijective = std::all_of(g.columns.begin(), g.columns.end(), [](auto k) { return k == ColumnGroup::ColumnKind::bijective; });
    g.bijective_or_constant = std::all_of(g.columns.begin(), g.columns.end(), [](auto k) { return k != ColumnGroup::ColumnKind::other; });

    std::vector<int> id(n);
    std::iota(id.begin(), id.end(), 0);
    std::set<std::vector<int>> seen{id};
    std::vector<std::vector<int>> queue{id};
    for (std::size_t h = 0; h < queue.size(); ++h) {
        for (auto& s : g.generators) {
            std::vector<int> p(n);
            for (int x = 0; x < n; ++x) p[x] = s[queue[h][x]];
            if (seen.insert(p).second) {
                queue.push_back(p);
                if (queue.size() > kGroupCap) throw error(errc::size_guard, "ida", "group closure exceeds cap");
            }
        }
    }
    g.elements = queue;
    g.order = queue.size();
    g.abelian = true;
    for (auto& a : g.generators)
        for (auto& b : g.generators)
            for (int x = 0; x < n; ++x)
                if (a[b[x]] != b[a[x]]) g.abelian = false;
    std::vector<int> orbit_of(n, -1);
    for (int x = 0; x < n; ++x) {
        if (orbit_of[x] >= 0) continue;
        std::set<int> o;
        for (auto& e : g.elements) o.insert(e[x]);
        for (int y : o) orbit_of[y] = static_cast<int>(g.orbits.size());
        g.orbits.emplace_back(o.begin(), o.end());
    }
    g.transitive = g.orbits.size() == 1;
    return g;
}

} // namespace infl
