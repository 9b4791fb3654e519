#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rules.hpp"

namespace infl {

using LVec = std::vector<long long>;

struct ExpansionMap {
    enum class Kind { scalar, diagonal_integer, general_linear };
    Kind kind = Kind::scalar;
    int dim = 1;
    Eigen::MatrixXd Qf;
    std::vector<std::vector<FieldElement>> Qx;  // exact entries, empty if unknown
    std::vector<int> q;                         // diagonal_integer only
    double det = 1;

    double det_abs() const { return std::abs(det); }
    bool expansive(double tol = 1e-9) const {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Qf);
        return svd.singularValues().minCoeff() > 1 + tol;
    }
    /// contraction factor bound for Q^-1 in the norm used by the support cutoff
    double min_expansion() const {
        if (kind == Kind::diagonal_integer) return *std::min_element(q.begin(), q.end());
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Qf);
        return svd.singularValues().minCoeff();
    }
};

/// Z-module spanned by `basis`; Q acts on lattice coordinates through C.
struct Lattice {
    int d = 1;  // ambient dimension
    int D = 1;  // rank, the torus dimension of the lift
    std::vector<std::vector<FieldElement>> basis;
    std::vector<std::vector<double>> basis_f;
    IMat C;     // Q b_m = sum_l C[l][m] b_l
    IMat adj;   // adjugate of C
    long long detC = 1;

    LVec apply(const LVec& v) const {
        LVec out(D, 0);
        for (int l = 0; l < D; ++l) {
            __int128 s = 0;
            for (int m = 0; m < D; ++m) s += static_cast<__int128>(C[l][m]) * v[m];
            if (s > INT64_MAX / 4 || s < INT64_MIN / 4) throw error(errc::size_guard, "geometry", "lattice coordinate overflow");
            out[l] = static_cast<long long>(s);
        }
        return out;
    }
    /// C^-1 v when integral
    bool apply_inverse(const LVec& v, LVec& out) const {
        out.assign(D, 0);
        for (int l = 0; l < D; ++l) {
            __int128 s = 0;
            for (int m = 0; m < D; ++m) s += static_cast<__int128>(adj[l][m]) * v[m];
            if (s % detC != 0) return false;
            out[l] = static_cast<long long>(s / detC);
        }
        return true;
    }
    std::vector<double> to_float(const LVec& v) const {
        std::vector<double> x(d, 0.0);
        for (int m = 0; m < D; ++m)
            for (int a = 0; a < d; ++a) x[a] += static_cast<double>(v[m]) * basis_f[m][a];
        return x;
    }
    std::vector<FieldElement> to_exact(const LVec& v) const {
        std::vector<FieldElement> x(d, FieldElement(basis[0][0].field()));
        for (int m = 0; m < D; ++m)
            for (int a = 0; a < d; ++a) x[a] = x[a] + basis[m][a].scaled(Rat(v[m]));
        return x;
    }

    void finish() {
        basis_f.assign(D, std::vector<double>(d));
        for (int m = 0; m < D; ++m)
            for (int a = 0; a < d; ++a) basis_f[m][a] = basis[m][a].to_double();
        RMat Cr(D, std::vector<Rat>(D));
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) Cr[i][j] = C[i][j];
        // det and adjugate from the exact inverse
        RMat inv(D, std::vector<Rat>(D));
        for (int j = 0; j < D; ++j) {
            std::vector<Rat> e(D, Rat(0));
            e[j] = 1;
            auto col = rat_solve(Cr, e);
            if (!col) throw error(errc::lift_failed, "geometry", "flow matrix is singular");
            for (int i = 0; i < D; ++i) inv[i][j] = (*col)[i];
        }
        std::vector<std::vector<Int>> Ci(D, std::vector<Int>(D));
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) Ci[i][j] = C[i][j];
        Int det = poly::charpoly(Ci)[0];
        if (D % 2) det = -det;
        detC = det.convert_to<long long>();
        adj.assign(D, std::vector<long long>(D));
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) {
                Rat a = inv[i][j] * Rat(det);
                if (mp::denominator(a) != 1) throw error(errc::lift_failed, "geometry", "adjugate not integral");
                adj[i][j] = mp::numerator(a).convert_to<long long>();
            }
    }
};

struct DisplacementMatrix {
    int n = 0;
    FieldPtr field;
    ExpansionMap Q;
    Lattice lat;
    std::vector<std::vector<std::vector<LVec>>> sets;  // sets[i][j] = T_ij
    std::vector<double> volumes;                      // lengths (1D), areas (planar), 1 (block)
    std::vector<LVec> lengths;                        // 1D only: lengths in lattice coordinates

    IMat card() const {
        IMat M(n, std::vector<long long>(n, 0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M[i][j] = static_cast<long long>(sets[i][j].size());
        return M;
    }
    double lambda() const { return Q.det_abs(); }
    int dim() const { return lat.d; }
};

namespace detail {

inline bool float_less(const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - 1e-12 * (1 + std::abs(a[i]))) return true;
        if (b[i] < a[i] - 1e-12 * (1 + std::abs(a[i]))) return false;
    }
    return false;
}

} // namespace detail

/// Ordering by embedded position with exact tie confirmation.
inline bool lattice_less(const Lattice& L, const LVec& a, const LVec& b) {
    if (a == b) return false;
    auto fa = L.to_float(a), fb = L.to_float(b);
    if (detail::float_less(fa, fb)) return true;
    if (detail::float_less(fb, fa)) return false;
    auto ea = L.to_exact(a), eb = L.to_exact(b);
    for (int i = 0; i < L.d; ++i) {
        int s = (ea[i] - eb[i]).sign();
        if (s) return s < 0;
    }
    return a < b;
}

inline void sort_sets(DisplacementMatrix& T) {
    for (auto& row : T.sets)
        for (auto& s : row) {
            std::sort(s.begin(), s.end(), [&](const LVec& a, const LVec& b) { return lattice_less(T.lat, a, b); });
            for (std::size_t k = 1; k < s.size(); ++k)
                if (s[k] == s[k - 1]) throw error(errc::overlap_detected, "geometry", "repeated displacement");
        }
}

inline FieldPtr rational_field(long long lambda) {
    return make_field(IPoly{Int(-lambda), Int(1)}, static_cast<double>(lambda));
}

inline DisplacementMatrix displacement_1d(const SubstitutionRule& r, const PFData& pf, const FieldPtr& f) {
    if (r.kind != RuleKind::one_dim) throw error(errc::not_applicable, "geometry", "one-dimensional rule expected");
    if (pf.exact_left.empty()) throw error(errc::field_mismatch, "geometry", "exact natural lengths unavailable");
    const int n = r.size(), D = f->degree();
    for (auto& l : pf.exact_left)
        if (l.field() != f && !l.field()->same(*f)) throw error(errc::field_mismatch, "geometry", "lengths from another field");
    Int den = 1;
    for (auto& l : pf.exact_left)
        for (auto& c : l.coords()) den = mp::lcm(den, mp::denominator(c));
    DisplacementMatrix T;
    T.n = n;
    T.field = f;
    T.lat.d = 1;
    T.lat.D = D;
    for (int m = 0; m < D; ++m) {
        std::vector<Rat> c(D, Rat(0));
        c[m] = Rat(Int(1), den);
        T.lat.basis.push_back({FieldElement(f, c)});
    }
    T.lat.C = f->companion;
    T.lat.finish();
    for (auto& l : pf.exact_left) {
        LVec v(D);
        for (int m = 0; m < D; ++m) v[m] = mp::numerator(l.coords()[m] * Rat(den)).convert_to<long long>();
        T.lengths.push_back(v);
        T.volumes.push_back(l.to_double());
    }
    T.Q.kind = ExpansionMap::Kind::scalar;
    T.Q.dim = 1;
    T.Q.Qf = Eigen::MatrixXd::Constant(1, 1, f->lambda);
    T.Q.Qx = {{FieldElement::gen(f)}};
    T.Q.det = f->lambda;
    T.sets.assign(n, std::vector<std::vector<LVec>>(n));
    for (int j = 0; j < n; ++j) {
        LVec pos(D, 0);
        for (int x : r.images[j]) {
            T.sets[x][j].push_back(pos);
            for (int m = 0; m < D; ++m) pos[m] += T.lengths[x][m];
        }
    }
    sort_sets(T);
    return T;
}

inline DisplacementMatrix displacement_block(const SubstitutionRule& r) {
    if (r.kind != RuleKind::block) throw error(errc::not_applicable, "geometry", "block rule expected");
    const int n = r.size(), d = static_cast<int>(r.shape.size());
    DisplacementMatrix T;
    T.n = n;
    T.field = rational_field(r.block_volume());
    T.lat.d = d;
    T.lat.D = d;
    T.lat.C.assign(d, std::vector<long long>(d, 0));
    for (int a = 0; a < d; ++a) {
        std::vector<FieldElement> b(d, FieldElement(T.field));
        b[a] = FieldElement::rational(T.field, Rat(1));
        T.lat.basis.push_back(b);
        T.lat.C[a][a] = r.shape[a];
    }
    T.lat.finish();
    T.volumes.assign(n, 1.0);
    T.Q.kind = ExpansionMap::Kind::diagonal_integer;
    T.Q.dim = d;
    T.Q.q = r.shape;
    T.Q.Qf = Eigen::MatrixXd::Zero(d, d);
    for (int a = 0; a < d; ++a) T.Q.Qf(a, a) = r.shape[a];
    T.Q.det = r.block_volume();
    T.sets.assign(n, std::vector<std::vector<LVec>>(n));
    for (int j = 0; j < n; ++j)
        for (int c = 0; c < r.block_volume(); ++c) {
            auto x = detail::unflatten(c, r.shape);
            T.sets[r.images[j][c]][j].push_back(LVec(x.begin(), x.end()));
        }
    sort_sets(T);
    return T;
}

namespace detail {

inline std::vector<FieldElement> to_field_vec(const FieldPtr& f, const FieldVec& v) {
    std::vector<FieldElement> out;
    for (auto& c : v) {
        std::vector<Rat> cc = c;
        cc.resize(f->degree(), Rat(0));
        if (static_cast<int>(c.size()) > f->degree()) throw error(errc::field_mismatch, "geometry", "too many field coordinates");
        out.emplace_back(f, cc);
    }
    return out;
}

// integer coordinates of x in the lattice basis
inline std::optional<LVec> lattice_coords(const Lattice& L, const std::vector<FieldElement>& x) {
    const int Df = x[0].field()->degree();
    RMat A(L.d * Df, std::vector<Rat>(L.D));
    std::vector<Rat> b(L.d * Df);
    for (int a = 0; a < L.d; ++a)
        for (int p = 0; p < Df; ++p) {
            for (int m = 0; m < L.D; ++m) A[a * Df + p][m] = L.basis[m][a].coords()[p];
            b[a * Df + p] = x[a].coords()[p];
        }
    auto sol = rat_solve(A, b);
    if (!sol) return std::nullopt;
    LVec v(L.D);
    for (int m = 0; m < L.D; ++m) {
        if (mp::denominator((*sol)[m]) != 1) return std::nullopt;
        v[m] = mp::numerator((*sol)[m]).convert_to<long long>();
    }
    return v;
}

} // namespace detail

inline DisplacementMatrix displacement_planar(const SubstitutionRule& r, const FieldPtr& f) {
    if (r.kind != RuleKind::planar || !r.planar) throw error(errc::not_applicable, "geometry", "planar rule expected");
    const PlanarGeometry& g = *r.planar;
    const int n = r.size(), d = g.dim;
    DisplacementMatrix T;
    T.n = n;
    T.field = f;
    T.lat.d = d;
    T.lat.D = static_cast<int>(g.basis.size());
    for (auto& b : g.basis) {
        if (static_cast<int>(b.size()) != d) throw error(errc::shape_mismatch, "geometry", "basis vector of wrong dimension");
        T.lat.basis.push_back(detail::to_field_vec(f, b));
    }
    T.Q.kind = ExpansionMap::Kind::general_linear;
    T.Q.dim = d;
    T.Q.Qf = Eigen::MatrixXd(d, d);
    for (int a = 0; a < d; ++a) {
        T.Q.Qx.push_back(detail::to_field_vec(f, g.Q[a]));
        for (int b = 0; b < d; ++b) T.Q.Qf(a, b) = T.Q.Qx[a][b].to_double();
    }
    if (d == 2) {
        FieldElement det = T.Q.Qx[0][0] * T.Q.Qx[1][1] - T.Q.Qx[0][1] * T.Q.Qx[1][0];
        T.Q.det = det.to_double();
    } else {
        T.Q.det = T.Q.Qf.determinant();
    }
    T.lat.C.assign(T.lat.D, std::vector<long long>(T.lat.D));
    for (int m = 0; m < T.lat.D; ++m) {
        std::vector<FieldElement> qb(d, FieldElement(f));
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) qb[a] = qb[a] + T.Q.Qx[a][b] * T.lat.basis[m][b];
        auto c = detail::lattice_coords(T.lat, qb);
        if (!c) throw error(errc::lift_failed, "geometry", "Q maps a basis vector out of the declared module");
        for (int l = 0; l < T.lat.D; ++l) T.lat.C[l][m] = (*c)[l];
    }
    T.lat.finish();
    for (auto& v : g.volumes) T.volumes.push_back(FieldElement(f, [&] { auto c = v; c.resize(f->degree(), Rat(0)); return c; }()).to_double());
    T.sets.assign(n, std::vector<std::vector<LVec>>(n));
    for (auto& e : g.T) {
        auto c = detail::lattice_coords(T.lat, detail::to_field_vec(f, e.t));
        if (!c) throw error(errc::lift_failed, "geometry", "displacement outside the declared module");
        T.sets[e.i][e.j].push_back(*c);
    }
    sort_sets(T);
    return T;
}

/// T^(n) via T^(n+1)_ij = U_l (T_il + Q T^(n)_lj).
inline DisplacementMatrix displacement_compose(const DisplacementMatrix& T, int n) {
    if (n < 1) throw error(errc::size_guard, "geometry", "power must be positive");
    DisplacementMatrix cur = T;
    for (int k = 1; k < n; ++k) {
        DisplacementMatrix nx = T;
        for (int i = 0; i < T.n; ++i)
            for (int j = 0; j < T.n; ++j) {
                std::vector<LVec> s;
                for (int l = 0; l < T.n; ++l)
                    for (auto& y : cur.sets[l][j]) {
                        LVec qy = T.lat.apply(y);
                        for (auto& x : T.sets[i][l]) {
                            LVec z(qy);
                            for (int m = 0; m < T.lat.D; ++m) z[m] += x[m];
                            s.push_back(z);
                        }
                    }
                nx.sets[i][j] = std::move(s);
            }
        sort_sets(nx);
        // Q of the composed map
        nx.Q.det = cur.Q.det * T.Q.det;
        nx.Q.Qf = T.Q.Qf * cur.Q.Qf;
        if (!nx.Q.q.empty())
            for (std::size_t a = 0; a < nx.Q.q.size(); ++a) nx.Q.q[a] = T.Q.q[a] * cur.Q.q[a];
        if (!T.Q.Qx.empty() && !cur.Q.Qx.empty()) {
            const int d = T.Q.dim;
            std::vector<std::vector<FieldElement>> P(d, std::vector<FieldElement>(d, FieldElement(T.field)));
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    for (int c = 0; c < d; ++c) P[a][b] = P[a][b] + T.Q.Qx[a][c] * cur.Q.Qx[c][b];
            nx.Q.Qx = P;
        }
        IMat Cn = mat_mul(T.lat.C, cur.lat.C);
        nx.lat.C = Cn;
        nx.lat.finish();
        cur = std::move(nx);
    }
    return cur;
}

struct Patch {
    std::vector<int> type;
    std::vector<LVec> pos;
    std::size_t size() const { return type.size(); }
};

inline constexpr std::size_t kPatchCap = 20'000'000;

/// Level-n supertile of `seed` placed at the origin, sorted by position.
inline Patch generate_patch(const DisplacementMatrix& T, int seed, int levels) {
    Patch p;
    p.type = {seed};
    p.pos = {LVec(T.lat.D, 0)};
    for (int l = 0; l < levels; ++l) {
        Patch q;
        for (std::size_t k = 0; k < p.size(); ++k) {
            LVec base = T.lat.apply(p.pos[k]);
            const int j = p.type[k];
            for (int i = 0; i < T.n; ++i)
                for (auto& t : T.sets[i][j]) {
                    LVec z(base);
                    for (int m = 0; m < T.lat.D; ++m) z[m] += t[m];
                    q.type.push_back(i);
                    q.pos.push_back(std::move(z));
                }
            if (q.size() > kPatchCap) throw error(errc::size_guard, "geometry", "patch exceeds size cap");
        }
        p = std::move(q);
    }
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::vector<double>> fl(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) fl[k] = T.lat.to_float(p.pos[k]);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (fl[a] != fl[b]) return fl[a] < fl[b];
        return p.pos[a] < p.pos[b];
    });
    Patch out;
    for (auto k : idx) {
        out.type.push_back(p.type[k]);
        out.pos.push_back(p.pos[k]);
    }
    return out;
}

struct StoneReport {
    bool ok = true;
    std::vector<std::string> violations;
};

inline StoneReport verify_stone_inflation(const DisplacementMatrix& T, const std::vector<double>& volumes) {
    StoneReport rep;
    const double det = T.Q.det_abs();
    for (int j = 0; j < T.n; ++j) {
        double s = 0;
        for (int i = 0; i < T.n; ++i) s += static_cast<double>(T.sets[i][j].size()) * volumes[i];
        double target = det * volumes[j];
        if (std::abs(s - target) > 1e-9 * target) {
            rep.ok = false;
            rep.violations.push_back("column " + std::to_string(j) + ": volume " + std::to_string(s) + " vs " + std::to_string(target));
        }
    }
    if (T.lat.d == 1 && !T.lengths.empty()) {
        for (int j = 0; j < T.n; ++j) {
            std::vector<std::pair<LVec, int>> items;
            for (int i = 0; i < T.n; ++i)
                for (auto& t : T.sets[i][j]) items.push_back({t, i});
            std::sort(items.begin(), items.end(), [&](auto& a, auto& b) { return lattice_less(T.lat, a.first, b.first); });
            LVec cur(T.lat.D, 0);
            bool good = true;
            for (auto& [t, i] : items) {
                if (t != cur) { good = false; break; }
                for (int m = 0; m < T.lat.D; ++m) cur[m] += T.lengths[i][m];
            }
            if (good && cur != T.lat.apply(T.lengths[j])) good = false;
            if (!good) {
                rep.ok = false;
                rep.violations.push_back("column " + std::to_string(j) + ": intervals do not tile the supertile exactly");
            }
        }
    }
    return rep;
}

/// Frequency coordinates: B_ij(k) = sum_n exp(2 pi i n . k~) with k~_m = k . b_m, k~ -> C^T k~ under k -> Q^T k.
struct TorusLift {
    struct Entry {
        int i, j;
        LVec n;
    };
    int D = 1;
    IMat C;
    std::vector<Entry> entries;
    std::vector<std::vector<double>> basis_f;
};

inline TorusLift torus_lift(const DisplacementMatrix& T) {
    TorusLift L;
    L.D = T.lat.D;
    L.C = T.lat.C;
    L.basis_f = T.lat.basis_f;
    for (int i = 0; i < T.n; ++i)
        for (int j = 0; j < T.n; ++j)
            for (auto& t : T.sets[i][j]) L.entries.push_back({i, j, t});
    // conjugacy check on exact coordinates: Q t equals the lattice image C t
    if (!T.Q.Qx.empty()) {
        for (auto& e : L.entries) {
            auto x = T.lat.to_exact(e.n);
            std::vector<FieldElement> qx(T.lat.d, FieldElement(T.field));
            for (int a = 0; a < T.lat.d; ++a)
                for (int b = 0; b < T.lat.d; ++b) qx[a] = qx[a] + T.Q.Qx[a][b] * x[b];
            auto y = T.lat.to_exact(T.lat.apply(e.n));
            for (int a = 0; a < T.lat.d; ++a)
                if (qx[a] != y[a]) throw error(errc::lift_failed, "geometry", "flow matrix does not conjugate Q");
        }
    }
    return L;
}

} // namespace infl
