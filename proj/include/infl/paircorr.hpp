#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "ida.hpp"

namespace infl {

struct LVecHash {
    std::size_t operator()(const LVec& v) const {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (long long x : v) h = (h ^ static_cast<std::size_t>(x)) * 0x100000001b3ULL;
        return h;
    }
};

struct PairKey {
    int i = 0, j = 0;
    LVec z;
    bool operator==(const PairKey& o) const { return i == o.i && j == o.j && z == o.z; }
    bool operator<(const PairKey& o) const { return std::tie(i, j, z) < std::tie(o.i, o.j, o.z); }
};

struct PairKeyHash {
    std::size_t operator()(const PairKey& k) const { return LVecHash{}(k.z) * 31 + static_cast<std::size_t>(k.i * 1009 + k.j); }
};

/// Norm used for the support cutoff: |z| in 1D, sup-norm otherwise.
inline double support_norm(const Lattice& L, const LVec& z) {
    auto x = L.to_float(z);
    double m = 0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline bool support_supported(const DisplacementMatrix& T) {
    return T.Q.kind != ExpansionMap::Kind::general_linear;
}

struct SupportSet {
    int n = 0;
    std::vector<std::vector<std::vector<LVec>>> S;  // S[i][j], sorted
    double cutoff = 0;
    int levels = 0;
    bool stable = false;

    std::size_t size() const {
        std::size_t s = 0;
        for (auto& row : S)
            for (auto& x : row) s += x.size();
        return s;
    }
    std::vector<PairKey> keys() const {
        std::vector<PairKey> k;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (auto& z : S[i][j]) k.push_back({i, j, z});
        return k;
    }
};

/// c = sup|x - y| / (expansion - 1) over all displacements x, y.
inline double support_cutoff(const DisplacementMatrix& T) {
    std::vector<LVec> all;
    for (auto& row : T.sets)
        for (auto& s : row) all.insert(all.end(), s.begin(), s.end());
    double sup = 0;
    for (auto& x : all)
        for (auto& y : all) {
            LVec d(x);
            for (std::size_t m = 0; m < d.size(); ++m) d[m] -= y[m];
            sup = std::max(sup, support_norm(T.lat, d));
        }
    return sup / (T.Q.min_expansion() - 1);
}

inline constexpr int kSupportLevelCap = 18;
inline constexpr std::size_t kSupportPatchCap = 2'000'000;
inline constexpr double kCutTol = 1e-9;

namespace detail {

using PairSet = std::vector<std::vector<std::vector<LVec>>>;

inline PairSet collect_pairs(const DisplacementMatrix& T, const Patch& p, double c) {
    std::vector<std::vector<std::set<LVec>>> acc(T.n, std::vector<std::set<LVec>>(T.n));
    const int D = T.lat.D;
    if (T.lat.d == 1) {
        std::vector<double> x(p.size());
        for (std::size_t a = 0; a < p.size(); ++a) x[a] = T.lat.to_float(p.pos[a])[0];
        for (std::size_t a = 0; a < p.size(); ++a)
            for (std::size_t b = a; b < p.size() && x[b] - x[a] <= c + kCutTol; ++b) {
                LVec z(D), mz(D);
                for (int m = 0; m < D; ++m) {
                    z[m] = p.pos[b][m] - p.pos[a][m];
                    mz[m] = -z[m];
                }
                acc[p.type[a]][p.type[b]].insert(z);
                acc[p.type[b]][p.type[a]].insert(mz);
            }
    } else {
        // integer lattice: scan the box of offsets
        std::unordered_map<LVec, int, LVecHash> at;
        for (std::size_t a = 0; a < p.size(); ++a) at[p.pos[a]] = p.type[a];
        const long long r = static_cast<long long>(std::floor(c + kCutTol));
        std::vector<LVec> offs{LVec()};
        for (int m = 0; m < D; ++m) {
            std::vector<LVec> nx;
            for (auto& o : offs)
                for (long long v = -r; v <= r; ++v) {
                    LVec w(o);
                    w.push_back(v);
                    nx.push_back(w);
                }
            offs = nx;
        }
        for (std::size_t a = 0; a < p.size(); ++a)
            for (auto& o : offs) {
                if (support_norm(T.lat, o) > c + kCutTol) continue;
                LVec q(p.pos[a]);
                for (int m = 0; m < D; ++m) q[m] += o[m];
                auto it = at.find(q);
                if (it != at.end()) acc[p.type[a]][it->second].insert(o);
            }
    }
    PairSet out(T.n, std::vector<std::vector<LVec>>(T.n));
    for (int i = 0; i < T.n; ++i)
        for (int j = 0; j < T.n; ++j) out[i][j].assign(acc[i][j].begin(), acc[i][j].end());
    return out;
}

} // namespace detail

/// Supports within the cutoff, harvested from growing supertiles until unchanged over two level steps.
inline SupportSet support_within_cutoff(const DisplacementMatrix& T, int start_level = 1, int cap = kSupportLevelCap) {
    if (!support_supported(T)) throw error(errc::not_applicable, "paircorr", "supports need a 1D or block lattice");
    SupportSet s;
    s.n = T.n;
    s.cutoff = support_cutoff(T);
    detail::PairSet prev;
    int unchanged = 0;
    for (int l = std::max(1, start_level); l <= cap; ++l) {
        Patch p;
        try {
            p = generate_patch(T, 0, l);
        } catch (const error& e) {
            if (e.code() != errc::size_guard) throw;
            break;
        }
        if (p.size() > kSupportPatchCap) break;
        auto cur = detail::collect_pairs(T, p, s.cutoff);
        unchanged = (cur == prev) ? unchanged + 1 : 0;
        prev = std::move(cur);
        s.levels = l;
        if (unchanged >= 2) {
            s.stable = true;
            break;
        }
    }
    if (!s.stable) throw error(errc::not_stabilised, "paircorr", "supports did not stabilise within the level cap");
    s.S = prev;
    for (int i = 0; i < s.n; ++i)
        for (int j = 0; j < s.n; ++j)
            std::sort(s.S[i][j].begin(), s.S[i][j].end(), [&](const LVec& a, const LVec& b) { return lattice_less(T.lat, a, b); });
    return s;
}

struct CorrelationSolution {
    SupportSet S;
    std::vector<PairKey> keys;
    std::vector<double> nu;
    double residual = 0;
    double normalisation = 0;  // sum_i nu_ii(0)
    double rayleigh = 0;
    double min_value = 0;
    double symmetry_error = 0;
    bool trivial = false;
    int iterations = 0;

    double value(int i, int j, const LVec& z) const {
        for (std::size_t u = 0; u < keys.size(); ++u)
            if (keys[u].i == i && keys[u].j == j && keys[u].z == z) return nu[u];
        return 0;
    }
};

namespace detail {

using SparseRows = std::vector<std::vector<std::pair<std::size_t, double>>>;

inline SparseRows merge_rows(std::vector<std::map<std::size_t, double>>& rows) {
    SparseRows out(rows.size());
    for (std::size_t u = 0; u < rows.size(); ++u) out[u].assign(rows[u].begin(), rows[u].end());
    return out;
}

// nu_ij(z) = |det Q|^-1 sum_{m,n} sum_{x in T_im, y in T_jn} nu_mn(Q^-1 (z + x - y))
inline SparseRows renormalisation_map(const DisplacementMatrix& T, const std::vector<PairKey>& keys) {
    std::unordered_map<PairKey, std::size_t, PairKeyHash> idx;
    for (std::size_t u = 0; u < keys.size(); ++u) idx[keys[u]] = u;
    const double w = 1.0 / T.Q.det_abs();
    const int D = T.lat.D;
    std::vector<std::map<std::size_t, double>> rows(keys.size());
    LVec pre;
    for (std::size_t u = 0; u < keys.size(); ++u) {
        const auto& k = keys[u];
        for (int m = 0; m < T.n; ++m)
            for (int n = 0; n < T.n; ++n)
                for (auto& x : T.sets[k.i][m])
                    for (auto& y : T.sets[k.j][n]) {
                        LVec v(D);
                        for (int a = 0; a < D; ++a) v[a] = k.z[a] + x[a] - y[a];
                        if (!T.lat.apply_inverse(v, pre)) continue;
                        auto it = idx.find(PairKey{m, n, pre});
                        if (it != idx.end()) rows[u][it->second] += w;
                    }
    }
    return merge_rows(rows);
}

inline std::vector<double> apply_rows(const SparseRows& A, const std::vector<double>& v) {
    std::vector<double> out(A.size(), 0.0);
    for (std::size_t u = 0; u < A.size(); ++u)
        for (auto& [c, w] : A[u]) out[u] += w * v[c];
    return out;
}

inline constexpr int kPowerCap = 2'000'000;
inline constexpr std::size_t kDenseSpectrumCap = 1500;

inline void solve_fixed_point(const SparseRows& A, const std::vector<PairKey>& keys, const Lattice& L, CorrelationSolution& sol) {
    const std::size_t n = keys.size();
    sol.keys = keys;
    sol.nu.assign(n, 0.0);
    if (n <= kDenseSpectrumCap) {
        // without eigenvalue 1 the only solution is zero; iteration may not even settle
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t u = 0; u < n; ++u)
            for (auto& [c, w] : A[u]) M(u, c) += w;
        auto ev = M.eigenvalues();
        double best = 1e300, radius = 0;
        for (int e = 0; e < ev.size(); ++e) {
            best = std::min(best, std::abs(ev[e] - 1.0));
            radius = std::max(radius, std::abs(ev[e]));
        }
        if (best > 1e-9) {
            sol.trivial = true;
            sol.rayleigh = radius;
            return;
        }
    }
    std::vector<double> v(n, 1.0 / std::max<std::size_t>(1, n));
    int it = 0;
    for (; it < kPowerCap; ++it) {
        auto Av = apply_rows(A, v);
        double s = 0, delta = 0, vmax = 0;
        for (std::size_t u = 0; u < n; ++u) {
            Av[u] = 0.5 * (Av[u] + v[u]);
            s += Av[u];
        }
        if (!(s > 0)) break;
        for (std::size_t u = 0; u < n; ++u) {
            Av[u] /= s;
            delta = std::max(delta, std::abs(Av[u] - v[u]));
            vmax = std::max(vmax, Av[u]);
        }
        v.swap(Av);
        if (delta <= 1e-14 * vmax && it > 10) break;
    }
    sol.iterations = it;
    if (it >= kPowerCap) throw error(errc::non_convergence, "paircorr", "power iteration did not converge");
    auto Av = apply_rows(A, v);
    double num = 0, den = 0;
    for (std::size_t u = 0; u < n; ++u) {
        num += Av[u];
        den += v[u];
    }
    sol.rayleigh = den > 0 ? num / den : 0;
    if (std::abs(sol.rayleigh - 1) > 1e-9) {
        // no eigenvalue 1 on this support: only the zero solution
        sol.trivial = true;
        sol.residual = 0;
        return;
    }
    double norm0 = 0;
    const LVec zero(L.D, 0);
    for (std::size_t u = 0; u < n; ++u)
        if (keys[u].i == keys[u].j && keys[u].z == zero) norm0 += v[u];
    if (!(norm0 > 0)) throw error(errc::negative_component, "paircorr", "no mass at the origin");
    for (auto& x : v) x /= norm0;
    std::unordered_map<PairKey, std::size_t, PairKeyHash> idx;
    for (std::size_t u = 0; u < n; ++u) idx[keys[u]] = u;
    // nu_ij(-z) = nu_ji(z)
    std::vector<double> sym(v);
    sol.symmetry_error = 0;
    for (std::size_t u = 0; u < n; ++u) {
        LVec mz(keys[u].z);
        for (auto& c : mz) c = -c;
        auto itr = idx.find(PairKey{keys[u].j, keys[u].i, mz});
        if (itr == idx.end()) continue;
        sol.symmetry_error = std::max(sol.symmetry_error, std::abs(v[u] - v[itr->second]));
        sym[u] = 0.5 * (v[u] + v[itr->second]);
    }
    v = sym;
    for (std::size_t u = 0; u < n; ++u)
        if (v[u] < -1e-12) throw error(errc::negative_component, "paircorr", "negative correlation value");
    Av = apply_rows(A, v);
    sol.residual = 0;
    for (std::size_t u = 0; u < n; ++u) sol.residual = std::max(sol.residual, std::abs(Av[u] - v[u]));
    sol.nu = v;
    sol.normalisation = 0;
    sol.min_value = n ? v[0] : 0;
    for (std::size_t u = 0; u < n; ++u) {
        if (keys[u].i == keys[u].j && keys[u].z == zero) sol.normalisation += v[u];
        sol.min_value = std::min(sol.min_value, v[u]);
    }
}

} // namespace detail

inline CorrelationSolution solve_renormalisation(const DisplacementMatrix& T, const SupportSet& S) {
    CorrelationSolution sol;
    sol.S = S;
    auto keys = S.keys();
    auto A = detail::renormalisation_map(T, keys);
    detail::solve_fixed_point(A, keys, T.lat, sol);
    return sol;
}

/// F_z = sum_{x - y = z} D_x (x) D_y, indexed by the lattice difference z.
inline std::map<LVec, Eigen::MatrixXd> kronecker_digits(const DigitDecomposition& dd) {
    std::map<LVec, Eigen::MatrixXd> F;
    const int n = dd.n;
    for (std::size_t a = 0; a < dd.positions.size(); ++a)
        for (std::size_t b = 0; b < dd.positions.size(); ++b) {
            LVec z(dd.positions[a]);
            for (std::size_t m = 0; m < z.size(); ++m) z[m] -= dd.positions[b][m];
            Eigen::MatrixXd Da = to_eigen(dd.matrices[a]), Db = to_eigen(dd.matrices[b]);
            Eigen::MatrixXd K(n * n, n * n);
            for (int i = 0; i < n; ++i)
                for (int m = 0; m < n; ++m) K.block(i * n, m * n, n, n) = Da(i, m) * Db;
            auto it = F.find(z);
            if (it == F.end()) F.emplace(z, K);
            else it->second += K;
        }
    return F;
}

/// Same fixed point, with the map assembled from the F_z matrices.
inline CorrelationSolution solve_renormalisation_kronecker(const DisplacementMatrix& T, const SupportSet& S) {
    CorrelationSolution sol;
    sol.S = S;
    auto keys = S.keys();
    auto F = kronecker_digits(digit_matrices(T));
    std::unordered_map<PairKey, std::size_t, PairKeyHash> idx;
    for (std::size_t u = 0; u < keys.size(); ++u) idx[keys[u]] = u;
    const int n = T.n, D = T.lat.D;
    const double w = 1.0 / T.Q.det_abs();
    std::vector<std::map<std::size_t, double>> rows(keys.size());
    LVec pre;
    for (std::size_t u = 0; u < keys.size(); ++u) {
        const auto& k = keys[u];
        for (auto& [d, K] : F) {
            LVec v(D);
            for (int a = 0; a < D; ++a) v[a] = k.z[a] + d[a];
            if (!T.lat.apply_inverse(v, pre)) continue;
            for (int m = 0; m < n; ++m)
                for (int nn = 0; nn < n; ++nn) {
                    double c = K(k.i * n + k.j, m * n + nn);
                    if (c == 0) continue;
                    auto it = idx.find(PairKey{m, nn, pre});
                    if (it != idx.end()) rows[u][it->second] += c * w;
                }
        }
    }
    auto A = detail::merge_rows(rows);
    detail::solve_fixed_point(A, keys, T.lat, sol);
    return sol;
}

/// Relative pair frequencies counted in the level-`levels` supertile of letter 0.
inline std::vector<double> frequency_oracle(const DisplacementMatrix& T, const std::vector<PairKey>& keys, int levels) {
    auto p = generate_patch(T, 0, levels);
    std::unordered_map<LVec, int, LVecHash> at;
    for (std::size_t a = 0; a < p.size(); ++a) at[p.pos[a]] = p.type[a];
    const int d = T.lat.d, D = T.lat.D;
    double zmax = 0;
    for (auto& k : keys) zmax = std::max(zmax, support_norm(T.lat, k.z));
    std::vector<double> lo(d, 1e300), hi(d, -1e300);
    std::vector<std::vector<double>> x(p.size());
    for (std::size_t a = 0; a < p.size(); ++a) {
        x[a] = T.lat.to_float(p.pos[a]);
        for (int c = 0; c < d; ++c) {
            lo[c] = std::min(lo[c], x[a][c]);
            hi[c] = std::max(hi[c], x[a][c]);
        }
    }
    std::vector<std::size_t> window;
    for (std::size_t a = 0; a < p.size(); ++a) {
        bool in = true;
        for (int c = 0; c < d; ++c)
            if (x[a][c] < lo[c] + zmax - kCutTol || x[a][c] > hi[c] - zmax + kCutTol) in = false;
        if (in) window.push_back(a);
    }
    std::vector<double> out(keys.size(), 0.0);
    if (window.empty()) return out;
    for (std::size_t u = 0; u < keys.size(); ++u) {
        std::size_t cnt = 0;
        for (auto a : window) {
            if (p.type[a] != keys[u].i) continue;
            LVec q(p.pos[a]);
            for (int m = 0; m < D; ++m) q[m] += keys[u].z[m];
            auto it = at.find(q);
            if (it != at.end() && it->second == keys[u].j) ++cnt;
        }
        out[u] = static_cast<double>(cnt) / static_cast<double>(window.size());
    }
    return out;
}

/// nu_ij(z) beyond the cutoff, by recursion into the solved core.
class OutwardExtender {
public:
    OutwardExtender(const CorrelationSolution& sol, const DisplacementMatrix& T) : sol_(sol), T_(T) {
        for (std::size_t u = 0; u < sol.keys.size(); ++u) core_[sol.keys[u]] = sol.nu[u];
    }

    double operator()(int i, int j, const LVec& z) {
        if (support_norm(T_.lat, z) <= sol_.S.cutoff + kCutTol) {
            auto it = core_.find(PairKey{i, j, z});
            if (it == core_.end()) throw error(errc::unknown_support_point, "paircorr", "point inside the cutoff but not in the support");
            return it->second;
        }
        return eval(i, j, z);
    }

private:
    double eval(int i, int j, const LVec& z) {
        if (support_norm(T_.lat, z) <= sol_.S.cutoff + kCutTol) {
            auto it = core_.find(PairKey{i, j, z});
            return it == core_.end() ? 0.0 : it->second;
        }
        PairKey key{i, j, z};
        auto mit = memo_.find(key);
        if (mit != memo_.end()) return mit->second;
        const int D = T_.lat.D;
        double s = 0;
        LVec pre;
        for (int m = 0; m < T_.n; ++m)
            for (int n = 0; n < T_.n; ++n)
                for (auto& x : T_.sets[i][m])
                    for (auto& y : T_.sets[j][n]) {
                        LVec v(D);
                        for (int a = 0; a < D; ++a) v[a] = z[a] + x[a] - y[a];
                        if (T_.lat.apply_inverse(v, pre)) s += eval(m, n, pre);
                    }
        s /= T_.Q.det_abs();
        memo_[key] = s;
        return s;
    }

    const CorrelationSolution& sol_;
    const DisplacementMatrix& T_;
    std::unordered_map<PairKey, double, PairKeyHash> core_, memo_;
};

inline double extend_outward(const CorrelationSolution& sol, const DisplacementMatrix& T, int i, int j, const LVec& z) {
    OutwardExtender ext(sol, T);
    return ext(i, j, z);
}

/// CSV: i,j,z_float,z_exact_coords,nu
inline std::string correlation_csv(const CorrelationSolution& sol, const DisplacementMatrix& T, const std::vector<std::string>& alphabet) {
    std::ostringstream os;
    os << "i,j,z_float,z_exact_coords,nu\n";
    os.precision(17);
    for (std::size_t u = 0; u < sol.keys.size(); ++u) {
        const auto& k = sol.keys[u];
        auto xf = T.lat.to_float(k.z);
        auto xe = T.lat.to_exact(k.z);
        os << alphabet[k.i] << ',' << alphabet[k.j] << ',';
        for (std::size_t a = 0; a < xf.size(); ++a) os << (a ? ";" : "") << xf[a];
        os << ',';
        for (std::size_t a = 0; a < xe.size(); ++a) {
            if (a) os << '|';
            const auto& c = xe[a].coords();
            for (std::size_t p = 0; p < c.size(); ++p) os << (p ? ";" : "") << to_string(c[p]);
        }
        os << ',' << sol.nu[u] << '\n';
    }
    return os.str();
}

} // namespace infl
