#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cocycle.hpp"
#include "ida.hpp"

namespace infl {

/// Trigonometric polynomial sum_e c_e u^e, u_a = exp(2 pi i k_a).
struct EigenPolynomial {
    std::string label;
    int vars = 1;
    std::map<LVec, cd> terms;
    Eigen::VectorXcd eigenvector;  // empty for the trace polynomial
    bool trace = false;

    cd eval(const double* kt) const {
        cd s = 0;
        for (auto& [e, c] : terms) {
            double ph = 0;
            for (int a = 0; a < vars; ++a) ph += static_cast<double>(e[a]) * kt[a];
            s += c * std::polar(1.0, kTwoPi * ph);
        }
        return s;
    }
    /// Univariate coefficient list, lowest power first (requires non-negative exponents).
    std::vector<cd> coeffs() const {
        long long top = 0;
        for (auto& [e, c] : terms) top = std::max(top, e[0]);
        std::vector<cd> out(top + 1, 0.0);
        for (auto& [e, c] : terms) out[e[0]] += c;
        return out;
    }
};

struct MahlerResult {
    double value = 0;
    double stderr_ = 0;
    std::string method;  // "jensen" or "monte_carlo"
    std::size_t samples = 0;
    double clamp_rate = 0;
    double backward_error = 0;
};

inline constexpr double kRootCluster = 1e-5;

/// Roots of sum c_i u^i via companion eigenvalues; nearby roots merged to their centroid.
inline std::vector<cd> poly_roots(const std::vector<cd>& c) {
    const int n = static_cast<int>(c.size()) - 1;
    if (n < 1) return {};
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -c[i] / c[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cd> r(es.eigenvalues().data(), es.eigenvalues().data() + n);
    std::vector<int> group(n, -1);
    int g = 0;
    for (int i = 0; i < n; ++i) {
        if (group[i] >= 0) continue;
        group[i] = g;
        for (bool grew = true; grew;) {
            grew = false;
            for (int j = 0; j < n; ++j)
                if (group[j] < 0)
                    for (int k = 0; k < n; ++k)
                        if (group[k] == g && std::abs(r[j] - r[k]) < kRootCluster) {
                            group[j] = g;
                            grew = true;
                            break;
                        }
        }
        ++g;
    }
    std::vector<cd> sum(g, 0.0);
    std::vector<int> cnt(g, 0);
    for (int i = 0; i < n; ++i) {
        sum[group[i]] += r[i];
        ++cnt[group[i]];
    }
    for (int i = 0; i < n; ++i) r[i] = sum[group[i]] / static_cast<double>(cnt[group[i]]);
    return r;
}

namespace detail {

inline double jensen(std::vector<cd> c, double* backward = nullptr) {
    double scale = 0;
    for (auto& x : c) scale = std::max(scale, std::abs(x));
    if (scale == 0) return -std::numeric_limits<double>::infinity();
    while (std::abs(c.back()) <= 1e-14 * scale) c.pop_back();
    std::size_t lo = 0;
    while (std::abs(c[lo]) <= 1e-14 * scale) ++lo;
    c.erase(c.begin(), c.begin() + lo);
    double m = std::log(std::abs(c.back()));
    auto r = poly_roots(c);
    // a k-fold root comes back smeared by ~eps^(1/k); the cluster centroid is accurate again
    std::vector<cd> snapped(r.size());
    std::vector<bool> done(r.size(), false);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (done[i]) continue;
        std::vector<std::size_t> cl{i};
        for (std::size_t q = 0; q < cl.size(); ++q)
            for (std::size_t j = i + 1; j < r.size(); ++j)
                if (!done[j] && std::find(cl.begin(), cl.end(), j) == cl.end() && std::abs(r[j] - r[cl[q]]) < 2e-4 * (1 + std::abs(r[j])))
                    cl.push_back(j);
        cd mean = 0;
        for (auto j : cl) mean += r[j];
        mean /= static_cast<double>(cl.size());
        for (auto j : cl) snapped[j] = mean, done[j] = true;
    }
    for (auto& a : snapped) m += std::log(std::max(1.0, std::abs(a)));
    if (backward) {
        double be = 0;
        for (auto& a : r) {
            cd v = 0;
            double w = 0;
            for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) {
                v = v * a + c[i];
                w = w * std::abs(a) + std::abs(c[i]);
            }
            be = std::max(be, std::abs(v) / w);
        }
        *backward = be;
    }
    return m;
}

} // namespace detail

inline MahlerResult mahler_univariate(const std::vector<cd>& c) {
    bool zero = true;
    for (auto& x : c)
        if (x != 0.0) zero = false;
    if (c.empty() || zero) throw error(errc::zero_polynomial, "abelian", "Mahler measure of the zero polynomial");
    MahlerResult r;
    r.method = "jensen";
    r.value = detail::jensen(c, &r.backward_error);
    return r;
}

/// Monte-Carlo over u_2..u_d with the u_1 integral done exactly by Jensen's formula.
inline MahlerResult mahler_multivariate(const EigenPolynomial& p, std::size_t samples, std::uint64_t seed, int workers = 1) {
    if (p.terms.empty()) throw error(errc::zero_polynomial, "abelian", "Mahler measure of the zero polynomial");
    if (p.vars == 1) return mahler_univariate(p.coeffs());
    const int d = p.vars;
    long long lo = 0, hi = 0;
    for (auto& [e, c] : p.terms) {
        lo = std::min(lo, e[0]);
        hi = std::max(hi, e[0]);
    }
    MahlerResult r;
    r.method = "monte_carlo";
    for (int attempt = 0; attempt < 4; ++attempt, samples *= 2) {
        const std::size_t nb = (samples + kBatch - 1) / kBatch;
        std::vector<double> sum(nb, 0), sq(nb, 0);
        std::vector<std::size_t> clamps(nb, 0);
        for_batches(samples, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
            SplitMix64 rng(seed ^ b);
            std::vector<double> y(d);
            std::vector<cd> c(hi - lo + 1);
            for (std::size_t s = begin; s < end; ++s) {
                for (int a = 1; a < d; ++a) y[a] = rng.uniform();
                std::fill(c.begin(), c.end(), cd(0));
                for (auto& [e, v] : p.terms) {
                    double ph = 0;
                    for (int a = 1; a < d; ++a) ph += static_cast<double>(e[a]) * y[a];
                    c[e[0] - lo] += v * std::polar(1.0, kTwoPi * ph);
                }
                double m = detail::jensen(c);
                if (!(m > detail::kLogClamp)) {
                    m = detail::kLogClamp;
                    ++clamps[b];
                }
                sum[b] += m;
                sq[b] += m * m;
            }
        });
        double s = 0, q = 0;
        std::size_t cl = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            s += sum[b];
            q += sq[b];
            cl += clamps[b];
        }
        const double ns = static_cast<double>(samples);
        r.value = s / ns;
        r.stderr_ = std::sqrt(std::max(0.0, q / ns - r.value * r.value) / std::max(1.0, ns - 1));
        r.samples = samples;
        r.clamp_rate = cl / ns;
        if (r.clamp_rate <= 1e-6) break;
    }
    return r;
}

struct EigenDecomposition {
    std::vector<EigenPolynomial> polys;  // inherited eigenvalues, then the trace polynomial
    std::vector<int> bijective_positions;
    std::vector<int> constant_positions;
};

namespace detail {

inline bool is_permutation_matrix(const IMat& D) {
    const int n = static_cast<int>(D.size());
    for (int i = 0; i < n; ++i) {
        int r = 0, c = 0;
        for (int j = 0; j < n; ++j) {
            r += static_cast<int>(D[i][j]);
            c += static_cast<int>(D[j][i]);
        }
        if (r != 1 || c != 1) return false;
    }
    return true;
}

// all ones in a single row
inline bool is_constant_matrix(const IMat& D) {
    const int n = static_cast<int>(D.size());
    for (int i = 0; i < n; ++i) {
        bool full = true, empty = true;
        for (int j = 0; j < n; ++j) {
            if (D[i][j] != 1) full = false;
            if (D[i][j] != 0) empty = false;
        }
        if (!full && !empty) return false;
    }
    int full_rows = 0;
    for (int i = 0; i < n; ++i) full_rows += D[i][0] == 1;
    return full_rows == 1;
}

} // namespace detail

/// Common eigenvalue polynomials for digit matrices that are permutations (commuting) or constant columns.
inline EigenDecomposition simultaneous_eigenpolynomials(const DigitDecomposition& dd, int vars, std::uint64_t seed = 1) {
    const int n = dd.n;
    EigenDecomposition out;
    for (std::size_t x = 0; x < dd.matrices.size(); ++x) {
        if (detail::is_permutation_matrix(dd.matrices[x])) out.bijective_positions.push_back(static_cast<int>(x));
        else if (n > 1 && detail::is_constant_matrix(dd.matrices[x])) out.constant_positions.push_back(static_cast<int>(x));
        else throw error(errc::not_applicable, "abelian", "digit matrix neither bijective nor constant");
    }
    if (out.bijective_positions.empty()) throw error(errc::not_applicable, "abelian", "no bijective column");
    std::vector<Eigen::MatrixXd> R;
    for (int x : out.bijective_positions) R.push_back(to_eigen(dd.matrices[x]));
    for (auto& A : R)
        for (auto& B : R)
            if ((A * B - B * A).norm() > 0)
                throw error(errc::not_simultaneously_diagonalisable, "abelian", "bijective digit matrices do not commute");

    if (n > 1) {
        // restrict to the zero-sum subspace, where constant columns vanish
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Ones(n, 1));
        Eigen::MatrixXd Qf = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd W = Qf.rightCols(n - 1);
        std::vector<Eigen::MatrixXd> Rw;
        for (auto& A : R) Rw.push_back(W.transpose() * A * W);
        SplitMix64 rng(seed);
        bool ok = false;
        for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
            Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n - 1, n - 1);
            for (auto& A : Rw) G += (rng.uniform() + 0.5) * A;
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(G.cast<cd>());
            Eigen::MatrixXcd V = es.eigenvectors();
            Eigen::MatrixXcd Vi = V.inverse();
            std::vector<Eigen::MatrixXcd> E;
            ok = true;
            for (auto& A : Rw) {
                Eigen::MatrixXcd e = Vi * A.cast<cd>() * V;
                Eigen::MatrixXcd off = e;
                off.diagonal().setZero();
                if (off.norm() > 1e-9) ok = false;
                E.push_back(e);
            }
            if (!ok) continue;
            for (int j = 0; j < n - 1; ++j) {
                EigenPolynomial p;
                p.label = "beta_" + std::to_string(j + 1);
                p.vars = vars;
                for (std::size_t t = 0; t < E.size(); ++t) {
                    cd c = E[t](j, j);
                    if (std::abs(c.imag()) < 1e-12) c.imag(0);
                    if (std::abs(c.real()) < 1e-12) c.real(0);
                    if (c != 0.0) p.terms[dd.positions[out.bijective_positions[t]]] += c;
                }
                Eigen::VectorXcd v = W.cast<cd>() * V.col(j);
                p.eigenvector = v / v.norm();
                out.polys.push_back(p);
            }
        }
        if (!ok) throw error(errc::not_simultaneously_diagonalisable, "abelian", "off-diagonal residual above 1e-9");
    }
    EigenPolynomial tr;
    tr.label = "trace";
    tr.vars = vars;
    tr.trace = true;
    for (auto& x : dd.positions) tr.terms[x] += 1.0;
    out.polys.push_back(tr);
    return out;
}

struct AbelianExponent {
    EigenPolynomial poly;
    MahlerResult mahler;
    double chi_centered = 0;  // -m(beta)
    double chi = 0;           // log sqrt(L) - m(beta)
};

struct AbelianResult {
    std::vector<AbelianExponent> exponents;
    double L = 1;
    double max_mahler = 0;
    double max_mahler_stderr = 0;
    bool all_positive = false;  // every chi > 0: the cocycle carries no zero exponent
};

/// Exponents of a constant-length (or block) rule whose columns are bijective and commuting, or constant.
inline AbelianResult abelian_exponents(const SubstitutionRule& r, const DisplacementMatrix& T, std::size_t mc_samples = 1 << 18,
                                       std::uint64_t seed = 1, int workers = 1) {
    if (!constant_length(r)) throw error(errc::not_applicable, "abelian", "rule is not of constant length");
    if (T.lat.D != T.lat.d) throw error(errc::not_applicable, "abelian", "displacements are not on the integer lattice");
    auto dd = digit_matrices(T);
    auto eig = simultaneous_eigenpolynomials(dd, T.lat.d, seed);
    AbelianResult res;
    res.L = T.Q.det_abs();
    res.max_mahler = -std::numeric_limits<double>::infinity();
    res.all_positive = true;
    for (auto& p : eig.polys) {
        AbelianExponent e;
        e.poly = p;
        e.mahler = p.vars == 1 ? mahler_univariate(p.coeffs()) : mahler_multivariate(p, mc_samples, seed, workers);
        e.chi_centered = -e.mahler.value;
        e.chi = 0.5 * std::log(res.L) - e.mahler.value;
        if (e.mahler.value > res.max_mahler) {
            res.max_mahler = e.mahler.value;
            res.max_mahler_stderr = e.mahler.stderr_;
        }
        if (!(e.chi > 0)) res.all_positive = false;
        res.exponents.push_back(e);
    }
    return res;
}

/// (1/N) sum_n log|p(Q^T^n k0)|: the cocycle restricted to the k-independent eigenvector of p.
inline double eigen_birkhoff(const FourierEvaluator& F, const EigenPolynomial& p, const std::vector<double>& k0, int N,
                             std::uint64_t seed) {
    if (p.vars != F.D()) throw error(errc::not_applicable, "abelian", "polynomial and torus dimensions differ");
    auto orbit = torus_orbit(F, k0, N, seed);
    double s = 0;
    for (auto& kt : orbit) s += std::max(std::log(std::abs(p.eval(kt.data()))), detail::kLogClamp);
    return s / N;
}

struct SqrtLambdaResult {
    bool applicable = false;  // criterion is stated for constant-length rules
    bool satisfied = false;
    cd matched = 0;
    std::vector<double> moduli;
};

inline SqrtLambdaResult sqrt_lambda_criterion(const IMat& M, double lambda, bool constant_length_rule) {
    SqrtLambdaResult r;
    r.applicable = constant_length_rule;
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(M), false);
    const double target = std::sqrt(lambda);
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        cd a = es.eigenvalues()[i];
        r.moduli.push_back(std::abs(a));
        if (!r.satisfied && std::abs(a) >= target * (1 - 1e-6) && std::abs(a) <= target * (1 + 1e-6)) {
            r.satisfied = true;
            r.matched = a;
        }
    }
    std::sort(r.moduli.begin(), r.moduli.end(), std::greater<double>());
    return r;
}

} // namespace infl
