#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/gmp.hpp>
#include <mpfr.h>

#include "errors.hpp"

namespace infl {

namespace mp = boost::multiprecision;
using Int = mp::mpz_int;
using Rat = mp::mpq_rational;
using IPoly = std::vector<Int>;  // coefficients, lowest degree first
using RPoly = std::vector<Rat>;
using IMat = std::vector<std::vector<long long>>;

inline Rat parse_rational(const std::string& s) {
    try {
        auto slash = s.find('/');
        if (slash == std::string::npos) return Rat(Int(s));
        Int num(s.substr(0, slash)), den(s.substr(slash + 1));
        if (den == 0) throw error(errc::parse_error, "numberfield", "zero denominator in '" + s + "'");
        return Rat(num, den);
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const error*>(&e)) throw;
        throw error(errc::parse_error, "numberfield", "bad rational '" + s + "'");
    }
}

inline std::string to_string(const Rat& r) {
    if (mp::denominator(r) == 1) return mp::numerator(r).str();
    return mp::numerator(r).str() + "/" + mp::denominator(r).str();
}

// ---------------------------------------------------------------------------
// polynomials

namespace poly {

template <class P>
void trim(P& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

template <class P>
int degree(const P& p) {
    int d = static_cast<int>(p.size()) - 1;
    while (d >= 0 && p[d] == 0) --d;
    return d;
}

inline RPoly to_rat(const IPoly& p) {
    RPoly r(p.begin(), p.end());
    return r;
}

// Faddeev-LeVerrier; exact over any ring where division by k is exact.
template <class T>
std::vector<T> charpoly(const std::vector<std::vector<T>>& A) {
    const std::size_t n = A.size();
    std::vector<T> c(n + 1, T(0));
    c[n] = 1;
    std::vector<std::vector<T>> Mk(n, std::vector<T>(n, T(0))), AM(n, std::vector<T>(n, T(0)));
    for (std::size_t k = 1; k <= n; ++k) {
        // Mk = A*M_{k-1} + c_{n-k+1} I ; AM holds A*M_{k-1} from the previous step
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) Mk[i][j] = AM[i][j] + (i == j ? c[n - k + 1] : T(0));
        T tr = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                T s = 0;
                for (std::size_t l = 0; l < n; ++l) s += A[i][l] * Mk[l][j];
                AM[i][j] = s;
            }
        for (std::size_t i = 0; i < n; ++i) tr += AM[i][i];
        c[n - k] = -tr / T(static_cast<long>(k));
    }
    return c;
}

inline IPoly charpoly(const IMat& M) {
    std::vector<std::vector<Int>> A(M.size(), std::vector<Int>(M.size()));
    for (std::size_t i = 0; i < M.size(); ++i)
        for (std::size_t j = 0; j < M.size(); ++j) A[i][j] = M[i][j];
    return charpoly(A);
}

inline RPoly derivative(const RPoly& p) {
    RPoly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * Rat(static_cast<long>(i)));
    trim(d);
    return d;
}

// a = q*b + r over Q
inline void divmod(RPoly a, const RPoly& b, RPoly& q, RPoly& r) {
    trim(a);
    int db = degree(b);
    q.assign(std::max<int>(0, degree(a) - db + 1), Rat(0));
    while (degree(a) >= db && degree(a) >= 0) {
        int da = degree(a);
        Rat f = a[da] / b[db];
        q[da - db] = f;
        for (int i = 0; i <= db; ++i) a[da - db + i] -= f * b[i];
        a.resize(da);
        trim(a);
    }
    r = a;
    trim(q);
}

inline RPoly gcd(RPoly a, RPoly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        RPoly q, r;
        divmod(a, b, q, r);
        a = b;
        b = r;
    }
    if (!a.empty()) {
        Rat lead = a.back();
        for (auto& c : a) c /= lead;
    }
    return a;
}

// monic integer polynomial from a monic rational one; nullopt if not integral
inline std::optional<IPoly> to_monic_int(RPoly p) {
    trim(p);
    if (p.empty()) return std::nullopt;
    Rat lead = p.back();
    IPoly out;
    for (auto& c : p) {
        c /= lead;
        if (mp::denominator(c) != 1) return std::nullopt;
        out.push_back(mp::numerator(c));
    }
    return out;
}

inline IPoly squarefree(const IPoly& p) {
    RPoly rp = to_rat(p);
    RPoly g = gcd(rp, derivative(rp));
    RPoly q, r;
    divmod(rp, g, q, r);
    auto out = to_monic_int(q);
    if (!out) throw error(errc::min_poly_not_found, "numberfield", "squarefree part is not integral");
    return *out;
}

// exact division test of integer polynomials, a monic
inline bool divides(const IPoly& a, const IPoly& b) {
    RPoly q, r;
    divmod(to_rat(b), to_rat(a), q, r);
    return r.empty();
}

inline std::string to_string(const IPoly& p) {
    std::string s;
    for (int i = degree(p); i >= 0; --i) {
        if (p[i] == 0) continue;
        Int c = p[i];
        bool neg = c < 0;
        if (neg) c = -c;
        if (!s.empty()) s += neg ? " - " : " + ";
        else if (neg) s += "-";
        if (c != 1 || i == 0) s += c.str();
        if (i >= 1) s += "x";
        if (i >= 2) s += "^" + std::to_string(i);
    }
    return s.empty() ? "0" : s;
}

inline std::vector<std::complex<double>> roots(const IPoly& p) {
    int d = degree(p);
    std::vector<std::complex<double>> out;
    if (d < 1) return out;
    Eigen::MatrixXd Cm = Eigen::MatrixXd::Zero(d, d);
    double lead = p[d].convert_to<double>();
    for (int i = 1; i < d; ++i) Cm(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) Cm(i, d - 1) = -p[i].convert_to<double>() / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> es(Cm, false);
    for (int i = 0; i < d; ++i) out.push_back(es.eigenvalues()[i]);
    return out;
}

} // namespace poly

// ---------------------------------------------------------------------------
// variable-precision float, thin RAII over mpfr

class BigFloat {
public:
    explicit BigFloat(long bits = 256) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
    BigFloat(const BigFloat& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) { mpfr_set_prec(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
        return *this;
    }
    ~BigFloat() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    long bits() const { return mpfr_get_prec(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    void set(const Int& z) { mpfr_set_z(v_, z.backend().data(), MPFR_RNDN); }
    void set(const Rat& q) { mpfr_set_q(v_, q.backend().data(), MPFR_RNDN); }
    void set(double d) { mpfr_set_d(v_, d, MPFR_RNDN); }

private:
    mpfr_t v_;
};

inline BigFloat eval(const IPoly& p, const BigFloat& x) {
    BigFloat acc(x.bits()), c(x.bits());
    for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i) {
        mpfr_mul(acc.get(), acc.get(), x.get(), MPFR_RNDN);
        c.set(p[i]);
        mpfr_add(acc.get(), acc.get(), c.get(), MPFR_RNDN);
    }
    return acc;
}

// Newton polish of a simple real root from a double approximation
inline BigFloat real_root(const IPoly& p, double approx, long bits) {
    IPoly dp;
    for (std::size_t i = 1; i < p.size(); ++i) dp.push_back(p[i] * static_cast<long>(i));
    BigFloat x(bits), fx(bits), dfx(bits), step(bits);
    x.set(approx);
    for (int it = 0; it < 200; ++it) {
        fx = eval(p, x);
        dfx = eval(dp, x);
        if (mpfr_zero_p(dfx.get())) break;
        mpfr_div(step.get(), fx.get(), dfx.get(), MPFR_RNDN);
        mpfr_sub(x.get(), x.get(), step.get(), MPFR_RNDN);
        if (mpfr_zero_p(step.get()) || mpfr_get_exp(step.get()) < mpfr_get_exp(x.get()) - bits + 4) break;
    }
    return x;
}

// ---------------------------------------------------------------------------
// LLL (exact rational Gram-Schmidt, incremental updates)

inline std::vector<std::vector<Int>> lll(std::vector<std::vector<Int>> b, Rat delta = Rat(3, 4)) {
    const int n = static_cast<int>(b.size());
    if (n == 0) return b;
    const int m = static_cast<int>(b[0].size());
    auto dot = [&](const std::vector<Rat>& u, const std::vector<Rat>& v) {
        Rat s = 0;
        for (int i = 0; i < m; ++i) s += u[i] * v[i];
        return s;
    };
    std::vector<std::vector<Rat>> bs(n, std::vector<Rat>(m));
    std::vector<std::vector<Rat>> mu(n, std::vector<Rat>(n, Rat(0)));
    std::vector<Rat> B(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < m; ++k) bs[i][k] = b[i][k];
        std::vector<Rat> bi = bs[i];
        for (int j = 0; j < i; ++j) {
            mu[i][j] = B[j] == 0 ? Rat(0) : dot(bi, bs[j]) / B[j];
            for (int k = 0; k < m; ++k) bs[i][k] -= mu[i][j] * bs[j][k];
        }
        B[i] = dot(bs[i], bs[i]);
    }
    auto round_rat = [](const Rat& r) {
        Int num = mp::numerator(r), den = mp::denominator(r);
        Int twice = 2 * num + den;
        Int q = twice / (2 * den);
        if (twice < 0 && q * 2 * den != twice) q -= 1;  // floor
        return q;
    };
    int k = 1;
    while (k < n) {
        for (int j = k - 1; j >= 0; --j) {
            Int q = round_rat(mu[k][j]);
            if (q != 0) {
                for (int t = 0; t < m; ++t) b[k][t] -= q * b[j][t];
                for (int l = 0; l < j; ++l) mu[k][l] -= Rat(q) * mu[j][l];
                mu[k][j] -= Rat(q);
            }
        }
        if (B[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * B[k - 1]) {
            ++k;
            continue;
        }
        std::swap(b[k], b[k - 1]);
        Rat mk = mu[k][k - 1];
        Rat Bn = B[k] + mk * mk * B[k - 1];
        if (Bn == 0) { ++k; continue; }
        mu[k][k - 1] = mk * B[k - 1] / Bn;
        B[k] = B[k - 1] * B[k] / Bn;
        B[k - 1] = Bn;
        for (int j = 0; j < k - 1; ++j) std::swap(mu[k][j], mu[k - 1][j]);
        for (int i = k + 1; i < n; ++i) {
            Rat t = mu[i][k];
            mu[i][k] = mu[i][k - 1] - mk * t;
            mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k];
        }
        k = std::max(k - 1, 1);
    }
    return b;
}

// Candidate integer relations a_0 + a_1 x + ... + a_d x^d = 0, shortest first.
inline std::vector<IPoly> integer_relations(const std::vector<BigFloat>& xs, long scale_bits = 200) {
    const int n = static_cast<int>(xs.size());
    std::vector<std::vector<Int>> basis(n, std::vector<Int>(n + 1, Int(0)));
    BigFloat t(xs[0].bits());
    mpz_t z;
    mpz_init(z);
    for (int i = 0; i < n; ++i) {
        basis[i][i] = 1;
        mpfr_mul_2si(t.get(), xs[i].get(), scale_bits, MPFR_RNDN);
        mpfr_get_z(z, t.get(), MPFR_RNDN);
        basis[i][n] = Int(z);
    }
    mpz_clear(z);
    auto red = lll(basis);
    std::vector<IPoly> out;
    for (auto& v : red) out.emplace_back(v.begin(), v.begin() + n);
    return out;
}

// ---------------------------------------------------------------------------
// exact linear algebra over Q

using RMat = std::vector<std::vector<Rat>>;

// unique solution of A x = b, nullopt when inconsistent or underdetermined
inline std::optional<std::vector<Rat>> rat_solve(RMat A, std::vector<Rat> b) {
    const int rows = static_cast<int>(A.size());
    const int cols = rows ? static_cast<int>(A[0].size()) : 0;
    int r = 0;
    std::vector<int> pivcol;
    for (int c = 0; c < cols && r < rows; ++c) {
        int p = -1;
        for (int i = r; i < rows; ++i)
            if (A[i][c] != 0) { p = i; break; }
        if (p < 0) continue;
        std::swap(A[p], A[r]);
        std::swap(b[p], b[r]);
        for (int i = 0; i < rows; ++i) {
            if (i == r || A[i][c] == 0) continue;
            Rat f = A[i][c] / A[r][c];
            for (int j = c; j < cols; ++j) A[i][j] -= f * A[r][j];
            b[i] -= f * b[r];
        }
        pivcol.push_back(c);
        ++r;
    }
    if (r < cols) return std::nullopt;
    for (int i = r; i < rows; ++i)
        if (b[i] != 0) return std::nullopt;
    std::vector<Rat> x(cols);
    for (int i = 0; i < r; ++i) x[pivcol[i]] = b[i] / A[i][pivcol[i]];
    return x;
}

// ---------------------------------------------------------------------------
// number field Q(lambda)

struct NumberField {
    IPoly min_poly;  // monic, degree D
    double lambda = 0;
    long double lambda_ld = 0;
    IMat companion;  // column m holds the coordinates of lambda * lambda^m

    int degree() const { return static_cast<int>(min_poly.size()) - 1; }
    BigFloat lambda_big(long bits) const { return real_root(min_poly, lambda, bits); }
    bool same(const NumberField& o) const { return min_poly == o.min_poly && lambda == o.lambda; }
};

using FieldPtr = std::shared_ptr<const NumberField>;

inline FieldPtr make_field(IPoly p, double approx_root) {
    poly::trim(p);
    int D = poly::degree(p);
    if (D < 1 || p[D] != 1) throw error(errc::min_poly_not_found, "numberfield", "polynomial must be monic of degree >= 1");
    auto f = std::make_shared<NumberField>();
    f->min_poly = p;
    BigFloat r = real_root(p, approx_root, 128);
    f->lambda = r.to_double();
    f->lambda_ld = mpfr_get_ld(r.get(), MPFR_RNDN);
    BigFloat v = eval(p, r);
    if (std::abs(v.to_double()) > 1e-10) throw error(errc::min_poly_not_found, "numberfield", "no root near " + std::to_string(approx_root));
    f->companion.assign(D, std::vector<long long>(D, 0));
    for (int m = 0; m + 1 < D; ++m) f->companion[m + 1][m] = 1;
    for (int l = 0; l < D; ++l) f->companion[l][D - 1] = (-p[l]).convert_to<long long>();
    return f;
}

class FieldElement {
public:
    FieldElement() = default;
    explicit FieldElement(FieldPtr f) : f_(std::move(f)), c_(f_->degree(), Rat(0)) {}
    FieldElement(FieldPtr f, std::vector<Rat> c) : f_(std::move(f)), c_(std::move(c)) {
        if (static_cast<int>(c_.size()) != f_->degree())
            throw error(errc::field_mismatch, "numberfield", "coordinate count does not match field degree");
    }
    static FieldElement rational(FieldPtr f, const Rat& r) {
        FieldElement e(std::move(f));
        e.c_[0] = r;
        return e;
    }
    static FieldElement gen(FieldPtr f) {
        FieldElement e(f);
        if (f->degree() == 1) e.c_[0] = Rat(f->min_poly[0] * -1);
        else e.c_[1] = 1;
        return e;
    }

    const std::vector<Rat>& coords() const { return c_; }
    const FieldPtr& field() const { return f_; }
    bool is_zero() const {
        return std::all_of(c_.begin(), c_.end(), [](const Rat& r) { return r == 0; });
    }

    FieldElement operator+(const FieldElement& o) const {
        check(o);
        FieldElement r(*this);
        for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] += o.c_[i];
        return r;
    }
    FieldElement operator-(const FieldElement& o) const {
        check(o);
        FieldElement r(*this);
        for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] -= o.c_[i];
        return r;
    }
    FieldElement operator-() const {
        FieldElement r(*this);
        for (auto& x : r.c_) x = -x;
        return r;
    }
    FieldElement operator*(const FieldElement& o) const {
        check(o);
        const int D = f_->degree();
        std::vector<Rat> prod(2 * D - 1, Rat(0));
        for (int i = 0; i < D; ++i) {
            if (c_[i] == 0) continue;
            for (int j = 0; j < D; ++j) prod[i + j] += c_[i] * o.c_[j];
        }
        for (int k = 2 * D - 2; k >= D; --k) {
            if (prod[k] == 0) continue;
            Rat a = prod[k];
            for (int l = 0; l <= D; ++l) prod[k - D + l] -= a * Rat(f_->min_poly[l]);
        }
        prod.resize(D);
        return FieldElement(f_, std::move(prod));
    }
    FieldElement scaled(const Rat& s) const {
        FieldElement r(*this);
        for (auto& x : r.c_) x *= s;
        return r;
    }
    FieldElement inverse() const {
        if (is_zero()) throw error(errc::field_mismatch, "numberfield", "inverse of zero");
        const int D = f_->degree();
        RMat A(D, std::vector<Rat>(D));
        FieldElement basis = rational(f_, Rat(1));
        FieldElement lam = gen(f_);
        for (int m = 0; m < D; ++m) {
            FieldElement col = (*this) * basis;
            for (int l = 0; l < D; ++l) A[l][m] = col.c_[l];
            basis = basis * lam;
        }
        std::vector<Rat> e(D, Rat(0));
        e[0] = 1;
        auto x = rat_solve(A, e);
        if (!x) throw error(errc::field_mismatch, "numberfield", "singular multiplication map");
        return FieldElement(f_, *x);
    }
    FieldElement operator/(const FieldElement& o) const { return (*this) * o.inverse(); }

    bool operator==(const FieldElement& o) const { check(o); return c_ == o.c_; }
    bool operator!=(const FieldElement& o) const { return !(*this == o); }

    double to_double() const {
        long double acc = 0;
        for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i)
            acc = acc * f_->lambda_ld + static_cast<long double>(c_[i].convert_to<double>());
        return static_cast<double>(acc);
    }
    BigFloat to_big(long bits) const {
        BigFloat lam = f_->lambda_big(bits), acc(bits), c(bits);
        for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i) {
            mpfr_mul(acc.get(), acc.get(), lam.get(), MPFR_RNDN);
            c.set(c_[i]);
            mpfr_add(acc.get(), acc.get(), c.get(), MPFR_RNDN);
        }
        return acc;
    }
    int sign() const {
        if (is_zero()) return 0;
        double d = to_double();
        double scale = 1;
        for (std::size_t i = 0; i < c_.size(); ++i)
            scale += std::abs(c_[i].convert_to<double>()) * std::pow(std::abs(f_->lambda), static_cast<double>(i));
        if (std::abs(d) > 1e-6 * scale) return d > 0 ? 1 : -1;
        BigFloat b = to_big(1024);
        return mpfr_sgn(b.get());
    }
    bool operator<(const FieldElement& o) const { return (*this - o).sign() < 0; }

private:
    void check(const FieldElement& o) const {
        if (f_ != o.f_ && !(f_ && o.f_ && f_->same(*o.f_)))
            throw error(errc::field_mismatch, "numberfield", "operands from different fields");
    }

    FieldPtr f_;
    std::vector<Rat> c_;
};

// ---------------------------------------------------------------------------
// minimal polynomial of the PF eigenvalue

inline double dominant_eigenvalue(const IMat& M) {
    const int n = static_cast<int>(M.size());
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = static_cast<double>(M[i][j]);
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    double best = -1;
    for (int i = 0; i < n; ++i)
        if (std::abs(es.eigenvalues()[i].imag()) < 1e-9) best = std::max(best, es.eigenvalues()[i].real());
    return best;
}

inline constexpr int kMaxFieldDegree = 12;

namespace detail {

// charpoly of multiplication-by-beta, beta = sum c_m alpha^m in Q(alpha)
inline std::optional<IPoly> element_minpoly(const FieldPtr& f, const std::vector<Rat>& c) {
    FieldElement beta(f, c);
    const int D = f->degree();
    RMat A(D, std::vector<Rat>(D));
    FieldElement basis = FieldElement::rational(f, Rat(1)), lam = FieldElement::gen(f);
    for (int m = 0; m < D; ++m) {
        FieldElement col = beta * basis;
        for (int l = 0; l < D; ++l) A[l][m] = col.coords()[l];
        basis = basis * lam;
    }
    RPoly cp = poly::charpoly(A);
    RPoly g = poly::gcd(cp, poly::derivative(cp)), q, r;
    poly::divmod(cp, g, q, r);
    return poly::to_monic_int(q);
}

} // namespace detail

inline FieldPtr field_from_charpoly(const IMat& M, const std::optional<IPoly>& hint = std::nullopt) {
    IPoly cp = poly::charpoly(M);
    const double lam = dominant_eigenvalue(M);
    const long bits = 320;
    if (hint) {
        IPoly h = *hint;
        poly::trim(h);
        int D = poly::degree(h);
        if (D < 1 || h[D] != 1) throw error(errc::min_poly_not_found, "numberfield", "hint is not monic");
        if (D > kMaxFieldDegree) throw error(errc::min_poly_not_found, "numberfield", "hint degree above cap");
        // hint is the minimal polynomial of lambda itself
        if (poly::divides(h, cp)) {
            BigFloat r = real_root(h, lam, bits);
            if (std::abs(r.to_double() - lam) < 1e-9 && std::abs(eval(h, r).to_double()) < 1e-30)
                return make_field(h, lam);
        }
        // hint generates a field containing lambda (planar rules: coordinates live in a larger field)
        auto rts = poly::roots(h);
        std::sort(rts.begin(), rts.end(), [](auto a, auto b) { return a.real() > b.real(); });
        IPoly sq = poly::squarefree(cp);
        for (auto z : rts) {
            if (std::abs(z.imag()) > 1e-9) continue;
            auto f = make_field(h, z.real());
            BigFloat a = f->lambda_big(bits), L = real_root(sq, lam, bits);
            std::vector<BigFloat> xs;
            BigFloat pw(bits);
            pw.set(1.0);
            for (int m = 0; m < D; ++m) {
                xs.push_back(pw);
                mpfr_mul(pw.get(), pw.get(), a.get(), MPFR_RNDN);
            }
            xs.push_back(L);
            for (auto& rel : integer_relations(xs)) {
                if (rel[D] == 0) continue;
                std::vector<Rat> c(D);
                for (int m = 0; m < D; ++m) c[m] = Rat(-rel[m], rel[D]);
                auto mpol = detail::element_minpoly(f, c);
                if (!mpol || !poly::divides(*mpol, cp)) continue;
                if (std::abs(FieldElement(f, c).to_double() - lam) > 1e-9 * std::max(1.0, lam)) continue;
                return f;
            }
        }
        throw error(errc::min_poly_not_found, "numberfield", "hint " + poly::to_string(h) + " rejected");
    }
    IPoly sq = poly::squarefree(cp);
    BigFloat L = real_root(sq, lam, bits);
    const int maxd = std::min(kMaxFieldDegree, poly::degree(sq));
    for (int d = 1; d <= maxd; ++d) {
        std::vector<BigFloat> xs;
        BigFloat pw(bits);
        pw.set(1.0);
        for (int m = 0; m <= d; ++m) {
            xs.push_back(pw);
            mpfr_mul(pw.get(), pw.get(), L.get(), MPFR_RNDN);
        }
        for (auto& rel : integer_relations(xs)) {
            if (abs(rel[d]) != 1) continue;
            IPoly p = rel;
            if (p[d] < 0)
                for (auto& c : p) c = -c;
            if (!poly::divides(p, cp)) continue;
            BigFloat v = eval(p, L);
            if (mpfr_zero_p(v.get()) || mpfr_get_exp(v.get()) < -bits / 2) return make_field(p, lam);
        }
    }
    throw error(errc::min_poly_not_found, "numberfield", "no verified factor of " + poly::to_string(cp));
}

} // namespace infl
