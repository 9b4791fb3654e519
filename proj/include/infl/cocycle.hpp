#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <gmp.h>

#include "geometry.hpp"

namespace infl {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// splitmix64; one stream per Monte-Carlo batch.
struct SplitMix64 {
    std::uint64_t s;
    explicit SplitMix64(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline constexpr std::size_t kBatch = std::size_t(1) << 16;

/// Runs f(batch_index, begin, end) over batches of kBatch, spread over `workers` threads.
template <class F>
void for_batches(std::size_t samples, int workers, F&& f) {
    const std::size_t nb = (samples + kBatch - 1) / kBatch;
    workers = std::max(1, std::min<int>(workers, static_cast<int>(nb)));
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t b; (b = next++) < nb;) f(b, b * kBatch, std::min(samples, (b + 1) * kBatch));
    };
    if (workers == 1) {
        run();
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
}

struct ExponentEstimate {
    std::string method;       // "birkhoff", "mean_bound", "pointwise"
    double chi_B = 0;
    double stderr_ = 0;
    double chi_min = 0;
    double raw = 0;           // mean bound in the squared-norm convention
    double raw_stderr = 0;
    int N = 0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    bool underflow = false;
};

class FourierEvaluator {
public:
    explicit FourierEvaluator(DisplacementMatrix T) : T_(std::move(T)), lift_(torus_lift(T_)) {
        const int D = lift_.D;
        lo_.assign(D, 0);
        hi_.assign(D, 0);
        for (auto& e : lift_.entries) {
            for (int m = 0; m < D; ++m) {
                lo_[m] = std::min(lo_[m], e.n[m]);
                hi_[m] = std::max(hi_[m], e.n[m]);
            }
            pos_.push_back(T_.lat.to_float(e.n));
        }
        Eigen::MatrixXd C(D, D);
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) C(i, j) = static_cast<double>(lift_.C[i][j]);
        rho_ = C.eigenvalues().cwiseAbs().maxCoeff();
    }

    const DisplacementMatrix& T() const { return T_; }
    const TorusLift& lift() const { return lift_; }
    int n() const { return T_.n; }
    int D() const { return lift_.D; }
    int d() const { return T_.lat.d; }
    double flow_radius() const { return rho_; }
    double threshold() const { return 0.5 * std::log(T_.Q.det_abs()); }

    /// B_ij(k) = sum_{t in T_ij} exp(2 pi i k.t)
    CMat fourier_matrix(const std::vector<double>& k) const {
        CMat B = CMat::Zero(n(), n());
        for (std::size_t e = 0; e < pos_.size(); ++e) {
            double ph = 0;
            for (int a = 0; a < d(); ++a) ph += k[a] * pos_[e][a];
            B(lift_.entries[e].i, lift_.entries[e].j) += std::polar(1.0, kTwoPi * ph);
        }
        return B;
    }

    /// Fourier matrix at torus coordinates kt (fractions of a period).
    CMat lift_matrix(const double* kt) const {
        const int D = lift_.D;
        thread_local std::vector<std::vector<cd>> tab;
        tab.resize(D);
        for (int m = 0; m < D; ++m) {
            const long long span = hi_[m] - lo_[m] + 1;
            tab[m].resize(span);
            cd z = std::polar(1.0, kTwoPi * kt[m]);
            cd zl = std::polar(1.0, kTwoPi * kt[m] * static_cast<double>(lo_[m]));
            tab[m][0] = zl;
            for (long long e = 1; e < span; ++e) tab[m][e] = tab[m][e - 1] * z;
        }
        CMat B = CMat::Zero(n(), n());
        for (auto& e : lift_.entries) {
            cd v = tab[0][e.n[0] - lo_[0]];
            for (int m = 1; m < D; ++m) v *= tab[m][e.n[m] - lo_[m]];
            B(e.i, e.j) += v;
        }
        return B;
    }

    std::vector<double> qt(const std::vector<double>& k) const {
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(k.data(), d());
        Eigen::VectorXd w = T_.Q.Qf.transpose() * v;
        return std::vector<double>(w.data(), w.data() + d());
    }

    /// B(k) B(Q^T k) ... B((Q^T)^{N-1} k), evaluated directly in real k.
    CMat cocycle_product(std::vector<double> k, int N) const {
        CMat X = CMat::Identity(n(), n());
        for (int m = 0; m < N; ++m) {
            X = X * fourier_matrix(k);
            k = qt(k);
        }
        return X;
    }

private:
    DisplacementMatrix T_;
    TorusLift lift_;
    std::vector<std::vector<double>> pos_;
    LVec lo_, hi_;
    double rho_ = 1;
};

struct DetWitness {
    bool found = false;
    std::vector<double> k;
    double abs_det = 0;
};

inline DetWitness det_nonvanishing(const FourierEvaluator& F, int samples, std::uint64_t seed) {
    SplitMix64 rng(seed);
    DetWitness w;
    for (int s = 0; s < samples; ++s) {
        std::vector<double> k(F.d());
        for (auto& x : k) x = rng.uniform();
        double a = std::abs(F.fourier_matrix(k).determinant());
        if (a > 1e-8) {
            w.found = true;
            w.k = k;
            w.abs_det = a;
            return w;
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// orbits on the lift torus

/// Exact orbit of k -> Q^T k on the lift torus, as fractions of a period.
/// k is taken as k0 plus, when jitter is on, seeded random low-order bits.
inline std::vector<std::vector<double>> torus_orbit(const FourierEvaluator& F, const std::vector<double>& k0, int N, std::uint64_t seed,
                                                    bool jitter = true) {
    const int D = F.D(), d = F.d();
    const long P = static_cast<long>(std::ceil(N * std::log2(std::max(F.flow_radius(), 1.0 + 1e-12)))) + 128;
    const long prec = P + 128;
    SplitMix64 rng(seed);
    // k as exact dyadics with P + 64 fractional bits
    std::vector<BigFloat> k(d, BigFloat(prec));
    for (int a = 0; a < d; ++a) {
        mpfr_set_d(k[a].get(), k0[a], MPFR_RNDN);
        if (jitter) {
            BigFloat t(prec);
            mpfr_set_ui(t.get(), 0, MPFR_RNDN);
            for (long b = 0; b < P + 64; b += 64) {
                BigFloat u(prec);
                mpfr_set_ui_2exp(u.get(), static_cast<unsigned long>(rng.next()), -(64 + b + 53), MPFR_RNDN);
                mpfr_add(t.get(), t.get(), u.get(), MPFR_RNDN);
            }
            mpfr_add(k[a].get(), k[a].get(), t.get(), MPFR_RNDN);
        }
    }
    const auto& L = F.T().lat;
    std::vector<mpz_t> z(D), nz(D);
    for (int m = 0; m < D; ++m) {
        BigFloat s(prec), bm(prec), prod(prec);
        mpfr_set_ui(s.get(), 0, MPFR_RNDN);
        for (int a = 0; a < d; ++a) {
            BigFloat e = L.basis[m][a].to_big(prec);
            mpfr_mul(prod.get(), k[a].get(), e.get(), MPFR_RNDN);
            mpfr_add(s.get(), s.get(), prod.get(), MPFR_RNDN);
        }
        mpfr_frac(s.get(), s.get(), MPFR_RNDN);
        mpfr_mul_2si(s.get(), s.get(), P, MPFR_RNDN);
        mpz_init(z[m]);
        mpz_init(nz[m]);
        mpfr_get_z(z[m], s.get(), MPFR_RNDD);
        mpz_fdiv_r_2exp(z[m], z[m], P);
    }
    std::vector<std::vector<double>> orbit(N, std::vector<double>(D));
    mpz_t top;
    mpz_init(top);
    for (int step = 0; step < N; ++step) {
        for (int m = 0; m < D; ++m) {
            mpz_fdiv_q_2exp(top, z[m], P - 62);
            orbit[step][m] = static_cast<double>(mpz_get_ui(top)) * 0x1.0p-62;
        }
        for (int m = 0; m < D; ++m) {
            mpz_set_ui(nz[m], 0);
            for (int l = 0; l < D; ++l) {
                long long c = L.C[l][m];  // (C^T z)_m = sum_l C[l][m] z_l
                if (c > 0) mpz_addmul_ui(nz[m], z[l], static_cast<unsigned long>(c));
                else if (c < 0) mpz_submul_ui(nz[m], z[l], static_cast<unsigned long>(-c));
            }
            mpz_fdiv_r_2exp(nz[m], nz[m], P);
        }
        for (int m = 0; m < D; ++m) mpz_swap(z[m], nz[m]);
    }
    mpz_clear(top);
    for (int m = 0; m < D; ++m) {
        mpz_clear(z[m]);
        mpz_clear(nz[m]);
    }
    return orbit;
}

struct BirkhoffResult {
    double chi = 0;       // (1/N) log ||B^(N)(k)||_F
    double chi_half = 0;  // same at N/2
    bool underflow = false;
};

inline constexpr int kRenormInterval = 8;

inline BirkhoffResult birkhoff_on_orbit(const FourierEvaluator& F, const std::vector<std::vector<double>>& orbit) {
    const int N = static_cast<int>(orbit.size());
    BirkhoffResult r;
    CMat X = CMat::Identity(F.n(), F.n());
    double logsum = 0;
    for (int m = 0; m < N; ++m) {
        X = X * F.lift_matrix(orbit[m].data());
        if ((m + 1) % kRenormInterval == 0 || m + 1 == N / 2) {
            double s = X.norm();
            if (!(s > 0) || !std::isfinite(s)) {
                r.underflow = true;
                r.chi = r.chi_half = -std::numeric_limits<double>::infinity();
                return r;
            }
            logsum += std::log(s);
            X /= s;
        }
        if (m + 1 == N / 2) r.chi_half = logsum / (N / 2);
    }
    double s = X.norm();
    if (!(s > 0)) {
        r.underflow = true;
        r.chi = -std::numeric_limits<double>::infinity();
        return r;
    }
    r.chi = (logsum + std::log(s)) / N;
    if (N < 2) r.chi_half = r.chi;
    return r;
}

/// Pointwise estimate of the top exponent at k0.
inline ExponentEstimate birkhoff_exponent(const FourierEvaluator& F, const std::vector<double>& k0, int N, std::uint64_t seed = 0,
                                          bool jitter = true) {
    auto orbit = torus_orbit(F, k0, N, seed, jitter);
    auto b = birkhoff_on_orbit(F, orbit);
    ExponentEstimate e;
    e.method = "pointwise";
    e.N = N;
    e.seed = seed;
    e.chi_B = b.chi;
    e.stderr_ = std::abs(b.chi - b.chi_half);
    e.chi_min = F.threshold() - b.chi;
    e.underflow = b.underflow;
    return e;
}

struct KroneckerReport {
    double chi_A = 0, chi_B = 0;
    bool pass = false;
};

/// (1/N) log ||A^(N)|| against 2 (1/N) log ||B^(N)|| with A^(N) = B^(N) (x) conj(B^(N)).
/// The Kronecker square is formed from the renormalised product: multiplying the n^2 x n^2
/// factors one by one loses accuracy twice as fast when the leading direction is nearly
/// annihilated (Thue-Morse near k = 1/2 mod 1).
inline KroneckerReport kronecker_consistency(const FourierEvaluator& F, const std::vector<double>& k0, int N, std::uint64_t seed = 0) {
    auto orbit = torus_orbit(F, k0, N, seed);
    auto b = birkhoff_on_orbit(F, orbit);
    const int n = F.n();
    CMat X = CMat::Identity(n, n);
    double logsum = 0;
    for (int m = 0; m < N; ++m) {
        X = X * F.lift_matrix(orbit[m].data());
        if ((m + 1) % kRenormInterval == 0) {
            double s = X.norm();
            logsum += std::log(s);
            X /= s;
        }
    }
    CMat A(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A.block(i * n, j * n, n, n) = X(i, j) * X.conjugate();
    KroneckerReport r;
    r.chi_A = (2 * logsum + std::log(A.norm())) / N;
    r.chi_B = b.chi;
    r.pass = std::abs(r.chi_A - 2 * r.chi_B) <= 2e-2;
    return r;
}

// ---------------------------------------------------------------------------
// torus mean of log ||P^(N)||_F^2

namespace detail {

inline constexpr double kLogClamp = -45.0;

// Fills out[N-1] with log ||P^(N)||^2 for N = 1..Nmax at one torus point.
// Fast path: points on the 2^-64 grid with the flow taken mod 2^64.
inline void mean_sample_u64(const FourierEvaluator& F, std::vector<std::uint64_t> z, int Nmax, double* out) {
    const int D = F.D();
    const auto& C = F.lift().C;
    std::vector<double> kt(D);
    std::vector<std::uint64_t> nz(D);
    CMat X = CMat::Identity(F.n(), F.n());
    for (int m = 0; m < Nmax; ++m) {
        for (int a = 0; a < D; ++a) kt[a] = static_cast<double>(z[a] >> 11) * 0x1.0p-53;
        X = X * F.lift_matrix(kt.data());
        double s = X.squaredNorm();
        out[m] = s > 0 ? std::log(s) : kLogClamp;
        for (int a = 0; a < D; ++a) {
            std::uint64_t v = 0;
            for (int l = 0; l < D; ++l) v += static_cast<std::uint64_t>(C[l][a]) * z[l];
            nz[a] = v;
        }
        z.swap(nz);
    }
}

// Slow path with P fractional bits, P = ceil(Nmax log2 rho) + 64.
inline void mean_sample_mpz(const FourierEvaluator& F, SplitMix64& rng, long P, int Nmax, double* out) {
    const int D = F.D();
    const auto& C = F.lift().C;
    std::vector<mpz_t> z(D), nz(D);
    mpz_t tmp;
    mpz_init(tmp);
    for (int a = 0; a < D; ++a) {
        mpz_init(z[a]);
        mpz_init(nz[a]);
        for (long b = 0; b < P; b += 64) {
            mpz_mul_2exp(z[a], z[a], 64);
            mpz_set_ui(tmp, static_cast<unsigned long>(rng.next()));
            mpz_add(z[a], z[a], tmp);
        }
        mpz_fdiv_r_2exp(z[a], z[a], P);
    }
    std::vector<double> kt(D);
    CMat X = CMat::Identity(F.n(), F.n());
    for (int m = 0; m < Nmax; ++m) {
        for (int a = 0; a < D; ++a) {
            mpz_fdiv_q_2exp(tmp, z[a], P - 53);
            kt[a] = static_cast<double>(mpz_get_ui(tmp)) * 0x1.0p-53;
        }
        X = X * F.lift_matrix(kt.data());
        double s = X.squaredNorm();
        out[m] = s > 0 ? std::log(s) : kLogClamp;
        for (int a = 0; a < D; ++a) {
            mpz_set_ui(nz[a], 0);
            for (int l = 0; l < D; ++l) {
                long long c = C[l][a];
                if (c > 0) mpz_addmul_ui(nz[a], z[l], static_cast<unsigned long>(c));
                else if (c < 0) mpz_submul_ui(nz[a], z[l], static_cast<unsigned long>(-c));
            }
            mpz_fdiv_r_2exp(nz[a], nz[a], P);
        }
        for (int a = 0; a < D; ++a) mpz_swap(z[a], nz[a]);
    }
    for (int a = 0; a < D; ++a) {
        mpz_clear(z[a]);
        mpz_clear(nz[a]);
    }
    mpz_clear(tmp);
}

} // namespace detail

/// Mean bounds for every N = 1..Nmax from one set of torus samples.
inline std::vector<ExponentEstimate> mean_bound_range(const FourierEvaluator& F, int Nmax, std::size_t samples, std::uint64_t seed,
                                                      int workers = 1) {
    if (Nmax < 1) return {};
    const double bits = Nmax * std::log2(std::max(F.flow_radius(), 1.0));
    const bool fast = bits <= 40;
    const long P = static_cast<long>(std::ceil(bits)) + 64;
    const std::size_t nb = (samples + kBatch - 1) / kBatch;
    std::vector<std::vector<double>> sum(nb, std::vector<double>(Nmax, 0.0)), sq(nb, std::vector<double>(Nmax, 0.0));
    for_batches(samples, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
        SplitMix64 rng(seed ^ b);
        std::vector<double> out(Nmax);
        std::vector<std::uint64_t> z(F.D());
        for (std::size_t s = begin; s < end; ++s) {
            if (fast) {
                for (auto& x : z) x = rng.next();
                detail::mean_sample_u64(F, z, Nmax, out.data());
            } else {
                detail::mean_sample_mpz(F, rng, P, Nmax, out.data());
            }
            for (int m = 0; m < Nmax; ++m) {
                sum[b][m] += out[m];
                sq[b][m] += out[m] * out[m];
            }
        }
    });
    std::vector<ExponentEstimate> res(Nmax);
    for (int m = 0; m < Nmax; ++m) {
        double s = 0, q = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            s += sum[b][m];
            q += sq[b][m];
        }
        const double ns = static_cast<double>(samples);
        double mean = s / ns;
        double var = std::max(0.0, q / ns - mean * mean) * ns / std::max(1.0, ns - 1);
        const int N = m + 1;
        auto& e = res[m];
        e.method = "mean_bound";
        e.N = N;
        e.samples = samples;
        e.seed = seed;
        e.raw = mean / N;
        e.raw_stderr = std::sqrt(var / ns) / N;
        e.chi_B = e.raw / 2;
        e.stderr_ = e.raw_stderr / 2;
        e.chi_min = F.threshold() - e.chi_B;
    }
    return res;
}

inline ExponentEstimate mean_bound(const FourierEvaluator& F, int N, std::size_t samples, std::uint64_t seed, int workers = 1) {
    if (N < 1) throw error(errc::size_guard, "cocycle", "N must be positive");
    return mean_bound_range(F, N, samples, seed, workers).back();
}

} // namespace infl
