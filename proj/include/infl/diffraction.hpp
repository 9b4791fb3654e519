#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cocycle.hpp"

namespace infl {

/// Positions (1D) and types of a supertile, with the natural densities of the hull.
struct PointPattern {
    std::vector<double> x;
    std::vector<int> type;
    double length = 0;   // supertile length
    double density = 0;  // points per unit length
    int n = 0;

    std::size_t size() const { return x.size(); }
};

inline PointPattern point_pattern(const DisplacementMatrix& T, const PFData& pf, int seed, int levels) {
    if (T.lat.d != 1) throw error(errc::not_applicable, "diffraction", "amplitudes are one-dimensional");
    auto p = generate_patch(T, seed, levels);
    PointPattern pp;
    pp.n = T.n;
    pp.type = p.type;
    for (auto& v : p.pos) pp.x.push_back(T.lat.to_float(v)[0]);
    pp.length = std::pow(T.Q.det_abs(), levels) * T.volumes[seed];
    double mean_len = 0;
    for (int i = 0; i < T.n; ++i) mean_len += pf.right[i] * T.volumes[i];
    pp.density = 1.0 / mean_len;
    return pp;
}

struct AmplitudeVector {
    std::vector<double> k;
    Eigen::VectorXcd a;
    double window = 0;
    std::size_t tiles = 0;
    double shift_discrepancy = 0;  // max | |a_j| at offset 0 - |a_j| at offset size/3 |
    bool reliable = true;
};

namespace detail {

inline Eigen::VectorXcd window_sum(const PointPattern& p, double k, std::size_t begin, std::size_t count, double len) {
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(p.n);
    const double x0 = p.x[begin];
    for (std::size_t t = begin; t < begin + count; ++t) a(p.type[t]) += std::polar(1.0, -kTwoPi * k * (p.x[t] - x0));
    // shift back so the window is measured from the patch origin
    return a * std::polar(1.0, -kTwoPi * k * x0) / (p.density * len);
}

} // namespace detail

/// a_j(k) = dens^-1 (1/R) sum_{x in window, type j} exp(-2 pi i k x); window = the first `count` tiles.
inline AmplitudeVector amplitudes(const PointPattern& p, double k, std::size_t count) {
    if (count == 0 || count > p.size()) throw error(errc::window_too_small, "diffraction", "patch shorter than the requested window");
    AmplitudeVector A;
    A.k = {k};
    A.tiles = count;
    const double len = count == p.size() ? p.length : p.x[count] - p.x[0];
    A.window = len;
    A.a = detail::window_sum(p, k, 0, count, len);
    // centre-shift check at one third of the patch
    const std::size_t off = p.size() / 3;
    if (off + count <= p.size() && count < p.size()) {
        const double len2 = off + count == p.size() ? p.length - p.x[off] : p.x[off + count] - p.x[off];
        Eigen::VectorXcd b = detail::window_sum(p, k, off, count, len2);
        for (int j = 0; j < p.n; ++j) A.shift_discrepancy = std::max(A.shift_discrepancy, std::abs(std::abs(A.a(j)) - std::abs(b(j))));
        A.reliable = A.shift_discrepancy <= 1e-2;
    }
    return A;
}

/// Amplitudes over the whole supertile.
inline AmplitudeVector amplitudes(const PointPattern& p, double k) { return amplitudes(p, k, p.size()); }

struct IntensityMatrix {
    Eigen::MatrixXcd I;
    std::string source;  // "amplitudes" or "recursion"

    double hermitian_error() const { return (I - I.adjoint()).norm(); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (I + I.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    /// second singular value over the first
    double rank_one_ratio() const {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(I);
        auto s = svd.singularValues();
        if (s.size() < 2 || s(0) == 0) return 0;
        return s(1) / s(0);
    }
};

/// I_ij = conj(a_i) a_j
inline IntensityMatrix intensity_from_amplitudes(const AmplitudeVector& a) {
    IntensityMatrix m;
    m.source = "amplitudes";
    m.I = a.a.conjugate() * a.a.transpose();
    return m;
}

/// I_ij(0) = dens_i dens_j / dens^2 from the Perron-Frobenius frequencies.
inline IntensityMatrix intensity_at_zero(const PFData& pf) {
    const int n = static_cast<int>(pf.right.size());
    IntensityMatrix m;
    m.source = "recursion";
    m.I = Eigen::MatrixXcd(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.I(i, j) = pf.right[i] * pf.right[j];
    return m;
}

/// || I(k) - |det Q|^-2 B(k) I(Q^T k) B(k)^* ||_F
inline double pp_recursion_check(const FourierEvaluator& F, const std::vector<double>& k, const IntensityMatrix& Ik,
                                 const IntensityMatrix& Iqk) {
    CMat B = F.fourier_matrix(k);
    const double det = F.T().Q.det_abs();
    return (Ik.I - B * Iqk.I * B.adjoint() / (det * det)).norm();
}

// ---------------------------------------------------------------------------
// verdict

enum class VerdictKind { ac_excluded, ac_possible, inconclusive };

inline const char* verdict_name(VerdictKind v) {
    switch (v) {
    case VerdictKind::ac_excluded: return "AC_EXCLUDED";
    case VerdictKind::ac_possible: return "AC_POSSIBLE";
    default: return "INCONCLUSIVE";
    }
}

struct VerdictInputs {
    double upper = 0;        // best upper estimate of chi^B
    double upper_stderr = 0;
    std::string upper_route; // "mahler" or "mean_bound(N)"
    double estimate = 0;     // Birkhoff average
    double estimate_stderr = 0;
    double threshold = 0;    // log sqrt |det Q|
    double epsilon_floor = 0.02;
    bool det_witness = false;
};

struct Verdict {
    VerdictKind kind = VerdictKind::inconclusive;
    VerdictInputs in;
    double epsilon = 0;
    double margin = 0;  // threshold - upper
};

/// Exclusion rests on det B(k) != 0 somewhere; without a witness only the other two outcomes are available.
inline Verdict classify(const VerdictInputs& in) {
    Verdict v;
    v.in = in;
    v.epsilon = std::max(in.epsilon_floor, 3 * in.upper_stderr);
    v.margin = in.threshold - in.upper;
    if (in.upper <= in.threshold - v.epsilon) {
        if (!in.det_witness) throw error(errc::det_witness_missing, "diffraction", "exclusion needs some k with det B(k) != 0");
        v.kind = VerdictKind::ac_excluded;
    } else if (std::abs(in.estimate - in.threshold) <= 3 * in.estimate_stderr && in.upper >= in.threshold - 3 * in.upper_stderr)
        v.kind = VerdictKind::ac_possible;
    else v.kind = VerdictKind::inconclusive;
    return v;
}

} // namespace infl
