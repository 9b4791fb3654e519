#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"

using namespace infl;
using testing_util::corpus;

namespace {

const double tau = (1 + std::sqrt(5.0)) / 2;

// Bragg positions of the Fibonacci chain with tile lengths tau and 1 lie in Z[tau]/sqrt5.
const double kFibBragg[] = {tau / std::sqrt(5.0), 1 / std::sqrt(5.0), 2 / std::sqrt(5.0), tau * tau / std::sqrt(5.0), (tau + 2) / std::sqrt(5.0)};

PointPattern pattern(const char* name, int levels) {
    auto b = corpus(name);
    return point_pattern(b.T, b.pf, 0, levels);
}

} // namespace

TEST(Amplitudes, AtZeroAreFrequencies) {
    for (auto [name, levels, tol] : {std::tuple{"thue_morse", 12, 1e-12}, std::tuple{"fibonacci", 20, 1e-7}, std::tuple{"period_doubling", 16, 1e-4}}) {
        auto b = corpus(name);
        auto p = point_pattern(b.T, b.pf, 0, levels);
        auto a = amplitudes(p, 0.0);
        for (int j = 0; j < b.T.n; ++j) {
            EXPECT_NEAR(a.a(j).real(), b.pf.right[j], tol) << name;
            EXPECT_EQ(a.a(j).imag(), 0.0) << name;
        }
    }
}

TEST(Amplitudes, FibonacciBraggStable) {
    auto p = pattern("fibonacci", 21);
    for (double k : kFibBragg) {
        auto a = amplitudes(p, k, 5000), b = amplitudes(p, k, 10000);
        EXPECT_GT(a.a.norm(), 0.05) << k;
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(a.a(j)), std::abs(b.a(j)), 5e-3) << k;
    }
}

TEST(Amplitudes, ThueMorseSignedSumIsRieszProduct) {
    auto p = pattern("thue_morse", 16);
    for (double k : {std::sqrt(2.0) - 1, M_PI - 3, std::exp(1.0) - 2}) {
        for (int m : {6, 10, 14}) {
            // (1/2^m) |sum_n (-1)^t_n e(nk)| over n < 2^m is prod_{j<m} |sin(pi 2^j k)|
            double want = 1;
            for (int j = 0; j < m; ++j) want *= std::abs(std::sin(M_PI * std::ldexp(k, j)));
            auto a = amplitudes(p, k, std::size_t(1) << m);
            EXPECT_NEAR(std::abs(a.a(0) - a.a(1)), want, 1e-12 + 1e-9 * want) << k << " m=" << m;
        }
    }
}

TEST(Amplitudes, WindowTooSmall) {
    auto p = pattern("thue_morse", 4);
    for (std::size_t c : {std::size_t(0), p.size() + 1}) {
        try {
            amplitudes(p, 0.1, c);
            FAIL();
        } catch (const error& e) {
            EXPECT_EQ(e.code(), errc::window_too_small);
        }
    }
}

TEST(Intensity, AtZeroIsFrequencyProduct) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        auto I = intensity_at_zero(b.pf);
        for (int i = 0; i < b.T.n; ++i)
            for (int j = 0; j < b.T.n; ++j) EXPECT_NEAR(std::abs(I.I(i, j) - b.pf.right[i] * b.pf.right[j]), 0, 1e-15) << name;
    }
    auto I = intensity_at_zero(corpus("fibonacci").pf);
    EXPECT_NEAR(I.I(0, 0).real(), 1 / (tau * tau), 1e-12);
}

TEST(Intensity, FromAmplitudesAtZeroMatchesFrequencies) {
    auto b = corpus("thue_morse");
    auto p = point_pattern(b.T, b.pf, 0, 12);
    auto I = intensity_from_amplitudes(amplitudes(p, 0.0));
    EXPECT_LE((I.I - intensity_at_zero(b.pf).I).norm(), 1e-8);
}

TEST(Intensity, ZeroAmplitudesGiveZero) {
    AmplitudeVector a;
    a.a = Eigen::VectorXcd::Zero(3);
    EXPECT_EQ(intensity_from_amplitudes(a).I.norm(), 0.0);
}

TEST(Intensity, RankOneHermitianPsd) {
    SplitMix64 rng(41);
    for (auto name : {"fibonacci", "thue_morse", "period_doubling", "d4_example", "rudin_shapiro", "tm_return_words"}) {
        auto b = corpus(name);
        auto p = point_pattern(b.T, b.pf, 0, b.T.n > 4 ? 8 : 12);
        std::vector<double> ks;
        for (int t = 0; t < 20; ++t) ks.push_back(rng.uniform() * 4);
        for (double k : kFibBragg) ks.push_back(k);
        for (double k : ks) {
            auto I = intensity_from_amplitudes(amplitudes(p, k));
            EXPECT_LE(I.hermitian_error(), 1e-9) << name;
            EXPECT_GE(I.min_eigenvalue(), -1e-9) << name;
            EXPECT_LE(I.rank_one_ratio(), 1e-6) << name;
        }
    }
}

TEST(Recursion, AtZeroIsEigenIdentity) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        FourierEvaluator F(b.T);
        auto I = intensity_at_zero(b.pf);
        EXPECT_LE(pp_recursion_check(F, std::vector<double>(F.d(), 0.0), I, I), 1e-8) << name;
    }
}

TEST(Recursion, FibonacciBraggWindow) {
    auto b = corpus("fibonacci");
    FourierEvaluator F(b.T);
    auto p = point_pattern(b.T, b.pf, 0, 22);
    for (double k : kFibBragg) {
        auto Ik = intensity_from_amplitudes(amplitudes(p, k, 10000));
        auto Iq = intensity_from_amplitudes(amplitudes(p, F.qt({k})[0], 10000));
        EXPECT_LE(pp_recursion_check(F, {k}, Ik, Iq), 1e-2) << k;
    }
}

TEST(Recursion, GenericKBothSidesSmall) {
    auto b = corpus("thue_morse");
    FourierEvaluator F(b.T);
    auto p = point_pattern(b.T, b.pf, 0, 15);
    SplitMix64 rng(43);
    for (int t = 0; t < 5; ++t) {
        const double k = rng.uniform();
        auto Ik = intensity_from_amplitudes(amplitudes(p, k, 10000));
        auto Iq = intensity_from_amplitudes(amplitudes(p, F.qt({k})[0], 10000));
        EXPECT_LE(pp_recursion_check(F, {k}, Ik, Iq), 1e-2) << k;
    }
}

TEST(Classify, Cases) {
    VerdictInputs in;
    in.threshold = std::log(std::sqrt(2.0));
    in.det_witness = true;
    in.upper = 0.0;
    in.upper_stderr = 0.001;
    EXPECT_EQ(classify(in).kind, VerdictKind::ac_excluded);
    EXPECT_NEAR(classify(in).margin, in.threshold, 1e-15);

    in.upper = in.threshold;
    in.estimate = in.threshold + 0.001;
    in.estimate_stderr = 0.002;
    EXPECT_EQ(classify(in).kind, VerdictKind::ac_possible);

    in.upper = in.threshold - 0.01;  // inside epsilon, but the estimate is far off
    in.estimate = in.threshold - 0.1;
    EXPECT_EQ(classify(in).kind, VerdictKind::inconclusive);

    in.upper = 0;
    in.upper_stderr = 0.2;  // epsilon grows to 3 stderr
    EXPECT_NEAR(classify(in).epsilon, 0.6, 1e-15);
    EXPECT_EQ(classify(in).kind, VerdictKind::inconclusive);
}

TEST(Classify, ExclusionNeedsWitness) {
    VerdictInputs in;
    in.threshold = 1;
    in.upper = 0;
    try {
        classify(in);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::det_witness_missing);
    }
    in.upper = 1;
    in.estimate = 1;
    in.estimate_stderr = 0.01;
    EXPECT_EQ(classify(in).kind, VerdictKind::ac_possible);
}

TEST(Classify, MonotoneInEpsilon) {
    SplitMix64 rng(47);
    for (int t = 0; t < 2000; ++t) {
        VerdictInputs in;
        in.det_witness = true;
        in.threshold = rng.uniform();
        in.upper = in.threshold - 0.2 * rng.uniform();
        in.upper_stderr = 0.02 * rng.uniform();
        in.estimate = in.threshold + 0.05 * (rng.uniform() - 0.5);
        in.estimate_stderr = 0.02 * rng.uniform();
        in.epsilon_floor = 0;
        VerdictKind prev = classify(in).kind;
        for (double eps = 0.01; eps <= 0.25; eps += 0.01) {
            in.epsilon_floor = eps;
            auto k = classify(in).kind;
            if (prev != VerdictKind::ac_excluded) EXPECT_NE(k, VerdictKind::ac_excluded);
            if (prev == VerdictKind::ac_excluded) EXPECT_NE(k, VerdictKind::ac_possible);
            prev = k;
        }
    }
}

TEST(Classify, PossibleImpliesSqrtLambdaOnCorpus) {
    AnalyzeOptions opt;
    opt.samples = 4000;
    opt.birkhoff_N = 1000;
    opt.birkhoff_k = 4;
    opt.oracle_level = 10;
    opt.mahler_samples = 1 << 14;
    int possible = 0;
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        if (b.file.rule.kind == RuleKind::planar || !constant_length(b.file.rule)) continue;
        auto rep = analyze(b, opt);
        if (rep["verdict"]["kind"] != "AC_POSSIBLE") continue;
        ++possible;
        EXPECT_TRUE(rep["sqrt_lambda_criterion"]["satisfied"].get<bool>()) << name;
    }
    EXPECT_GE(possible, 1);
}
