#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "common.hpp"

using namespace infl;
using testing_util::bundle_of;
using testing_util::corpus;
using testing_util::word_rule;

namespace {

const double tau = (1 + std::sqrt(5.0)) / 2;

std::vector<double> floats(const DisplacementMatrix& T, int i, int j) {
    std::vector<double> out;
    for (auto& v : T.sets[i][j]) out.push_back(T.lat.to_float(v)[0]);
    return out;
}

// the two sides may live in different fields (tau vs tau^2), so points are compared as reals
std::vector<std::vector<double>> points(const DisplacementMatrix& T, int i, int j) {
    std::vector<std::vector<double>> out;
    for (auto& v : T.sets[i][j]) out.push_back(T.lat.to_float(v));
    std::sort(out.begin(), out.end());
    return out;
}

bool same_points(const DisplacementMatrix& A, const DisplacementMatrix& B, int i, int j) {
    auto a = points(A, i, j), b = points(B, i, j);
    if (a.size() != b.size()) return false;
    for (std::size_t s = 0; s < a.size(); ++s)
        for (std::size_t c = 0; c < a[s].size(); ++c)
            if (std::abs(a[s][c] - b[s][c]) > 1e-9) return false;
    return true;
}

} // namespace

TEST(Displacement, FibonacciSets) {
    auto b = corpus("fibonacci");
    EXPECT_EQ(floats(b.T, 0, 0), std::vector<double>{0.0});
    EXPECT_EQ(floats(b.T, 0, 1), std::vector<double>{0.0});
    ASSERT_EQ(b.T.sets[1][0].size(), 1u);
    EXPECT_NEAR(floats(b.T, 1, 0)[0], tau, 1e-12);
    EXPECT_TRUE(b.T.sets[1][1].empty());
    auto x = b.T.lat.to_exact(b.T.sets[1][0][0]);
    EXPECT_EQ(x[0], FieldElement::gen(b.field));
}

TEST(Displacement, CardinalityIsSubstitutionMatrix) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        EXPECT_EQ(b.T.card(), b.M) << name;
    }
}

TEST(Displacement, TilesFitInSupertiles) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        if (b.T.lat.d != 1) continue;
        for (int i = 0; i < b.T.n; ++i)
            for (int j = 0; j < b.T.n; ++j)
                for (double t : floats(b.T, i, j)) {
                    EXPECT_GE(t, 0.0) << name;
                    EXPECT_LT(t, b.pf.lambda * b.T.volumes[j] - 1e-12) << name;
                }
    }
}

TEST(Displacement, ExpansionMatchesLambda) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        EXPECT_TRUE(b.T.Q.expansive()) << name;
        EXPECT_NEAR(b.T.Q.det_abs(), b.pf.lambda, 1e-9 * b.pf.lambda) << name;
    }
}

TEST(Displacement, BlockTrivialIdentity) {
    SubstitutionRule r;
    r.alphabet = {"a"};
    r.kind = RuleKind::block;
    r.shape = {1};
    r.images = {{0}};
    auto T = displacement_block(r);
    ASSERT_EQ(T.sets[0][0].size(), 1u);
    EXPECT_EQ(T.sets[0][0][0], LVec{0});
}

TEST(Displacement, ThueMorseAsBlockMatchesOneDim) {
    auto b = corpus("thue_morse");
    SubstitutionRule r = b.file.rule;
    r.kind = RuleKind::block;
    r.shape = {2};
    auto T = displacement_block(r);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_EQ(floats(T, i, j), floats(b.T, i, j));
}

TEST(Displacement, DuplicatesAreAnError) {
    auto b = corpus("thue_morse");
    DisplacementMatrix T = b.T;
    T.sets[0][0].push_back(T.sets[0][0][0]);
    try {
        sort_sets(T);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::overlap_detected);
    }
}

TEST(Compose, IdentityPower) {
    auto b = corpus("fibonacci");
    auto T1 = displacement_compose(b.T, 1);
    EXPECT_EQ(T1.sets, b.T.sets);
}

TEST(Compose, FibonacciSquare) {
    auto b = corpus("fibonacci");
    auto T2 = displacement_compose(b.T, 2);
    auto b2 = bundle_of(rule_power(b.file.rule, 2));
    auto aa = floats(T2, 0, 0);
    ASSERT_EQ(aa.size(), 2u);
    EXPECT_NEAR(aa[0], 0, 1e-12);
    EXPECT_NEAR(aa[1], tau + 1, 1e-12);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_TRUE(same_points(T2, b2.T, i, j)) << i << j;
}

TEST(Compose, CardinalityIsMatrixPower) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        const int top = b.file.rule.kind == RuleKind::planar ? 2 : 4;
        for (int n = 1; n <= top; ++n) EXPECT_EQ(displacement_compose(b.T, n).card(), mat_pow(b.M, n)) << name << " n=" << n;
    }
}

TEST(Compose, AgreesWithPowerOfRule) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        if (b.file.rule.kind == RuleKind::planar) continue;
        for (int n = 2; n <= 3; ++n) {
            auto Tn = displacement_compose(b.T, n);
            auto bn = bundle_of(rule_power(b.file.rule, n));
            for (int i = 0; i < b.T.n; ++i)
                for (int j = 0; j < b.T.n; ++j) EXPECT_TRUE(same_points(Tn, bn.T, i, j)) << name << " n=" << n;
        }
    }
}

TEST(Stone, PassesOnCorpus) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        auto rep = verify_stone_inflation(b.T, b.T.volumes);
        EXPECT_TRUE(rep.ok) << name << (rep.violations.empty() ? "" : ": " + rep.violations[0]);
    }
}

TEST(Stone, GlbGeometryPasses) {
    auto T = testing_util::glb().T;
    auto rep = verify_stone_inflation(T, T.volumes);
    EXPECT_TRUE(rep.ok) << (rep.violations.empty() ? "" : rep.violations[0]);
}

TEST(Stone, CorruptedSetIsFlagged) {
    for (auto name : {"fibonacci", "glb", "block3_example"}) {
        DisplacementMatrix T = testing_util::displacement_of(name);
        for (auto& row : T.sets) {
            bool done = false;
            for (auto& s : row)
                if (!s.empty()) {
                    s.pop_back();
                    done = true;
                    break;
                }
            if (done) break;
        }
        auto rep = verify_stone_inflation(T, T.volumes);
        EXPECT_FALSE(rep.ok) << name;
        EXPECT_FALSE(rep.violations.empty()) << name;
    }
}

TEST(Lift, ConstantLength) {
    auto b = corpus("thue_morse");
    auto L = torus_lift(b.T);
    EXPECT_EQ(L.D, 1);
    EXPECT_EQ(L.C, (IMat{{2}}));
    EXPECT_EQ(torus_lift(corpus("rho3").T).C, (IMat{{4}}));
}

TEST(Lift, FibonacciCompanion) {
    auto L = torus_lift(corpus("fibonacci").T);
    EXPECT_EQ(L.D, 2);
    EXPECT_EQ(L.C, (IMat{{0, 1}, {1, 1}}));
    EXPECT_EQ(L.entries.size(), 3u);
}

TEST(Lift, Glb) {
    auto b = testing_util::glb();
    auto L = torus_lift(b.T);
    EXPECT_EQ(L.D, 4);
    ASSERT_EQ(L.C.size(), 4u);
    // the expansion's eigenvalues reappear in the integer flow matrix
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(L.C), false);
    Eigen::EigenSolver<Eigen::MatrixXd> eq(b.T.Q.Qf, false);
    for (int a = 0; a < eq.eigenvalues().size(); ++a) {
        double best = 1e9;
        for (int c = 0; c < 4; ++c) best = std::min(best, std::abs(es.eigenvalues()[c] - eq.eigenvalues()[a]));
        EXPECT_LT(best, 1e-9);
    }
}

TEST(Patch, FibonacciLevelThree) {
    auto b = corpus("fibonacci");
    auto p = generate_patch(b.T, 0, 3);
    EXPECT_EQ(p.type, (std::vector<int>{0, 1, 0, 0, 1}));
    const double want[] = {0, tau, tau + 1, 2 * tau + 1, 3 * tau + 1};
    for (int t = 0; t < 5; ++t) EXPECT_NEAR(b.T.lat.to_float(p.pos[t])[0], want[t], 1e-12);
}

TEST(Patch, ThueMorseLevelTwo) {
    auto b = corpus("thue_morse");
    auto p = generate_patch(b.T, 0, 2);
    EXPECT_EQ(p.type, (std::vector<int>{0, 1, 1, 0}));
    for (int t = 0; t < 4; ++t) EXPECT_NEAR(b.T.lat.to_float(p.pos[t])[0], t, 1e-12);
}

TEST(Patch, LevelZeroIsOneTile) {
    auto b = corpus("rs_return_words");
    auto p = generate_patch(b.T, 3, 0);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p.type[0], 3);
    EXPECT_NEAR(b.T.lat.to_float(p.pos[0])[0], 0, 0);
}

TEST(Patch, CountsFollowMatrixPowers) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        const int levels = b.file.rule.kind == RuleKind::one_dim ? 5 : 2;
        for (int seed = 0; seed < b.T.n; ++seed) {
            auto p = generate_patch(b.T, seed, levels);
            std::vector<long long> cnt(b.T.n, 0);
            for (int x : p.type) ++cnt[x];
            auto Mn = mat_pow(b.M, levels);
            for (int i = 0; i < b.T.n; ++i) EXPECT_EQ(cnt[i], Mn[i][seed]) << name;
        }
    }
}
