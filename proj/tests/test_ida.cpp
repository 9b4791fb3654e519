#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "common.hpp"

using namespace infl;
using testing_util::bundle_of;
using testing_util::corpus;

namespace {

int ida_of(const DisplacementMatrix& T) { return ida_dimension(digit_matrices(T)).dim; }

SubstitutionRule relabel(const SubstitutionRule& r, const std::vector<int>& p) {
    SubstitutionRule s = r;
    for (int a = 0; a < r.size(); ++a) s.alphabet[p[a]] = r.alphabet[a];
    for (int a = 0; a < r.size(); ++a) {
        std::vector<int> im;
        for (int x : r.images[a]) im.push_back(p[x]);
        s.images[p[a]] = im;
    }
    s.validate();
    return s;
}

} // namespace

TEST(Digits, PeriodDoubling) {
    auto dd = digit_matrices(corpus("period_doubling").T);
    ASSERT_EQ(dd.matrices.size(), 2u);
    EXPECT_EQ(dd.matrices[0], (IMat{{1, 1}, {0, 0}}));
    EXPECT_EQ(dd.matrices[1], (IMat{{0, 1}, {1, 0}}));
}

TEST(Digits, ThueMorse) {
    auto dd = digit_matrices(corpus("thue_morse").T);
    ASSERT_EQ(dd.matrices.size(), 2u);
    EXPECT_EQ(dd.matrices[0], (IMat{{1, 0}, {0, 1}}));
    EXPECT_EQ(dd.matrices[1], (IMat{{0, 1}, {1, 0}}));
}

TEST(Digits, Fibonacci) {
    auto dd = digit_matrices(corpus("fibonacci").T);
    ASSERT_EQ(dd.matrices.size(), 2u);
    EXPECT_EQ(dd.matrices[0], (IMat{{1, 1}, {0, 0}}));
    EXPECT_EQ(dd.matrices[1], (IMat{{0, 0}, {1, 0}}));
}

TEST(Digits, SumIsSubstitutionMatrixAndEntriesBinary) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        auto dd = digit_matrices(b.T);
        EXPECT_EQ(dd.sum(), b.M) << name;
        for (auto& D : dd.matrices)
            for (auto& row : D)
                for (auto x : row) EXPECT_TRUE(x == 0 || x == 1) << name;
    }
}

TEST(Digits, D4SquareIsKleinGroup) {
    auto b = corpus("d4_example");
    auto T2 = displacement_compose(b.T, 2);
    auto dd = digit_matrices(T2);
    ASSERT_EQ(dd.matrices.size(), 4u);
    for (auto& D : dd.matrices) {
        auto E = to_eigen(D);
        EXPECT_TRUE((E * E).isIdentity(0)) << "involution";
        EXPECT_TRUE((E.colwise().sum().array() == 1).all());
    }
}

TEST(Ida, KnownDimensions) {
    EXPECT_EQ(ida_of(corpus("thue_morse").T), 2);
    EXPECT_EQ(ida_of(corpus("period_doubling").T), 3);
    auto d4 = corpus("d4_example");
    EXPECT_EQ(ida_of(d4.T), 6);
    EXPECT_EQ(ida_of(displacement_compose(d4.T, 2)), 4);
    EXPECT_EQ(ida_of(corpus("tm_return_words").T), 9);
    EXPECT_EQ(ida_of(corpus("fibonacci").T), 4);
}

TEST(Ida, Irreducibility) {
    auto A = ida_dimension(digit_matrices(corpus("tm_return_words").T));
    EXPECT_TRUE(is_irreducible(A, 3));
    EXPECT_TRUE(is_irreducible(ida_dimension(digit_matrices(corpus("fibonacci").T)), 2));
    EXPECT_FALSE(is_irreducible(ida_dimension(digit_matrices(corpus("thue_morse").T)), 2));
    EXPECT_TRUE(is_irreducible(ida_dimension(digit_matrices(corpus("rs_return_words").T)), 8));
}

TEST(Ida, ClosedUnderGenerators) {
    for (auto name : {"d4_example", "period_doubling", "block3_example", "rho_V"}) {
        auto b = corpus(name);
        auto dd = digit_matrices(b.T);
        auto A = ida_dimension(dd);
        EXPECT_LE(A.dim, b.T.n * b.T.n);
        for (auto& X : A.basis)
            for (auto& G : dd.matrices) {
                Eigen::MatrixXd Y = X * to_eigen(G);
                for (auto& Z : A.basis) Y -= (Z.cwiseProduct(Y)).sum() * Z;
                EXPECT_LE(Y.norm(), 1e-9) << name;
            }
    }
}

TEST(Ida, RelabellingInvariance) {
    std::mt19937 rng(5);
    for (auto& name : testing_util::corpus_names()) {
        auto f = testing_util::corpus_file(name);
        if (f.rule.kind != RuleKind::one_dim) continue;
        const int dim = ida_of(corpus(name).T);
        for (int t = 0; t < 3; ++t) {
            std::vector<int> p(f.rule.size());
            std::iota(p.begin(), p.end(), 0);
            std::shuffle(p.begin(), p.end(), rng);
            auto b = bundle_of(relabel(f.rule, p));
            EXPECT_EQ(ida_of(b.T), dim) << name;
        }
    }
}

TEST(Ida, PowerAlgebrasShrink) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        const int top = b.file.rule.kind == RuleKind::planar ? 2 : 4;
        std::vector<int> dim(top + 1);
        for (int n = 1; n <= top; ++n) dim[n] = ida_of(displacement_compose(b.T, n));
        for (int n = 1; n <= top; ++n)
            for (int m = 1; m <= n; ++m)
                if (n % m == 0) EXPECT_LE(dim[n], dim[m]) << name << " n=" << n << " m=" << m;
    }
}

TEST(Ida, BijectiveAbelianBound) {
    for (auto name : {"thue_morse", "block3_example"}) {
        auto b = corpus(name);
        auto dd = digit_matrices(b.T);
        for (auto& X : dd.matrices)
            for (auto& Y : dd.matrices) EXPECT_EQ(mat_mul(X, Y), mat_mul(Y, X)) << name;
        EXPECT_LE(ida_of(b.T), b.T.n) << name;
    }
    auto d4 = corpus("d4_example");
    auto dd = digit_matrices(displacement_compose(d4.T, 2));
    for (auto& X : dd.matrices)
        for (auto& Y : dd.matrices) EXPECT_EQ(mat_mul(X, Y), mat_mul(Y, X));
}

TEST(ColumnGroup, D4) {
    auto f = testing_util::corpus_file("d4_example");
    auto g = column_group(f.rule);
    EXPECT_EQ(g.order, 8u);
    EXPECT_FALSE(g.abelian);
    auto g2 = column_group(rule_power(f.rule, 2));
    EXPECT_EQ(g2.order, 4u);
    EXPECT_TRUE(g2.abelian);
    EXPECT_TRUE(g2.bijective);
}

TEST(ColumnGroup, Rho3) {
    auto g = column_group(testing_util::corpus_file("rho3").rule);
    using K = ColumnGroup::ColumnKind;
    EXPECT_EQ(g.columns, (std::vector<K>{K::bijective, K::constant, K::bijective, K::constant}));
    EXPECT_FALSE(g.bijective);
    EXPECT_TRUE(g.bijective_or_constant);
    EXPECT_EQ(g.order, 3u);
    EXPECT_TRUE(g.abelian);
    EXPECT_TRUE(g.transitive);
}

TEST(ColumnGroup, RhoV) {
    auto g = column_group(testing_util::corpus_file("rho_V").rule);
    EXPECT_TRUE(g.bijective_or_constant);
    EXPECT_EQ(g.order, 4u);
    EXPECT_TRUE(g.abelian);
    EXPECT_FALSE(g.transitive);
    ASSERT_EQ(g.orbits.size(), 2u);
    EXPECT_EQ(g.orbits[0], (std::vector<int>{0, 1}));
    EXPECT_EQ(g.orbits[1], (std::vector<int>{2, 3}));
    for (auto& x : g.elements)
        for (auto& y : g.elements) {
            std::vector<int> xy(4), yx(4);
            for (int a = 0; a < 4; ++a) {
                xy[a] = x[y[a]];
                yx[a] = y[x[a]];
            }
            EXPECT_EQ(xy, yx);
        }
}

TEST(ColumnGroup, OrderDividesFactorial) {
    for (auto name : {"thue_morse", "d4_example", "rho3", "rho_V", "block3_example", "rudin_shapiro"}) {
        auto g = column_group(testing_util::corpus_file(name).rule);
        long long fact = 1;
        for (int k = 2; k <= static_cast<int>(g.columns.empty() ? 1 : testing_util::corpus_file(name).rule.size()); ++k) fact *= k;
        EXPECT_EQ(fact % static_cast<long long>(g.order), 0) << name;
    }
}

TEST(ColumnGroup, NonConstantLengthThrows) {
    try {
        column_group(testing_util::corpus_file("fibonacci").rule);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_constant_length);
    }
}
