#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "common.hpp"

using namespace infl;
using testing_util::corpus;
using testing_util::word_rule;

namespace {

const double tau = (1 + std::sqrt(5.0)) / 2;

IPoly ip(std::initializer_list<long long> c) {
    IPoly p;
    for (auto x : c) p.push_back(Int(x));
    return p;
}

FieldElement elt(const FieldPtr& f, std::vector<long long> c) {
    std::vector<Rat> r;
    for (auto x : c) r.push_back(Rat(x));
    return FieldElement(f, r);
}

} // namespace

TEST(SubstitutionMatrix, Fibonacci) {
    auto r = word_rule("ab", {"ab", "a"});
    EXPECT_EQ(substitution_matrix(r), (IMat{{1, 1}, {1, 0}}));
}

TEST(SubstitutionMatrix, ThueMorse) {
    auto r = word_rule("01", {"01", "10"});
    EXPECT_EQ(substitution_matrix(r), (IMat{{1, 1}, {1, 1}}));
}

TEST(SubstitutionMatrix, RudinShapiroReturnWords) {
    const IMat printed = {{0, 1, 0, 1, 1, 0, 1, 0}, {0, 1, 0, 1, 0, 0, 1, 1}, {0, 0, 0, 1, 0, 0, 1, 1}, {1, 0, 0, 0, 0, 0, 0, 0},
                          {0, 0, 0, 0, 0, 1, 0, 1}, {0, 0, 0, 0, 0, 0, 1, 1}, {0, 0, 1, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 0, 0}};
    auto f = testing_util::corpus_file("rs_return_words");
    EXPECT_EQ(substitution_matrix(f.rule), printed);
    auto r = word_rule("abcdefgh", {"d", "ba", "g", "bca", "ha", "he", "bcfa", "bcfe"});
    EXPECT_EQ(substitution_matrix(r), printed);
}

TEST(SubstitutionMatrix, ColumnSumsAreImageLengths) {
    for (auto& name : testing_util::corpus_names()) {
        auto f = testing_util::corpus_file(name);
        if (f.rule.kind == RuleKind::planar) continue;
        auto M = substitution_matrix(f.rule);
        for (int j = 0; j < f.rule.size(); ++j) {
            long long s = 0;
            for (int i = 0; i < f.rule.size(); ++i) s += M[i][j];
            EXPECT_EQ(s, static_cast<long long>(f.rule.images[j].size())) << name;
        }
    }
}

TEST(Primitive, Cases) {
    EXPECT_TRUE(is_primitive({{1, 1}, {1, 0}}));
    EXPECT_FALSE(is_primitive({{1, 0}, {0, 1}}));
    EXPECT_FALSE(is_primitive({{0, 1}, {1, 0}}));
    EXPECT_TRUE(is_primitive(substitution_matrix(testing_util::corpus_file("rs_return_words").rule)));
}

TEST(PerronFrobenius, Fibonacci) {
    auto pf = pf_data({{1, 1}, {1, 0}});
    EXPECT_NEAR(pf.lambda, tau, 1e-10);
    EXPECT_NEAR(pf.left[0], tau, 1e-10);
    EXPECT_NEAR(pf.left[1], 1.0, 1e-12);
    EXPECT_NEAR(pf.right[0], 1 / tau, 1e-10);
    EXPECT_NEAR(pf.right[1], 1 / (tau * tau), 1e-10);
}

TEST(PerronFrobenius, ThueMorse) {
    auto pf = pf_data({{1, 1}, {1, 1}});
    EXPECT_NEAR(pf.lambda, 2, 1e-12);
    EXPECT_NEAR(pf.left[0], 1, 1e-12);
    EXPECT_NEAR(pf.left[1], 1, 1e-12);
    EXPECT_NEAR(pf.right[0], 0.5, 1e-12);
}

TEST(PerronFrobenius, RudinShapiroReturnWords) {
    auto b = corpus("rs_return_words");
    EXPECT_NEAR(b.pf.lambda, 2, 1e-9);
    const double left[] = {2, 2, 4, 4, 6, 8, 8, 10}, right[] = {4, 4, 2, 2, 1, 1, 1, 1};
    for (int i = 0; i < 8; ++i) {
        EXPECT_NEAR(b.pf.left[i], left[i] / 2, 1e-9);
        EXPECT_NEAR(b.pf.right[i], right[i] / 16, 1e-9);
    }
    // 0 is a defective eigenvalue, so the spectrum is checked on the exact characteristic polynomial
    EXPECT_EQ(poly::charpoly(b.M), ip({0, 0, 0, 0, 4, 2, -4, -1, 1}));
}

TEST(PerronFrobenius, ResidualsOnCorpus) {
    for (auto& name : testing_util::corpus_names()) {
        auto b = corpus(name);
        const int n = static_cast<int>(b.M.size());
        double s = 0;
        for (int i = 0; i < n; ++i) {
            double mr = 0, lm = 0;
            for (int j = 0; j < n; ++j) {
                mr += b.M[i][j] * b.pf.right[j];
                lm += b.pf.left[j] * b.M[j][i];
            }
            EXPECT_NEAR(mr, b.pf.lambda * b.pf.right[i], 1e-12 * b.pf.lambda) << name;
            EXPECT_NEAR(lm, b.pf.lambda * b.pf.left[i], 1e-12 * b.pf.lambda * b.pf.left[i] * 10) << name;
            EXPECT_GT(b.pf.right[i], 0);
            EXPECT_GT(b.pf.left[i], 0);
            s += b.pf.right[i];
        }
        EXPECT_NEAR(s, 1.0, 1e-15) << name;
    }
}

TEST(PerronFrobenius, GlbTranscriptionHasPeriodTwo) {
    auto g = testing_util::glb();
    const int n = static_cast<int>(g.M.size());
    std::vector<int> side(n, -1);
    side[0] = 0;
    for (bool grew = true; grew;) {
        grew = false;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (g.M[i][j] && side[j] >= 0 && side[i] < 0) side[i] = 1 - side[j], grew = true;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (g.M[i][j]) EXPECT_NE(side[i], side[j]) << g.file.rule.alphabet[i] << " in " << g.file.rule.alphabet[j];
    try {
        testing_util::corpus("glb");
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_primitive);
    }
}

TEST(PerronFrobenius, NotPrimitiveThrows) {
    try {
        pf_data({{1, 0}, {0, 1}});
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_primitive);
    }
}

TEST(RulePower, D4Square) {
    auto f = testing_util::corpus_file("d4_example");
    auto r2 = rule_power(f.rule, 2);
    const char* want[] = {"adcb", "bcda", "cbad", "dabc"};
    for (int j = 0; j < 4; ++j) {
        std::string w;
        for (int x : r2.images[j]) w += r2.alphabet[x];
        EXPECT_EQ(w, want[j]);
    }
}

TEST(RulePower, FibonacciSquareAndIdentity) {
    auto r = word_rule("ab", {"ab", "a"});
    auto r2 = rule_power(r, 2);
    EXPECT_EQ(r2.images, (std::vector<std::vector<int>>{{0, 1, 0}, {0, 1}}));
    EXPECT_EQ(rule_power(r, 1).images, r.images);
}

TEST(RulePower, MatrixOfPowerIsPowerOfMatrix) {
    for (auto& name : testing_util::corpus_names()) {
        auto f = testing_util::corpus_file(name);
        if (f.rule.kind == RuleKind::planar) continue;
        auto M = substitution_matrix(f.rule);
        const int top = f.rule.kind == RuleKind::block ? 3 : 5;
        for (int n = 1; n <= top; ++n) EXPECT_EQ(substitution_matrix(rule_power(f.rule, n)), mat_pow(M, n)) << name << " n=" << n;
    }
}

TEST(Field, FibonacciAutoDerived) {
    auto f = field_from_charpoly({{1, 1}, {1, 0}});
    EXPECT_EQ(f->min_poly, ip({-1, -1, 1}));
    EXPECT_EQ(f->degree(), 2);
    EXPECT_EQ(f->companion, (IMat{{0, 1}, {1, 1}}));
}

TEST(Field, ConstantLengthIsRational) {
    auto f = field_from_charpoly({{1, 1}, {1, 1}});
    EXPECT_EQ(f->min_poly, ip({-2, 1}));
    auto g = field_from_charpoly(substitution_matrix(testing_util::corpus_file("rho3").rule));
    EXPECT_EQ(g->min_poly, ip({-4, 1}));
}

TEST(Field, GlbHintAccepted) {
    auto b = testing_util::glb();
    EXPECT_EQ(b.field->min_poly, ip({5, 0, -5, 0, 1}));
    EXPECT_EQ(b.field->degree(), 4);
    EXPECT_NEAR(b.field->lambda, 2 * std::cos(M_PI / 10), 1e-12);
}

TEST(Field, WrongHintRejected) {
    try {
        field_from_charpoly({{1, 1}, {1, 0}}, ip({-2, 0, 1}));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::min_poly_not_found);
    }
}

TEST(Field, DefiningRelations) {
    auto f = make_field(ip({-1, -1, 1}), 1.6);
    auto t = FieldElement::gen(f);
    EXPECT_EQ(t * t, elt(f, {1, 1}));
    auto a = elt(f, {3, -7});
    EXPECT_EQ(a + FieldElement(f), a);
    auto g = make_field(ip({5, 0, -5, 0, 1}), 1.9);
    auto l = FieldElement::gen(g);
    EXPECT_EQ(l * l * l * l, elt(g, {-5, 0, 5, 0}));
}

TEST(Field, RingAxiomsAndEmbedding) {
    auto f = make_field(ip({5, 0, -5, 0, 1}), 1.9);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long long> d(-1000, 1000);
    auto rnd = [&] {
        std::vector<Rat> c;
        for (int i = 0; i < 4; ++i) c.push_back(Rat(d(rng), 1 + std::abs(d(rng))));
        return FieldElement(f, c);
    };
    for (int t = 0; t < 50; ++t) {
        auto a = rnd(), b = rnd(), c = rnd();
        EXPECT_EQ(a * b, b * a);
        EXPECT_EQ((a * b) * c, a * (b * c));
        EXPECT_EQ(a * (b + c), a * b + a * c);
        const double x = a.to_double(), y = b.to_double();
        EXPECT_NEAR((a * b).to_double(), x * y, 1e-8 * std::max(1.0, std::abs(x * y)));
        if (!a.is_zero()) EXPECT_EQ(a * a.inverse(), FieldElement::rational(f, Rat(1)));
    }
}

TEST(Field, MismatchThrows) {
    auto f = make_field(ip({-1, -1, 1}), 1.6);
    auto g = make_field(ip({-2, 0, 1}), 1.4);
    try {
        (void)(FieldElement::gen(f) + FieldElement::gen(g));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::field_mismatch);
    }
}

TEST(Field, ExactLeftVectorFibonacci) {
    auto f = field_from_charpoly({{1, 1}, {1, 0}});
    auto pf = pf_data({{1, 1}, {1, 0}}, f);
    ASSERT_EQ(pf.exact_left.size(), 2u);
    EXPECT_EQ(pf.exact_left[0], FieldElement::gen(f));
    EXPECT_EQ(pf.exact_left[1], FieldElement::rational(f, Rat(1)));
}
