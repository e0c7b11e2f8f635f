#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "regincl/inclusion.hpp"

using namespace regincl;

namespace {

InclusionDescriptor desc(std::initializer_list<std::initializer_list<Int>> m, std::vector<Int> b) {
    return validate_descriptor(InclusionMatrix(int_matrix(m)), DimensionVector(std::move(b)));
}

const IntMatrix kWorked = int_matrix({{3, 3, 0, 3}, {0, 0, 2, 2}});

} // namespace

TEST(Validate, WorkedExampleDimensions) {
    const auto d = desc({{3, 3, 0, 3}, {0, 0, 2, 2}}, {1, 1, 1, 1});
    EXPECT_EQ(d.a_dims.values(), (std::vector<Int>{9, 4}));
    EXPECT_EQ(d.s(), 2);
    EXPECT_EQ(d.r(), 4);
}

TEST(Validate, TrivialAndDiagonal) {
    EXPECT_EQ(desc({{1}}, {5}).a_dims.values(), (std::vector<Int>{5}));
    EXPECT_EQ(desc({{1, 1, 1, 1, 1}}, {1, 1, 1, 1, 1}).a_dims.values(), (std::vector<Int>{5}));
}

TEST(Validate, RejectsRedundantAndBadDims) {
    try {
        InclusionMatrix(int_matrix({{1, 0}, {0, 0}}));
        FAIL();
    } catch (const ValidationError &e) {
        EXPECT_NE(std::string(e.field()).find("inclusion_matrix"), std::string::npos);
    }
    EXPECT_THROW(InclusionMatrix(int_matrix({{1, 0}, {1, 0}})), ValidationError);
    EXPECT_THROW(InclusionMatrix(int_matrix({{1, -1}})), ValidationError);
    EXPECT_THROW(DimensionVector(std::vector<Int>{1, 0}), ValidationError);
    EXPECT_THROW(validate_descriptor(InclusionMatrix(int_matrix({{1, 1}})), DimensionVector(std::vector<Int>{1})),
                 ValidationError);
    EXPECT_FALSE(is_irredundant(IntMatrix::Zero(2, 2)));
    EXPECT_TRUE(is_irredundant(int_matrix({{1, 0}, {0, 2}})));
}

TEST(RowSupports, Examples) {
    const auto y = row_supports(InclusionMatrix(kWorked));
    ASSERT_EQ(y.size(), 2u);
    EXPECT_EQ(y[0].support, (std::vector<Index>{0, 1, 3}));
    EXPECT_EQ(y[1].support, (std::vector<Index>{2, 3}));
    const auto z = row_supports(InclusionMatrix(int_matrix({{4, 0, 5, 0}, {0, 6, 0, 7}})));
    EXPECT_EQ(z[0].support, (std::vector<Index>{0, 2}));
    EXPECT_EQ(z[1].support, (std::vector<Index>{1, 3}));
    EXPECT_EQ(row_supports(InclusionMatrix(int_matrix({{1}})))[0].support, (std::vector<Index>{0}));
}

TEST(SupportPartition, WorkedExampleWitness) {
    const auto res = check_support_partition(InclusionMatrix(kWorked));
    const auto *w = std::get_if<PartitionViolation>(&res);
    ASSERT_NE(w, nullptr);
    EXPECT_EQ(*w, (PartitionViolation{0, 1, 2, 3}));
    EXPECT_TRUE(witness_holds(InclusionMatrix(kWorked), FailureWitness{*w}));
}

TEST(SupportPartition, DisjointSupports) {
    const auto res = check_support_partition(InclusionMatrix(int_matrix({{2, 0}, {0, 3}})));
    const auto *p = std::get_if<SupportPartition>(&res);
    ASSERT_NE(p, nullptr);
    ASSERT_EQ(p->p(), 2);
    EXPECT_EQ(p->classes[0].rows, (std::vector<Index>{0}));
    EXPECT_EQ(p->classes[0].cols, (std::vector<Index>{0}));
    EXPECT_EQ(p->classes[1].rows, (std::vector<Index>{1}));
    EXPECT_EQ(p->classes[1].cols, (std::vector<Index>{1}));
}

// Entries from {0,1,2}: every pattern up to 3x3, checked against the quadruple loop.
TEST(SupportPartition, ExhaustiveAgainstQuadrupleOracle) {
    long checked = 0;
    for (Index s = 1; s <= 3; ++s)
        for (Index r = 1; r <= 3; ++r) {
            const Index cells = s * r;
            long total = 1;
            for (Index c = 0; c < cells; ++c) total *= 3;
            for (long code = 0; code < total; ++code) {
                IntMatrix m(s, r);
                long x = code;
                for (Index c = 0; c < cells; ++c, x /= 3) m(c / r, c % r) = x % 3;
                if (!is_irredundant(m)) continue;
                const auto res = check_support_partition(InclusionMatrix(m));
                const auto quad = oracle::quadruple_violation(m);
                ASSERT_EQ(std::holds_alternative<SupportPartition>(res), !quad.has_value()) << m;
                ASSERT_EQ(!quad.has_value(), oracle::supports_equal_or_disjoint(m));
                if (quad) {
                    const auto &w = std::get<PartitionViolation>(res);
                    ASSERT_EQ((oracle::Quad{w.i, w.k, w.j, w.l}), *quad) << m;
                }
                ++checked;
            }
        }
    EXPECT_GT(checked, 10000);
}

TEST(SupportPartition, Random4x4With012) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> e(0, 2);
    int checked = 0;
    while (checked < 20000) {
        IntMatrix m(4, 4);
        for (Index i = 0; i < 16; ++i) m(i / 4, i % 4) = e(rng);
        if (!is_irredundant(m)) continue;
        const auto quad = oracle::quadruple_violation(m);
        const auto res = check_support_partition(InclusionMatrix(m));
        ASSERT_EQ(std::holds_alternative<SupportPartition>(res), !quad.has_value());
        ++checked;
    }
}

TEST(Normalizer, Examples) {
    const auto a = is_normalizer_matrix(InclusionMatrix(kWorked));
    EXPECT_FALSE(a.is_normalizer);
    ASSERT_TRUE(a.failure.has_value());
    EXPECT_TRUE(std::holds_alternative<PartitionViolation>(*a.failure));
    EXPECT_TRUE(is_normalizer_matrix(InclusionMatrix(int_matrix({{2, 2, 0}, {0, 0, 5}}))).is_normalizer);
    const auto c = is_normalizer_matrix(InclusionMatrix(int_matrix({{1, 2}})));
    EXPECT_FALSE(c.is_normalizer);
    EXPECT_TRUE(std::holds_alternative<UnequalRowEntries>(*c.failure));
    EXPECT_FALSE(c.reason.empty());
}

TEST(Normalizer, RowEntryFailureTakesPriority) {
    // Both conditions fail; the row-entry witness comes first.
    const auto m = InclusionMatrix(int_matrix({{1, 2, 0}, {0, 1, 1}}));
    const auto c = is_normalizer_matrix(m);
    ASSERT_TRUE(c.failure.has_value());
    const auto *w = std::get_if<UnequalRowEntries>(&*c.failure);
    ASSERT_NE(w, nullptr);
    EXPECT_EQ(w->row, 0);
    EXPECT_TRUE(witness_holds(m, *c.failure));
}

TEST(Normalizer, InvariantUnderPseudoEquivalence) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> e(0, 2);
    for (int n = 0; n < 500; ++n) {
        IntMatrix m(3, 4);
        for (Index i = 0; i < 12; ++i) m(i / 4, i % 4) = e(rng);
        if (!is_irredundant(m)) continue;
        const auto p = oracle::apply(m, oracle::random_perm(3, rng), oracle::random_perm(4, rng));
        EXPECT_EQ(is_normalizer_matrix(InclusionMatrix(m)).is_normalizer,
                  is_normalizer_matrix(InclusionMatrix(p)).is_normalizer);
        EXPECT_EQ(is_normalizer_matrix(InclusionMatrix(m)).is_normalizer,
                  oracle::rows_constant(m) && oracle::supports_equal_or_disjoint(m));
    }
}

TEST(Canonicalize, Examples) {
    const auto a = canonicalize(InclusionMatrix(int_matrix({{0, 2}, {3, 0}})));
    EXPECT_EQ(a.row_perm, (std::vector<Index>{0, 1}));
    EXPECT_EQ(a.col_perm, (std::vector<Index>{1, 0}));
    ASSERT_EQ(a.blocks.size(), 2u);
    EXPECT_EQ(a.blocks[0].entries(), int_matrix({{2}}));
    EXPECT_EQ(a.blocks[1].entries(), int_matrix({{3}}));
    EXPECT_EQ(permute(int_matrix({{0, 2}, {3, 0}}), a.row_perm, a.col_perm), a.block_diagonal());

    const auto b = canonicalize(InclusionMatrix(int_matrix({{2, 2, 0}, {0, 0, 5}})));
    EXPECT_EQ(b.row_perm, (std::vector<Index>{0, 1}));
    EXPECT_EQ(b.col_perm, (std::vector<Index>{0, 1, 2}));
    EXPECT_EQ(b.blocks[0].entries(), int_matrix({{2, 2}}));
    EXPECT_EQ(b.blocks[1].entries(), int_matrix({{5}}));

    const auto c = canonicalize(InclusionMatrix(int_matrix({{4, 4, 4}})));
    ASSERT_EQ(c.blocks.size(), 1u);
    EXPECT_EQ(c.col_perm, (std::vector<Index>{0, 1, 2}));
}

TEST(Canonicalize, RejectsNonNormalizer) {
    try {
        canonicalize(InclusionMatrix(kWorked));
        FAIL();
    } catch (const NotNormalizerError &e) {
        EXPECT_TRUE(std::holds_alternative<PartitionViolation>(e.witness()));
    }
}

TEST(Canonicalize, ClassesOrderedBySmallestRow) {
    const IntMatrix m = int_matrix({{0, 0, 1}, {2, 2, 0}, {0, 0, 3}});
    const auto c = canonicalize(InclusionMatrix(m));
    EXPECT_EQ(c.row_perm, (std::vector<Index>{0, 2, 1}));
    EXPECT_EQ(c.col_perm, (std::vector<Index>{2, 0, 1}));
    EXPECT_EQ(permute(m, c.row_perm, c.col_perm), c.block_diagonal());
}

TEST(PseudoEquivalence, Examples) {
    EXPECT_TRUE(pseudo_equivalent(int_matrix({{0, 2}, {3, 0}}), int_matrix({{2, 0}, {0, 3}})));
    EXPECT_TRUE(pseudo_equivalent(int_matrix({{1, 2}}), int_matrix({{2, 1}})));
    EXPECT_FALSE(pseudo_equivalent(int_matrix({{1, 1}, {1, 2}}), int_matrix({{1, 1}, {2, 2}})));
    const auto pe = find_pseudo_equivalence(int_matrix({{0, 2}, {3, 0}}), int_matrix({{2, 0}, {0, 3}}));
    ASSERT_TRUE(pe.has_value());
    EXPECT_EQ(permute(int_matrix({{0, 2}, {3, 0}}), pe->row_perm, pe->col_perm), int_matrix({{2, 0}, {0, 3}}));
}

TEST(PseudoEquivalence, AgreesWithBruteForce) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> e(0, 2);
    for (int n = 0; n < 400; ++n) {
        const Index s = 1 + n % 4, r = 1 + (n / 4) % 4;
        IntMatrix a(s, r);
        for (Index i = 0; i < s * r; ++i) a(i / r, i % r) = e(rng);
        IntMatrix b = (n % 2 == 0) ? oracle::apply(a, oracle::random_perm(s, rng), oracle::random_perm(r, rng)) : a;
        if (n % 2 == 1) b(rng() % s, rng() % r) = e(rng);
        ASSERT_EQ(pseudo_equivalent(a, b), oracle::pseudo_equivalent(a, b)) << a << "\n\n" << b;
    }
}

TEST(PseudoEquivalence, EquivalenceRelation) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> e(0, 1);
    std::vector<IntMatrix> pool;
    for (int n = 0; n < 12; ++n) {
        IntMatrix a(3, 3);
        for (Index i = 0; i < 9; ++i) a(i / 3, i % 3) = e(rng);
        pool.push_back(a);
        pool.push_back(oracle::apply(a, oracle::random_perm(3, rng), oracle::random_perm(3, rng)));
    }
    for (const auto &a : pool) {
        EXPECT_TRUE(pseudo_equivalent(a, a));
        for (const auto &b : pool) {
            const bool ab = pseudo_equivalent(a, b);
            EXPECT_EQ(ab, pseudo_equivalent(b, a));
            if (!ab) continue;
            for (const auto &c : pool)
                if (pseudo_equivalent(b, c)) EXPECT_TRUE(pseudo_equivalent(a, c));
        }
    }
}

TEST(PseudoEquivalence, SizeLimit) {
    const IntMatrix big = IntMatrix::Ones(11, 2);
    EXPECT_THROW(pseudo_equivalent(big, big), SizeLimitError);
    EXPECT_NO_THROW(pseudo_equivalent(IntMatrix::Ones(10, 10), IntMatrix::Ones(10, 10)));
}

TEST(Permutations, Helpers) {
    EXPECT_TRUE(is_permutation({2, 0, 1}, 3));
    EXPECT_FALSE(is_permutation({0, 0, 1}, 3));
    EXPECT_EQ(inverse_permutation({2, 0, 1}), (std::vector<Index>{1, 2, 0}));
    EXPECT_THROW(permute(kWorked, {0, 0}, {0, 1, 2, 3}), ShapeError);
}
