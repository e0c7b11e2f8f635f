#include <gtest/gtest.h>

#include "oracles.hpp"
#include "regincl/algebra.hpp"
#include "regincl/classifier.hpp"

using namespace regincl;

namespace {

EmbeddedInclusion make(std::initializer_list<std::initializer_list<Int>> m, std::vector<Int> b) {
    return EmbeddedInclusion(validate_descriptor(InclusionMatrix(int_matrix(m)), DimensionVector(std::move(b))));
}

double dist(const AlgebraElement &a, const AlgebraElement &b) { return (a - b).max_abs(); }

// Random irredundant descriptor with dim A <= 64.
InclusionDescriptor random_descriptor(std::mt19937_64 &rng) {
    std::uniform_int_distribution<int> e(0, 2);
    while (true) {
        const Index s = 1 + static_cast<Index>(rng() % 3), r = 1 + static_cast<Index>(rng() % 3);
        IntMatrix m(s, r);
        for (Index i = 0; i < m.size(); ++i) m.data()[i] = e(rng);
        if (!is_irredundant(m)) continue;
        std::vector<Int> b;
        for (Index j = 0; j < r; ++j) b.push_back(1 + static_cast<Int>(rng() % 2));
        const auto d = validate_descriptor(InclusionMatrix(m), DimensionVector(b));
        Int dim = 0;
        for (Int n : d.a_dims.values()) dim += n * n;
        if (dim <= 64) return d;
    }
}

} // namespace

TEST(Shape, Dimension) {
    EXPECT_EQ(AlgebraShape(std::vector<Index>{9, 4}).dimension(), 97);
    EXPECT_THROW(AlgebraShape(std::vector<Index>{0}), ShapeError);
    EXPECT_THROW(AlgebraShape(std::vector<Index>{}), ShapeError);
}

TEST(Element, ArithmeticAndShapes) {
    const AlgebraShape s(std::vector<Index>{2, 1});
    std::mt19937_64 rng(1);
    const auto x = AlgebraElement::random(s, rng), y = AlgebraElement::random(s, rng);
    EXPECT_LT(dist((x + y) - y, x), 1e-14);
    EXPECT_LT(dist(x * AlgebraElement::identity(s), x), 1e-14);
    EXPECT_LT(dist((x * y).adjoint(), y.adjoint() * x.adjoint()), 1e-13);
    const AlgebraShape t(std::vector<Index>{3});
    EXPECT_THROW(x + AlgebraElement::identity(t), ShapeError);
    const auto u = AlgebraElement::random_unitary(s, rng);
    EXPECT_LT(unitarity_residual(u), 1e-13);
}

TEST(Embed, WorkedExampleMatrixUnit) {
    const auto inc = make({{3, 3, 0, 3}, {0, 0, 2, 2}}, {1, 1, 1, 1});
    auto b = AlgebraElement::zero(inc.b_shape());
    b.block(2)(0, 0) = 1.0;
    const auto x = inc.embed(b);
    EXPECT_EQ(x.block(0), CMatrix::Zero(9, 9));
    CMatrix want = CMatrix::Zero(4, 4);
    want(0, 0) = want(1, 1) = 1.0;
    EXPECT_EQ(x.block(1), want);
}

TEST(Embed, UnitalHomomorphism) {
    std::mt19937_64 rng(2);
    for (int n = 0; n < 20; ++n) {
        const EmbeddedInclusion inc(random_descriptor(rng));
        const auto x = AlgebraElement::random(inc.b_shape(), rng), y = AlgebraElement::random(inc.b_shape(), rng);
        EXPECT_LT(dist(inc.embed(x * y), inc.embed(x) * inc.embed(y)), 1e-12);
        EXPECT_LT(dist(inc.embed(x + y), inc.embed(x) + inc.embed(y)), 1e-12);
        EXPECT_LT(dist(inc.embed(x.adjoint()), inc.embed(x).adjoint()), 1e-12);
        EXPECT_EQ(dist(inc.embed(AlgebraElement::identity(inc.b_shape())), AlgebraElement::identity(inc.a_shape())),
                  0.0);
    }
    const auto inc = make({{1}}, {2});
    EXPECT_THROW(inc.embed(AlgebraElement::identity(AlgebraShape(std::vector<Index>{3}))), ShapeError);
}

TEST(CentralProjections, WorkedExample) {
    const auto inc = make({{3, 3, 0, 3}, {0, 0, 2, 2}}, {1, 1, 1, 1});
    const auto cp = central_projections(inc);
    ASSERT_EQ(cp.p.size(), 2u);
    ASSERT_EQ(cp.q.size(), 4u);
    const auto sum = cp.p[1] * cp.q[2] + cp.p[1] * cp.q[3];
    EXPECT_EQ(sum.block(1), CMatrix::Identity(4, 4));
    EXPECT_EQ(sum.block(0), CMatrix::Zero(9, 9));
    EXPECT_EQ(dist(cp.p[0] + cp.p[1], AlgebraElement::identity(inc.a_shape())), 0.0);
    for (const auto &p : cp.p)
        for (std::size_t j = 0; j < cp.q.size(); ++j) {
            const auto e = p * cp.q[j];
            EXPECT_EQ(dist(e * e, e), 0.0);
            EXPECT_EQ(dist(e.adjoint(), e), 0.0);
            for (std::size_t k = j + 1; k < cp.q.size(); ++k)
                EXPECT_EQ((e * (p * cp.q[k])).max_abs(), 0.0);
        }
}

TEST(Phi, ExamplesAndTrace) {
    const TraceState st(AlgebraShape(std::vector<Index>{9, 4}));
    EXPECT_EQ(phi(st, AlgebraElement::identity(st.shape())), Complex(1.0, 0.0));
    const TraceState single(AlgebraShape(std::vector<Index>{3}));
    CMatrix m = CMatrix::Zero(3, 3);
    m(0, 0) = 3.0;
    EXPECT_NEAR(std::abs(phi(single, AlgebraElement(single.shape(), {m})) - 1.0), 0.0, 1e-15);
    std::mt19937_64 rng(4);
    for (int n = 0; n < 20; ++n) {
        const auto x = AlgebraElement::random(st.shape(), rng), y = AlgebraElement::random(st.shape(), rng);
        EXPECT_LT(std::abs(phi(st, x * y) - phi(st, y * x)), 1e-12);
        EXPECT_GT(phi(st, x.adjoint() * x).real(), 0.0);
        EXPECT_LT(std::abs(phi_inner(st, x, y) - phi(st, x.adjoint() * y)), 1e-12);
    }
}

TEST(CondExpectation, BasicExamples) {
    const auto triv = make({{1}}, {3});
    std::mt19937_64 rng(6);
    const auto x = AlgebraElement::random(triv.a_shape(), rng);
    EXPECT_LT(dist(triv.cond_expectation(x), x), 1e-14);

    const auto inc = make({{3, 3, 0, 3}, {0, 0, 2, 2}}, {1, 1, 1, 1});
    EXPECT_LT(dist(inc.cond_expectation(AlgebraElement::identity(inc.a_shape())),
                   AlgebraElement::identity(inc.b_shape())),
              1e-14);
}

TEST(CondExpectation, MatchesDenseAndClosedFormOracles) {
    std::mt19937_64 rng(8);
    for (int n = 0; n < 40; ++n) {
        const EmbeddedInclusion inc(random_descriptor(rng));
        const auto x = AlgebraElement::random(inc.a_shape(), rng);
        const auto e = inc.cond_expectation(x);
        EXPECT_LT(dist(e, oracle::dense_cond_expectation(inc, x)), 1e-11);
        EXPECT_LT(dist(e, oracle::closed_form_cond_expectation(inc, x)), 1e-12);
    }
}

TEST(CondExpectation, DiagonalExtraction) {
    for (Index n = 1; n <= 6; ++n) {
        const EmbeddedInclusion inc(validate_descriptor(InclusionMatrix(IntMatrix::Ones(1, n)),
                                                        DimensionVector(std::vector<Int>(static_cast<std::size_t>(n), 1))));
        std::mt19937_64 rng(static_cast<std::uint64_t>(n));
        const auto x = AlgebraElement::random(inc.a_shape(), rng);
        const auto e = inc.cond_expectation(x);
        for (Index j = 0; j < n; ++j) EXPECT_LT(std::abs(e.block(j)(0, 0) - x.block(0)(j, j)), 1e-12);
    }
}

TEST(CondExpectation, Properties) {
    std::mt19937_64 rng(10);
    for (int n = 0; n < 30; ++n) {
        const EmbeddedInclusion inc(random_descriptor(rng));
        const auto &st = inc.state();
        const auto x = AlgebraElement::random(inc.a_shape(), rng);
        const auto b1 = AlgebraElement::random(inc.b_shape(), rng), b2 = AlgebraElement::random(inc.b_shape(), rng);
        const auto e = inc.cond_expectation(x);
        EXPECT_LT(std::abs(phi(st, inc.embed(e)) - phi(st, x)), 1e-12);
        EXPECT_LT(std::abs(phi(st, inc.embed(e) * inc.embed(b1)) - phi(st, x * inc.embed(b1))), 1e-11);
        EXPECT_LT(dist(inc.cond_expectation(inc.embed(b1)), b1), 1e-12);
        EXPECT_LT(dist(inc.cond_expectation(inc.embed(b1) * x * inc.embed(b2)), b1 * e * b2), 1e-11);
        EXPECT_LT(dist(inc.cond_expectation(x.adjoint()), e.adjoint()), 1e-12);
        // Positivity: E(y^* y) has nonnegative spectrum.
        const auto pos = inc.cond_expectation(x.adjoint() * x);
        for (const auto &blk : pos.blocks()) {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(blk);
            EXPECT_GT(es.eigenvalues().minCoeff(), -1e-11);
        }
    }
}

TEST(CondExpectation, ExplicitStateOverload) {
    const auto inc = make({{1, 2}}, {1, 1});
    std::mt19937_64 rng(12);
    const auto x = AlgebraElement::random(inc.a_shape(), rng);
    EXPECT_LT(dist(cond_expectation(inc, inc.state(), x), inc.cond_expectation(x)), 1e-15);
    EXPECT_THROW(inc.cond_expectation(AlgebraElement::identity(AlgebraShape(std::vector<Index>{2}))), ShapeError);
}

TEST(ProjectOntoImage, Residuals) {
    const auto inc = make({{1, 1}}, {1, 1});
    std::mt19937_64 rng(14);
    const auto b = AlgebraElement::random(inc.b_shape(), rng);
    EXPECT_LT(project_onto_image(inc, inc.state(), inc.embed(b)).residual, 1e-12);

    // Off-diagonal matrix unit e_01 of M_2: orthogonal to the diagonal, residual = ||e_01||_phi = sqrt(1/2).
    auto e01 = AlgebraElement::zero(inc.a_shape());
    e01.block(0)(0, 1) = 1.0;
    const auto pr = project_onto_image(inc, inc.state(), e01);
    const auto oracle_residual = phi_norm(inc.state(), e01 - inc.embed(oracle::dense_cond_expectation(inc, e01)));
    EXPECT_NEAR(pr.residual, oracle_residual, 1e-14);
    EXPECT_NEAR(pr.residual, std::sqrt(0.5), 1e-14);

    const auto x = AlgebraElement::random(inc.a_shape(), rng);
    EXPECT_NEAR(project_onto_image(inc, inc.state(), x).residual,
                project_onto_image(inc, inc.state(), x + inc.embed(b)).residual, 1e-12);
}
