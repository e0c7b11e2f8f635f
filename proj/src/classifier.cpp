#include "regincl/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

namespace regincl {

IntMatrix BlockFactorization::block_matrix() const {
    IntMatrix m(s_k, r_k);
    for (Index i = 0; i < s_k; ++i) m.row(i).setConstant(column_entries[static_cast<std::size_t>(i)]);
    return m;
}

std::vector<Int> BlockFactorization::a_dims() const {
    std::vector<Int> n;
    for (Int a : column_entries) n.push_back(m_k * static_cast<Int>(r_k) * a);
    return n;
}

Int BlockFactorization::spectral_value() const {
    Int sum = 0;
    for (Int a : column_entries) sum += a * a;
    return static_cast<Int>(r_k) * sum;
}

InclusionDescriptor DecompositionTree::reassemble() const {
    Index s = 0, r = 0;
    for (const auto &b : blocks) s += b.s_k, r += b.r_k;
    IntMatrix m = IntMatrix::Zero(s, r);
    std::vector<Int> b_dims;
    Index i0 = 0, j0 = 0;
    for (const auto &b : blocks) {
        m.block(i0, j0, b.s_k, b.r_k) = b.block_matrix();
        b_dims.insert(b_dims.end(), static_cast<std::size_t>(b.r_k), b.m_k);
        i0 += b.s_k;
        j0 += b.r_k;
    }
    return validate_descriptor(InclusionMatrix(m), DimensionVector(b_dims));
}

namespace {

std::optional<UnequalDimensions> first_unequal_dimension(const InclusionDescriptor &d) {
    for (const auto &rs : row_supports(d.matrix)) {
        const Index j0 = rs.support.front();
        for (Index j : rs.support)
            if (d.b_dims[j] != d.b_dims[j0]) return UnequalDimensions{rs.row, j0, j};
    }
    return std::nullopt;
}

DecompositionTree build_tree(const InclusionDescriptor &d, CanonicalForm canonical) {
    DecompositionTree tree;
    for (const auto &blk : canonical.blocks) {
        BlockFactorization f;
        f.m_k = d.b_dims[blk.cols.front()];
        f.r_k = blk.r();
        f.s_k = blk.s();
        f.column_entries = blk.row_values;
        f.rows = blk.rows;
        f.cols = blk.cols;
        tree.blocks.push_back(std::move(f));
    }
    tree.canonical = std::move(canonical);
    return tree;
}

} // namespace

RegularityVerdict classify_regular(const InclusionDescriptor &d) {
    auto check = is_normalizer_matrix(d.matrix);
    if (!check) return {false, *check.failure};
    if (auto bad = first_unequal_dimension(d)) return {false, FailureWitness{*bad}};
    return {true, build_tree(d, canonicalize(d.matrix))};
}

NotRegularError::NotRegularError(FailureWitness witness)
    : PreconditionError("inclusion is not regular: " + describe(witness)), witness_(witness) {}

DecompositionTree decompose(const InclusionDescriptor &d) {
    auto verdict = classify_regular(d);
    if (!verdict.regular) throw NotRegularError(*verdict.witness());
    return std::get<DecompositionTree>(std::move(verdict.certificate));
}

SpectralReport spectral_condition(const InclusionDescriptor &d) {
    SpectralReport rep;
    const IntVector at_n = d.matrix.entries().transpose() * d.a_dims.as_vector();
    rep.at_n.assign(at_n.begin(), at_n.end());

    const Int m0 = d.b_dims[0];
    if (at_n(0) % m0 == 0 && at_n(0) / m0 > 0) {
        const Int cand = at_n(0) / m0;
        bool ok = true;
        for (Index j = 0; j < d.r() && ok; ++j) ok = at_n(j) == cand * d.b_dims[j];
        if (ok) {
            rep.satisfied = true;
            rep.d = cand;
        }
    }

    auto verdict = classify_regular(d);
    if (const auto *tree = verdict.tree()) {
        std::vector<Int> per_block;
        for (const auto &b : tree->blocks) per_block.push_back(b.spectral_value());
        rep.per_block_d = per_block;
    }
    return rep;
}

namespace {

Int checked_mul(Int a, Int b) {
    Int out;
    if (__builtin_mul_overflow(a, b, &out)) throw Error("integer overflow in matrix power");
    return out;
}

Int checked_add(Int a, Int b) {
    Int out;
    if (__builtin_add_overflow(a, b, &out)) throw Error("integer overflow in matrix power");
    return out;
}

IntMatrix checked_product(const IntMatrix &x, const IntMatrix &y) {
    IntMatrix out = IntMatrix::Zero(x.rows(), y.cols());
    for (Index i = 0; i < x.rows(); ++i)
        for (Index k = 0; k < x.cols(); ++k) {
            if (x(i, k) == 0) continue;
            for (Index j = 0; j < y.cols(); ++j)
                out(i, j) = checked_add(out(i, j), checked_mul(x(i, k), y(k, j)));
        }
    return out;
}

} // namespace

IntMatrix alternating_power(const IntMatrix &a, int exponent) {
    if (exponent < 1) throw Error("alternating_power: exponent must be >= 1");
    IntMatrix p = a;
    const IntMatrix at = a.transpose();
    for (int e = 2; e <= exponent; ++e) p = checked_product(p, e % 2 == 0 ? at : a);
    return p;
}

double norm_squared(const IntMatrix &a) {
    const Eigen::MatrixXd m = a.cast<double>();
    const Eigen::MatrixXd ata = m.transpose() * m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ata, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

DepthBoundError::DepthBoundError(int n_max)
    : Error("depth exceeds n_max = " + std::to_string(n_max)), n_max_(n_max) {}

DepthReport depth(const InclusionMatrix &matrix, int n_max) {
    if (n_max < 2) throw ValidationError("depth: n_max must be >= 2", "depth_max");
    const IntMatrix &a = matrix.entries();
    for (int n = 2; n <= n_max; ++n) {
        const IntMatrix lo = alternating_power(a, n - 1);
        const IntMatrix hi = alternating_power(a, n + 1);
        bool covered = true;
        Int q = 1;
        for (Index i = 0; i < lo.rows() && covered; ++i)
            for (Index j = 0; j < lo.cols(); ++j) {
                if (lo(i, j) == 0) {
                    if (hi(i, j) != 0) {
                        covered = false;
                        break;
                    }
                    continue;
                }
                q = std::max(q, (hi(i, j) + lo(i, j) - 1) / lo(i, j));
            }
        if (covered) return DepthReport{n, q, norm_squared(a)};
    }
    throw DepthBoundError(n_max);
}

DepthTwoCheck verify_depth_two_theorem(const InclusionDescriptor &d) {
    const auto tree = decompose(d);
    DepthTwoCheck out;
    for (const auto &b : tree.blocks) out.q = std::max(out.q, b.spectral_value());
    out.norm_sq = norm_squared(d.matrix.entries());

    const IntMatrix &a = d.matrix.entries();
    const IntMatrix a3 = alternating_power(a, 3);
    bool inequality = true;
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            inequality = inequality && a3(i, j) <= checked_mul(out.q, a(i, j));
    const double q = static_cast<double>(out.q);
    out.holds = inequality && std::abs(q - out.norm_sq) <= kNormTolerance * std::max(1.0, q);
    return out;
}

InclusionDescriptor restrict_to_corner(const InclusionDescriptor &d, Index i) {
    if (i < 0 || i >= d.s())
        throw ValidationError("row index " + std::to_string(i) + " out of range [0, " +
                                  std::to_string(d.s()) + ")",
                              "row");
    const auto support = row_supports(d.matrix)[static_cast<std::size_t>(i)].support;
    IntMatrix row(1, static_cast<Index>(support.size()));
    std::vector<Int> b_dims;
    for (std::size_t t = 0; t < support.size(); ++t) {
        row(0, static_cast<Index>(t)) = d.matrix(i, support[t]);
        b_dims.push_back(d.b_dims[support[t]]);
    }
    return validate_descriptor(InclusionMatrix(row), DimensionVector(b_dims));
}

InclusionDescriptor center_descriptor(const InclusionDescriptor &d) {
    IntMatrix m = d.matrix.entries();
    for (Index j = 0; j < d.r(); ++j) m.col(j) *= d.b_dims[j];
    return validate_descriptor(InclusionMatrix(m),
                               DimensionVector(std::vector<Int>(static_cast<std::size_t>(d.r()), 1)));
}

InclusionDescriptor generate_regular_descriptor(std::uint64_t seed, const GeneratorLimits &limits) {
    if (limits.max_blocks < 1 || limits.max_block_rows < 1 || limits.max_block_cols < 1 ||
        limits.max_entry < 1 || limits.max_b_dim < 1)
        throw ValidationError("generator limits must be positive", "limits");

    std::mt19937_64 rng(seed);
    auto uniform = [&](Int lo, Int hi) { return std::uniform_int_distribution<Int>(lo, hi)(rng); };

    const bool needs_two_blocks = limits.plant == Violation::broken_partition;
    const bool needs_wide_block =
        limits.plant == Violation::unequal_row_entry || limits.plant == Violation::unequal_dimension;

    Int p = uniform(1, limits.max_blocks);
    if (needs_two_blocks) p = std::max<Int>(p, 2);

    std::vector<Index> block_rows, block_cols;
    std::vector<Int> block_m;
    std::vector<std::vector<Int>> block_entries;
    for (Int k = 0; k < p; ++k) {
        const Index sk = uniform(1, limits.max_block_rows);
        Index rk = uniform(1, limits.max_block_cols);
        if (needs_wide_block && k == 0) rk = std::max<Index>(rk, 2);
        block_rows.push_back(sk);
        block_cols.push_back(rk);
        block_m.push_back(uniform(1, limits.max_b_dim));
        std::vector<Int> e;
        for (Index i = 0; i < sk; ++i) e.push_back(uniform(1, limits.max_entry));
        block_entries.push_back(std::move(e));
    }

    Index s = 0, r = 0;
    for (Int k = 0; k < p; ++k) s += block_rows[k], r += block_cols[k];
    IntMatrix m = IntMatrix::Zero(s, r);
    std::vector<Int> dims;
    Index i0 = 0, j0 = 0;
    std::vector<Index> row_offset, col_offset;
    for (Int k = 0; k < p; ++k) {
        row_offset.push_back(i0);
        col_offset.push_back(j0);
        for (Index i = 0; i < block_rows[k]; ++i)
            m.block(i0 + i, j0, 1, block_cols[k]).setConstant(block_entries[k][static_cast<std::size_t>(i)]);
        dims.insert(dims.end(), static_cast<std::size_t>(block_cols[k]), block_m[k]);
        i0 += block_rows[k];
        j0 += block_cols[k];
    }

    switch (limits.plant) {
    case Violation::none:
        break;
    case Violation::unequal_row_entry: {
        const Index row = row_offset[0] + uniform(0, block_rows[0] - 1);
        const Index col = col_offset[0] + block_cols[0] - 1;
        m(row, col) += 1;
        break;
    }
    case Violation::broken_partition: {
        // Extend one row of block 0 into the first column of block 1 with the
        // same constant: rows stay constant, supports overlap without equality.
        const Index row = row_offset[0] + uniform(0, block_rows[0] - 1);
        m(row, col_offset[1]) = m(row, col_offset[0]);
        break;
    }
    case Violation::unequal_dimension: {
        const Index col = col_offset[0] + uniform(0, block_cols[0] - 1);
        dims[static_cast<std::size_t>(col)] += 1;
        break;
    }
    }

    if (limits.scramble) {
        std::vector<Index> sigma(static_cast<std::size_t>(s)), tau(static_cast<std::size_t>(r));
        std::iota(sigma.begin(), sigma.end(), Index{0});
        std::iota(tau.begin(), tau.end(), Index{0});
        std::shuffle(sigma.begin(), sigma.end(), rng);
        std::shuffle(tau.begin(), tau.end(), rng);
        m = permute(m, sigma, tau);
        std::vector<Int> scrambled;
        for (Index j : tau) scrambled.push_back(dims[static_cast<std::size_t>(j)]);
        dims = std::move(scrambled);
    }
    return validate_descriptor(InclusionMatrix(m), DimensionVector(dims));
}

} // namespace regincl
