#include "regincl/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace regincl {

bool VerificationReport::overall() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return c.pass; });
}

void VerificationReport::append(const VerificationReport &other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

namespace {

CheckResult make_check(std::string name, double residual, double tol, std::string detail = {}) {
    return CheckResult{std::move(name), residual <= tol, residual, tol, std::move(detail)};
}

void require_shapes(const UnitaryFamily &f) {
    for (const auto &w : f.members())
        if (!(w.shape() == f.inclusion().a_shape())) throw ShapeError("member shape does not match the inclusion");
}

} // namespace

VerificationReport check_unitarity(const std::vector<AlgebraElement> &members, double tol) {
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t j = 0; j < members.size(); ++j) {
        const double r = unitarity_residual(members[j]);
        if (r > worst) worst = r, at = j;
    }
    return {{make_check("unitarity", worst, tol, "worst member " + std::to_string(at))}};
}

VerificationReport check_orthonormal(const UnitaryFamily &f, double tol) {
    require_shapes(f);
    const auto &inc = f.inclusion();
    const auto &w = f.members();
    const auto one = AlgebraElement::identity(inc.b_shape());
    double worst = 0.0;
    std::size_t wj = 0, wk = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const auto wjs = w[j].adjoint();
        for (std::size_t k = j; k < w.size(); ++k) {
            auto e = inc.cond_expectation(wjs * w[k]);
            if (j == k) e -= one;
            const double r = e.max_abs();
            if (r > worst) worst = r, wj = j, wk = k;
        }
    }
    std::ostringstream os;
    os << "worst pair (" << wj << "," << wk << ")";
    return {{make_check("orthonormality", worst, tol, os.str())}};
}

VerificationReport check_reconstruction(const UnitaryFamily &f, int trials, double tol, std::uint64_t seed) {
    require_shapes(f);
    if (trials < 1) throw ValidationError("trials must be >= 1", "trials");
    const auto &inc = f.inclusion();
    std::vector<AlgebraElement> adj;
    for (const auto &w : f.members()) adj.push_back(w.adjoint());
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto x = AlgebraElement::random(inc.a_shape(), rng);
        auto sum = AlgebraElement::zero(inc.a_shape());
        for (std::size_t j = 0; j < adj.size(); ++j)
            sum += f.members()[j] * inc.embed(inc.cond_expectation(adj[j] * x));
        worst = std::max(worst, (sum - x).frobenius_norm() / x.frobenius_norm());
    }
    return {{make_check("reconstruction", worst, tol, std::to_string(trials) + " random trials")}};
}

double normalizer_residual(const EmbeddedInclusion &inc, const AlgebraElement &u) {
    if (!(u.shape() == inc.a_shape())) throw ShapeError("unitary does not live in the ambient algebra");
    if (unitarity_residual(u) > 1e-8) throw PreconditionError("normalizer membership needs a unitary input");
    const auto &d = inc.descriptor();
    const auto &c = inc.state().weights();
    double worst = 0.0;
    for (Index j = 0; j < d.r(); ++j) {
        double norm_sq = 0.0;
        for (Index i = 0; i < d.s(); ++i) norm_sq += c[static_cast<std::size_t>(i)] * static_cast<double>(d.matrix(i, j));
        const double unit_norm = std::sqrt(norm_sq);
        for (Index p = 0; p < d.b_dims[j]; ++p)
            for (Index q = 0; q < d.b_dims[j]; ++q) {
                // u iota(e_pq) u^* = sum_t U[:, pos(p,t)] U[:, pos(q,t)]^* in each summand
                std::vector<CMatrix> blocks;
                for (Index i = 0; i < d.s(); ++i) {
                    const CMatrix &ui = u.block(i);
                    CMatrix x = CMatrix::Zero(ui.rows(), ui.cols());
                    for (Index t = 0; t < d.matrix(i, j); ++t)
                        x += ui.col(inc.position(i, j, p, t)) * ui.col(inc.position(i, j, q, t)).adjoint();
                    blocks.push_back(std::move(x));
                }
                const AlgebraElement x(inc.a_shape(), std::move(blocks));
                worst = std::max(worst, project_onto_image(inc, inc.state(), x).residual / unit_norm);
            }
    }
    return worst;
}

bool check_normalizer_membership(const EmbeddedInclusion &inc, const AlgebraElement &u, double tol) {
    return normalizer_residual(inc, u) <= tol;
}

VerificationReport check_family_membership(const UnitaryFamily &f, double tol) {
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t j = 0; j < f.members().size(); ++j) {
        const double r = normalizer_residual(f.inclusion(), f.members()[j]);
        if (r > worst) worst = r, at = j;
    }
    return {{make_check("normalizer_membership", worst, tol, "worst member " + std::to_string(at))}};
}

VerificationReport verify_family(const UnitaryFamily &f, const VerifyTolerances &tol) {
    VerificationReport out = check_unitarity(f.members(), tol.unitarity);
    // Membership presupposes unitarity; report it as failed rather than throwing.
    if (out.overall())
        out.append(check_family_membership(f, tol.membership));
    else
        out.checks.push_back({"normalizer_membership", false, 0.0, tol.membership, "skipped: not unitary"});
    out.append(check_orthonormal(f, tol.orthonormality));
    out.append(check_reconstruction(f, tol.trials, tol.reconstruction, tol.seed));
    return out;
}

namespace {

// Row-constant commutative inclusion: a_i for each row.
std::vector<Index> row_constants(const InclusionDescriptor &d) {
    for (Index j = 0; j < d.r(); ++j)
        if (d.b_dims[j] != 1)
            throw PreconditionError("block-structure extraction needs a commutative subalgebra (all m_j = 1)");
    std::vector<Index> a(static_cast<std::size_t>(d.s()), 0);
    for (Index i = 0; i < d.s(); ++i)
        for (Index j = 0; j < d.r(); ++j) {
            const Int v = d.matrix(i, j);
            if (v == 0) continue;
            auto &ai = a[static_cast<std::size_t>(i)];
            if (ai != 0 && ai != v)
                throw PreconditionError("block-structure extraction needs constant nonzero entries in row " +
                                        std::to_string(i));
            ai = v;
        }
    return a;
}

std::vector<Index> support_of(const InclusionDescriptor &d, Index i) {
    std::vector<Index> y;
    for (Index j = 0; j < d.r(); ++j)
        if (d.matrix(i, j) != 0) y.push_back(j);
    return y;
}

} // namespace

BlockPermutationWitness extract_block_structure(const EmbeddedInclusion &inc, const AlgebraElement &u, double tol) {
    if (!(u.shape() == inc.a_shape())) throw ShapeError("unitary does not live in the ambient algebra");
    const auto &d = inc.descriptor();
    const auto a = row_constants(d);
    BlockPermutationWitness out;
    for (Index i = 0; i < d.s(); ++i) {
        const Index ai = a[static_cast<std::size_t>(i)];
        const auto y = support_of(d, i);
        const CMatrix &ui = u.block(i);
        auto block = [&](Index l, Index k) {
            return ui.block(inc.offset(i, l), inc.offset(i, k), ai, ai);
        };
        double scale = 0.0;
        for (Index l : y)
            for (Index k : y) scale = std::max(scale, block(l, k).norm());
        const double threshold = tol * std::max(scale, 1.0);

        SummandBlockStructure s;
        std::vector<int> row_hits(static_cast<std::size_t>(d.r()), 0);
        for (Index k : y) {
            std::optional<Index> found;
            for (Index l : y) {
                if (block(l, k).norm() <= threshold) continue;
                if (found)
                    throw AmbiguousPatternError("summand " + std::to_string(i) + ": column block " +
                                                std::to_string(k) + " has several nonzero blocks");
                found = l;
            }
            if (!found)
                throw AmbiguousPatternError("summand " + std::to_string(i) + ": column block " + std::to_string(k) +
                                            " is numerically zero");
            if (++row_hits[static_cast<std::size_t>(*found)] > 1)
                throw AmbiguousPatternError("summand " + std::to_string(i) + ": row block " +
                                            std::to_string(*found) + " has several nonzero blocks");
            const CMatrix b = block(*found, k);
            const double ures = (b.adjoint() * b - CMatrix::Identity(ai, ai)).cwiseAbs().maxCoeff();
            if (ures > std::max(tol, 1e-9) * 10.0)
                throw AmbiguousPatternError("summand " + std::to_string(i) + ": block (" + std::to_string(*found) +
                                            "," + std::to_string(k) + ") is not unitary");
            s.sigma[k] = *found;
            s.blocks[k] = b;
        }
        out.summands.push_back(std::move(s));
    }
    return out;
}

AlgebraElement assemble_block_permutation(const EmbeddedInclusion &inc, const BlockPermutationWitness &w) {
    const auto &d = inc.descriptor();
    const auto a = row_constants(d);
    if (static_cast<Index>(w.summands.size()) != d.s()) throw ShapeError("witness has the wrong number of summands");
    auto u = AlgebraElement::zero(inc.a_shape());
    for (Index i = 0; i < d.s(); ++i) {
        const auto &s = w.summands[static_cast<std::size_t>(i)];
        const Index ai = a[static_cast<std::size_t>(i)];
        const auto y = support_of(d, i);
        if (s.sigma.size() != y.size()) throw ShapeError("sigma must be defined on the whole row support");
        for (const auto &[k, l] : s.sigma) {
            if (d.matrix(i, k) == 0 || d.matrix(i, l) == 0) throw ShapeError("sigma leaves the row support");
            const CMatrix &b = s.blocks.at(k);
            if (b.rows() != ai || b.cols() != ai) throw ShapeError("block has the wrong size");
            u.block(i).block(inc.offset(i, l), inc.offset(i, k), ai, ai) = b;
        }
    }
    return u;
}

SpanCertificate certify_regularity_by_span(const UnitaryFamily &f, double tol) {
    const auto &inc = f.inclusion();
    for (std::size_t j = 0; j < f.members().size(); ++j)
        if (!check_normalizer_membership(inc, f.members()[j], std::max(tol, 1e-9)))
            throw PreconditionError("member " + std::to_string(j) + " is not in the normalizer");

    SpanCertificate cert;
    cert.dim_a = inc.a_shape().dimension();
    const auto rec = check_reconstruction(f, VerifyTolerances{}.trials, tol);
    cert.reconstruction_residual = rec.checks.front().residual;
    cert.certified = rec.overall();

    const Index cols = inc.b_dimension() * f.d();
    if (cols * cert.dim_a <= kSpanRankMaxEntries) {
        const auto &d = inc.descriptor();
        CMatrix span(cert.dim_a, cols);
        Index col = 0;
        for (Index j = 0; j < d.r(); ++j)
            for (Index p = 0; p < d.b_dims[j]; ++p)
                for (Index q = 0; q < d.b_dims[j]; ++q) {
                    std::vector<CMatrix> bb;
                    for (Index jj = 0; jj < d.r(); ++jj) bb.push_back(CMatrix::Zero(d.b_dims[jj], d.b_dims[jj]));
                    bb[static_cast<std::size_t>(j)](p, q) = 1.0;
                    const auto e = inc.embed(AlgebraElement(inc.b_shape(), std::move(bb)));
                    for (const auto &w : f.members()) {
                        const auto v = e * w;
                        Index row = 0;
                        for (const auto &blk : v.blocks())
                            for (Index x = 0; x < blk.size(); ++x) span(row++, col) = blk.data()[x];
                        ++col;
                    }
                }
        Eigen::JacobiSVD<CMatrix> svd(span);
        const auto &sv = svd.singularValues();
        const double cutoff = 1e-8 * (sv.size() ? sv(0) : 0.0);
        Index rank = 0;
        for (Index x = 0; x < sv.size(); ++x) rank += sv(x) > cutoff;
        cert.rank = rank;
        cert.certified = cert.certified && rank == cert.dim_a;
    }
    return cert;
}

} // namespace regincl
