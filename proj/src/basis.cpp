#include "regincl/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

namespace regincl {

void SolverConfig::validate() const {
    if (!(tolerance > 0.0)) throw ValidationError("solver tolerance must be positive", "tolerance");
    if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1", "max_iterations");
    if (restarts < 1) throw ValidationError("restarts must be >= 1", "restarts");
}

double orthonormality_residual(const EmbeddedInclusion &inc, const std::vector<AlgebraElement> &members) {
    const auto one = AlgebraElement::identity(inc.b_shape());
    double worst = 0.0;
    std::vector<AlgebraElement> adj;
    adj.reserve(members.size());
    for (const auto &w : members) adj.push_back(w.adjoint());
    for (std::size_t j = 0; j < members.size(); ++j)
        for (std::size_t k = j; k < members.size(); ++k) {
            auto e = inc.cond_expectation(adj[j] * members[k]);
            if (j == k) e -= one;
            worst = std::max(worst, e.max_abs());
        }
    return worst;
}

UnitaryFamily::UnitaryFamily(std::shared_ptr<const EmbeddedInclusion> inclusion,
                             std::vector<AlgebraElement> members, double tolerance)
    : inclusion_(std::move(inclusion)), members_(std::move(members)) {
    if (!inclusion_) throw ShapeError("unitary family needs an inclusion");
    if (members_.empty()) throw ShapeError("unitary family is empty");
    for (const auto &w : members_)
        if (!(w.shape() == inclusion_->a_shape()))
            throw ShapeError("family member does not live in the ambient algebra");
    for (const auto &w : members_) unitarity_residual_ = std::max(unitarity_residual_, regincl::unitarity_residual(w));
    gram_residual_ = orthonormality_residual(*inclusion_, members_);
    verified_ = unitarity_residual_ <= tolerance && gram_residual_ <= tolerance;
}

SpectralConditionError::SpectralConditionError(SpectralReport report)
    : PreconditionError([&] {
          std::ostringstream os;
          os << "spectral condition fails: A^t n' =";
          for (Int v : report.at_n) os << ' ' << v;
          os << " is not a multiple of m'";
          if (report.per_block_d) {
              os << "; per-block d =";
              for (Int v : *report.per_block_d) os << ' ' << v;
          }
          return os.str();
      }()),
      report_(std::move(report)) {}

namespace {

std::shared_ptr<const EmbeddedInclusion> make_inclusion(const IntMatrix &m, std::vector<Int> b_dims) {
    return std::make_shared<const EmbeddedInclusion>(
        validate_descriptor(InclusionMatrix(m), DimensionVector(std::move(b_dims))));
}

AlgebraElement single(const CMatrix &m) { return {AlgebraShape(std::vector<Index>{m.rows()}), {m}}; }

CMatrix shift_matrix(Index n) {
    CMatrix s = CMatrix::Zero(n, n);
    for (Index t = 0; t < n; ++t) s((t + 1) % n, t) = 1.0;
    return s;
}

CMatrix clock_matrix(Index n) {
    CMatrix c = CMatrix::Zero(n, n);
    static const Complex quarter[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    for (Index t = 0; t < n; ++t)
        c(t, t) = (4 * t) % n == 0
                      ? quarter[(4 * t / n) % 4]
                      : std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n));
    return c;
}

CMatrix polar_factor(const CMatrix &x) {
    Eigen::JacobiSVD<CMatrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

// Inverse of EmbeddedInclusion::position for one A-summand.
struct Slot {
    Index j, p, t;
};

std::vector<Slot> slots_of(const EmbeddedInclusion &inc, Index i) {
    const auto &d = inc.descriptor();
    std::vector<Slot> out(static_cast<std::size_t>(d.a_dims[i]));
    for (Index j = 0; j < d.r(); ++j)
        for (Index p = 0; p < d.b_dims[j]; ++p)
            for (Index t = 0; t < d.matrix(i, j); ++t)
                out[static_cast<std::size_t>(inc.position(i, j, p, t))] = Slot{j, p, t};
    return out;
}

CMatrix conjugate_by_index_map(const CMatrix &x, const std::vector<Index> &to) {
    CMatrix out(x.rows(), x.cols());
    for (Index a = 0; a < x.rows(); ++a)
        for (Index b = 0; b < x.cols(); ++b)
            out(to[static_cast<std::size_t>(a)], to[static_cast<std::size_t>(b)]) = x(a, b);
    return out;
}

} // namespace

UnitaryFamily basis_trivial(Index k) {
    if (k < 1) throw ValidationError("basis_trivial: k must be >= 1", "k");
    auto inc = make_inclusion(int_matrix({{1}}), {k});
    return UnitaryFamily(inc, {AlgebraElement::identity(inc->a_shape())});
}

UnitaryFamily basis_diagonal(Index n) {
    if (n < 1) throw ValidationError("basis_diagonal: n must be >= 1", "n");
    auto inc = make_inclusion(IntMatrix::Ones(1, n), std::vector<Int>(static_cast<std::size_t>(n), 1));
    const CMatrix s = shift_matrix(n);
    std::vector<AlgebraElement> members;
    CMatrix power = CMatrix::Identity(n, n);
    for (Index t = 0; t < n; ++t) {
        members.push_back(single(power));
        power = s * power;
    }
    return UnitaryFamily(inc, std::move(members));
}

UnitaryFamily basis_scalar_single(Index n) {
    if (n < 1) throw ValidationError("basis_scalar_single: n must be >= 1", "n");
    auto inc = make_inclusion(IntMatrix::Constant(1, 1, n), {1});
    const CMatrix s = shift_matrix(n), c = clock_matrix(n);
    std::vector<AlgebraElement> members;
    CMatrix sa = CMatrix::Identity(n, n);
    for (Index a = 0; a < n; ++a) {
        CMatrix cb = CMatrix::Identity(n, n);
        for (Index b = 0; b < n; ++b) {
            members.push_back(single(sa * cb));
            cb = c * cb;
        }
        sa = s * sa;
    }
    return UnitaryFamily(inc, std::move(members));
}

namespace {

// Block-coordinate majorize-minimize on the product of unitary groups for
//   F(U_1, ..., U_{d-1}) = sum_{j<k} |<U_j, U_k>_phi|^2,   U_0 = 1 fixed.
class ScalarBasisSolver {
  public:
    ScalarBasisSolver(const AlgebraShape &shape, const SolverConfig &cfg)
        : shape_(shape), state_(shape), cfg_(cfg), d_(shape.dimension()) {}

    struct Result {
        std::vector<AlgebraElement> members;
        double residual;
    };

    Result run(std::uint64_t restart_seed) const {
        std::mt19937_64 rng(restart_seed);
        std::vector<AlgebraElement> u;
        u.push_back(AlgebraElement::identity(shape_));
        for (Index k = 1; k < d_; ++k) u.push_back(AlgebraElement::random_unitary(shape_, rng));

        // Majorization sweeps bring a random start into the basin, then
        // Levenberg-Marquardt on the exponential chart converges quickly.
        double res = residual(u);
        int budget = cfg_.max_iterations;
        for (int sweeps = 1; budget > 0 && res > kWarmStart; --budget, ++sweeps) {
            sweep(u);
            res = residual(u);
            if (sweeps % 500 == 0 && res > 0.5) break;  // hopeless start
        }
        if (res > kWarmStart) return {std::move(u), res};
        double mu = 1e-3;
        int stalls = 0;
        for (; budget > 0 && res > kPolishTarget; --budget) {
            const double prev = res;
            if (!lm_step(u, mu)) break;
            res = residual(u);
            if (res > 0.9 * prev && ++stalls > 20) break;
        }
        return {std::move(u), res};
    }

    double residual(const std::vector<AlgebraElement> &u) const {
        double worst = 0.0;
        for (Index j = 0; j < d_; ++j)
            for (Index k = j + 1; k < d_; ++k)
                worst = std::max(worst, std::abs(phi_inner(state_, u[static_cast<std::size_t>(j)], u[static_cast<std::size_t>(k)])));
        return worst;
    }

  private:
    static constexpr double kWarmStart = 1e-2;
    static constexpr double kPolishTarget = 1e-14;

    // Real coordinates of a Hermitian n x n matrix: n diagonal entries, then
    // (re, im) of each strictly upper entry.
    static Index herm_params(Index n) { return n * n; }

    static CMatrix herm_from(const double *x, Index n) {
        CMatrix h = CMatrix::Zero(n, n);
        Index p = 0;
        for (Index a = 0; a < n; ++a) h(a, a) = x[p++];
        for (Index a = 0; a < n; ++a)
            for (Index b = a + 1; b < n; ++b) {
                const Complex z(x[p], x[p + 1]);
                p += 2;
                h(a, b) = z;
                h(b, a) = std::conj(z);
            }
        return h;
    }

    // tr(G E) for each real coordinate direction E of the Hermitian chart.
    static void trace_against_basis(const CMatrix &g, Complex *out) {
        const Index n = g.rows();
        Index p = 0;
        for (Index a = 0; a < n; ++a) out[p++] = g(a, a);
        for (Index a = 0; a < n; ++a)
            for (Index b = a + 1; b < n; ++b) {
                out[p++] = g(b, a) + g(a, b);                        // e_ab + e_ba
                out[p++] = Complex(0.0, 1.0) * (g(b, a) - g(a, b));  // i e_ab - i e_ba
            }
    }

    static CMatrix exp_i(const CMatrix &h) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
        const Eigen::VectorXcd phases =
            es.eigenvalues().unaryExpr([](double t) { return std::polar(1.0, t); }).cast<Complex>();
        return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    }

    double cost(const std::vector<AlgebraElement> &u) const {
        double c = 0.0;
        for (Index j = 0; j < d_; ++j)
            for (Index k = j + 1; k < d_; ++k)
                c += std::norm(phi_inner(state_, u[static_cast<std::size_t>(j)], u[static_cast<std::size_t>(k)]));
        return c;
    }

    // One accepted Levenberg-Marquardt step on U_k -> U_k exp(i H_k), k >= 1.
    // The residuals <U_j, U_k>, j < k, have derivative i sum_i w_i tr(G_i (H_ki - H_ji))
    // with G_i = U_ji^* U_ki.
    bool lm_step(std::vector<AlgebraElement> &u, double &mu) const {
        const auto &w = state_.weights();
        std::vector<Index> off(static_cast<std::size_t>(shape_.size()) + 1, 0);
        for (Index i = 0; i < shape_.size(); ++i)
            off[static_cast<std::size_t>(i) + 1] = off[static_cast<std::size_t>(i)] + herm_params(shape_[i]);
        const Index per_member = off.back();
        const Index n_params = (d_ - 1) * per_member;
        const Index n_pairs = d_ * (d_ - 1) / 2;

        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * n_pairs, n_params);
        Eigen::VectorXd r(2 * n_pairs);
        std::vector<Complex> tr(static_cast<std::size_t>(per_member));
        Index row = 0;
        for (Index j = 0; j < d_; ++j)
            for (Index k = j + 1; k < d_; ++k, row += 2) {
                Complex value = 0.0;
                for (Index i = 0; i < shape_.size(); ++i) {
                    const CMatrix g = u[static_cast<std::size_t>(j)].block(i).adjoint() * u[static_cast<std::size_t>(k)].block(i);
                    const double wi = w[static_cast<std::size_t>(i)];
                    value += wi * g.trace();
                    Complex *t = tr.data() + off[static_cast<std::size_t>(i)];
                    trace_against_basis(g, t);
                    for (Index q = 0; q < herm_params(shape_[i]); ++q) {
                        const Complex dz = Complex(0.0, wi) * t[q];
                        const Index col = off[static_cast<std::size_t>(i)] + q;
                        jac(row, (k - 1) * per_member + col) += dz.real();
                        jac(row + 1, (k - 1) * per_member + col) += dz.imag();
                        if (j > 0) {
                            jac(row, (j - 1) * per_member + col) -= dz.real();
                            jac(row + 1, (j - 1) * per_member + col) -= dz.imag();
                        }
                    }
                }
                r(row) = value.real();
                r(row + 1) = value.imag();
            }

        const double c0 = r.squaredNorm();
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::MatrixXd a = jtj;
            a.diagonal().array() += mu;
            const Eigen::VectorXd step = -a.ldlt().solve(g);
            auto trial = u;
            for (Index k = 1; k < d_; ++k)
                for (Index i = 0; i < shape_.size(); ++i) {
                    const CMatrix h = herm_from(step.data() + (k - 1) * per_member + off[static_cast<std::size_t>(i)], shape_[i]);
                    trial[static_cast<std::size_t>(k)].block(i) = trial[static_cast<std::size_t>(k)].block(i) * exp_i(h);
                }
            if (cost(trial) < c0) {
                u = std::move(trial);
                mu = std::max(mu / 5.0, 1e-15);
                return true;
            }
            mu *= 10.0;
        }
        return false;
    }

    void sweep(std::vector<AlgebraElement> &u) const {
        const auto &w = state_.weights();
        // Lipschitz bound: top eigenvalue of [sum_i w_i^2 tr(U_ji^* U_li)]_{jl}.
        CMatrix h(d_, d_);
        for (Index j = 0; j < d_; ++j)
            for (Index l = j; l < d_; ++l) {
                Complex acc = 0.0;
                for (Index i = 0; i < shape_.size(); ++i)
                    acc += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)] *
                           u[static_cast<std::size_t>(j)].block(i).conjugate().cwiseProduct(u[static_cast<std::size_t>(l)].block(i)).sum();
                h(j, l) = acc;
                h(l, j) = std::conj(acc);
            }
        Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
        const double lip = std::max(es.eigenvalues().maxCoeff(), 1e-300);

        for (Index k = 1; k < d_; ++k) {
            auto &uk = u[static_cast<std::size_t>(k)];
            std::vector<CMatrix> grad;
            for (Index i = 0; i < shape_.size(); ++i) grad.push_back(CMatrix::Zero(shape_[i], shape_[i]));
            for (Index j = 0; j < d_; ++j) {
                if (j == k) continue;
                const auto &uj = u[static_cast<std::size_t>(j)];
                const Complex c = phi_inner(state_, uj, uk);
                for (Index i = 0; i < shape_.size(); ++i)
                    grad[static_cast<std::size_t>(i)] += (c * w[static_cast<std::size_t>(i)]) * uj.block(i);
            }
            for (Index i = 0; i < shape_.size(); ++i)
                uk.block(i) = polar_factor(lip * uk.block(i) - grad[static_cast<std::size_t>(i)]);
        }
    }

    AlgebraShape shape_;
    TraceState state_;
    SolverConfig cfg_;
    Index d_;
};

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
    // splitmix64 of (seed, restart)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(restart + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

UnitaryFamily basis_scalar_multi(const std::vector<Index> &dims, const SolverConfig &cfg) {
    cfg.validate();
    if (dims.empty()) throw ValidationError("basis_scalar_multi: need at least one summand", "dims");
    if (dims.size() == 1) return basis_scalar_single(dims.front());

    IntMatrix col(static_cast<Index>(dims.size()), 1);
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] < 1) throw ValidationError("basis_scalar_multi: dimensions must be positive", "dims");
        col(static_cast<Index>(i), 0) = dims[i];
    }
    auto inc = make_inclusion(col, {1});

    ScalarBasisSolver solver(inc->a_shape(), cfg);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.restarts; ++r) {
        auto result = solver.run(restart_seed(cfg.seed, r));
        best = std::min(best, result.residual);
        if (result.residual < cfg.tolerance)
            return UnitaryFamily(inc, std::move(result.members), std::max(cfg.tolerance, kFamilyTolerance));
    }
    std::ostringstream os;
    os << "scalar basis solver did not reach tolerance " << cfg.tolerance << " after " << cfg.restarts
       << " restarts (best residual " << best << ")";
    throw SolverError(os.str(), best);
}

InclusionDescriptor tensor_descriptor(const InclusionDescriptor &d1, const InclusionDescriptor &d2) {
    const IntMatrix &a = d1.matrix.entries(), &b = d2.matrix.entries();
    IntMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i1 = 0; i1 < a.rows(); ++i1)
        for (Index j1 = 0; j1 < a.cols(); ++j1)
            k.block(i1 * b.rows(), j1 * b.cols(), b.rows(), b.cols()) = a(i1, j1) * b;
    std::vector<Int> m;
    for (Int x : d1.b_dims.values())
        for (Int y : d2.b_dims.values()) m.push_back(x * y);
    return validate_descriptor(InclusionMatrix(k), DimensionVector(m));
}

InclusionDescriptor direct_sum_descriptor(const InclusionDescriptor &d1, const InclusionDescriptor &d2) {
    const IntMatrix &a = d1.matrix.entries(), &b = d2.matrix.entries();
    IntMatrix m = IntMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    m.topLeftCorner(a.rows(), a.cols()) = a;
    m.bottomRightCorner(b.rows(), b.cols()) = b;
    std::vector<Int> dims = d1.b_dims.values();
    dims.insert(dims.end(), d2.b_dims.values().begin(), d2.b_dims.values().end());
    return validate_descriptor(InclusionMatrix(m), DimensionVector(dims));
}

UnitaryFamily combine_tensor(const UnitaryFamily &f1, const UnitaryFamily &f2) {
    if (!f1.verified() || !f2.verified()) throw PreconditionError("combine_tensor: input family is not verified");
    const auto &inc1 = f1.inclusion();
    const auto &inc2 = f2.inclusion();
    auto inc = std::make_shared<const EmbeddedInclusion>(tensor_descriptor(inc1.descriptor(), inc2.descriptor()));
    const auto &d1 = inc1.descriptor();
    const auto &d2 = inc2.descriptor();

    // For each product summand (i1, i2): natural Kronecker index u1 * n2 + u2 -> standard position.
    std::vector<std::vector<Index>> maps;
    for (Index i1 = 0; i1 < d1.s(); ++i1) {
        const auto s1 = slots_of(inc1, i1);
        for (Index i2 = 0; i2 < d2.s(); ++i2) {
            const auto s2 = slots_of(inc2, i2);
            const Index i = i1 * d2.s() + i2;
            std::vector<Index> to(s1.size() * s2.size());
            for (std::size_t u1 = 0; u1 < s1.size(); ++u1)
                for (std::size_t u2 = 0; u2 < s2.size(); ++u2) {
                    const Slot &x = s1[u1], &y = s2[u2];
                    const Index j = x.j * d2.r() + y.j;
                    const Index p = x.p * d2.b_dims[y.j] + y.p;
                    const Index t = x.t * d2.matrix(i2, y.j) + y.t;
                    to[u1 * s2.size() + u2] = inc->position(i, j, p, t);
                }
            maps.push_back(std::move(to));
        }
    }

    std::vector<AlgebraElement> members;
    for (const auto &w1 : f1.members())
        for (const auto &w2 : f2.members()) {
            std::vector<CMatrix> blocks;
            for (Index i1 = 0; i1 < d1.s(); ++i1)
                for (Index i2 = 0; i2 < d2.s(); ++i2) {
                    const CMatrix &x = w1.block(i1), &y = w2.block(i2);
                    CMatrix k(x.rows() * y.rows(), x.cols() * y.cols());
                    for (Index a = 0; a < x.rows(); ++a)
                        for (Index b = 0; b < x.cols(); ++b)
                            k.block(a * y.rows(), b * y.cols(), y.rows(), y.cols()) = x(a, b) * y;
                    blocks.push_back(conjugate_by_index_map(k, maps[static_cast<std::size_t>(i1 * d2.s() + i2)]));
                }
            members.emplace_back(inc->a_shape(), std::move(blocks));
        }
    return UnitaryFamily(inc, std::move(members));
}

UnitaryFamily combine_direct_sum(const UnitaryFamily &f1, const UnitaryFamily &f2) {
    if (!f1.verified() || !f2.verified())
        throw PreconditionError("combine_direct_sum: input family is not verified");
    if (f1.d() != f2.d())
        throw PreconditionError("combine_direct_sum: member counts differ (" + std::to_string(f1.d()) + " vs " +
                                std::to_string(f2.d()) + "); the spectral condition fails");
    auto inc = std::make_shared<const EmbeddedInclusion>(
        direct_sum_descriptor(f1.inclusion().descriptor(), f2.inclusion().descriptor()));
    std::vector<AlgebraElement> members;
    for (Index j = 0; j < f1.d(); ++j) {
        std::vector<CMatrix> blocks = f1.members()[static_cast<std::size_t>(j)].blocks();
        const auto &more = f2.members()[static_cast<std::size_t>(j)].blocks();
        blocks.insert(blocks.end(), more.begin(), more.end());
        members.emplace_back(inc->a_shape(), std::move(blocks));
    }
    return UnitaryFamily(inc, std::move(members));
}

UnitaryFamily build_regular_onb(const InclusionDescriptor &d, const SolverConfig &cfg) {
    cfg.validate();
    auto verdict = classify_regular(d);
    if (!verdict.regular) throw NotRegularError(*verdict.witness());
    auto spectral = spectral_condition(d);
    if (!spectral.satisfied) throw SpectralConditionError(std::move(spectral));
    const auto &tree = *verdict.tree();

    std::optional<UnitaryFamily> total;
    for (const auto &blk : tree.blocks) {
        auto scalar = blk.column_entries.size() == 1
                          ? basis_scalar_single(blk.column_entries.front())
                          : basis_scalar_multi(std::vector<Index>(blk.column_entries.begin(), blk.column_entries.end()), cfg);
        auto f = combine_tensor(combine_tensor(basis_trivial(blk.m_k), scalar), basis_diagonal(blk.r_k));
        total = total ? combine_direct_sum(*total, f) : std::move(f);
    }

    // Canonical summand i' is source summand row_perm[i']; canonical B-summand
    // j' is source column col_perm[j'].
    const auto &canon = tree.canonical;
    const auto &cinc = total->inclusion();
    auto inc = std::make_shared<const EmbeddedInclusion>(d);
    std::vector<std::vector<Index>> maps;
    for (Index ci = 0; ci < cinc.descriptor().s(); ++ci) {
        const Index i = canon.row_perm[static_cast<std::size_t>(ci)];
        std::vector<Index> to(static_cast<std::size_t>(d.a_dims[i]));
        for (const Slot &sl : slots_of(cinc, ci)) {
            const Index j = canon.col_perm[static_cast<std::size_t>(sl.j)];
            to[static_cast<std::size_t>(cinc.position(ci, sl.j, sl.p, sl.t))] = inc->position(i, j, sl.p, sl.t);
        }
        maps.push_back(std::move(to));
    }
    std::vector<AlgebraElement> members;
    for (const auto &w : total->members()) {
        std::vector<CMatrix> blocks(static_cast<std::size_t>(d.s()));
        for (Index ci = 0; ci < d.s(); ++ci)
            blocks[static_cast<std::size_t>(canon.row_perm[static_cast<std::size_t>(ci)])] =
                conjugate_by_index_map(w.block(ci), maps[static_cast<std::size_t>(ci)]);
        members.emplace_back(inc->a_shape(), std::move(blocks));
    }
    return UnitaryFamily(inc, std::move(members));
}

} // namespace regincl
