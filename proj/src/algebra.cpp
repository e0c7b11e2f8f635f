#include "regincl/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include <Eigen/Dense>

namespace regincl {

AlgebraShape::AlgebraShape(std::vector<Index> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ShapeError("algebra shape must have at least one summand");
    for (Index n : dims_)
        if (n < 1) throw ShapeError("summand dimension " + std::to_string(n) + " is not positive");
}

AlgebraShape::AlgebraShape(const DimensionVector &dims)
    : AlgebraShape(std::vector<Index>(dims.values().begin(), dims.values().end())) {}

Index AlgebraShape::dimension() const noexcept {
    Index total = 0;
    for (Index n : dims_) total += n * n;
    return total;
}

AlgebraElement::AlgebraElement(AlgebraShape shape, std::vector<CMatrix> blocks)
    : shape_(std::move(shape)), blocks_(std::move(blocks)) {
    if (static_cast<Index>(blocks_.size()) != shape_.size())
        throw ShapeError("element has " + std::to_string(blocks_.size()) + " blocks, shape has " +
                         std::to_string(shape_.size()) + " summands");
    for (Index i = 0; i < shape_.size(); ++i) {
        const auto &b = blocks_[static_cast<std::size_t>(i)];
        if (b.rows() != shape_[i] || b.cols() != shape_[i])
            throw ShapeError("block " + std::to_string(i) + " is " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()) + ", expected size " + std::to_string(shape_[i]));
    }
}

AlgebraElement AlgebraElement::identity(const AlgebraShape &shape) {
    std::vector<CMatrix> blocks;
    for (Index n : shape.dims()) blocks.push_back(CMatrix::Identity(n, n));
    return {shape, std::move(blocks)};
}

AlgebraElement AlgebraElement::zero(const AlgebraShape &shape) {
    std::vector<CMatrix> blocks;
    for (Index n : shape.dims()) blocks.push_back(CMatrix::Zero(n, n));
    return {shape, std::move(blocks)};
}

AlgebraElement AlgebraElement::random(const AlgebraShape &shape, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<CMatrix> blocks;
    for (Index n : shape.dims()) {
        CMatrix m(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
        blocks.push_back(std::move(m));
    }
    return {shape, std::move(blocks)};
}

AlgebraElement AlgebraElement::random_unitary(const AlgebraShape &shape, std::mt19937_64 &rng) {
    auto x = random(shape, rng);
    for (auto &b : x.blocks_) {
        Eigen::HouseholderQR<CMatrix> qr(b);
        CMatrix q = qr.householderQ();
        const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        // Fix the phases of R's diagonal so Q is Haar distributed.
        for (Index k = 0; k < b.rows(); ++k) {
            const Complex d = r(k, k);
            const double a = std::abs(d);
            if (a > 0) q.col(k) *= d / a;
        }
        b = q;
    }
    return x;
}

AlgebraElement AlgebraElement::adjoint() const {
    std::vector<CMatrix> blocks;
    for (const auto &b : blocks_) blocks.push_back(b.adjoint());
    return {shape_, std::move(blocks)};
}

AlgebraElement &AlgebraElement::operator+=(const AlgebraElement &o) {
    if (!(shape_ == o.shape_)) throw ShapeError("adding elements of different shapes");
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += o.blocks_[i];
    return *this;
}

AlgebraElement &AlgebraElement::operator-=(const AlgebraElement &o) {
    if (!(shape_ == o.shape_)) throw ShapeError("subtracting elements of different shapes");
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= o.blocks_[i];
    return *this;
}

AlgebraElement &AlgebraElement::operator*=(Complex c) {
    for (auto &b : blocks_) b *= c;
    return *this;
}

AlgebraElement operator*(const AlgebraElement &a, const AlgebraElement &b) {
    if (!(a.shape_ == b.shape_)) throw ShapeError("multiplying elements of different shapes");
    std::vector<CMatrix> blocks;
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) blocks.push_back(a.blocks_[i] * b.blocks_[i]);
    return {a.shape_, std::move(blocks)};
}

double AlgebraElement::frobenius_norm() const {
    double sq = 0.0;
    for (const auto &b : blocks_) sq += b.squaredNorm();
    return std::sqrt(sq);
}

double AlgebraElement::max_abs() const {
    double m = 0.0;
    for (const auto &b : blocks_)
        if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
    return m;
}

double unitarity_residual(const AlgebraElement &u) {
    double r = 0.0;
    for (const auto &b : u.blocks()) {
        const auto id = CMatrix::Identity(b.rows(), b.cols());
        r = std::max(r, (b.adjoint() * b - id).cwiseAbs().maxCoeff());
        r = std::max(r, (b * b.adjoint() - id).cwiseAbs().maxCoeff());
    }
    return r;
}

TraceState::TraceState(const AlgebraShape &shape) : shape_(shape) {
    const double total = static_cast<double>(shape.dimension());
    for (Index n : shape.dims()) weights_.push_back(static_cast<double>(n) / total);
}

Complex phi(const TraceState &state, const AlgebraElement &x) {
    if (!(state.shape() == x.shape())) throw ShapeError("phi: element shape does not match the state");
    Complex sum = 0.0;
    for (Index i = 0; i < x.shape().size(); ++i) sum += state.weights()[static_cast<std::size_t>(i)] * x.block(i).trace();
    return sum;
}

Complex phi_inner(const TraceState &state, const AlgebraElement &u, const AlgebraElement &v) {
    if (!(state.shape() == u.shape()) || !(u.shape() == v.shape()))
        throw ShapeError("phi_inner: element shapes do not match the state");
    Complex sum = 0.0;
    for (Index i = 0; i < u.shape().size(); ++i)
        sum += state.weights()[static_cast<std::size_t>(i)] * u.block(i).conjugate().cwiseProduct(v.block(i)).sum();
    return sum;
}

double phi_norm(const TraceState &state, const AlgebraElement &x) {
    return std::sqrt(std::max(0.0, phi_inner(state, x, x).real()));
}

EmbeddedInclusion::EmbeddedInclusion(InclusionDescriptor descriptor)
    : descriptor_(std::move(descriptor)), b_shape_(descriptor_.b_dims), a_shape_(descriptor_.a_dims),
      state_(a_shape_) {
    const Index s = descriptor_.s(), r = descriptor_.r();
    offsets_.assign(static_cast<std::size_t>(s), std::vector<Index>(static_cast<std::size_t>(r), 0));
    for (Index i = 0; i < s; ++i) {
        Index off = 0;
        for (Index j = 0; j < r; ++j) {
            offsets_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = off;
            off += descriptor_.matrix(i, j) * descriptor_.b_dims[j];
        }
        if (off != descriptor_.a_dims[i])
            throw ValidationError("copies do not tile summand " + std::to_string(i), "a_dims");
    }

    for (Index j = 0; j < r; ++j) {
        const Index m = descriptor_.b_dims[j];
        for (Index p = 0; p < m; ++p)
            for (Index q = 0; q < m; ++q) {
                MatrixUnit unit{j, p, q, {}};
                for (Index i = 0; i < s; ++i)
                    for (Index t = 0; t < descriptor_.matrix(i, j); ++t)
                        unit.support.push_back({i, position(i, j, p, t), position(i, j, q, t)});
                units_.push_back(std::move(unit));
            }
    }
    frame_ = build_frame(state_);
}

Index EmbeddedInclusion::offset(Index i, Index j) const {
    return offsets_.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j));
}

Index EmbeddedInclusion::position(Index i, Index j, Index p, Index t) const {
    return offset(i, j) + p * descriptor_.matrix(i, j) + t;
}

AlgebraElement EmbeddedInclusion::embed(const AlgebraElement &x) const {
    if (!(x.shape() == b_shape_)) throw ShapeError("embed: element is not in B");
    auto out = AlgebraElement::zero(a_shape_);
    for (Index i = 0; i < descriptor_.s(); ++i)
        for (Index j = 0; j < descriptor_.r(); ++j) {
            const Index a = descriptor_.matrix(i, j);
            const Index m = b_shape_[j];
            const CMatrix &xj = x.block(j);
            for (Index p = 0; p < m; ++p)
                for (Index q = 0; q < m; ++q)
                    for (Index t = 0; t < a; ++t)
                        out.block(i)(position(i, j, p, t), position(i, j, q, t)) = xj(p, q);
        }
    return out;
}

namespace {

struct DisjointSets {
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
    std::vector<std::size_t> parent;
};

} // namespace

std::vector<EmbeddedInclusion::FrameComponent>
EmbeddedInclusion::build_frame(const TraceState &state) const {
    // Embedded matrix units whose supports share a position are not orthogonal;
    // group them and orthonormalize each group through its Gram matrix.
    DisjointSets sets(units_.size());
    std::map<std::tuple<Index, Index, Index>, std::size_t> owner;
    for (std::size_t u = 0; u < units_.size(); ++u)
        for (const auto &e : units_[u].support) {
            auto [it, inserted] = owner.emplace(std::make_tuple(e.summand, e.row, e.col), u);
            if (!inserted) sets.unite(u, it->second);
        }

    std::map<std::size_t, std::vector<Index>> groups;
    for (std::size_t u = 0; u < units_.size(); ++u) groups[sets.find(u)].push_back(static_cast<Index>(u));

    const auto &w = state.weights();
    std::vector<FrameComponent> frame;
    for (auto &[root, members] : groups) {
        const auto n = static_cast<Index>(members.size());
        CMatrix gram = CMatrix::Zero(n, n);
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b) {
                const auto &sa = units_[static_cast<std::size_t>(members[static_cast<std::size_t>(a)])].support;
                const auto &sb = units_[static_cast<std::size_t>(members[static_cast<std::size_t>(b)])].support;
                double g = 0.0;
                for (const auto &x : sa)
                    for (const auto &y : sb)
                        if (x.summand == y.summand && x.row == y.row && x.col == y.col)
                            g += w[static_cast<std::size_t>(x.summand)];
                gram(a, b) = g;
            }
        frame.push_back({std::move(members), gram.inverse()});
    }
    return frame;
}

AlgebraElement EmbeddedInclusion::project(const std::vector<FrameComponent> &frame,
                                          const TraceState &state, const AlgebraElement &x) const {
    if (!(x.shape() == a_shape_)) throw ShapeError("conditional expectation: element is not in A");
    if (!(state.shape() == a_shape_)) throw ShapeError("conditional expectation: state is not on A");
    const auto &w = state.weights();
    auto out = AlgebraElement::zero(b_shape_);
    for (const auto &comp : frame) {
        const auto n = static_cast<Index>(comp.members.size());
        Eigen::VectorXcd v(n);
        for (Index a = 0; a < n; ++a) {
            Complex acc = 0.0;
            for (const auto &e : units_[static_cast<std::size_t>(comp.members[static_cast<std::size_t>(a)])].support)
                acc += w[static_cast<std::size_t>(e.summand)] * x.block(e.summand)(e.row, e.col);
            v(a) = acc;
        }
        const Eigen::VectorXcd c = comp.gram_inverse * v;
        for (Index a = 0; a < n; ++a) {
            const auto &unit = units_[static_cast<std::size_t>(comp.members[static_cast<std::size_t>(a)])];
            out.block(unit.j)(unit.p, unit.q) += c(a);
        }
    }
    return out;
}

AlgebraElement EmbeddedInclusion::cond_expectation(const AlgebraElement &x) const {
    return project(frame_, state_, x);
}

AlgebraElement EmbeddedInclusion::cond_expectation(const TraceState &state, const AlgebraElement &x) const {
    if (state == state_) return project(frame_, state_, x);
    if (!(state.shape() == a_shape_)) throw ShapeError("conditional expectation: state is not on A");
    return project(build_frame(state), state, x);
}

AlgebraElement embed(const EmbeddedInclusion &inc, const AlgebraElement &x) { return inc.embed(x); }

CentralProjections central_projections(const EmbeddedInclusion &inc) {
    CentralProjections out;
    for (Index i = 0; i < inc.a_shape().size(); ++i) {
        auto p = AlgebraElement::zero(inc.a_shape());
        p.block(i).setIdentity();
        out.p.push_back(std::move(p));
    }
    for (Index j = 0; j < inc.b_shape().size(); ++j) {
        auto q = AlgebraElement::zero(inc.b_shape());
        q.block(j).setIdentity();
        out.q.push_back(inc.embed(q));
    }
    return out;
}

AlgebraElement cond_expectation(const EmbeddedInclusion &inc, const TraceState &state,
                                const AlgebraElement &x) {
    return inc.cond_expectation(state, x);
}

ImageProjection project_onto_image(const EmbeddedInclusion &inc, const TraceState &state,
                                   const AlgebraElement &x) {
    auto proj = inc.embed(inc.cond_expectation(state, x));
    const double residual = phi_norm(state, x - proj);
    return {std::move(proj), residual};
}

} // namespace regincl
