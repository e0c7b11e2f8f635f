#pragma once

// Dense numeric realization of multi-matrix algebras, the embedding of B
// into A given by an inclusion descriptor, the tracial state phi and the
// phi-preserving conditional expectation E: A -> B.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "regincl/inclusion.hpp"

namespace regincl {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kDefaultTolerance = 1e-10;

class AlgebraShape {
  public:
    AlgebraShape() = default;
    explicit AlgebraShape(std::vector<Index> dims);
    explicit AlgebraShape(const DimensionVector &dims);

    Index size() const noexcept { return static_cast<Index>(dims_.size()); }
    Index operator[](Index i) const { return dims_[static_cast<std::size_t>(i)]; }
    const std::vector<Index> &dims() const noexcept { return dims_; }
    /// sum_i n_i^2
    Index dimension() const noexcept;

    friend bool operator==(const AlgebraShape &, const AlgebraShape &) = default;

  private:
    std::vector<Index> dims_;
};

/// X = X_0 + X_1 + ... with X_i a complex square matrix of size shape[i].
class AlgebraElement {
  public:
    AlgebraElement() = default;
    AlgebraElement(AlgebraShape shape, std::vector<CMatrix> blocks);

    static AlgebraElement identity(const AlgebraShape &shape);
    static AlgebraElement zero(const AlgebraShape &shape);
    /// Independent standard complex Gaussian entries.
    static AlgebraElement random(const AlgebraShape &shape, std::mt19937_64 &rng);
    /// Haar-distributed unitary in every summand.
    static AlgebraElement random_unitary(const AlgebraShape &shape, std::mt19937_64 &rng);

    const AlgebraShape &shape() const noexcept { return shape_; }
    const CMatrix &block(Index i) const { return blocks_[static_cast<std::size_t>(i)]; }
    CMatrix &block(Index i) { return blocks_[static_cast<std::size_t>(i)]; }
    const std::vector<CMatrix> &blocks() const noexcept { return blocks_; }

    AlgebraElement adjoint() const;
    AlgebraElement &operator+=(const AlgebraElement &o);
    AlgebraElement &operator-=(const AlgebraElement &o);
    AlgebraElement &operator*=(Complex c);

    friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement &b) { return a += b; }
    friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement &b) { return a -= b; }
    friend AlgebraElement operator*(AlgebraElement a, Complex c) { return a *= c; }
    friend AlgebraElement operator*(Complex c, AlgebraElement a) { return a *= c; }
    friend AlgebraElement operator*(const AlgebraElement &a, const AlgebraElement &b);

    /// sqrt(sum_i ||X_i||_F^2)
    double frobenius_norm() const;
    /// max_i max |entries of X_i|
    double max_abs() const;

  private:
    AlgebraShape shape_;
    std::vector<CMatrix> blocks_;
};

/// max_i ||U_i^* U_i - 1|| and ||U_i U_i^* - 1|| in max-abs entries.
double unitarity_residual(const AlgebraElement &u);

/// phi(+X_i) = (1 / sum_k n_k^2) sum_i n_i trace(X_i).
class TraceState {
  public:
    explicit TraceState(const AlgebraShape &shape);

    const AlgebraShape &shape() const noexcept { return shape_; }
    /// c_i = n_i / sum_k n_k^2
    const std::vector<double> &weights() const noexcept { return weights_; }

    friend bool operator==(const TraceState &, const TraceState &) = default;

  private:
    AlgebraShape shape_;
    std::vector<double> weights_;
};

Complex phi(const TraceState &state, const AlgebraElement &x);
/// <u, v> = phi(u^* v); conjugate-linear in u.
Complex phi_inner(const TraceState &state, const AlgebraElement &u, const AlgebraElement &v);
double phi_norm(const TraceState &state, const AlgebraElement &x);

struct CentralProjections {
    std::vector<AlgebraElement> p; // P_i, one per A-summand
    std::vector<AlgebraElement> q; // embedded Q_j, one per B-summand
};

struct ImageProjection {
    AlgebraElement projection; // iota(E(x))
    double residual = 0.0;     // ||x - iota(E(x))|| in the phi-norm
};

/// The inclusion realized by the standard block-diagonal embedding
///   +_j X_j  ->  +_i bl-diag(X_0 (x) 1_{a_i0}, ..., X_{r-1} (x) 1_{a_i,r-1}).
/// Construction precomputes the copy layout and a phi-orthonormalized frame of
/// iota(B); the object is read-only afterwards.
class EmbeddedInclusion {
  public:
    explicit EmbeddedInclusion(InclusionDescriptor descriptor);

    const InclusionDescriptor &descriptor() const noexcept { return descriptor_; }
    const AlgebraShape &b_shape() const noexcept { return b_shape_; }
    const AlgebraShape &a_shape() const noexcept { return a_shape_; }
    const TraceState &state() const noexcept { return state_; }

    /// First index of the copies of B-summand j inside A-summand i; the range
    /// has length a_ij * m_j and holds X_j (x) 1_{a_ij}.
    Index offset(Index i, Index j) const;

    /// Index inside A-summand i of the t-th copy (t < a_ij) of basis vector p of B-summand j.
    Index position(Index i, Index j, Index p, Index t) const;

    AlgebraElement embed(const AlgebraElement &x) const;
    AlgebraElement cond_expectation(const AlgebraElement &x) const;
    AlgebraElement cond_expectation(const TraceState &state, const AlgebraElement &x) const;

    /// dim_C B = sum_j m_j^2
    Index b_dimension() const noexcept { return b_shape_.dimension(); }

    struct SparseEntry {
        Index summand, row, col;
    };
    struct FrameComponent {
        std::vector<Index> members; // indices into units_
        CMatrix gram_inverse;
    };
    struct MatrixUnit {
        Index j, p, q;
        std::vector<SparseEntry> support; // iota(e^j_pq), all entries 1
    };

  private:
    std::vector<FrameComponent> build_frame(const TraceState &state) const;
    AlgebraElement project(const std::vector<FrameComponent> &frame, const TraceState &state,
                           const AlgebraElement &x) const;

    InclusionDescriptor descriptor_;
    AlgebraShape b_shape_, a_shape_;
    TraceState state_;
    std::vector<std::vector<Index>> offsets_; // [i][j]
    std::vector<MatrixUnit> units_;
    std::vector<FrameComponent> frame_;
};

AlgebraElement embed(const EmbeddedInclusion &inc, const AlgebraElement &x);
CentralProjections central_projections(const EmbeddedInclusion &inc);
AlgebraElement cond_expectation(const EmbeddedInclusion &inc, const TraceState &state,
                                const AlgebraElement &x);
ImageProjection project_onto_image(const EmbeddedInclusion &inc, const TraceState &state,
                                   const AlgebraElement &x);

} // namespace regincl
