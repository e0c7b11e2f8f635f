#pragma once

// Exact integer combinatorics of inclusion matrices.
//
// An inclusion B = M_{m_0} + ... + M_{m_{r-1}}  into  A = M_{n_0} + ... + M_{n_{s-1}}
// is determined up to isomorphism by its s x r multiplicity matrix together
// with the two dimension vectors, which satisfy n' = A m'.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "regincl/error.hpp"

namespace regincl {

using Int = std::int64_t;
using Index = Eigen::Index;
using IntMatrix = Eigen::Matrix<Int, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<Int, Eigen::Dynamic, 1>;

/// Builds an IntMatrix from nested rows; throws ValidationError on ragged input.
IntMatrix int_matrix(const std::vector<std::vector<Int>> &rows);
IntMatrix int_matrix(std::initializer_list<std::initializer_list<Int>> rows);

/// Irredundant nonnegative integer matrix (no zero row, no zero column).
class InclusionMatrix {
  public:
    explicit InclusionMatrix(IntMatrix entries);
    InclusionMatrix(std::initializer_list<std::initializer_list<Int>> rows)
        : InclusionMatrix(int_matrix(rows)) {}

    Index rows() const noexcept { return entries_.rows(); }
    Index cols() const noexcept { return entries_.cols(); }
    Int operator()(Index i, Index j) const { return entries_(i, j); }
    const IntMatrix &entries() const noexcept { return entries_; }

    friend bool operator==(const InclusionMatrix &a, const InclusionMatrix &b) {
        return a.entries_.rows() == b.entries_.rows() &&
               a.entries_.cols() == b.entries_.cols() && a.entries_ == b.entries_;
    }

  private:
    IntMatrix entries_;
};

/// True when `m` is nonempty, nonnegative, and has no zero row or column.
bool is_irredundant(const IntMatrix &m);

/// Sizes of the simple summands of a multi-matrix algebra; all entries >= 1.
class DimensionVector {
  public:
    DimensionVector() = default;
    explicit DimensionVector(std::vector<Int> dims);
    DimensionVector(std::initializer_list<Int> dims) : DimensionVector(std::vector<Int>(dims)) {}

    Index size() const noexcept { return static_cast<Index>(dims_.size()); }
    Int operator[](Index i) const { return dims_[static_cast<std::size_t>(i)]; }
    const std::vector<Int> &values() const noexcept { return dims_; }
    IntVector as_vector() const;

    friend bool operator==(const DimensionVector &, const DimensionVector &) = default;

  private:
    std::vector<Int> dims_;
};

/// The triple (A, m', n') with n' = A m'.
struct InclusionDescriptor {
    InclusionMatrix matrix;
    DimensionVector b_dims; // m', length r
    DimensionVector a_dims; // n', length s

    Index s() const noexcept { return matrix.rows(); }
    Index r() const noexcept { return matrix.cols(); }

    friend bool operator==(const InclusionDescriptor &, const InclusionDescriptor &) = default;
};

/// Computes n' = A m' and returns the descriptor.
InclusionDescriptor validate_descriptor(const InclusionMatrix &matrix, const DimensionVector &b_dims);

struct RowSupport {
    Index row = 0;
    std::vector<Index> support; // strictly increasing column indices
};

std::vector<RowSupport> row_supports(const InclusionMatrix &matrix);

struct SupportClass {
    std::vector<Index> rows; // R_k, natural order
    std::vector<Index> cols; // C_k, the common support
};

struct SupportPartition {
    std::vector<SupportClass> classes; // ordered by smallest member row
    Index p() const noexcept { return static_cast<Index>(classes.size()); }
};

/// a(i,j) == 0, a(k,j) != 0, a(i,l) != 0, a(k,l) != 0: rows i and k have
/// supports that overlap without being equal.
struct PartitionViolation {
    Index i = 0, k = 0, j = 0, l = 0;
    friend bool operator==(const PartitionViolation &, const PartitionViolation &) = default;
};

/// Row `row` has distinct nonzero entries in `col` and `other_col`.
struct UnequalRowEntries {
    Index row = 0, col = 0, other_col = 0;
    friend bool operator==(const UnequalRowEntries &, const UnequalRowEntries &) = default;
};

/// Columns `col` and `other_col` share the support of `row` but m_col != m_other_col.
struct UnequalDimensions {
    Index row = 0, col = 0, other_col = 0;
    friend bool operator==(const UnequalDimensions &, const UnequalDimensions &) = default;
};

using FailureWitness = std::variant<UnequalRowEntries, PartitionViolation, UnequalDimensions>;

std::string describe(const FailureWitness &witness);

/// Independently re-checks that `witness` violates its condition on `d`.
/// UnequalDimensions witnesses need the dimension vector, hence the descriptor.
bool witness_holds(const InclusionDescriptor &d, const FailureWitness &witness);
bool witness_holds(const InclusionMatrix &m, const FailureWitness &witness);

using PartitionResult = std::variant<SupportPartition, PartitionViolation>;

/// Supports pairwise equal or disjoint -> the partition; otherwise the
/// lexicographically smallest violating quadruple (i, k, j, l).
PartitionResult check_support_partition(const InclusionMatrix &matrix);

struct NormalizerCheck {
    bool is_normalizer = false;
    std::optional<FailureWitness> failure; // empty iff is_normalizer
    std::string reason;

    explicit operator bool() const noexcept { return is_normalizer; }
};

/// Row-constancy is checked first, then the support partition.
NormalizerCheck is_normalizer_matrix(const InclusionMatrix &matrix);

struct CanonicalBlock {
    std::vector<Index> rows;     // source rows, natural order
    std::vector<Index> cols;     // source columns, natural order
    std::vector<Int> row_values; // common nonzero entry of each row

    Index s() const noexcept { return static_cast<Index>(rows.size()); }
    Index r() const noexcept { return static_cast<Index>(cols.size()); }
    IntMatrix entries() const;
};

/// Row permutation sigma and column permutation tau with
/// permuted(i, j) = source(sigma[i], tau[j]) block diagonal.
struct CanonicalForm {
    std::vector<Index> row_perm;
    std::vector<Index> col_perm;
    std::vector<CanonicalBlock> blocks;

    /// bl-diag of the block entries.
    IntMatrix block_diagonal() const;
};

/// canonicalize() on a matrix that is not a normalizer matrix.
class NotNormalizerError : public PreconditionError {
  public:
    explicit NotNormalizerError(FailureWitness witness);
    const FailureWitness &witness() const noexcept { return witness_; }

  private:
    FailureWitness witness_;
};

CanonicalForm canonicalize(const InclusionMatrix &matrix);

/// result(i, j) = m(row_perm[i], col_perm[j]).
IntMatrix permute(const IntMatrix &m, const std::vector<Index> &row_perm,
                  const std::vector<Index> &col_perm);

bool is_permutation(const std::vector<Index> &perm, Index n);
std::vector<Index> inverse_permutation(const std::vector<Index> &perm);

inline constexpr Index kPseudoEquivalenceMaxSide = 10;

/// Permutations (row_perm, col_perm) with b = permute(a, row_perm, col_perm).
struct PseudoEquivalence {
    std::vector<Index> row_perm;
    std::vector<Index> col_perm;
};

/// Exact decision by backtracking over column assignments. Throws
/// SizeLimitError if either matrix has more than 10 rows or columns.
std::optional<PseudoEquivalence> find_pseudo_equivalence(const IntMatrix &a, const IntMatrix &b);
bool pseudo_equivalent(const IntMatrix &a, const IntMatrix &b);

} // namespace regincl
