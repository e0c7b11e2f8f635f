#pragma once

// Regularity criterion, building-block decomposition, spectral condition,
// corner/center reductions and matrix depth.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "regincl/inclusion.hpp"

namespace regincl {

/// One canonical block k: M_{m_k} (x) C^{r_k}  inside  M_{n_{k_1}} + ... + M_{n_{k_{s_k}}},
/// realized as trivial(m_k) (x) scalar(column_entries) (x) diagonal(r_k).
struct BlockFactorization {
    Int m_k = 1;
    Index r_k = 1;
    Index s_k = 1;
    std::vector<Int> column_entries; // a_{k_i k^1}, one per block row
    std::vector<Index> rows;         // source rows R_k
    std::vector<Index> cols;         // source columns C_k

    /// column_entries (x) ones(1, r_k).
    IntMatrix block_matrix() const;
    /// n_{k_i} = m_k * r_k * a_{k_i k^1}.
    std::vector<Int> a_dims() const;
    /// d_k = r_k * sum_i a_{k_i k^1}^2.
    Int spectral_value() const;
};

struct DecompositionTree {
    std::vector<BlockFactorization> blocks;
    CanonicalForm canonical;

    /// Block-diagonal descriptor in canonical order built from the factors alone.
    InclusionDescriptor reassemble() const;
};

struct RegularityVerdict {
    bool regular = false;
    std::variant<DecompositionTree, FailureWitness> certificate;

    const DecompositionTree *tree() const { return std::get_if<DecompositionTree>(&certificate); }
    const FailureWitness *witness() const { return std::get_if<FailureWitness>(&certificate); }
};

/// Witness priority: unequal row entries, then partition, then dimensions.
RegularityVerdict classify_regular(const InclusionDescriptor &d);

class NotRegularError : public PreconditionError {
  public:
    explicit NotRegularError(FailureWitness witness);
    const FailureWitness &witness() const noexcept { return witness_; }

  private:
    FailureWitness witness_;
};

DecompositionTree decompose(const InclusionDescriptor &d);

struct SpectralReport {
    bool satisfied = false;
    std::optional<Int> d;                    // when satisfied
    std::vector<Int> at_n;                   // A^t n'
    std::optional<std::vector<Int>> per_block_d; // when the descriptor is regular
};

SpectralReport spectral_condition(const InclusionDescriptor &d);

/// Alternating power: 1 -> A, 2 -> A A^t, 3 -> A A^t A, ...
IntMatrix alternating_power(const IntMatrix &a, int exponent);

/// Largest eigenvalue of A^t A.
double norm_squared(const IntMatrix &a);

inline constexpr int kDefaultDepthMax = 6;

struct DepthReport {
    int depth = 2;
    Int q_min = 1;
    double norm_sq_bound = 0.0;
};

class DepthBoundError : public Error {
  public:
    explicit DepthBoundError(int n_max);
    int n_max() const noexcept { return n_max_; }

  private:
    int n_max_;
};

/// Smallest n in [2, n_max] with A^{n+1} <= q A^{n-1} entrywise for some q.
DepthReport depth(const InclusionMatrix &matrix, int n_max = kDefaultDepthMax);

struct DepthTwoCheck {
    bool holds = false;
    Int q = 0;              // max_k d_k
    double norm_sq = 0.0;   // top eigenvalue of A^t A
};

inline constexpr double kNormTolerance = 1e-9;

/// A^3 <= q A with q = max_k d_k, and q == ||A||^2 within 1e-9.
DepthTwoCheck verify_depth_two_theorem(const InclusionDescriptor &d);

/// P_i B  inside  P_i A: row i restricted to its support.
InclusionDescriptor restrict_to_corner(const InclusionDescriptor &d, Index i);

/// Z(B) inside A: entries m_j a_ij, unit b_dims.
InclusionDescriptor center_descriptor(const InclusionDescriptor &d);

enum class Violation { none, unequal_row_entry, broken_partition, unequal_dimension };

struct GeneratorLimits {
    int max_blocks = 3;
    int max_block_rows = 3;
    int max_block_cols = 3;
    Int max_entry = 3;
    Int max_b_dim = 3;
    bool scramble = true;
    Violation plant = Violation::none;
};

/// Deterministic in `seed`. With `plant == none` the result is always regular;
/// otherwise exactly the requested kind of violation is planted.
InclusionDescriptor generate_regular_descriptor(std::uint64_t seed, const GeneratorLimits &limits = {});

} // namespace regincl
