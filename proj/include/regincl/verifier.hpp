#pragma once

// Independent numerical certification of unitary families: unitarity,
// orthonormality under E, the reconstruction identity, normalizer membership
// and the block-permutation structure of normalizing unitaries.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regincl/basis.hpp"

namespace regincl {

struct CheckResult {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool overall() const noexcept;
    void append(const VerificationReport &other);
};

struct VerifyTolerances {
    double unitarity = 1e-10;
    double membership = 1e-9;
    double orthonormality = 1e-9;
    double reconstruction = 1e-9;
    int trials = 16;
    std::uint64_t seed = 0x5eedULL;
};

VerificationReport check_unitarity(const std::vector<AlgebraElement> &members, double tol);
VerificationReport check_orthonormal(const UnitaryFamily &f, double tol);
VerificationReport check_reconstruction(const UnitaryFamily &f, int trials, double tol,
                                        std::uint64_t seed = VerifyTolerances{}.seed);

/// Largest phi-norm distance from u iota(e) u^* to iota(B) over the matrix
/// units e of B, each normalized by ||iota(e)||_phi. Throws PreconditionError
/// when u is not unitary to 1e-8.
double normalizer_residual(const EmbeddedInclusion &inc, const AlgebraElement &u);
bool check_normalizer_membership(const EmbeddedInclusion &inc, const AlgebraElement &u, double tol);
VerificationReport check_family_membership(const UnitaryFamily &f, double tol);

/// All checks at once; the names are stable and used in reports.
VerificationReport verify_family(const UnitaryFamily &f, const VerifyTolerances &tol = {});

/// Per A-summand i: sigma_i on the row support Y_i and the nonzero blocks
/// P_i Q_l u Q_k with l = sigma_i(k), each an a_i x a_i unitary.
struct SummandBlockStructure {
    std::map<Index, Index> sigma;             // k -> l
    std::map<Index, CMatrix> blocks;          // keyed by k
};

struct BlockPermutationWitness {
    std::vector<SummandBlockStructure> summands;
};

/// More than one (or no) nonzero block in a block row/column.
class AmbiguousPatternError : public Error {
  public:
    using Error::Error;
};

/// Requires m' = 1s and constant nonzero entries in every row.
BlockPermutationWitness extract_block_structure(const EmbeddedInclusion &inc, const AlgebraElement &u,
                                                double tol = 1e-9);

/// Inverse of extraction: assembles the unitary with the given pattern.
AlgebraElement assemble_block_permutation(const EmbeddedInclusion &inc, const BlockPermutationWitness &w);

struct SpanCertificate {
    bool certified = false;
    double reconstruction_residual = 0.0;
    std::optional<Index> rank;  // only computed for small problems
    Index dim_a = 0;
};

inline constexpr Index kSpanRankMaxEntries = 4'000'000;

/// Throws PreconditionError if some member is not in the normalizer.
SpanCertificate certify_regularity_by_span(const UnitaryFamily &f, double tol = 1e-9);

} // namespace regincl
