#pragma once

// Unitary orthonormal bases contained in the normalizer: closed forms for the
// three building blocks, tensor and direct-sum combinators, a numerical
// solver for C inside M_{l_0} + ... + M_{l_{v-1}}, and the full pipeline for
// regular inclusions that satisfy the spectral condition.

#include <cstdint>
#include <memory>
#include <vector>

#include "regincl/algebra.hpp"
#include "regincl/classifier.hpp"

namespace regincl {

struct SolverConfig {
    double tolerance = 1e-8;   // target for max |phi-Gram - identity|
    int max_iterations = 5000; // MM sweeps plus LM steps, per restart
    int restarts = 20;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Tolerance used when a family is checked at construction.
inline constexpr double kFamilyTolerance = 1e-9;

/// max over pairs (j, k) of max-abs entries of E(W_j^* W_k) - delta_jk 1.
double orthonormality_residual(const EmbeddedInclusion &inc, const std::vector<AlgebraElement> &members);

/// An ordered family of unitaries in A claimed to be orthonormal over B.
/// Construction records the Gram residual; `verified()` is true when all
/// members are unitary and the residual is within `tolerance`.
class UnitaryFamily {
  public:
    UnitaryFamily(std::shared_ptr<const EmbeddedInclusion> inclusion, std::vector<AlgebraElement> members,
                  double tolerance = kFamilyTolerance);

    const std::vector<AlgebraElement> &members() const noexcept { return members_; }
    Index d() const noexcept { return static_cast<Index>(members_.size()); }
    const EmbeddedInclusion &inclusion() const noexcept { return *inclusion_; }
    const std::shared_ptr<const EmbeddedInclusion> &inclusion_ptr() const noexcept { return inclusion_; }
    double gram_residual() const noexcept { return gram_residual_; }
    double unitarity_residual() const noexcept { return unitarity_residual_; }
    bool verified() const noexcept { return verified_; }

  private:
    std::shared_ptr<const EmbeddedInclusion> inclusion_;
    std::vector<AlgebraElement> members_;
    double gram_residual_ = 0.0;
    double unitarity_residual_ = 0.0;
    bool verified_ = false;
};

/// The solver ran out of restarts without meeting the tolerance.
class SolverError : public Error {
  public:
    SolverError(const std::string &what, double best_residual)
        : Error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

  private:
    double best_residual_;
};

/// Regular inclusion without the spectral condition: no basis of equal size exists.
class SpectralConditionError : public PreconditionError {
  public:
    explicit SpectralConditionError(SpectralReport report);
    const SpectralReport &report() const noexcept { return report_; }

  private:
    SpectralReport report_;
};

/// {1_k} for M_k inside M_k.
UnitaryFamily basis_trivial(Index k);
/// {U^t : t in Z_n} with U e_t = e_{t+1 mod n}, for C^n inside M_n.
UnitaryFamily basis_diagonal(Index n);
/// Weyl unitaries S^a C^b (a, b lexicographic) for C inside M_n.
UnitaryFamily basis_scalar_single(Index n);
/// sum_i l_i^2 unitaries for C inside M_{l_0} + ... ; first member is 1.
UnitaryFamily basis_scalar_multi(const std::vector<Index> &dims, const SolverConfig &cfg = {});

/// {U_j(1) (x) U_k(2)} on the inclusion with matrix A_1 (x) A_2, summands in
/// lexicographic (i_1, i_2) order.
UnitaryFamily combine_tensor(const UnitaryFamily &f1, const UnitaryFamily &f2);
/// {U_j(1) + U_j(2)} on the inclusion with matrix bl-diag(A_1, A_2); needs d_1 == d_2.
UnitaryFamily combine_direct_sum(const UnitaryFamily &f1, const UnitaryFamily &f2);

/// Tensor-product descriptor with matrix A_1 (x) A_2.
InclusionDescriptor tensor_descriptor(const InclusionDescriptor &d1, const InclusionDescriptor &d2);
/// Direct-sum descriptor with matrix bl-diag(A_1, A_2).
InclusionDescriptor direct_sum_descriptor(const InclusionDescriptor &d1, const InclusionDescriptor &d2);

/// Builds the basis block by block in canonical order and transports it back
/// to the summand ordering of `d`.
UnitaryFamily build_regular_onb(const InclusionDescriptor &d, const SolverConfig &cfg = {});

} // namespace regincl
