#pragma once

// Descriptor documents, analysis reports and basis payloads. Every report is
// built once as an ordered JSON tree; the machine and human renderings are
// both produced from that tree.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "regincl/basis.hpp"
#include "regincl/verifier.hpp"

namespace regincl {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitRefused = 2,
    kExitInvalid = 3,
    kExitSolver = 4,
    kExitVerifyFailed = 5,
};

/// Malformed document text; line and column are 1-based.
class ParseError : public Error {
  public:
    ParseError(const std::string &what, std::size_t line, std::size_t column);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_, column_;
};

struct DescriptorDocument {
    InclusionDescriptor descriptor;
    std::optional<std::string> label;
};

/// Syntax errors raise ParseError; schema and validation errors raise
/// ValidationError whose field() is a path such as "a_dims[1]".
DescriptorDocument parse_descriptor_document(const std::string &text);
InclusionDescriptor parse_descriptor(const std::string &text);
/// Validates an already-parsed JSON value.
DescriptorDocument descriptor_from_json(const nlohmann::json &j);

Json descriptor_json(const InclusionDescriptor &d, const std::optional<std::string> &label = std::nullopt);
std::string emit_descriptor(const InclusionDescriptor &d, const std::optional<std::string> &label = std::nullopt);

Json witness_json(const FailureWitness &w);
Json spectral_json(const SpectralReport &s);
Json canonical_json(const CanonicalForm &c);
Json decomposition_json(const DecompositionTree &t);
Json verification_json(const VerificationReport &r);

/// Members as [summand][row-major entries], each entry a [re, im] pair.
Json basis_payload(const UnitaryFamily &f);
/// Accepts either the payload itself or a document with a "basis" key.
std::vector<AlgebraElement> parse_basis_payload(const nlohmann::json &j, const AlgebraShape &shape);

struct RunOptions {
    int depth_max = kDefaultDepthMax;
    SolverConfig solver;
    VerifyTolerances verify;
};

struct RunResult {
    Json report;
    int exit_code = kExitOk;
};

RunResult run_analyze(const DescriptorDocument &doc, const RunOptions &opts = {});
RunResult run_build_basis(const DescriptorDocument &doc, const RunOptions &opts = {});
RunResult run_canonicalize(const DescriptorDocument &doc);
RunResult run_decompose(const DescriptorDocument &doc);
RunResult run_depth(const DescriptorDocument &doc, const RunOptions &opts = {});
RunResult run_verify(const DescriptorDocument &doc, const nlohmann::json &basis, const RunOptions &opts = {});

/// JSON text with floating-point values at 17 significant digits.
std::string render_machine(const Json &report);
/// One "path: value" line per leaf, in report order.
std::string render_human(const Json &report);
/// Inverse of render_human, used to check that the renderings agree.
Json parse_human(const std::string &text);

} // namespace regincl
