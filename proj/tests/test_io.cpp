#include <gtest/gtest.h>

#include "regincl/io.hpp"

using namespace regincl;

namespace {

const char *kWorked = R"({"inclusion_matrix": [[3,3,0,3],[0,0,2,2]], "b_dims": [1,1,1,1]})";
const char *kDiag4 = R"({"inclusion_matrix": [[1,1,1,1]], "b_dims": [1,1,1,1]})";
const char *kNonSpectral = R"({"inclusion_matrix": [[1,0],[0,2]], "b_dims": [1,1]})";

std::string field_of(const std::string &text) {
    try {
        parse_descriptor(text);
    } catch (const ValidationError &e) {
        return e.field();
    }
    return "<no error>";
}

void expect_renderings_agree(const Json &report) {
    const Json machine = Json::parse(render_machine(report));
    EXPECT_EQ(machine, report);
    EXPECT_EQ(parse_human(render_human(report)), machine.flatten());
}

} // namespace

TEST(Parse, Examples) {
    const auto d = parse_descriptor(kWorked);
    EXPECT_EQ(d.a_dims.values(), (std::vector<Int>{9, 4}));
    EXPECT_EQ(parse_descriptor(R"({"inclusion_matrix": [[1]], "b_dims": [5]})").a_dims.values(),
              (std::vector<Int>{5}));
    EXPECT_EQ(field_of(R"({"inclusion_matrix": [[3,3,0,3],[0,0,2,2]], "b_dims": [1,1,1,1], "a_dims": [9,5]})"),
              "a_dims[1]");
    const auto doc = parse_descriptor_document(R"({"inclusion_matrix": [[1]], "b_dims": [2], "label": "m2"})");
    EXPECT_EQ(doc.label, "m2");
}

TEST(Parse, FieldDiagnostics) {
    EXPECT_EQ(field_of(R"({"inclusion_matrix": [[1,-1]], "b_dims": [1,1]})"), "inclusion_matrix[0][1]");
    EXPECT_EQ(field_of(R"({"inclusion_matrix": [[1,1],[1]], "b_dims": [1,1]})"), "inclusion_matrix[1]");
    EXPECT_EQ(field_of(R"({"inclusion_matrix": [[1,1.5]], "b_dims": [1,1]})"), "inclusion_matrix[0][1]");
    EXPECT_EQ(field_of(R"({"inclusion_matrix": [[1,1]], "b_dims": [1,0]})"), "b_dims[1]");
    EXPECT_EQ(field_of(R"({"inclusion_matrix": [[1,1]], "b_dims": [1]})"), "b_dims");
    EXPECT_EQ(field_of(R"({"inclusion_matrix": [[1,0],[0,0]], "b_dims": [1,1]})").rfind("inclusion_matrix", 0), 0u);
    EXPECT_EQ(field_of(R"({"inclusion_matrix": [[1]], "b_dims": [1], "extra": 1})"), "extra");
    EXPECT_EQ(field_of(R"({"b_dims": [1]})"), "inclusion_matrix");
    EXPECT_EQ(field_of(R"({"inclusion_matrix": [[1]], "b_dims": [1], "a_dims": [1, 1]})"), "a_dims");
    EXPECT_EQ(field_of(R"({"inclusion_matrix": [[1]], "b_dims": [1], "label": 3})"), "label");
    EXPECT_EQ(field_of(R"([1, 2])"), "");
}

TEST(Parse, SyntaxErrorPosition) {
    try {
        parse_descriptor("{\n  \"inclusion_matrix\": [[1]],\n  \"b_dims\": [1,]\n}");
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_GT(e.column(), 10u);
    }
}

TEST(Emit, RoundTrip) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto d = generate_regular_descriptor(seed);
        EXPECT_EQ(parse_descriptor(emit_descriptor(d)), d);
    }
    const auto doc = parse_descriptor_document(emit_descriptor(parse_descriptor(kWorked), "worked"));
    EXPECT_EQ(doc.label, "worked");
}

TEST(Analyze, WorkedExample) {
    const auto r = run_analyze(parse_descriptor_document(kWorked));
    EXPECT_EQ(r.exit_code, kExitOk);
    EXPECT_FALSE(r.report["verdict"]["regular"].get<bool>());
    const auto &w = r.report["verdict"]["witness"];
    EXPECT_EQ(w["kind"], "partition_violation");
    EXPECT_EQ(w["i"], 0);
    EXPECT_EQ(w["k"], 1);
    EXPECT_EQ(w["j"], 2);
    EXPECT_EQ(w["l"], 3);
    EXPECT_TRUE(r.report["decomposition"].is_null());
    expect_renderings_agree(r.report);
}

TEST(Analyze, DiagonalAndNonSpectral) {
    const auto a = run_analyze(parse_descriptor_document(kDiag4));
    EXPECT_TRUE(a.report["verdict"]["regular"].get<bool>());
    EXPECT_EQ(a.report["spectral"]["d"], 4);
    EXPECT_EQ(a.report["depth"]["depth"], 2);
    expect_renderings_agree(a.report);

    const auto b = run_analyze(parse_descriptor_document(kNonSpectral));
    EXPECT_EQ(b.exit_code, kExitOk);
    EXPECT_TRUE(b.report["verdict"]["regular"].get<bool>());
    EXPECT_FALSE(b.report["spectral"]["satisfied"].get<bool>());
    EXPECT_EQ(b.report["basis_summary"]["status"], "not applicable: spectral condition fails");
}

TEST(BuildBasis, DiagonalAndTrivial) {
    const auto a = run_build_basis(parse_descriptor_document(kDiag4));
    EXPECT_EQ(a.exit_code, kExitOk);
    EXPECT_EQ(a.report["basis"]["d"], 4);
    EXPECT_EQ(a.report["basis"]["members"].size(), 4u);
    EXPECT_TRUE(a.report["basis_summary"]["verification"]["overall"].get<bool>());
    EXPECT_TRUE(a.report["basis_summary"]["span"]["certified"].get<bool>());
    expect_renderings_agree(a.report);

    const auto b = run_build_basis(parse_descriptor_document(R"({"inclusion_matrix": [[1]], "b_dims": [2]})"));
    EXPECT_EQ(b.exit_code, kExitOk);
    ASSERT_EQ(b.report["basis"]["members"].size(), 1u);
    const auto m = parse_basis_payload(b.report, AlgebraShape(std::vector<Index>{2}));
    EXPECT_EQ(m[0].block(0), CMatrix::Identity(2, 2));
}

TEST(BuildBasis, Refusals) {
    const auto a = run_build_basis(parse_descriptor_document(kWorked));
    EXPECT_EQ(a.exit_code, kExitRefused);
    EXPECT_EQ(a.report["verdict"]["witness"]["kind"], "partition_violation");
    EXPECT_FALSE(a.report.contains("basis"));

    const auto b = run_build_basis(parse_descriptor_document(kNonSpectral));
    EXPECT_EQ(b.exit_code, kExitRefused);
    EXPECT_EQ(b.report["spectral"]["per_block_d"], Json::array({1, 4}));
}

TEST(BuildBasis, SolverExhaustion) {
    RunOptions o;
    o.solver.max_iterations = 1;
    o.solver.restarts = 1;
    o.solver.tolerance = 1e-15;
    const auto r = run_build_basis(parse_descriptor_document(R"({"inclusion_matrix": [[3],[2]], "b_dims": [1]})"), o);
    EXPECT_EQ(r.exit_code, kExitSolver);
    EXPECT_EQ(r.report["basis_summary"]["status"], "solver exhausted");
}

TEST(BuildBasis, DeterministicOutput) {
    const char *doc = R"({"inclusion_matrix": [[1,1],[2,2]], "b_dims": [1,1]})";
    const auto a = run_build_basis(parse_descriptor_document(doc));
    const auto b = run_build_basis(parse_descriptor_document(doc));
    EXPECT_EQ(a.exit_code, kExitOk);
    EXPECT_EQ(render_machine(a.report), render_machine(b.report));
}

TEST(Payload, RoundTripIsExact) {
    const auto f = basis_scalar_multi({2, 1});
    const auto text = render_machine(basis_payload(f));
    const auto back = parse_basis_payload(nlohmann::json::parse(text), f.inclusion().a_shape());
    ASSERT_EQ(back.size(), f.members().size());
    for (std::size_t k = 0; k < back.size(); ++k) EXPECT_EQ((back[k] - f.members()[k]).max_abs(), 0.0);
    EXPECT_THROW(parse_basis_payload(nlohmann::json::parse(R"({"members": []})"), f.inclusion().a_shape()),
                 ValidationError);
    EXPECT_THROW(parse_basis_payload(nlohmann::json::parse(R"({"members": [[{"rows":1,"cols":1,"data":[[1,0]]}]]})"),
                                     f.inclusion().a_shape()),
                 ValidationError);
}

TEST(Verify, AcceptsBuiltAndRejectsTampered) {
    const auto doc = parse_descriptor_document(R"({"inclusion_matrix": [[1,1],[2,2]], "b_dims": [1,1]})");
    const auto built = run_build_basis(doc);
    const auto payload = nlohmann::json::parse(render_machine(built.report));
    const auto ok = run_verify(doc, payload);
    EXPECT_EQ(ok.exit_code, kExitOk);
    expect_renderings_agree(ok.report);

    auto tampered = payload;
    tampered["basis"]["members"][1] = tampered["basis"]["members"][0];
    EXPECT_EQ(run_verify(doc, tampered).exit_code, kExitVerifyFailed);

    auto short_payload = payload;
    short_payload["basis"]["members"].erase(short_payload["basis"]["members"].size() - 1);
    const auto r = run_verify(doc, short_payload);
    EXPECT_EQ(r.exit_code, kExitVerifyFailed);
    EXPECT_FALSE(r.report["verification"]["checks"][0]["pass"].get<bool>());
}

TEST(OtherCommands, CanonicalizeDecomposeDepth) {
    const auto c = run_canonicalize(parse_descriptor_document(R"({"inclusion_matrix": [[0,2],[3,0]], "b_dims": [1,1]})"));
    EXPECT_EQ(c.exit_code, kExitOk);
    EXPECT_EQ(c.report["canonical"]["col_perm"], Json::array({1, 0}));
    EXPECT_EQ(run_canonicalize(parse_descriptor_document(kWorked)).exit_code, kExitRefused);

    const auto d = run_decompose(parse_descriptor_document(kDiag4));
    EXPECT_EQ(d.exit_code, kExitOk);
    EXPECT_EQ(d.report["decomposition"]["blocks"][0]["r_k"], 4);
    EXPECT_EQ(run_decompose(parse_descriptor_document(kWorked)).exit_code, kExitRefused);

    const auto p = run_depth(parse_descriptor_document(R"({"inclusion_matrix": [[1,1],[0,1]], "b_dims": [1,1]})"));
    EXPECT_EQ(p.report["depth"]["depth"], 3);
    EXPECT_EQ(p.report["depth"]["q_min"], 3);
    RunOptions o;
    o.depth_max = 2;
    EXPECT_EQ(run_depth(parse_descriptor_document(R"({"inclusion_matrix": [[1,1],[0,1]], "b_dims": [1,1]})"), o)
                  .exit_code,
              kExitRefused);
}
