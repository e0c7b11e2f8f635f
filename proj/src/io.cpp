#include "regincl/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace regincl {

ParseError::ParseError(const std::string &what, std::size_t line, std::size_t column)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line), column_(column) {}

namespace {

// Keeps products of entries and dimensions far away from int64 overflow.
constexpr Int kMaxDocumentValue = 1'000'000;

std::pair<std::size_t, std::size_t> line_column(const std::string &text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
        if (text[k] == '\n')
            ++line, col = 1;
        else
            ++col;
    }
    return {line, col};
}

Int read_int(const nlohmann::json &v, const std::string &field, Int min) {
    if (!v.is_number_integer())
        throw ValidationError("expected an integer", field);
    Int x = 0;
    if (v.is_number_unsigned()) {
        const auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(kMaxDocumentValue)) throw ValidationError("value too large", field);
        x = static_cast<Int>(u);
    } else {
        x = v.get<Int>();
    }
    if (x < min) throw ValidationError(min == 0 ? "expected a nonnegative integer" : "expected a positive integer", field);
    if (x > kMaxDocumentValue) throw ValidationError("value too large", field);
    return x;
}

std::vector<Int> read_int_array(const nlohmann::json &v, const std::string &field, Int min) {
    if (!v.is_array()) throw ValidationError("expected an array", field);
    std::vector<Int> out;
    for (std::size_t k = 0; k < v.size(); ++k)
        out.push_back(read_int(v[k], field + "[" + std::to_string(k) + "]", min));
    return out;
}

Json int_rows(const IntMatrix &m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

template <class T> Json list(const std::vector<T> &v) {
    Json a = Json::array();
    for (const auto &x : v) a.push_back(x);
    return a;
}

} // namespace

DescriptorDocument descriptor_from_json(const nlohmann::json &j) {
    if (!j.is_object()) throw ValidationError("descriptor document must be an object", "");
    for (const auto &[key, _] : j.items())
        if (key != "inclusion_matrix" && key != "b_dims" && key != "a_dims" && key != "label")
            throw ValidationError("unknown field", key);
    if (!j.contains("inclusion_matrix")) throw ValidationError("missing field", "inclusion_matrix");
    if (!j.contains("b_dims")) throw ValidationError("missing field", "b_dims");

    const auto &jm = j["inclusion_matrix"];
    if (!jm.is_array() || jm.empty()) throw ValidationError("expected a nonempty array of rows", "inclusion_matrix");
    std::vector<std::vector<Int>> rows;
    for (std::size_t i = 0; i < jm.size(); ++i) {
        const std::string field = "inclusion_matrix[" + std::to_string(i) + "]";
        rows.push_back(read_int_array(jm[i], field, 0));
        if (rows.back().empty()) throw ValidationError("empty row", field);
        if (rows.back().size() != rows.front().size())
            throw ValidationError("row has " + std::to_string(rows.back().size()) + " entries, expected " +
                                      std::to_string(rows.front().size()),
                                  field);
    }
    const auto b = read_int_array(j["b_dims"], "b_dims", 1);

    DescriptorDocument doc{validate_descriptor(InclusionMatrix(int_matrix(rows)), DimensionVector(b)), std::nullopt};

    if (j.contains("a_dims")) {
        const auto a = read_int_array(j["a_dims"], "a_dims", 1);
        if (static_cast<Index>(a.size()) != doc.descriptor.s())
            throw ValidationError("a_dims has length " + std::to_string(a.size()) + ", expected " +
                                      std::to_string(doc.descriptor.s()),
                                  "a_dims");
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != doc.descriptor.a_dims[static_cast<Index>(i)])
                throw ValidationError("a_dims[" + std::to_string(i) + "] = " + std::to_string(a[i]) +
                                          " but A m' gives " +
                                          std::to_string(doc.descriptor.a_dims[static_cast<Index>(i)]),
                                      "a_dims[" + std::to_string(i) + "]");
    }
    if (j.contains("label")) {
        if (!j["label"].is_string()) throw ValidationError("expected a string", "label");
        doc.label = j["label"].get<std::string>();
    }
    return doc;
}

DescriptorDocument parse_descriptor_document(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        const auto [line, col] = line_column(text, e.byte);
        std::string msg = e.what();
        if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ParseError(msg, line, col);
    }
    try {
        return descriptor_from_json(j);
    } catch (const ValidationError &e) {
        // DimensionVector reports bare "[k]" indices.
        if (!e.field().empty() && e.field().front() == '[')
            throw ValidationError(e.what(), "b_dims" + e.field());
        throw;
    }
}

InclusionDescriptor parse_descriptor(const std::string &text) { return parse_descriptor_document(text).descriptor; }

Json descriptor_json(const InclusionDescriptor &d, const std::optional<std::string> &label) {
    Json j;
    if (label) j["label"] = *label;
    j["inclusion_matrix"] = int_rows(d.matrix.entries());
    j["b_dims"] = list(d.b_dims.values());
    j["a_dims"] = list(d.a_dims.values());
    return j;
}

std::string emit_descriptor(const InclusionDescriptor &d, const std::optional<std::string> &label) {
    return descriptor_json(d, label).dump(2) + "\n";
}

Json witness_json(const FailureWitness &w) {
    Json j;
    std::visit(
        [&](const auto &x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, PartitionViolation>) {
                j["kind"] = "partition_violation";
                j["i"] = x.i, j["k"] = x.k, j["j"] = x.j, j["l"] = x.l;
            } else if constexpr (std::is_same_v<T, UnequalRowEntries>) {
                j["kind"] = "unequal_row_entries";
                j["row"] = x.row, j["col"] = x.col, j["other_col"] = x.other_col;
            } else {
                j["kind"] = "unequal_dimensions";
                j["row"] = x.row, j["col"] = x.col, j["other_col"] = x.other_col;
            }
        },
        w);
    j["description"] = describe(w);
    return j;
}

Json spectral_json(const SpectralReport &s) {
    Json j;
    j["satisfied"] = s.satisfied;
    j["d"] = s.d ? Json(*s.d) : Json(nullptr);
    j["at_n"] = list(s.at_n);
    j["per_block_d"] = s.per_block_d ? list(*s.per_block_d) : Json(nullptr);
    return j;
}

Json canonical_json(const CanonicalForm &c) {
    Json j;
    j["row_perm"] = list(c.row_perm);
    j["col_perm"] = list(c.col_perm);
    j["canonical_matrix"] = int_rows(c.block_diagonal());
    Json blocks = Json::array();
    for (const auto &b : c.blocks) {
        Json x;
        x["rows"] = list(b.rows);
        x["cols"] = list(b.cols);
        x["row_values"] = list(b.row_values);
        blocks.push_back(std::move(x));
    }
    j["blocks"] = std::move(blocks);
    return j;
}

Json decomposition_json(const DecompositionTree &t) {
    Json j;
    j["row_perm"] = list(t.canonical.row_perm);
    j["col_perm"] = list(t.canonical.col_perm);
    Json blocks = Json::array();
    for (const auto &b : t.blocks) {
        Json x;
        x["m_k"] = b.m_k;
        x["r_k"] = b.r_k;
        x["s_k"] = b.s_k;
        x["column_entries"] = list(b.column_entries);
        x["rows"] = list(b.rows);
        x["cols"] = list(b.cols);
        x["d_k"] = b.spectral_value();
        blocks.push_back(std::move(x));
    }
    j["blocks"] = std::move(blocks);
    return j;
}

Json verification_json(const VerificationReport &r) {
    Json checks = Json::array();
    for (const auto &c : r.checks) {
        Json x;
        x["name"] = c.name;
        x["pass"] = c.pass;
        x["residual"] = c.residual;
        x["tolerance"] = c.tolerance;
        x["detail"] = c.detail;
        checks.push_back(std::move(x));
    }
    Json j;
    j["checks"] = std::move(checks);
    j["overall"] = r.overall();
    return j;
}

Json basis_payload(const UnitaryFamily &f) {
    Json j;
    j["d"] = f.d();
    j["a_dims"] = list(f.inclusion().a_shape().dims());
    Json members = Json::array();
    for (const auto &w : f.members()) {
        Json summands = Json::array();
        for (const auto &blk : w.blocks()) {
            Json m;
            m["rows"] = blk.rows();
            m["cols"] = blk.cols();
            Json data = Json::array();
            for (Index r = 0; r < blk.rows(); ++r)
                for (Index c = 0; c < blk.cols(); ++c) data.push_back(Json::array({blk(r, c).real(), blk(r, c).imag()}));
            m["data"] = std::move(data);
            summands.push_back(std::move(m));
        }
        members.push_back(std::move(summands));
    }
    j["members"] = std::move(members);
    return j;
}

std::vector<AlgebraElement> parse_basis_payload(const nlohmann::json &doc, const AlgebraShape &shape) {
    const nlohmann::json &j = doc.contains("basis") ? doc["basis"] : doc;
    if (!j.is_object() || !j.contains("members") || !j["members"].is_array())
        throw ValidationError("basis payload needs a members array", "basis.members");
    std::vector<AlgebraElement> out;
    const auto &members = j["members"];
    for (std::size_t k = 0; k < members.size(); ++k) {
        const std::string mfield = "basis.members[" + std::to_string(k) + "]";
        const auto &summands = members[k];
        if (!summands.is_array() || static_cast<Index>(summands.size()) != shape.size())
            throw ValidationError("expected " + std::to_string(shape.size()) + " summands", mfield);
        std::vector<CMatrix> blocks;
        for (std::size_t i = 0; i < summands.size(); ++i) {
            const std::string sfield = mfield + "[" + std::to_string(i) + "]";
            const auto &s = summands[i];
            const Index n = shape[static_cast<Index>(i)];
            if (!s.is_object() || !s.contains("rows") || !s.contains("cols") || !s.contains("data"))
                throw ValidationError("expected an object with rows, cols and data", sfield);
            if (!s["rows"].is_number_integer() || !s["cols"].is_number_integer() || s["rows"].get<Index>() != n ||
                s["cols"].get<Index>() != n)
                throw ValidationError("expected a " + std::to_string(n) + "x" + std::to_string(n) + " block", sfield);
            const auto &data = s["data"];
            if (!data.is_array() || static_cast<Index>(data.size()) != n * n)
                throw ValidationError("expected " + std::to_string(n * n) + " entries", sfield + ".data");
            CMatrix m(n, n);
            for (Index e = 0; e < n * n; ++e) {
                const auto &z = data[static_cast<std::size_t>(e)];
                if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
                    throw ValidationError("expected a [re, im] pair", sfield + ".data[" + std::to_string(e) + "]");
                m(e / n, e % n) = Complex(z[0].get<double>(), z[1].get<double>());
            }
            blocks.push_back(std::move(m));
        }
        out.emplace_back(shape, std::move(blocks));
    }
    if (out.empty()) throw ValidationError("basis payload has no members", "basis.members");
    return out;
}

namespace {

Json header(const DescriptorDocument &doc, const char *command) {
    Json r;
    r["command"] = command;
    r["label"] = doc.label ? Json(*doc.label) : Json(nullptr);
    r["descriptor"] = descriptor_json(doc.descriptor);
    return r;
}

Json depth_json(const InclusionDescriptor &d, int depth_max) {
    Json j;
    try {
        const auto rep = depth(d.matrix, depth_max);
        j["depth"] = rep.depth;
        j["q_min"] = rep.q_min;
        j["norm_sq_bound"] = rep.norm_sq_bound;
    } catch (const DepthBoundError &e) {
        j["error"] = e.what();
    } catch (const Error &e) {
        j["error"] = e.what();
    }
    return j;
}

Json verdict_json(const RegularityVerdict &v) {
    Json j;
    j["regular"] = v.regular;
    j["witness"] = v.witness() ? witness_json(*v.witness()) : Json(nullptr);
    return j;
}

Json status(const std::string &s) {
    Json j;
    j["status"] = s;
    return j;
}

} // namespace

RunResult run_analyze(const DescriptorDocument &doc, const RunOptions &opts) {
    const auto &d = doc.descriptor;
    Json r = header(doc, "analyze");
    const auto verdict = classify_regular(d);
    const auto spectral = spectral_condition(d);
    r["verdict"] = verdict_json(verdict);
    r["spectral"] = spectral_json(spectral);
    r["depth"] = depth_json(d, opts.depth_max);
    r["decomposition"] = verdict.tree() ? decomposition_json(*verdict.tree()) : Json(nullptr);
    if (!verdict.regular)
        r["basis_summary"] = status("not applicable: not regular");
    else if (!spectral.satisfied)
        r["basis_summary"] = status("not applicable: spectral condition fails");
    else {
        Json b = status("eligible: not built");
        b["d"] = *spectral.d;
        r["basis_summary"] = std::move(b);
    }
    return {std::move(r), kExitOk};
}

RunResult run_build_basis(const DescriptorDocument &doc, const RunOptions &opts) {
    opts.solver.validate();
    auto result = run_analyze(doc, opts);
    Json &r = result.report;
    r["command"] = "build-basis";
    if (r["basis_summary"]["status"].get<std::string>().rfind("not applicable", 0) == 0) {
        r["basis_summary"]["status"] = "refused: " + r["basis_summary"]["status"].get<std::string>();
        result.exit_code = kExitRefused;
        return result;
    }
    try {
        const auto f = build_regular_onb(doc.descriptor, opts.solver);
        const auto report = verify_family(f, opts.verify);
        Json b = status("built");
        b["d"] = f.d();
        b["gram_residual"] = f.gram_residual();
        b["verification"] = verification_json(report);
        if (report.overall()) {
            const auto span = certify_regularity_by_span(f, opts.verify.reconstruction);
            Json s;
            s["certified"] = span.certified;
            s["reconstruction_residual"] = span.reconstruction_residual;
            s["rank"] = span.rank ? Json(*span.rank) : Json(nullptr);
            s["dim_a"] = span.dim_a;
            b["span"] = std::move(s);
        } else {
            b["span"] = nullptr;
        }
        r["basis_summary"] = std::move(b);
        r["basis"] = basis_payload(f);
        result.exit_code = report.overall() ? kExitOk : kExitVerifyFailed;
    } catch (const SolverError &e) {
        Json b = status("solver exhausted");
        b["best_residual"] = e.best_residual();
        b["message"] = e.what();
        r["basis_summary"] = std::move(b);
        result.exit_code = kExitSolver;
    }
    return result;
}

RunResult run_canonicalize(const DescriptorDocument &doc) {
    Json r = header(doc, "canonicalize");
    const auto check = is_normalizer_matrix(doc.descriptor.matrix);
    r["normalizer_matrix"] = check.is_normalizer;
    if (!check) {
        r["witness"] = witness_json(*check.failure);
        r["canonical"] = nullptr;
        return {std::move(r), kExitRefused};
    }
    r["witness"] = nullptr;
    r["canonical"] = canonical_json(canonicalize(doc.descriptor.matrix));
    return {std::move(r), kExitOk};
}

RunResult run_decompose(const DescriptorDocument &doc) {
    Json r = header(doc, "decompose");
    const auto verdict = classify_regular(doc.descriptor);
    r["verdict"] = verdict_json(verdict);
    r["decomposition"] = verdict.tree() ? decomposition_json(*verdict.tree()) : Json(nullptr);
    return {std::move(r), verdict.regular ? kExitOk : kExitRefused};
}

RunResult run_depth(const DescriptorDocument &doc, const RunOptions &opts) {
    Json r = header(doc, "depth");
    r["depth"] = depth_json(doc.descriptor, opts.depth_max);
    const bool ok = !r["depth"].contains("error");
    return {std::move(r), ok ? kExitOk : kExitRefused};
}

RunResult run_verify(const DescriptorDocument &doc, const nlohmann::json &basis, const RunOptions &opts) {
    Json r = header(doc, "verify");
    auto inc = std::make_shared<const EmbeddedInclusion>(doc.descriptor);
    const UnitaryFamily f(inc, parse_basis_payload(basis, inc->a_shape()));
    const auto spectral = spectral_condition(doc.descriptor);
    VerificationReport report;
    const bool count_ok = spectral.satisfied && *spectral.d == f.d();
    report.checks.push_back({"member_count", count_ok, count_ok ? 0.0 : 1.0, 0.0,
                             "d = " + std::to_string(f.d()) +
                                 (spectral.d ? ", spectral d = " + std::to_string(*spectral.d)
                                             : ", spectral condition fails")});
    report.append(verify_family(f, opts.verify));
    r["d"] = f.d();
    r["verification"] = verification_json(report);
    return {std::move(r), report.overall() ? kExitOk : kExitVerifyFailed};
}

namespace {

std::string format_double(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s = buf;
    // Keep it a JSON float so the type survives a round trip.
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

std::string scalar_text(const Json &v) {
    return v.is_number_float() ? format_double(v.get<double>()) : v.dump();
}

void write_json(const Json &v, std::string &out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    if (v.is_object()) {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto &[key, value] : v.items()) {
            if (!first) out += ",\n";
            first = false;
            out += pad + Json(key).dump() + ": ";
            write_json(value, out, indent + 2);
        }
        out += "\n" + close + "}";
    } else if (v.is_array()) {
        // Arrays of scalars stay on one line.
        const bool flat = std::none_of(v.begin(), v.end(), [](const Json &e) { return e.is_structured(); });
        if (v.empty()) {
            out += "[]";
        } else if (flat) {
            out += "[";
            for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + scalar_text(v[k]);
            out += "]";
        } else {
            out += "[\n";
            for (std::size_t k = 0; k < v.size(); ++k) {
                if (k) out += ",\n";
                out += pad;
                write_json(v[k], out, indent + 2);
            }
            out += "\n" + close + "]";
        }
    } else {
        out += scalar_text(v);
    }
}

} // namespace

std::string render_machine(const Json &report) {
    std::string out;
    write_json(report, out, 0);
    out += "\n";
    return out;
}

std::string render_human(const Json &report) {
    std::ostringstream os;
    const Json flat = report.flatten();
    for (const auto &[path, value] : flat.items()) os << path << ": " << scalar_text(value) << "\n";
    return os.str();
}

Json parse_human(const std::string &text) {
    Json flat = Json::object();
    std::istringstream is(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(is, line)) {
        ++number;
        if (line.empty()) continue;
        const auto sep = line.find(": ");
        if (sep == std::string::npos) throw ParseError("expected 'path: value'", number, 1);
        flat[line.substr(0, sep)] = Json::parse(line.substr(sep + 2));
    }
    return flat;
}

} // namespace regincl
