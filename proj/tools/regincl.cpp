#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "regincl/io.hpp"

namespace fs = std::filesystem;
using namespace regincl;

namespace {

struct Flags {
    double tolerance = SolverConfig{}.tolerance;
    std::uint64_t seed = 0;
    int max_iters = SolverConfig{}.max_iterations;
    int restarts = SolverConfig{}.restarts;
    int depth_max = kDefaultDepthMax;
    std::string output = "machine";
    std::string out_dir;
};

class IoError : public Error {
  public:
    using Error::Error;
};

std::string read_file(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_atomic(const fs::path &target, const std::string &text) {
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

RunOptions options(const Flags &f) {
    RunOptions o;
    o.depth_max = f.depth_max;
    o.solver.tolerance = f.tolerance;
    o.solver.seed = f.seed;
    o.solver.max_iterations = f.max_iters;
    o.solver.restarts = f.restarts;
    return o;
}

std::string render(const Json &report, const std::string &mode) {
    if (mode == "human") return render_human(report);
    if (mode == "both") return render_machine(report) + "\n" + render_human(report);
    return render_machine(report);
}

Json error_report(const std::string &kind, const std::string &message, const std::string &field = {}) {
    Json r;
    r["error"] = kind;
    r["message"] = message;
    if (!field.empty()) r["field"] = field;
    return r;
}

// Runs `body` on one document, mapping exceptions to exit codes and error reports.
template <class Body> RunResult guarded(Body &&body) {
    try {
        return body();
    } catch (const ParseError &e) {
        auto r = error_report("parse", e.what());
        r["line"] = e.line();
        r["column"] = e.column();
        return {r, kExitInvalid};
    } catch (const ValidationError &e) {
        return {error_report("validation", e.what(), e.field()), kExitInvalid};
    } catch (const ShapeError &e) {
        return {error_report("validation", e.what()), kExitInvalid};
    } catch (const IoError &e) {
        return {error_report("io", e.what()), kExitIo};
    } catch (const nlohmann::json::exception &e) {
        return {error_report("parse", e.what()), kExitInvalid};
    } catch (const Error &e) {
        return {error_report("error", e.what()), kExitIo};
    }
}

int emit(const RunResult &res, const Flags &f) {
    std::cout << render(res.report, f.output);
    if (res.exit_code != kExitOk && res.report.contains("error"))
        std::cerr << "error: " << res.report["message"].get<std::string>() << "\n";
    return res.exit_code;
}

using DocCommand = RunResult (*)(const DescriptorDocument &, const RunOptions &);

int run_on_path(const std::string &input, const Flags &f, DocCommand command) {
    const fs::path in(input);
    if (!fs::is_directory(in)) {
        return emit(guarded([&] { return command(parse_descriptor_document(read_file(in)), options(f)); }), f);
    }
    // Batch mode: one report file per *.json document, worst exit code wins.
    const fs::path out_dir = f.out_dir.empty() ? in : fs::path(f.out_dir);
    fs::create_directories(out_dir);
    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(in)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && e.path().extension() == ".json" && name.find(".report.") == std::string::npos)
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    int worst = kExitOk;
    for (const auto &p : files) {
        const auto res = guarded([&] { return command(parse_descriptor_document(read_file(p)), options(f)); });
        const auto stem = p.stem().string();
        if (f.output == "machine" || f.output == "both")
            write_atomic(out_dir / (stem + ".report.json"), render_machine(res.report));
        if (f.output == "human" || f.output == "both")
            write_atomic(out_dir / (stem + ".report.txt"), render_human(res.report));
        std::cout << p.filename().string() << ": exit " << res.exit_code << "\n";
        worst = std::max(worst, res.exit_code);
    }
    return worst;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Analyze inclusions of multi-matrix algebras and build unitary orthonormal bases"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App *sub) {
        sub->add_option("--output", f.output, "Report format")
            ->check(CLI::IsMember({"machine", "human", "both"}));
        sub->add_option("--out-dir", f.out_dir, "Directory for batch reports");
    };
    auto solver = [&](CLI::App *sub) {
        sub->add_option("--tolerance", f.tolerance, "Solver Gram tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--seed", f.seed, "Solver seed");
        sub->add_option("--max-iters", f.max_iters, "Solver iterations per restart")->check(CLI::PositiveNumber);
        sub->add_option("--restarts", f.restarts, "Solver restarts")->check(CLI::PositiveNumber);
    };
    auto depth_flag = [&](CLI::App *sub) {
        sub->add_option("--depth-max", f.depth_max, "Largest depth searched")->check(CLI::Range(2, 64));
    };

    std::string input, basis_file;

    auto *analyze = app.add_subcommand("analyze", "Regularity, spectral condition, depth and decomposition");
    analyze->add_option("input", input, "Descriptor file or directory")->required();
    common(analyze);
    solver(analyze);
    depth_flag(analyze);

    auto *canon = app.add_subcommand("canonicalize", "Canonical block-diagonal form of a normalizer matrix");
    canon->add_option("input", input)->required();
    common(canon);

    auto *decomp = app.add_subcommand("decompose", "Decomposition into building blocks");
    decomp->add_option("input", input)->required();
    common(decomp);

    auto *build = app.add_subcommand("build-basis", "Build and verify a unitary orthonormal basis");
    build->add_option("input", input)->required();
    common(build);
    solver(build);
    depth_flag(build);

    auto *verify = app.add_subcommand("verify", "Re-certify a basis payload against a descriptor");
    verify->add_option("descriptor", input)->required();
    verify->add_option("basis", basis_file, "Basis payload or build-basis report")->required();
    common(verify);

    auto *dep = app.add_subcommand("depth", "Depth of the inclusion matrix");
    dep->add_option("input", input)->required();
    common(dep);
    depth_flag(dep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitIo;
    }

    try {
        if (*analyze) return run_on_path(input, f, run_analyze);
        if (*build) return run_on_path(input, f, run_build_basis);
        if (*dep) return run_on_path(input, f, run_depth);
        if (*canon)
            return run_on_path(input, f, [](const DescriptorDocument &d, const RunOptions &) { return run_canonicalize(d); });
        if (*decomp)
            return run_on_path(input, f, [](const DescriptorDocument &d, const RunOptions &) { return run_decompose(d); });
        if (*verify)
            return emit(guarded([&] {
                            return run_verify(parse_descriptor_document(read_file(input)),
                                              nlohmann::json::parse(read_file(basis_file)), options(f));
                        }),
                        f);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitIo;
}
