#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "absslice/absslice.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Failure {
    int code;
};

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::stringstream s;
        s << std::cin.rdbuf();
        return s.str();
    }
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot read " << path << "\n";
        throw Failure{kExitUsage};
    }
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void check(asl_status st, const std::string& what) {
    if (st == ASL_OK) return;
    std::cerr << what << ": " << asl_last_error() << "\n";
    throw Failure{st == ASL_ERR_INTERNAL ? kExitFailure : kExitUsage};
}

// Owning wrappers around the C handles.
struct ProgramHandle {
    asl_program* p = nullptr;
    explicit ProgramHandle(const std::string& path) { check(asl_program_parse(slurp(path).c_str(), &p), path); }
    ~ProgramHandle() { asl_program_free(p); }
};

struct CriterionHandle {
    asl_criterion* c = nullptr;
    explicit CriterionHandle(const std::string& path) { check(asl_criterion_parse(slurp(path).c_str(), &c), path); }
    ~CriterionHandle() { asl_criterion_free(c); }
};

struct Text {
    char* s = nullptr;
    ~Text() { asl_string_free(s); }
    std::string str() const { return s ? s : ""; }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        std::cerr << "cannot write " << path << "\n";
        throw Failure{kExitUsage};
    }
    out << text;
}

const char* verdict_name(asl_verdict v) {
    switch (v) {
        case ASL_EQUIVALENT:
            return "equivalent";
        case ASL_COUNTEREXAMPLE:
            return "counterexample";
        default:
            return "inconclusive";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Abstract program slicing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(asl_version()));

    asl_options opt;
    asl_options_init(&opt);
    app.add_option("--bound", opt.bound, "Integer inputs range over [-B, B]")->check(CLI::NonNegativeNumber);
    app.add_option("--step-limit", opt.step_limit, "Steps per execution");

    std::string prog, prog2, crit, crit2, input, domain = "par", ref_domain = "nullcyc", expr, eta, target, vars,
                                                 agreement, beta, dot_file, report_file;
    bool semantic = false, dot = false, concrete = false;

    auto* run = app.add_subcommand("run", "Execute a program and print its trajectory");
    run->add_option("program", prog)->required();
    run->add_option("--input", input, "Initial memory, e.g. \"x=1, y=2\"");

    auto* absint = app.add_subcommand("absint", "Abstract invariants before each line");
    absint->add_option("program", prog)->required();
    absint->add_option("--domain", domain, "Numeric domain");
    absint->add_option("--ref-domain", ref_domain, "Reference domain");

    auto* deps = app.add_subcommand("deps", "Abstract dependencies of an expression");
    deps->add_option("--expr", expr)->required();
    deps->add_option("--domain", domain, "Property of the result");
    deps->add_option("--eta", eta, "Property of the variables (default: --domain)");
    deps->add_option("--target", target, "Only this variable");

    auto* edep = app.add_subcommand("edep", "Simplify a domain until an expression ignores some variables");
    edep->add_option("--expr", expr)->required();
    edep->add_option("--domain", domain);
    edep->add_option("--vars", vars, "Comma separated")->required();

    auto* pdg = app.add_subcommand("pdg", "Program dependence graph");
    pdg->add_option("program", prog)->required();
    pdg->add_flag("--semantic", semantic, "Keep only semantic flow edges");
    pdg->add_option("--dot", dot_file, "Write DOT to this file ('-' for standard output)");

    auto* label = app.add_subcommand("label", "Annotate a program with agreements");
    label->add_option("program", prog)->required();
    label->add_option("--agreement", agreement, "Final agreement, e.g. {par@d}")->required();
    label->add_option("--beta", beta, "Condition holding at entry");

    auto* slice = app.add_subcommand("slice", "Slice a program and verify the result");
    slice->add_option("program", prog)->required();
    slice->add_option("--criterion", crit)->required();
    slice->add_flag("--concrete", concrete, "Use identity for every variable");
    slice->add_option("--report", report_file, "Write the JSON report here ('-' for standard output)");

    auto* chk = app.add_subcommand("check", "Check that the second program is a slice of the first");
    chk->add_option("program", prog)->required();
    chk->add_option("slice", prog2)->required();
    chk->add_option("--criterion", crit)->required();

    auto* sub = app.add_subcommand("subsumes", "Whether every slice for the first criterion is one for the second");
    sub->add_option("program", prog)->required();
    sub->add_option("--criterion", crit)->required();
    sub->add_option("--other", crit2)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        Text out;
        if (*run) {
            ProgramHandle p(prog);
            check(asl_run(p.p, input.empty() ? nullptr : input.c_str(), &opt, &out.s), "run");
            std::cout << out.str();
        } else if (*absint) {
            ProgramHandle p(prog);
            check(asl_absint(p.p, domain.c_str(), ref_domain.c_str(), &out.s), "absint");
            std::cout << out.str();
        } else if (*deps) {
            check(asl_deps(expr.c_str(), domain.c_str(), eta.empty() ? nullptr : eta.c_str(),
                           target.empty() ? nullptr : target.c_str(), &opt, &out.s),
                  "deps");
            std::cout << out.str();
        } else if (*edep) {
            check(asl_edep(expr.c_str(), domain.c_str(), vars.c_str(), &out.s), "edep");
            std::cout << out.str();
        } else if (*pdg) {
            ProgramHandle p(prog);
            dot = !dot_file.empty();
            check(asl_pdg(p.p, semantic, dot, &opt, &out.s), "pdg");
            if (dot && dot_file != "-")
                write_file(dot_file, out.str());
            else
                std::cout << out.str();
        } else if (*label) {
            ProgramHandle p(prog);
            check(asl_label(p.p, agreement.c_str(), beta.empty() ? nullptr : beta.c_str(), &out.s), "label");
            std::cout << out.str();
        } else if (*slice) {
            ProgramHandle p(prog);
            CriterionHandle c(crit);
            Text report;
            asl_verdict v = ASL_INCONCLUSIVE;
            check(asl_slice(p.p, c.c, concrete, &opt, &out.s, &report.s, &v), "slice");
            std::cout << out.str();
            if (report_file == "-")
                std::cout << report.str() << "\n";
            else if (!report_file.empty())
                write_file(report_file, report.str() + "\n");
            std::cerr << "verification: " << verdict_name(v) << "\n";
            if (v != ASL_EQUIVALENT) return kExitFailure;
        } else if (*chk) {
            ProgramHandle p(prog), q(prog2);
            CriterionHandle c(crit);
            asl_verdict v = ASL_INCONCLUSIVE;
            check(asl_check(p.p, q.p, c.c, &opt, &v, &out.s), "check");
            std::cout << out.str();
            if (v != ASL_EQUIVALENT) return kExitFailure;
        } else if (*sub) {
            ProgramHandle p(prog);
            CriterionHandle c1(crit), c2(crit2);
            int result = 0;
            check(asl_subsumes(c1.c, c2.c, p.p, &opt, &result), "subsumes");
            std::cout << (result ? "subsumes" : "does not subsume") << "\n";
            if (!result) return kExitFailure;
        }
    } catch (const Failure& f) {
        return f.code;
    }
    return 0;
}
