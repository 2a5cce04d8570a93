#include "absslice/absslice.h"

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>

#include "absslice/deps.hpp"
#include "absslice/pdg.hpp"
#include "absslice/slicer.hpp"

using namespace absslice;

struct asl_program {
    Program p;
};

struct asl_criterion {
    SlicingCriterion c;
};

namespace {

thread_local std::string last_error;

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

struct ArgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void need(const void* ptr, const char* what) {
    if (!ptr) throw ArgError(std::string(what) + " is null");
}

template <typename F>
asl_status guarded(F&& f) {
    last_error.clear();
    try {
        f();
        return ASL_OK;
    } catch (const ParseError& e) {
        last_error = e.what();
        return ASL_ERR_PARSE;
    } catch (const CriterionError& e) {
        last_error = e.what();
        return ASL_ERR_PARSE;
    } catch (const UnknownDomain& e) {
        last_error = e.what();
        return ASL_ERR_ARG;
    } catch (const SliceError& e) {
        last_error = e.what();
        return ASL_ERR_ARG;
    } catch (const ArgError& e) {
        last_error = e.what();
        return ASL_ERR_ARG;
    } catch (const std::invalid_argument& e) {
        last_error = e.what();
        return ASL_ERR_ARG;
    } catch (const std::exception& e) {
        last_error = e.what();
        return ASL_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return ASL_ERR_INTERNAL;
    }
}

asl_options options_or_default(const asl_options* opt) {
    asl_options o;
    asl_options_init(&o);
    return opt ? *opt : o;
}

EnumOptions enum_options(const asl_options* opt) {
    asl_options o = options_or_default(opt);
    if (o.bound < 0) throw ArgError("bound must be non-negative");
    EnumOptions eo;
    eo.bound = o.bound;
    eo.step_limit = o.step_limit;
    return eo;
}

asl_verdict verdict_code(Verdict::Kind k) {
    switch (k) {
        case Verdict::Kind::Equivalent:
            return ASL_EQUIVALENT;
        case Verdict::Kind::Counterexample:
            return ASL_COUNTEREXAMPLE;
        case Verdict::Kind::Inconclusive:
            return ASL_INCONCLUSIVE;
    }
    return ASL_INCONCLUSIVE;
}

std::string verdict_text(const Verdict& v, const Program& p) {
    std::ostringstream out;
    out << to_string(v.kind) << " (" << v.checked << " inputs)\n";
    if (v.witness) out << "input: " << memory_to_string(*v.witness, p.var_order) << "\n";
    if (!v.detail.empty()) out << v.detail << "\n";
    return out.str();
}

std::vector<std::string> split_vars(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur += ch;
        }
    }
    return out;
}

}  // namespace

extern "C" {

void asl_options_init(asl_options* opt) {
    if (!opt) return;
    opt->bound = 4;
    opt->step_limit = kDefaultStepLimit;
}

const char* asl_last_error(void) { return last_error.c_str(); }

const char* asl_version(void) { return "1.0.0"; }

void asl_string_free(char* s) { std::free(s); }

asl_status asl_program_parse(const char* text, asl_program** out) {
    return guarded([&] {
        need(text, "text");
        need(out, "out");
        auto prog = std::make_unique<asl_program>();
        prog->p = parse_program(text);
        check_program(prog->p);
        *out = prog.release();
    });
}

void asl_program_free(asl_program* p) { delete p; }

asl_status asl_program_print(const asl_program* p, char** out) {
    return guarded([&] {
        need(p, "program");
        need(out, "out");
        *out = dup(print_program(p->p));
    });
}

asl_status asl_criterion_parse(const char* text, asl_criterion** out) {
    return guarded([&] {
        need(text, "text");
        need(out, "out");
        auto c = std::make_unique<asl_criterion>();
        c->c = parse_criterion(text);
        *out = c.release();
    });
}

void asl_criterion_free(asl_criterion* c) { delete c; }

asl_status asl_run(const asl_program* p, const char* memory, const asl_options* opt, char** out) {
    return guarded([&] {
        need(p, "program");
        need(out, "out");
        Memory m = memory ? parse_memory(memory) : Memory{};
        Trajectory t = run(p->p, m, options_or_default(opt).step_limit);
        std::string s = trajectory_to_string(t, p->p.var_order);
        if (t.status != RunStatus::Completed) s += to_string(t.status) + (t.error.empty() ? "" : ": " + t.error) + "\n";
        *out = dup(s);
    });
}

asl_status asl_absint(const asl_program* p, const char* domain, const char* ref_domain, char** out) {
    return guarded([&] {
        need(p, "program");
        need(domain, "domain");
        need(out, "out");
        const auto& lib = DomainLibrary::instance();
        DomainMap dm(p->p, lib.get(domain, ValueKind::Numeric),
                     lib.get(ref_domain ? ref_domain : "nullcyc", ValueKind::Reference));
        *out = dup(invariants_to_string(p->p, infer_invariants(p->p, dm), dm));
    });
}

asl_status asl_deps(const char* expr, const char* domain, const char* eta, const char* target,
                    const asl_options* opt, char** out) {
    return guarded([&] {
        need(expr, "expr");
        need(domain, "domain");
        need(out, "out");
        const auto& lib = DomainLibrary::instance();
        ExprPtr e = parse_expr(expr);
        DomainPtr rho = lib.get(domain, ValueKind::Numeric);
        DomainPtr in = lib.get(eta ? eta : domain, ValueKind::Numeric);
        std::ostringstream s;
        s << "relevant: {";
        bool first = true;
        for (const auto& v : find_ndeps(e, top_state(), rho)) {
            s << (first ? "" : ", ") << v;
            first = false;
        }
        s << "}\n";
        DepQuery q(e, rho, DomainMap(in, lib.top(ValueKind::Reference)));
        q.bound = options_or_default(opt).bound;
        auto vars = ordered_vars(e);
        if (target) {
            if (!vars_of(e).count(target)) throw ArgError(std::string("variable ") + target + " does not occur");
            vars = {target};
        }
        std::set<std::string> done;
        for (const auto& v : vars) {
            if (!done.insert(v).second) continue;
            auto w = ndep_witness(q, v);
            s << v << ": ";
            if (!w) {
                s << "no dependency\n";
                continue;
            }
            s << "depends, " << memory_to_string(w->s1) << " -> " << w->r1 << " vs " << memory_to_string(w->s2)
              << " -> " << w->r2 << "\n";
        }
        *out = dup(s.str());
    });
}

asl_status asl_edep(const char* expr, const char* domain, const char* vars, char** out) {
    return guarded([&] {
        need(expr, "expr");
        need(domain, "domain");
        need(vars, "vars");
        need(out, "out");
        auto vs = split_vars(vars);
        DomainPtr d = edep(parse_expr(expr), DomainLibrary::instance().get(domain, ValueKind::Numeric),
                           std::set<std::string>(vs.begin(), vs.end()));
        *out = dup(d->describe() + "\n");
    });
}

asl_status asl_pdg(const asl_program* p, int semantic, int dot, const asl_options* opt, char** out) {
    return guarded([&] {
        need(p, "program");
        need(out, "out");
        Pdg g = semantic ? build_semantic_pdg(p->p, options_or_default(opt).bound) : build_pdg(p->p);
        *out = dup(dot ? to_dot(g) : pdg_to_string(g));
    });
}

asl_status asl_label(const asl_program* p, const char* agreement, const char* beta, char** out) {
    return guarded([&] {
        need(p, "program");
        need(agreement, "agreement");
        need(out, "out");
        Agreement g = parse_agreement(agreement, p->p);
        Predicate b;
        if (beta) b = predicate_from_guard(parse_guard(beta), p->p);
        *out = dup(labeling_to_string(p->p, label_sequence(p->p, g, b)));
    });
}

asl_status asl_slice(const asl_program* p, const asl_criterion* c, int concrete, const asl_options* opt,
                     char** listing, char** report, asl_verdict* verdict) {
    return guarded([&] {
        need(p, "program");
        need(c, "criterion");
        SliceOptions so;
        so.verify = enum_options(opt);
        so.agreements.step_limit = options_or_default(opt).step_limit;
        SlicingCriterion crit = c->c;
        check_criterion(crit, p->p);
        SliceResult r = concrete ? concrete_slice(p->p, crit, so) : abstract_slice(p->p, crit, so);
        if (listing) *listing = dup(slice_listing(p->p, r));
        if (report) *report = dup(slice_report_json(p->p, crit, r));
        if (verdict) *verdict = verdict_code(r.verdict.kind);
    });
}

asl_status asl_check(const asl_program* p, const asl_program* q, const asl_criterion* c, const asl_options* opt,
                     asl_verdict* verdict, char** out) {
    return guarded([&] {
        need(p, "program");
        need(q, "slice");
        need(c, "criterion");
        SlicingCriterion crit = c->c;
        check_criterion(crit, p->p);
        Verdict v = verify_slice(p->p, q->p, crit, enum_options(opt));
        if (verdict) *verdict = verdict_code(v.kind);
        if (out) *out = dup(verdict_text(v, p->p));
    });
}

asl_status asl_subsumes(const asl_criterion* c1, const asl_criterion* c2, const asl_program* p,
                        const asl_options* opt, int* result) {
    return guarded([&] {
        need(c1, "criterion");
        need(c2, "criterion");
        need(p, "program");
        need(result, "result");
        SlicingCriterion a = c1->c, b = c2->c;
        check_criterion(a, p->p);
        check_criterion(b, p->p);
        *result = criterion_subsumes(a, b, p->p, enum_options(opt)) ? 1 : 0;
    });
}

}  // extern "C"
