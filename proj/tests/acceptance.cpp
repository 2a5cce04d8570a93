// One PASS/FAIL line per acceptance criterion. Exit status 0 iff all pass.
#include <algorithm>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include "support.hpp"

using namespace absslice;
using namespace test_support;

namespace {

// Collects the failed conditions of one criterion.
struct Check {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

std::string set_text(const std::set<int>& s) {
    std::ostringstream out;
    out << "{";
    for (auto it = s.begin(); it != s.end(); ++it) out << (it == s.begin() ? "" : ",") << *it;
    out << "}";
    return out.str();
}

std::string set_text(const std::set<std::string>& s) {
    std::string out = "{";
    for (auto it = s.begin(); it != s.end(); ++it) out += (it == s.begin() ? "" : ",") + *it;
    return out + "}";
}

EnumOptions ranged(const SlicingCriterion& c) {
    EnumOptions eo;
    eo.ranges = c.inputs.ranges;
    return eo;
}

const std::vector<std::string> kCorpus = {"parity", "psum", "pq",   "rs",      "pdg",       "vacuous",
                                          "invariants", "iterations", "wordcount", "nullity", "listinsert"};

void parity(Check& ck) {
    Program p = corpus_program("parity");
    SlicingCriterion c = corpus_criterion("parity", p);
    SliceResult a = abstract_slice(p, c);
    ck.expect(a.kept == std::set<int>{2, 5}, "abstract slice " + set_text(a.kept) + " != {2,5}");
    Verdict v = verify_slice(p, a.slice, c, ranged(c));
    ck.expect(v.ok() && v.checked == 625, "verification over [-2..2]^4: " + to_string(v.kind) + ", " +
                                              std::to_string(v.checked) + " inputs");
    SliceResult id = concrete_slice(p, c);
    bool superset = std::includes(id.kept.begin(), id.kept.end(), a.kept.begin(), a.kept.end());
    const std::set<int> r{2, 3, 5};
    ck.expect(std::includes(id.kept.begin(), id.kept.end(), r.begin(), r.end()),
              "identity slice " + set_text(id.kept) + " misses R's lines");
    ck.expect(id.verdict.ok(), "identity slice not verified");
    ck.expect(superset && id.kept.size() > a.kept.size(), "identity slice not strictly larger");
}

void p_and_q(Check& ck) {
    Program p = corpus_program("pq");
    Program q = program(slurp(corpus_path("pq_q.prog")));
    SlicingCriterion c = corpus_criterion("pq", p);
    Verdict v = equivalent(p, q, c, ranged(c));
    ck.expect(v.ok() && v.checked == 30, "P, Q: " + to_string(v.kind) + " on " + std::to_string(v.checked));
    auto par = num("par");
    for (int n = 0; n <= 4; ++n)
        for (int s = -2; s <= 3; ++s) {
            Memory m = parse_memory("n=" + std::to_string(n) + ", s=" + std::to_string(s));
            Projection expected{{7, 1, false, {par->value_name(par->alpha_int(s))}}};
            ck.expect(project(run(p, m), c, p, {}) == expected, "projection of P at " + memory_to_string(m));
            ck.expect(project(run(q, m), c, q, {}) == expected, "projection of Q at " + memory_to_string(m));
        }
}

void r_and_s(Check& ck) {
    Program r = corpus_program("rs");
    Program s = program(slurp(corpus_path("rs_s.prog")));
    SlicingCriterion cond = corpus_criterion("rs", r), stat = corpus_criterion("rs_static", r);
    Verdict vc = equivalent(r, s, cond, ranged(cond));
    ck.expect(vc.ok() && vc.checked == 3, "conditioned: " + to_string(vc.kind) + " on " +
                                              std::to_string(vc.checked) + " inputs");
    Verdict vs = equivalent(r, s, stat, ranged(stat));
    ck.expect(vs.kind == Verdict::Kind::Counterexample && vs.witness && vs.witness->get("n").num % 4 != 0,
              "static: " + to_string(vs.kind));
}

void invariants(Check& ck) {
    Program p = corpus_program("invariants");
    DomainMap dm(p, num("sign"), ref("nullcyc"));
    Invariants inv = infer_invariants(p, dm);
    const AbsState& end = inv.at(kEndLine);
    auto sign = num("sign");
    std::string i = sign->value_name(end.get("i", dm)), j = sign->value_name(end.get("j", dm));
    ck.expect(i == "neg" && j == "pos", "after the loop i=" + i + ", j=" + j);
}

void dependencies(Check& ck) {
    auto rel = [](const std::string& e, const std::string& d) {
        return find_ndeps(parse_expr(e), top_state(), num(d));
    };
    std::set<std::string> a = rel("2 * x * x + y", "par"), b = rel("2 * x * x + y", "sign"),
                          c = rel("x * x + 1", "sign");
    ck.expect(a == std::set<std::string>{"y"}, "(2x^2+y, par) -> " + set_text(a));
    ck.expect(b == std::set<std::string>{"x", "y"}, "(2x^2+y, sign) -> " + set_text(b));
    ck.expect(c.empty(), "(x*x+1, sign) -> " + set_text(c));
    ck.expect(!sem_dep(parse_expr("w + y + 2 * (x * x) - w"), "w"), "w+y+2x^2-w depends on w");
}

void p_system(Check& ck) {
    Program plus2 = program("x := x + 2;"), plus1 = program("x := x + 1;");
    Agreement par = parse_agreement("{par@x}", plus2);
    ck.expect(p_prove(plus2, {}, plus2.body.front(), par), "x := x + 2 does not preserve par@x");
    ck.expect(!p_prove(plus1, {}, plus1.body.front(), par), "x := x + 1 preserves par@x");
    ck.expect(check_triple(plus1, par, {}, plus1.body, par) == TripleResult::Holds,
              "{par@x} x := x + 1 {par@x} does not hold");
}

void nullity(Check& ck) {
    Program p = corpus_program("nullity");
    SlicingCriterion c = corpus_criterion("nullity", p);
    SliceResult r = abstract_slice(p, c);
    for (int line : {9, 10}) {
        std::string label = to_string(r.labels.after.at(line));
        ck.expect(label == "{zero@n}", "label after " + std::to_string(line) + ": " + label);
    }
    ck.expect(r.erased == std::set<int>{9, 10}, "erased " + set_text(r.erased));
    Verdict v = verify_slice(p, r.slice, c, ranged(c));
    ck.expect(v.ok() && v.checked == 9, "verification over n in [-4..4]: " + to_string(v.kind));
}

// Numeric uses count only when the value depends on them; reference uses always count.
bool semantic_use(const Program& p, const PdgNode& n, const std::string& v) {
    const Stmt& s = *n.stmt;
    bool numeric = !p.is_ref(v);
    for (const auto& u : n.uses) numeric = numeric && !p.is_ref(u);
    if (!numeric) return true;
    if (s.kind == Stmt::Kind::Assign && !p.is_ref(s.var)) return sem_dep(s.expr, v);
    if (s.compound()) return sem_dep(s.guard, v);
    return true;
}

void pdg(Check& ck) {
    Program p = corpus_program("pdg");
    Pdg g = build_pdg(p);
    ck.expect(g.flow_predecessors(8) == std::set<int>{5, 7}, "flow into 8: " + set_text(g.flow_predecessors(8)));
    for (const auto& [from, to] : g.flow_pairs())
        ck.expect(from != 2 && from != 6, "flow edge from " + std::to_string(from));
    Program vac = corpus_program("vacuous");
    std::set<int> z = pdg_slice(build_semantic_pdg(vac), {4});
    ck.expect(z == std::set<int>{1, 2, 4}, "vacuous-use slice for z: " + set_text(z));

    // Every semantic PDG slice is a KL slice for the variables its target semantically uses.
    EnumOptions eo;
    eo.bound = 2;
    int slices = 0;
    for (const auto& name : kCorpus) {
        Program prog = corpus_program(name);
        Pdg sem = build_semantic_pdg(prog);
        std::set<int> all = lines(prog);
        for (const auto& node : sem.nodes) {
            if (node.line == 0 || node.uses.empty()) continue;
            std::set<int> keep = pdg_slice(sem, {node.line}), drop;
            std::set_difference(all.begin(), all.end(), keep.begin(), keep.end(), std::inserter(drop, drop.end()));
            Program q = erase_lines(prog, drop);
            std::string vars;
            for (const auto& u : node.uses)
                if (semantic_use(prog, node, u)) vars += (vars.empty() ? "" : ",") + u;
            if (vars.empty()) continue;
            SlicingCriterion c = criterion("vars=" + vars + "\nocc=" + std::to_string(node.line) + "\nkl=true", prog);
            Verdict v = is_slice(prog, q, c, eo);
            ++slices;
            ck.expect(v.ok(), name + " slice for " + std::to_string(node.line) + ": " + to_string(v.kind) + " " +
                                  v.detail);
        }
    }
    ck.expect(slices > 50, "only " + std::to_string(slices) + " PDG slices checked");
}

void properties(Check& ck, const std::string& binary) {
    int status = std::system((binary + " > /dev/null 2>&1").c_str());
    ck.expect(status == 0, "property suites failed (" + binary + ")");
}

void emissions(Check& ck) {
    // Slice the whole corpus, abstractly and concretely, then re-verify everything emitted.
    for (const auto& name : kCorpus) {
        Program p = corpus_program(name);
        SlicingCriterion c = corpus_criterion(name, p);
        abstract_slice(p, c);
        concrete_slice(p, c);
    }
    auto all = emitted_slices();
    ck.expect(all.size() >= 2 * kCorpus.size(), "only " + std::to_string(all.size()) + " emissions");
    for (const auto& e : all) {
        Program p = program(e.program), q = program(e.slice);
        SlicingCriterion c = criterion(e.criterion, p);
        Verdict v = verify_slice(p, q, c, ranged(c));
        ck.expect(e.verdict == Verdict::Kind::Equivalent && v.ok(), "unverified emission:\n" + e.slice);
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::string property_binary = argc > 1 ? argv[1] : "./property_tests";
    std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
        {"parity of d: abstract and identity slices", parity},
        {"programs P and Q", p_and_q},
        {"programs R and S", r_and_s},
        {"sign invariants after the loop", invariants},
        {"dependencies", dependencies},
        {"P-system versus triples", p_system},
        {"nullity labels and erasure", nullity},
        {"PDG edges and slices", pdg},
        {"property suites", [&](Check& ck) { properties(ck, property_binary); }},
        {"every emitted slice verified", emissions},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check ck;
        try {
            criteria[i].second(ck);
        } catch (const std::exception& e) {
            ck.failures.push_back(std::string("exception: ") + e.what());
        }
        bool ok = ck.failures.empty();
        failed += !ok;
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << "\n";
        for (const auto& f : ck.failures) std::cout << "    " << f << "\n";
    }
    return failed ? 1 : 0;
}
