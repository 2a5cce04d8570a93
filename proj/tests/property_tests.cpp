#include <algorithm>

#include "doctest.h"
#include "gen.hpp"
#include "support.hpp"

using namespace absslice;
using test_gen::Gen;

namespace {

constexpr int kCases = 1000;

const std::vector<DomainPtr>& numeric_candidates() {
    return DomainLibrary::instance().candidates(ValueKind::Numeric);
}

DomainPtr random_domain(Gen& g, bool with_id = true) {
    const auto& c = numeric_candidates();
    for (;;) {
        DomainPtr d = g.pick(c);
        if (with_id || !d->is_identity()) return d;
    }
}

// Library domains plus reduced products of random pairs.
DomainPtr random_uco(Gen& g) {
    DomainPtr a = random_domain(g, false);
    return g.coin() ? a : reduced_product(a, random_domain(g, false));
}

Int eval_op(BinOp op, int a, int b) {
    Memory m;
    Program p;
    return eval_expr(Expr::bin(op, Expr::lit(a), Expr::lit(b)), m, p).num;
}

std::set<std::string> expr_vars(const std::string& e) { return vars_of(parse_expr(e)); }

Program parse(const std::string& text) {
    Program p = parse_program(text);
    check_program(p);
    return p;
}

// Atomic states over d for the variables outside X; X variables stay top.
std::vector<AbsState> atomic_states(const std::vector<std::string>& vars, const std::set<std::string>& X,
                                    const Uco& d) {
    std::vector<AbsState> out{AbsState{}};
    for (const auto& v : vars) {
        if (X.count(v)) continue;
        std::vector<AbsState> next;
        for (const auto& s : out)
            for (AV a : d.atoms()) {
                AbsState t = s;
                t.vals[v] = a;
                next.push_back(t);
            }
        out = std::move(next);
    }
    return out;
}

// Concrete projection: the values of X at the occurrences of interest, markers at the other L lines.
Projection concrete_proj(const Trajectory& t, const std::vector<std::string>& X,
                         const std::vector<Occurrence>& occ, const std::set<int>& L) {
    auto wanted = [&](int line, int k) {
        return std::any_of(occ.begin(), occ.end(),
                           [&](const Occurrence& o) { return o.line == line && (o.all || o.iterations.count(k)); });
    };
    auto values = [&](const Memory& m) {
        std::vector<std::string> out;
        for (const auto& x : X) out.push_back(m.get(x).num.str());
        return out;
    };
    Projection out;
    for (const auto& s : t.states) {
        if (wanted(s.point, s.iteration))
            out.push_back({s.point, s.iteration, false, values(s.memory)});
        else if (L.count(s.point))
            out.push_back({s.point, s.iteration, true, {}});
    }
    if (t.status == RunStatus::Completed && wanted(kEndLine, 1)) out.push_back({kEndLine, 1, false, values(t.final)});
    return out;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
    return out;
}

}  // namespace

TEST_CASE("uco laws: closure, partition and operator soundness") {
    Gen g(11);
    const int blocks = numeric_block_count();
    const Mask full = full_mask(ValueKind::Numeric);
    for (int i = 0; i < kCases; ++i) {
        DomainPtr d = random_uco(g);
        Mask m = static_cast<Mask>(g.rng()()) & full, n = static_cast<Mask>(g.rng()()) & full;
        CAPTURE(d->describe());
        // Extensive, idempotent, monotone.
        AV cm = d->closure(m);
        CHECK((m & ~d->mask(cm)) == 0);
        CHECK(d->closure(d->mask(cm)) == cm);
        CHECK(d->leq(d->closure(m & n), cm));
        // Meet-closed fix-points; distinct atoms are disjoint.
        AV a = d->closure(m), b = d->closure(n);
        CHECK(d->contains(d->mask(a) & d->mask(b)));
        auto atoms = d->atoms();
        for (std::size_t x = 0; x < atoms.size(); ++x)
            for (std::size_t y = x + 1; y < atoms.size(); ++y) CHECK(d->meet(atoms[x], atoms[y]) == d->bot());
        // Induced partition: two blocks are equivalent iff no fix-point separates them.
        int p = g.uniform(0, blocks - 1), q = g.uniform(0, blocks - 1);
        bool separated = false;
        for (Mask f : d->masks()) separated = separated || (((f >> p) & 1) != ((f >> q) & 1));
        CHECK((d->closure(Mask(1) << p) == d->closure(Mask(1) << q)) == !separated);
        // Operators over-approximate the concrete ones.
        int u = g.uniform(-12, 12), v = g.uniform(-12, 12);
        BinOp op = static_cast<BinOp>(g.uniform(0, 4));
        if ((op == BinOp::Div || op == BinOp::Mod) && v == 0) v = 3;
        AV r = d->abs_op(op, d->alpha_int(u), d->alpha_int(v));
        CHECK(d->leq(d->alpha_int(eval_op(op, u, v)), r));
    }
}

TEST_CASE("narrow dependency implies atomic dependency") {
    Gen g(23);
    int dependent = 0;
    for (int i = 0; i < kCases; ++i) {
        std::string e = g.expr({"x", "y"}, 2);
        DepQuery q(parse_expr(e), random_domain(g, false),
                   DomainMap(random_domain(g, false), DomainLibrary::instance().top(ValueKind::Reference)));
        q.bound = 3;
        std::string x = g.coin() ? "x" : "y";
        CAPTURE(e);
        if (ndep(q, x)) {
            ++dependent;
            CHECK(atom_dep(q, x));
        }
    }
    CHECK(dependent > 100);
}

TEST_CASE("find_ndeps over-approximates the relevant variables") {
    Gen g(37);
    int dropped = 0;
    for (int i = 0; i < kCases; ++i) {
        std::string e = g.expr({"x", "y", "z"}, 2);
        DomainPtr d = random_domain(g, false);
        ExprPtr ex = parse_expr(e);
        std::set<std::string> rel = find_ndeps(ex, top_state(), d);
        DepQuery q(ex, d, DomainMap(d, DomainLibrary::instance().top(ValueKind::Reference)));
        q.bound = 3;
        CAPTURE(e);
        CAPTURE(d->name());
        for (const auto& v : expr_vars(e)) {
            if (rel.count(v)) continue;
            ++dropped;
            CHECK_FALSE(ndep(q, v));
        }
    }
    CHECK(dropped > 100);
}

TEST_CASE("edep yields a domain on which the expression does not depend") {
    Gen g(41);
    int simplified = 0;
    for (int i = 0; i < kCases; ++i) {
        std::string e = g.expr({"x", "y"}, 2);
        ExprPtr ex = parse_expr(e);
        DomainPtr d0 = random_domain(g, false);
        std::set<std::string> X{g.coin() ? "x" : "y"};
        if (g.coin(0.2)) X = {"x", "y"};
        DomainPtr d = edep(ex, d0, X);
        if (!d->same_partition(*d0)) ++simplified;
        CAPTURE(e);
        CAPTURE(d0->name());
        CHECK(d0->refines(*d));
        DomainMap dm(d, DomainLibrary::instance().top(ValueKind::Reference));
        for (const auto& s : atomic_states({"x", "y"}, X, *d)) {
            AV r = abs_eval(ex, s, dm, *d);
            CHECK((d->is_atom(r) || r == d->bot()));
        }
    }
    CHECK(simplified > 100);
}

TEST_CASE("G-system preconditions satisfy their triples") {
    Gen g(53);
    AgreementOptions opt;
    opt.bound = 2;
    int nontrivial = 0;
    for (int i = 0; i < kCases; ++i) {
        Program p = parse(g.block({"x", "y"}, 1, 1));
        Agreement post;
        for (const char* v : {"x", "y"})
            if (g.coin(0.7)) post.set(v, random_domain(g));
        Agreement pre = g_precondition(p, {}, p.body, post, opt);
        if (!(pre == identity_agreement(p))) ++nontrivial;
        CAPTURE(print_program(p));
        CAPTURE(to_string(post));
        CAPTURE(to_string(pre));
        CHECK(check_triple(p, pre, {}, p.body, post, opt) != TripleResult::Fails);
    }
    CHECK(nontrivial > 100);
}

TEST_CASE("criterion subsumption transfers slices") {
    Gen g(67);
    EnumOptions eo;
    eo.bound = 2;
    int transferred = 0;
    const std::vector<std::string> vars{"x", "y"};
    for (int i = 0; i < kCases; ++i) {
        Program p = parse(g.program(vars, 3));
        // Loop counters stay, so Q terminates too.
        std::set<int> erase;
        for (const Stmt* s : all_stmts(p.body))
            if (s->var.rfind('k', 0) != 0 && g.coin(0.3)) erase.insert(s->line);
        Program q = erase_lines(p, erase);

        std::vector<std::string> x2 = g.coin() ? vars : std::vector<std::string>{g.pick(vars)};
        std::vector<std::string> a2;
        std::map<std::string, DomainPtr> dom2;
        for (const auto& v : x2) {
            dom2[v] = random_domain(g);
            a2.push_back(v + ":" + dom2[v]->name());
        }
        std::string base = "range=x:-2..2,y:-2..2\n";
        SlicingCriterion c2 = test_support::criterion(
            base + "vars=" + join(x2, ",") + "\nocc=end\nabs=" + join(a2, ","), p);

        // A weaker criterion: fewer variables, coarser domains, fewer inputs.
        std::vector<std::string> x1{g.pick(x2)}, a1;
        for (const auto& v : x1) {
            std::vector<DomainPtr> coarser;
            for (const auto& d : numeric_candidates())
                if (dom2[v]->refines(*d)) coarser.push_back(d);
            a1.push_back(v + ":" + g.pick(coarser)->name());
        }
        std::string inputs = g.coin() ? "inputs=cond:x " + std::string(g.coin() ? "<" : ">=") + " " +
                                            std::to_string(g.uniform(-2, 2)) + "\n"
                                      : "inputs=list\nmem=x=" + std::to_string(g.uniform(-2, 2)) +
                                            ", y=" + std::to_string(g.uniform(-2, 2)) + "\n";
        SlicingCriterion c1 = test_support::criterion(
            inputs + base + "vars=" + join(x1, ",") + "\nocc=end\nabs=" + join(a1, ","), p);
        CAPTURE(print_program(p));
        CAPTURE(print_program(q));
        CAPTURE(criterion_to_string(c1));
        CAPTURE(criterion_to_string(c2));
        REQUIRE(criterion_subsumes(c1, c2, p, eo));
        if (is_slice(p, q, c2, eo).ok()) {
            ++transferred;
            CHECK(is_slice(p, q, c1, eo).ok());
        }
    }
    CHECK(transferred > 100);
}

TEST_CASE("identity projection is the concrete projection") {
    Gen g(79);
    const std::vector<std::string> vars{"x", "y", "z"};
    for (int i = 0; i < kCases; ++i) {
        Program p = parse(g.program(vars, 3));
        std::vector<int> ls = lines_of(p);
        std::vector<std::string> X;
        for (const auto& v : vars)
            if (g.coin()) X.push_back(v);
        if (X.empty()) X.push_back(g.pick(vars));
        std::string occ;
        for (int l : ls)
            if (g.coin(0.4)) occ += std::to_string(l) + (g.coin() ? ":N " : ":1,2 ");
        if (g.coin()) occ += "end";
        bool kl = g.coin();
        SlicingCriterion c = test_support::criterion(
            "vars=" + join(X, ",") + "\nocc=" + occ + "\nkl=" + (kl ? "true" : "false"), p);
        std::set<int> L;
        if (kl)
            for (int l : ls)
                if (g.coin(0.7)) L.insert(l);
        Memory m = parse_memory("x=" + std::to_string(g.uniform(-3, 3)) + ", y=" + std::to_string(g.uniform(-3, 3)) +
                                ", z=" + std::to_string(g.uniform(-3, 3)));
        Trajectory t = run(p, m);
        CAPTURE(print_program(p));
        CAPTURE(criterion_to_string(c));
        CHECK(project(t, c, p, L) == concrete_proj(t, X, c.occurrences, L));
    }
}
