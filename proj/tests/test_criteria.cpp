#include "doctest.h"
#include "support.hpp"

using namespace absslice;
using test_support::corpus_criterion;
using test_support::corpus_program;
using test_support::criterion;
using test_support::program;

namespace {

const char* kCritLeft = R"(read(n);
i := 1;
while (i <= n) {
  if (i mod 2 = 0) { x := 17 } else { x := 18 }
  i := i + 1
}
if (i = 1) { x := 17 }
write(i, n, x);)";

const char* kCritCenter = R"(1: read(n);
2: i := 1;
3: while (i <= n) {
4:   if (i mod 2 = 0) { 5: x := 17 }
7:   i := i + 1
}
8: if (i = 1) { 9: x := 17 }
10: write(i, n, x);)";

const char* kCritRight = R"(1: read(n);
2: i := 1;
8: if (i = 1) { 9: x := 17 }
10: write(i, n, x);)";

}  // namespace

TEST_CASE("criterion files round-trip") {
    Program p = corpus_program("pq");
    SlicingCriterion c = corpus_criterion("pq", p);
    CHECK(c.vars == std::vector<std::string>{"s"});
    REQUIRE(c.occurrences.size() == 1);
    CHECK(c.occurrences[0].line == 7);
    CHECK(c.occurrences[0].all);
    SlicingCriterion again = criterion(criterion_to_string(c), p);
    CHECK(criterion_to_string(again) == criterion_to_string(c));
}

TEST_CASE("malformed criteria are rejected") {
    Program p = program("x := 1;");
    CHECK_THROWS_AS(criterion("vars=x\nocc=end\nabs=x:intervals", p), UnknownDomain);
    CHECK_THROWS_AS(criterion("vars=x\nocc=7", p), CriterionError);
    CHECK_THROWS_AS(criterion("vars=x\nfoo=1", p), CriterionError);
    CHECK_THROWS_AS(criterion("inputs=list\nvars=x", p), CriterionError);
    CHECK_THROWS_AS(criterion("vars=x\nocc=end:0", p), CriterionError);
}

TEST_CASE("abstract restriction") {
    Program p = program("write(x1, x2, x3, x4);");
    SlicingCriterion c = criterion("vars=x1,x2,x3\nocc=end\nabs={x1,x2}:signprod,x3:par", p);
    Memory m = parse_memory("x1=1, x2=2, x3=3, x4=4");
    CHECK(abstract_restrict(m, c, p) == std::vector<std::string>{"pos", "odd"});

    SlicingCriterion id = criterion("vars=x4\nocc=end", p);
    CHECK(abstract_restrict(m, id, p) == std::vector<std::string>{"4"});

    Program q = program("s := b + a * (a + 1);");
    SlicingCriterion par = criterion("vars=s\nocc=end\nabs=s:par", q);
    Trajectory t = run(q, parse_memory("a=1, b=3"));
    CHECK(abstract_restrict(t.final, par, q) == std::vector<std::string>{"odd"});
}

TEST_CASE("projection of P observes the parity of s once") {
    Program p = corpus_program("pq");
    SlicingCriterion c = corpus_criterion("pq", p);
    for (int n = 0; n <= 4; ++n)
        for (int s = -2; s <= 3; ++s) {
            Memory m = parse_memory("n=" + std::to_string(n) + ", s=" + std::to_string(s));
            Projection pr = project(run(p, m), c, p, {});
            REQUIRE(pr.size() == 1);
            CHECK(pr[0].line == 7);
            CHECK(pr[0].iteration == 1);
            CHECK(pr[0].obs == std::vector<std::string>{s % 2 == 0 ? "even" : "odd"});
        }
}

TEST_CASE("empty occurrence set projects to nothing") {
    Program p = corpus_program("pq");
    SlicingCriterion c = criterion("vars=s\nabs=s:par", p);
    CHECK(project(run(p, parse_memory("n=3, s=1")), c, p, {}).empty());
}

TEST_CASE("P and Q are equivalent for the parity of s") {
    Program p = corpus_program("pq");
    Program q = program(test_support::slurp(test_support::corpus_path("pq_q.prog")));
    SlicingCriterion c = corpus_criterion("pq", p);
    Verdict v = is_slice(p, q, c);
    CHECK(v.ok());
    CHECK(v.checked == 30);
    // The identity criterion distinguishes them.
    SlicingCriterion id = criterion("range=n:0..4,s:-2..3\nvars=s\nocc=7", p);
    CHECK(equivalent(p, q, id).kind == Verdict::Kind::Counterexample);
}

TEST_CASE("R and S: conditioned slice, not a static one") {
    Program r = corpus_program("rs");
    Program s = program(test_support::slurp(test_support::corpus_path("rs_s.prog")));
    Verdict cond = is_slice(r, s, corpus_criterion("rs", r));
    CHECK(cond.ok());
    CHECK(cond.checked == 3);
    Verdict stat = is_slice(r, s, corpus_criterion("rs_static", r));
    REQUIRE(stat.kind == Verdict::Kind::Counterexample);
    REQUIRE(stat.witness);
    CHECK(stat.witness->get("n").num % 4 != 0);
}

TEST_CASE("parity of d: the two-line slice") {
    Program p = corpus_program("parity");
    Program s = program("2: b := b + 1; 5: d := 2 * c + b + a - a;");
    CHECK(is_slice(p, s, corpus_criterion("parity", p)).ok());
    CHECK(is_slice(p, p, corpus_criterion("parity", p)).ok());
}

TEST_CASE("the three programs of the iteration example") {
    Program left = program(kCritLeft), center = program(kCritCenter), right = program(kCritRight);
    for (const char* kl : {"false", "true"}) {
        std::string at_write = std::string("inputs=list\nmem=n=2\nvars=x\nocc=10\nkl=") + kl;
        CHECK(is_slice(left, center, criterion(at_write, left)).ok());
        std::string at_loop = std::string("inputs=list\nmem=n=2\nvars=x\nocc=3:2\nkl=") + kl;
        CHECK(is_slice(left, right, criterion(at_loop, left)).kind == Verdict::Kind::Counterexample);
    }
    CHECK(is_slice(left, right, criterion("inputs=list\nmem=n=2\nvars=x\nocc=10\nkl=false", left)).ok());
    CHECK(is_slice(left, right, criterion("inputs=list\nmem=n=2\nvars=x\nocc=10\nkl=true", left)).kind ==
          Verdict::Kind::Counterexample);
}

TEST_CASE("a non-subprogram is never a slice") {
    Program p = program("x := 1; y := 2;");
    Program q = program("1: x := 2;");
    Verdict v = is_slice(p, q, criterion("vars=y\nocc=end", p));
    CHECK_FALSE(v.ok());
}

TEST_CASE("nontermination is inconclusive") {
    Program p = program("while (x > 0) { x := x + 1 }");
    EnumOptions opt;
    opt.step_limit = 200;
    Verdict v = equivalent(p, p, criterion("vars=x\nocc=end", p), opt);
    CHECK(v.kind == Verdict::Kind::Inconclusive);
}

TEST_CASE("criterion subsumption") {
    Program p = corpus_program("pq");
    SlicingCriterion dyn = criterion("inputs=list\nmem=n=2, s=1\nvars=s\nocc=7\nabs=s:par", p);
    SlicingCriterion stat = criterion("range=n:0..4,s:-2..3\nvars=s\nocc=7", p);
    CHECK(criterion_subsumes(dyn, stat, p));
    CHECK_FALSE(criterion_subsumes(stat, dyn, p));
    CHECK(criterion_subsumes(stat, stat, p));

    SlicingCriterion kl = criterion("range=n:0..4,s:-2..3\nvars=s\nocc=7\nkl=true", p);
    CHECK_FALSE(criterion_subsumes(kl, stat, p));
    CHECK(criterion_subsumes(stat, kl, p));

    SlicingCriterion some = criterion("range=n:0..4,s:-2..3\nvars=s\nocc=7:1,2", p);
    CHECK(criterion_subsumes(some, stat, p));
    CHECK_FALSE(criterion_subsumes(stat, some, p));

    SlicingCriterion cond = criterion("inputs=cond:n mod 2 = 0\nrange=n:0..4,s:-2..3\nvars=s\nocc=7", p);
    CHECK(criterion_subsumes(cond, stat, p));
    CHECK_FALSE(criterion_subsumes(stat, cond, p));

    // The consequence on a slice pair: Q is a slice for the stronger criterion, hence for the weaker.
    Program q = program(test_support::slurp(test_support::corpus_path("pq_q.prog")));
    SlicingCriterion strong = corpus_criterion("pq", p);
    CHECK(is_slice(p, q, strong).ok());
    CHECK(criterion_subsumes(dyn, strong, p));
    CHECK(is_slice(p, q, dyn).ok());
    CHECK_FALSE(is_slice(p, q, stat).ok());
}

TEST_CASE("enumeration covers the grid and the reference shapes") {
    Program p = program("class C { C n; } C x; y := 1;");
    EnumOptions opt;
    opt.bound = 1;
    std::vector<Memory> ms = enumerate_memories(p, {"y"}, opt);
    CHECK(ms.size() == 3);
    std::vector<Memory> rs = enumerate_memories(p, {"x"}, opt);
    CHECK(rs.size() == 5);
}
