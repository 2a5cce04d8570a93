#include "doctest.h"
#include "support.hpp"

using namespace absslice;
using test_support::num;
using test_support::ref;

namespace {

std::string value_at(const Invariants& inv, int line, const std::string& v, const DomainMap& dm) {
    const AbsState& s = inv.at(line);
    return dm.of(v)->value_name(s.get(v, dm));
}

}  // namespace

TEST_CASE("loop invariants in the sign domain") {
    Program p = test_support::corpus_program("invariants");
    DomainMap dm(p, num("sign"), ref("nullcyc"));
    Invariants inv = infer_invariants(p, dm);
    CHECK(value_at(inv, kEndLine, "i", dm) == "neg");
    CHECK(value_at(inv, kEndLine, "j", dm) == "pos");
    CHECK(value_at(inv, 2, "i", dm) == "pos");
    // Inside the loop the sign of i is lost.
    CHECK(value_at(inv, 4, "i", dm) == "top");
}

TEST_CASE("parity through a loop") {
    Program p = test_support::program("s := 0; i := 0; while (i < n) { s := s + 2; i := i + 1 }");
    DomainMap dm(p, num("par"), ref("nullcyc"));
    Invariants inv = infer_invariants(p, dm);
    CHECK(value_at(inv, kEndLine, "s", dm) == "even");
    CHECK(value_at(inv, kEndLine, "i", dm) == "top");
}

TEST_CASE("branches are refined by their guards") {
    Program p = test_support::program("if (x > 0) { y := x } else { y := 0 - x }");
    DomainMap dm(p, num("sign"), ref("nullcyc"));
    Invariants inv = infer_invariants(p, dm);
    CHECK(value_at(inv, 2, "x", dm) == "pos");
    CHECK(value_at(inv, kEndLine, "y", dm) == "top");  // y is zero or positive, which sign cannot express
}

TEST_CASE("unreachable code is bottom") {
    Program p = test_support::program("x := 1; if (x < 0) { y := 1 }");
    DomainMap dm(p, num("sign"), ref("nullcyc"));
    Invariants inv = infer_invariants(p, dm);
    CHECK(inv.at(3).bottom);
}

TEST_CASE("nullity of references") {
    Program p = test_support::program("class C { C n; } C x; C y; x := new C(); y := null; if (x = null) { z := 1 }");
    DomainMap dm(p, num("sign"), ref("nullcyc"));
    Invariants inv = infer_invariants(p, dm);
    CHECK(value_at(inv, kEndLine, "x", dm) == "nonnull&acyc");
    CHECK(value_at(inv, kEndLine, "y", dm) == "null");
    CHECK(inv.at(4).bottom);
}

TEST_CASE("abstract evaluation and guards") {
    DomainMap dm(num("sign"), ref("nullcyc"));
    AbsState s;
    auto sign = num("sign");
    s.vals["x"] = *sign->find("neg");
    CHECK(sign->value_name(abs_eval(parse_expr("x * x"), s, dm, *sign)) == "pos");
    CHECK(sign->value_name(abs_eval(parse_expr("x * x + 1"), s, dm, *sign)) == "pos");
    CHECK(abs_guard(parse_guard("x < 0"), s, dm) == Tri::True);
    CHECK(abs_guard(parse_guard("x > 0"), s, dm) == Tri::False);
    CHECK(abs_guard(parse_guard("x < y"), s, dm) == Tri::Unknown);
    AbsState r = refine(parse_guard("y > 0"), true, s, dm);
    CHECK(sign->value_name(r.get("y", dm)) == "pos");
    CHECK(refine(parse_guard("x > 0"), true, s, dm).bottom);
}

TEST_CASE("invariant listing") {
    Program p = test_support::program("x := 1;");
    DomainMap dm(p, num("par"), ref("nullcyc"));
    CHECK(invariants_to_string(p, infer_invariants(p, dm), dm) == "1: x↦top\nend: x↦odd\n");
}
