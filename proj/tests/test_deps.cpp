#include "doctest.h"
#include "support.hpp"

using namespace absslice;
using test_support::num;
using test_support::ref;

namespace {

std::set<std::string> relevant(const std::string& e, const std::string& domain) {
    return find_ndeps(parse_expr(e), top_state(), num(domain));
}

DepQuery query(const std::string& e, const std::string& rho, const std::string& eta) {
    return DepQuery(parse_expr(e), num(rho), DomainMap(num(eta), ref("nullcyc")));
}

}  // namespace

TEST_CASE("semantic dependency ignores vacuous occurrences") {
    ExprPtr e = parse_expr("w + y + 2 * (x * x) - w");
    CHECK_FALSE(sem_dep(e, "w"));
    CHECK(sem_dep(e, "x"));
    CHECK(sem_dep(e, "y"));
    CHECK_FALSE(sem_dep(parse_expr("x - x"), "x"));
    CHECK(sem_dep(parse_guard("x * 0 < y"), "y"));
    CHECK_FALSE(sem_dep(parse_guard("x * 0 < y"), "x"));
    auto w = sem_dep_witness(parse_expr("x + 1"), "x");
    REQUIRE(w);
    CHECK(w->r1 != w->r2);
}

TEST_CASE("relevant variables for a property") {
    CHECK(relevant("2 * x * x + y", "par") == std::set<std::string>{"y"});
    CHECK(relevant("2 * x * x + y", "sign") == std::set<std::string>{"x", "y"});
    CHECK(relevant("x * x + 1", "sign").empty());
    CHECK(relevant("x + y", "par") == std::set<std::string>{"x", "y"});
    CHECK(relevant("w + y + 2 * (x * x) - w", "par") == std::set<std::string>{"y"});
    CHECK(relevant("7", "par").empty());
}

TEST_CASE("narrow and atomic dependency") {
    DepQuery q = query("2 * x * x + y", "par", "par");
    CHECK_FALSE(ndep(q, "x"));
    CHECK(ndep(q, "y"));
    CHECK(atom_dep(q, "y"));
    DepQuery s = query("x * x + 1", "sign", "id");
    CHECK_FALSE(ndep(s, "x"));
    auto w = ndep_witness(query("x + y", "par", "id"), "x");
    REQUIRE(w);
    CHECK(w->r1 != w->r2);
}

TEST_CASE("atomicity condition") {
    auto sign = num("sign");
    auto a = ac(parse_expr("x * x + 1"), top_state(), {"x"}, sign);
    REQUIRE(a);
    CHECK(sign->value_name(*a) == "pos");
    CHECK_FALSE(ac(parse_expr("x + 1"), top_state(), {"x"}, sign));
    auto par = num("par");
    AbsState odd;
    odd.vals["y"] = *par->find("odd");
    auto b = ac(parse_expr("2 * x * x + y"), odd, {"x"}, par);
    REQUIRE(b);
    CHECK(par->value_name(*b) == "odd");
}

TEST_CASE("edep simplifies the domain until the expression is independent") {
    DomainPtr same = edep(parse_expr("2 * x * x + y"), num("par"), {"x"});
    CHECK(same->same_partition(*num("par")));
    DomainPtr collapsed = edep(parse_expr("x + y"), num("par"), {"x"});
    CHECK(collapsed->size() == 2);
    CHECK(collapsed->is_top());
    CHECK(edep(parse_expr("x * y"), num("top"), {"x"})->is_top());
    for (const char* e : {"2 * x * x + y", "x + y", "x * y + 3", "x - x + y"})
        for (const char* d : {"par", "sign", "parsign", "zero"}) {
            CAPTURE(e);
            CAPTURE(d);
            CHECK(non_dependent(parse_expr(e), edep(parse_expr(e), num(d), {"x"}), {"x"}));
        }
}
