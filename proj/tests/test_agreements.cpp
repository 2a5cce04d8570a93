#include "doctest.h"
#include "support.hpp"

using namespace absslice;
using test_support::corpus_program;
using test_support::num;
using test_support::program;

namespace {

const Stmt& first(const Program& p) { return p.body.front(); }

}  // namespace

TEST_CASE("agreement text round-trips") {
    Program p = program("class C { C n; } C x; i := n + 1;");
    Agreement g = parse_agreement("{par@n, null@x, [i <= n]}", p);
    CHECK(to_string(g) == "{par@n, null@x, [i <= n]}");
    CHECK(parse_agreement(to_string(g), p) == g);
    CHECK(parse_agreement("{top@n}", p).empty());
    CHECK_THROWS(parse_agreement("{par@x}", p));
    CHECK_THROWS(parse_agreement("{intervals@n}", p));
}

TEST_CASE("agreement order and meet") {
    Program p = program("x := y;");
    Agreement par = parse_agreement("{par@x}", p), id = parse_agreement("{id@x}", p);
    Agreement sign = parse_agreement("{sign@x}", p), none = parse_agreement("{}", p);
    CHECK(leq(id, par));
    CHECK_FALSE(leq(par, id));
    CHECK(leq(par, none));
    CHECK_FALSE(leq(par, sign));
    CHECK(to_string(meet(par, sign)) == "{parsign@x}");
    CHECK(to_string(meet(par, parse_agreement("{par@y}", p))) == "{par@x, par@y}");
    CHECK(leq(identity_agreement(p), meet(par, sign)));
}

TEST_CASE("two states agree") {
    Program p = program("x := y;");
    Agreement par = parse_agreement("{par@x}", p);
    CHECK(agree(par, parse_memory("x=1"), parse_memory("x=3"), p));
    CHECK_FALSE(agree(par, parse_memory("x=1"), parse_memory("x=2"), p));
    Agreement cond = parse_agreement("{[x < y]}", p);
    CHECK(agree(cond, parse_memory("x=1, y=2"), parse_memory("x=0, y=4"), p));
    CHECK_FALSE(agree(cond, parse_memory("x=1, y=2"), parse_memory("x=3, y=2"), p));
}

TEST_CASE("property preservation versus triples") {
    Program plus2 = program("x := x + 2;"), plus1 = program("x := x + 1;");
    Agreement par = parse_agreement("{par@x}", plus2);
    CHECK(p_prove(plus2, {}, first(plus2), par));
    CHECK_FALSE(p_prove(plus1, {}, first(plus1), par));
    // x := x + 1 flips the parity in both states, so agreement on it is kept.
    CHECK(check_triple(plus1, par, {}, plus1.body, par) == TripleResult::Holds);
    CHECK(check_triple(plus1, par, {}, plus1.body, parse_agreement("{id@x}", plus1)) == TripleResult::Fails);
}

TEST_CASE("preconditions") {
    Program plus1 = program("x := x + 1;");
    Agreement par = parse_agreement("{par@x}", plus1);
    CHECK(g_precondition(plus1, {}, first(plus1), par) == par);

    Program zero = program("x := y * 0;");
    CHECK(g_precondition(zero, {}, first(zero), parse_agreement("{id@x}", zero)).empty());

    Program copy = program("x := y;");
    CHECK(to_string(g_precondition(copy, {}, first(copy), parse_agreement("{sign@x}", copy))) == "{sign@y}");

    Program branch = program("if (x > 0) { x := x + 1 } else { x := x - 1 }");
    Agreement sign = parse_agreement("{sign@x}", branch);
    CHECK(g_precondition(branch, {}, first(branch), sign) == sign);
}

TEST_CASE("transformed predicates") {
    Program p = program("x := 5; y := x + 1;");
    Predicate after = transformed_predicate(p.body, {}, p);
    CHECK(after.holds(parse_memory("x=5, y=6")));
    CHECK_FALSE(after.holds(parse_memory("x=4, y=6")));
    Predicate pos = predicate_from_guard(parse_guard("n > 0 and n < 3"), p);
    CHECK(pos.facts.size() == 2);
    CHECK(pos.holds(parse_memory("n=1")));
    CHECK_FALSE(pos.holds(parse_memory("n=3")));
}

TEST_CASE("guard agreements") {
    Program p = program("x := y;");
    CHECK(to_string(guard_agreement(parse_guard("x > 0"), p)) == "{sign@x}");
    CHECK(to_string(guard_agreement(parse_guard("x = 0"), p)) == "{zero@x}");
    CHECK(to_string(guard_agreement(parse_guard("x < y"), p)) == "{[x < y]}");
    CHECK(to_string(guard_agreement(parse_guard("x < y"), p, true)) == "{id@x, id@y}");
}

TEST_CASE("labels of the nullity example") {
    Program p = corpus_program("nullity");
    Labeling l = label_sequence(p, parse_agreement("{null@x}", p), {});
    CHECK(to_string(l.after.at(9)) == "{zero@n}");
    CHECK(to_string(l.after.at(10)) == "{zero@n}");
    CHECK(to_string(l.after.at(12)) == "{null@x}");
    CHECK(to_string(l.after.at(11)) == "{null@x}");
    CHECK(to_string(l.entry) == "{zero@n}");
    Stmt s9 = *stmt_at(p, 9), s10 = *stmt_at(p, 10);
    CHECK(p_prove(p, l.before.at(9), s9, l.after.at(9)));
    CHECK(p_prove(p, l.before.at(10), s10, l.after.at(10)));
}

TEST_CASE("labels for the parity of d") {
    Program p = corpus_program("parity");
    Labeling l = label_sequence(p, parse_agreement("{par@d}", p), {});
    CHECK(to_string(l.entry) == "{par@b}");
    CHECK(to_string(l.after.at(4)) == "{par@b}");
    std::string listing = labeling_to_string(p, l);
    CHECK(listing.find("5:  d := 2 * c + b + a - a;  // {par@d}") != std::string::npos);
}

TEST_CASE("loop labels preserve the loop agreement") {
    Program p = corpus_program("pq");
    Labeling l = label_sequence(p, parse_agreement("{par@s}", p), {});
    REQUIRE(l.loop.count(4));
    const Agreement& inv = l.loop.at(4);
    const Stmt& loop = *stmt_at(p, 4);
    CHECK(check_triple(p, inv, {}, loop.then_block, inv) == TripleResult::Holds);
    // The loop rule needs the same number of iterations in both runs.
    CHECK(to_string(l.entry) == "{id@n, par@s}");
}
