#include "doctest.h"
#include "support.hpp"

using namespace absslice;
using test_support::program;

namespace {

Int final_int(const std::string& src, const std::string& var, const std::string& input = "") {
    Program p = program(src);
    Trajectory t = run(p, parse_memory(input));
    REQUIRE(t.status == RunStatus::Completed);
    return t.final.get(var).num;
}

}  // namespace

TEST_CASE("integer arithmetic: truncating division, Euclidean mod") {
    CHECK(final_int("x := 7 / 2", "x") == 3);
    CHECK(final_int("x := (0 - 7) / 2", "x") == -3);
    CHECK(final_int("x := (0 - 7) mod 2", "x") == 1);
    CHECK(final_int("x := 7 mod (0 - 2)", "x") == 1);
    CHECK(final_int("x := (0 - 8) mod 3", "x") == 1);
    CHECK(final_int("x := 2 * 3 + 4 - 1", "x") == 9);
}

TEST_CASE("integers do not overflow") {
    CHECK(final_int("x := 1; i := 0; while (i < 70) { x := x * 2; i := i + 1 }", "x") == Int(1) << 70);
}

TEST_CASE("runtime errors") {
    Program p = program("x := 1 / y");
    Trajectory t = run(p, parse_memory("y=0"));
    CHECK(t.status == RunStatus::RuntimeError);
    CHECK_FALSE(t.error.empty());
    Program q = program("class C { int v; } C x; y := x.v;");
    CHECK(run(q, {}).status == RunStatus::RuntimeError);
}

TEST_CASE("step limit") {
    Program p = program("while (1 = 1) { x := x + 1 }");
    Trajectory t = run(p, {}, 50);
    CHECK(t.status == RunStatus::StepLimit);
    CHECK(t.states.size() <= 50);
}

TEST_CASE("trajectory records a state per executed statement with visit counts") {
    Program p = program("i := 0; while (i < 2) { i := i + 1 }");
    Trajectory t = run(p, {});
    REQUIRE(t.status == RunStatus::Completed);
    std::vector<std::pair<int, int>> visits;
    for (const auto& s : t.states) visits.emplace_back(s.point, s.iteration);
    CHECK(visits == std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {3, 1}, {2, 2}, {3, 2}, {2, 3}});
    CHECK(t.final.get("i").num == 2);
    CHECK(run(program("skip;"), {}).states.size() == 1);
}

TEST_CASE("states hold the memory before the statement") {
    Program p = program("a := 1; b := a + 1;");
    Trajectory t = run(p, parse_memory("a=5"));
    REQUIRE(t.states.size() == 2);
    CHECK(t.states[0].memory.get("a").num == 5);
    CHECK(t.states[1].memory.get("a").num == 1);
    CHECK(t.final.get("b").num == 2);
}

TEST_CASE("undefined variables read as zero or null") {
    CHECK(final_int("x := y + 1", "x") == 1);
    Program p = program("class C { C n; } C x; if (x = null) { r := 1 } else { r := 2 }");
    CHECK(run(p, {}).final.get("r").num == 1);
}

TEST_CASE("heap: allocation, field update, aliasing") {
    Program p = program("class C { int v; C n; } C x; C y; x := new C(); y := x; y.v := 7; r := x.v; x.n := x;");
    Trajectory t = run(p, {});
    REQUIRE(t.status == RunStatus::Completed);
    CHECK(t.final.get("r").num == 7);
    CHECK(is_cyclic(t.final, "x"));
    CHECK(is_cyclic(t.final, "y"));
}

TEST_CASE("fresh objects have default fields") {
    Program p = program("class C { int v; C n; } C x; x := new C(); r := x.v; if (x.n = null) { s := 1 }");
    Trajectory t = run(p, {});
    CHECK(t.final.get("r").num == 0);
    CHECK(t.final.get("s").num == 1);
}

TEST_CASE("memory text round trip") {
    Memory m = parse_memory("a=1, b=-3");
    CHECK(m.get("a").num == 1);
    CHECK(m.get("b").num == -3);
    CHECK(memory_to_string(m) == "a=1, b=-3");
    CHECK_THROWS_AS(parse_memory("a 1"), ParseError);
}

TEST_CASE("structural equality of references") {
    Program p = program("class C { C n; } C x; C y; x := new C(); y := new C(); y.n := y;");
    Trajectory t = run(p, {});
    CHECK_FALSE(ref_equal(t.final, t.final.get("x"), t.final, t.final.get("y")));
    CHECK(ref_equal(t.final, t.final.get("x"), t.final, t.final.get("x")));
    CHECK(ref_signature(t.final, t.final.get("y")) != ref_signature(t.final, t.final.get("x")));
}
