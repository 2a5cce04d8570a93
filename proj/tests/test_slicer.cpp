#include "doctest.h"
#include "support.hpp"

using namespace absslice;
using test_support::corpus_criterion;
using test_support::corpus_program;
using test_support::criterion;
using test_support::program;

namespace {

SliceResult slice_corpus(const std::string& name, bool concrete = false) {
    Program p = corpus_program(name);
    SlicingCriterion c = corpus_criterion(name, p);
    return concrete ? concrete_slice(p, c) : abstract_slice(p, c);
}

}  // namespace

TEST_CASE("parity of d: abstract and concrete slices") {
    SliceResult a = slice_corpus("parity");
    CHECK(a.kept == std::set<int>{2, 5});
    CHECK(a.erased == std::set<int>{1, 3, 4});
    CHECK(a.verdict.ok());
    CHECK_FALSE(a.fallback);
    SliceResult c = slice_corpus("parity", true);
    CHECK(c.kept == std::set<int>{2, 3, 5});
    CHECK(c.verdict.ok());
}

TEST_CASE("nullity: lines 9 and 10 go away, unless the identity is observed") {
    SliceResult a = slice_corpus("nullity");
    CHECK(a.erased == std::set<int>{9, 10});
    CHECK(a.verdict.ok());
    Program p = corpus_program("nullity");
    SliceResult c = concrete_slice(p, criterion("range=n:-4..4\nvars=x\nocc=end\nabs=x:id", p));
    CHECK(c.kept.count(9) == 1);
    CHECK(c.erased == std::set<int>{10});
    CHECK(c.verdict.ok());
}

TEST_CASE("semantic rather than syntactic dependency") {
    SliceResult c = slice_corpus("vacuous", true);
    CHECK(c.kept == std::set<int>{1, 2, 4});
}

TEST_CASE("P reduces to Q") {
    SliceResult a = slice_corpus("pq");
    CHECK(a.kept == std::set<int>{1, 2, 7});
    Program q = program(test_support::slurp(test_support::corpus_path("pq_q.prog")));
    CHECK(lines_of(a.slice) == lines_of(q));
}

TEST_CASE("untouched variable: everything else goes") {
    Program p = program("x := 1; y := x + 2; while (y > 0) { y := y - 1 } z := 4;");
    SliceResult c = concrete_slice(p, criterion("vars=w\nocc=end", p));
    CHECK(c.kept.empty());
    CHECK(c.verdict.ok());
}

TEST_CASE("skips only") {
    Program p = program("skip; skip;");
    SliceResult r = abstract_slice(p, criterion("vars=x\nocc=end", p));
    CHECK(r.slice.body.empty());
}

TEST_CASE("unsupported criterion forms") {
    Program p = corpus_program("pq");
    CHECK_THROWS_AS(abstract_slice(p, criterion("vars=s\nocc=5\nabs=s:par", p)), SliceError);
    CHECK_THROWS_AS(abstract_slice(p, criterion("vars=s\nocc=7:1\nabs=s:par", p)), SliceError);
    CHECK_THROWS_AS(abstract_slice(p, criterion("vars=s\nocc=7\nkl=true\nabs=s:par", p)), SliceError);
}

TEST_CASE("slicing is idempotent and abstraction shrinks slices") {
    for (const char* name : {"parity", "pq", "psum", "pdg", "vacuous", "nullity", "iterations", "rs", "invariants"}) {
        CAPTURE(name);
        Program p = corpus_program(name);
        SlicingCriterion c = corpus_criterion(name, p);
        SliceResult a = abstract_slice(p, c);
        CHECK(a.verdict.ok());
        SliceResult again = abstract_slice(a.slice, c);
        CHECK(again.kept == a.kept);
        SliceResult id = concrete_slice(p, c);
        CHECK(id.verdict.ok());
        CHECK(std::includes(id.kept.begin(), id.kept.end(), a.kept.begin(), a.kept.end()));
    }
}

TEST_CASE("R and S verification") {
    Program r = corpus_program("rs");
    Program s = program(test_support::slurp(test_support::corpus_path("rs_s.prog")));
    CHECK(verify_slice(r, s, corpus_criterion("rs", r)).ok());
    CHECK(verify_slice(r, s, corpus_criterion("rs_static", r)).kind == Verdict::Kind::Counterexample);
    CHECK(verify_slice(r, r, corpus_criterion("rs_static", r)).ok());
}

TEST_CASE("listing and report") {
    Program p = corpus_program("parity");
    SlicingCriterion c = corpus_criterion("parity", p);
    SliceResult a = abstract_slice(p, c);
    std::string listing = slice_listing(p, a);
    CHECK(listing.find("b := b + 1;") != std::string::npos);
    CHECK(listing.find("a := 1;") == std::string::npos);
    std::string report = slice_report_json(p, c, a);
    CHECK(report.find("\"kept\"") != std::string::npos);
    CHECK(report.find("\"verdict\": \"equivalent\"") != std::string::npos);
}

TEST_CASE("every emission is recorded") {
    clear_emitted_slices();
    slice_corpus("parity");
    slice_corpus("vacuous", true);
    auto e = emitted_slices();
    REQUIRE(e.size() == 2);
    for (const auto& x : e) CHECK(x.verdict == Verdict::Kind::Equivalent);
}
