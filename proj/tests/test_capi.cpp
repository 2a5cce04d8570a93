#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "absslice/absslice.h"
#include "doctest.h"

namespace {

std::string corpus(const std::string& name) {
    std::ifstream in(std::string(ABSSLICE_CORPUS_DIR) + "/" + name);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// Owns a string returned by the library.
struct Text {
    char* p = nullptr;
    ~Text() { asl_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct Prog {
    asl_program* p = nullptr;
    explicit Prog(const std::string& text) { REQUIRE(asl_program_parse(text.c_str(), &p) == ASL_OK); }
    ~Prog() { asl_program_free(p); }
};

struct Crit {
    asl_criterion* c = nullptr;
    explicit Crit(const std::string& text) { REQUIRE(asl_criterion_parse(text.c_str(), &c) == ASL_OK); }
    ~Crit() { asl_criterion_free(c); }
};

}  // namespace

TEST_CASE("version and options") {
    CHECK(std::strcmp(asl_version(), "1.0.0") == 0);
    asl_options o;
    asl_options_init(&o);
    CHECK(o.bound == 4);
    CHECK(o.step_limit == 10000);
}

TEST_CASE("parse errors are reported") {
    asl_program* p = nullptr;
    CHECK(asl_program_parse("x := ;", &p) == ASL_ERR_PARSE);
    CHECK(p == nullptr);
    CHECK(std::strlen(asl_last_error()) > 0);
    asl_criterion* c = nullptr;
    CHECK(asl_criterion_parse("vars=x\nabs=x:intervals", &c) == ASL_ERR_ARG);
    CHECK(asl_program_parse(nullptr, &p) == ASL_ERR_ARG);
}

TEST_CASE("run and print") {
    Prog p("x := y + 1;");
    Text out;
    REQUIRE(asl_run(p.p, "y=2", nullptr, &out.p) == ASL_OK);
    CHECK(out.str().find("x=3") != std::string::npos);
    Text src;
    REQUIRE(asl_program_print(p.p, &src.p) == ASL_OK);
    CHECK(src.str() == "1:  x := y + 1;\n");
}

TEST_CASE("analyses through the C interface") {
    Text deps;
    REQUIRE(asl_deps("2*x*x+y", "par", nullptr, nullptr, nullptr, &deps.p) == ASL_OK);
    CHECK(deps.str().rfind("relevant: {y}", 0) == 0);
    Text bad;
    CHECK(asl_deps("x+y", "intervals", nullptr, nullptr, nullptr, &bad.p) == ASL_ERR_ARG);

    Prog inv(corpus("invariants.prog"));
    Text abs;
    REQUIRE(asl_absint(inv.p, "sign", nullptr, &abs.p) == ASL_OK);
    CHECK(abs.str().find("end: i↦neg j↦pos") != std::string::npos);

    Prog ese(corpus("vacuous.prog"));
    Text dot;
    REQUIRE(asl_pdg(ese.p, 1, 1, nullptr, &dot.p) == ASL_OK);
    CHECK(dot.str().find("n3 -> n4") == std::string::npos);

    Prog nul(corpus("nullity.prog"));
    Text labels;
    REQUIRE(asl_label(nul.p, "{null@x}", nullptr, &labels.p) == ASL_OK);
    CHECK(labels.str().find("9:   n := n * 2;  // {zero@n}") != std::string::npos);
}

TEST_CASE("slice, check and subsumption") {
    Prog p(corpus("parity.prog"));
    Crit c(corpus("parity.crit"));
    Text listing, report;
    asl_verdict v = ASL_INCONCLUSIVE;
    REQUIRE(asl_slice(p.p, c.c, 0, nullptr, &listing.p, &report.p, &v) == ASL_OK);
    CHECK(v == ASL_EQUIVALENT);
    CHECK(report.str().find("\"kept\": [\n    2,\n    5\n  ]") != std::string::npos);

    Prog r(corpus("rs.prog")), s(corpus("rs_s.prog"));
    Crit cond(corpus("rs.crit")), stat(corpus("rs_static.crit"));
    Text o1, o2;
    REQUIRE(asl_check(r.p, s.p, cond.c, nullptr, &v, &o1.p) == ASL_OK);
    CHECK(v == ASL_EQUIVALENT);
    REQUIRE(asl_check(r.p, s.p, stat.c, nullptr, &v, &o2.p) == ASL_OK);
    CHECK(v == ASL_COUNTEREXAMPLE);

    int sub = -1;
    REQUIRE(asl_subsumes(cond.c, cond.c, r.p, nullptr, &sub) == ASL_OK);
    CHECK(sub == 1);
    // n = 8 lies outside the static range.
    REQUIRE(asl_subsumes(cond.c, stat.c, r.p, nullptr, &sub) == ASL_OK);
    CHECK(sub == 0);

    Crit mid("vars=s\nocc=3\nabs=s:par");
    CHECK(asl_slice(r.p, mid.c, 0, nullptr, &listing.p, &report.p, &v) == ASL_ERR_ARG);
}
