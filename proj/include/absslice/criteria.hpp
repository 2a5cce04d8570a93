#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absslice/concrete.hpp"
#include "absslice/domains.hpp"

namespace absslice {

struct CriterionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Observation point: a line (or kEndLine) and the visits of interest; all == every visit.
struct Occurrence {
    int line = 0;
    bool all = true;
    std::set<int> iterations;

    bool operator==(const Occurrence&) const = default;
};

struct InputSpec {
    enum class Kind { All, List, Cond };
    Kind kind = Kind::All;
    std::vector<Memory> memories;  // List
    GuardPtr cond;                 // Cond
    // Per-variable integer ranges replacing [-B, B] for the enumeration.
    std::map<std::string, std::pair<Int, Int>> ranges;
};

struct AbsGroup {
    enum class Kind { Single, SignProd, ParSum };
    Kind kind = Kind::Single;
    std::vector<std::string> vars;
    std::string domain = "id";  // Single: library name, resolved by the variable's type
};

struct SlicingCriterion {
    InputSpec inputs;
    std::vector<std::string> vars;
    std::vector<Occurrence> occurrences;
    bool kl = false;
    std::vector<AbsGroup> abs;  // covers vars exactly, in order

    const AbsGroup* group_of(const std::string& v) const;
};

// key=value text; see the README for the format. Throws CriterionError / UnknownDomain.
SlicingCriterion parse_criterion(const std::string& text);
std::string criterion_to_string(const SlicingCriterion& c);
// Fills missing groups with id and checks names against the program's typing.
void check_criterion(SlicingCriterion& c, const Program& p);

struct ProjEntry {
    int line = 0;
    int iteration = 0;
    bool marker = false;            // executed-only entry (KL form)
    std::vector<std::string> obs;   // one text per group

    bool operator==(const ProjEntry&) const = default;
};
using Projection = std::vector<ProjEntry>;

std::vector<std::string> abstract_restrict(const Memory& m, const SlicingCriterion& c, const Program& p);
Projection project(const Trajectory& t, const SlicingCriterion& c, const Program& p, const std::set<int>& lines);
std::string projection_to_string(const Projection& pr);

struct EnumOptions {
    int bound = 4;
    std::size_t step_limit = kDefaultStepLimit;
    std::map<std::string, std::pair<Int, Int>> ranges;
    // Whether a reference input may alias an earlier one; default: always.
    std::function<bool(const std::string&, const std::string&)> may_alias;
};

// All input memories over vars: integers over their range, references over a shape catalog.
std::vector<Memory> enumerate_memories(const Program& p, const std::vector<std::string>& vars,
                                       const EnumOptions& opt);
std::vector<std::string> input_vars(const Program& p, const Program* q = nullptr);
std::vector<Memory> criterion_inputs(const SlicingCriterion& c, const Program& p, const Program* q,
                                     const EnumOptions& opt);
bool in_inputs(const SlicingCriterion& c, const Memory& m, const Program& p, const EnumOptions& opt);

struct Verdict {
    enum class Kind { Equivalent, Counterexample, Inconclusive };
    Kind kind = Kind::Equivalent;
    std::optional<Memory> witness;
    std::string detail;
    std::size_t checked = 0;

    bool ok() const { return kind == Kind::Equivalent; }
};
std::string to_string(Verdict::Kind k);

Verdict equivalent(const Program& p, const Program& q, const SlicingCriterion& c, const EnumOptions& opt = {});
// Q is a syntactic subprogram of P and equivalent to it.
Verdict is_slice(const Program& p, const Program& q, const SlicingCriterion& c, const EnumOptions& opt = {});

bool criterion_subsumes(const SlicingCriterion& c1, const SlicingCriterion& c2, const Program& p,
                        const EnumOptions& opt = {});

}  // namespace absslice
