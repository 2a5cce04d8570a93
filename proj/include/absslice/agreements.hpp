#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absslice/absint.hpp"
#include "absslice/sharing.hpp"

namespace absslice {

// Per-variable properties two states must share, plus guards that must evaluate equally in both.
struct Agreement {
    std::map<std::string, DomainPtr> vars;  // absent = top
    std::map<std::string, GuardPtr> conds;  // keyed by their printed form

    void set(const std::string& v, const DomainPtr& d);  // top domains are dropped
    void add_cond(const GuardPtr& g);
    DomainPtr of(const std::string& v, const Program& p) const;
    bool empty() const { return vars.empty() && conds.empty(); }
    bool operator==(const Agreement& o) const;
};

// "{par@n, null@x, [i <= n]}"; variable kinds come from the program's typing.
Agreement parse_agreement(const std::string& text, const Program& p);
std::string to_string(const Agreement& g, const std::vector<std::string>& order = {});

// g1 is at least as precise as g2.
bool leq(const Agreement& g1, const Agreement& g2);
Agreement meet(const Agreement& g1, const Agreement& g2);
// Identity on every variable of p.
Agreement identity_agreement(const Program& p);

bool agree(const Agreement& g, const Memory& m1, const Memory& m2, const Program& p);

// Conjunction of facts x op literal, x = null, x != null. Empty means true.
struct Fact {
    enum class Kind { Cmp, Null, NonNull };
    Kind kind = Kind::Cmp;
    std::string var;
    CmpOp op = CmpOp::Eq;
    Int value;

    bool operator==(const Fact&) const = default;
};

struct Predicate {
    std::vector<Fact> facts;

    bool is_true() const { return facts.empty(); }
    bool holds(const Memory& m) const;
    std::set<std::string> vars() const;
    GuardPtr to_guard() const;  // nullptr when true
    void add(const Fact& f);
    bool operator==(const Predicate&) const = default;
};

// Keeps the conjuncts of g that are facts; anything else is dropped (a weaker predicate).
Predicate predicate_from_guard(const GuardPtr& g, const Program& p);
Predicate conjoin(const Predicate& a, const Predicate& b);
std::string to_string(const Predicate& b);

// A predicate guaranteed to hold after s (or the block) when beta holds before.
Predicate transformed_predicate(const Stmt& s, const Predicate& beta, const Program& p);
Predicate transformed_predicate(const Block& b, const Predicate& beta, const Program& p);

struct AgreementOptions {
    int bound = 3;                  // integer grid for the exhaustive triple checks
    std::size_t step_limit = 2000;  // per execution in triple checks
    std::size_t max_states = 20000;
    bool concrete = false;          // agreements restricted to top / id
    int path_depth = 2;             // field-sequence length bound in field-update conditions
    std::optional<SharingInfo> sharing;  // default: compute_sharing
};

enum class TripleResult { Holds, Fails, Inconclusive };
std::string to_string(TripleResult r);

// Exhaustive check of the augmented triple {g} beta s {g2} over the bounded state grid.
TripleResult check_triple(const Program& p, const Agreement& g, const Predicate& beta, const Block& s,
                          const Agreement& g2, const AgreementOptions& opt = {});

// Property preservation: executing s from a state satisfying beta keeps the properties of g.
bool p_prove(const Program& p, const Predicate& beta, const Stmt& s, const Agreement& g,
             const AgreementOptions& opt = {});
bool p_prove(const Program& p, const Predicate& beta, const Block& s, const Agreement& g,
             const AgreementOptions& opt = {});

// A sound precondition of s for g2 under beta (never fails: identity is the fallback).
Agreement g_precondition(const Program& p, const Predicate& beta, const Stmt& s, const Agreement& g2,
                         const AgreementOptions& opt = {});
Agreement g_precondition(const Program& p, const Predicate& beta, const Block& s, const Agreement& g2,
                         const AgreementOptions& opt = {});

// The agreement "guard g has the same value": a per-variable domain when one variable compared to a
// literal suffices, else the symbolic condition (identity on its variables in concrete mode).
Agreement guard_agreement(const GuardPtr& g, const Program& p, bool concrete = false);

struct Labeling {
    std::map<int, Agreement> after;       // after each statement
    std::map<int, Agreement> then_entry;  // keyed by the line of the if
    std::map<int, Agreement> else_entry;
    std::map<int, Agreement> loop;        // loop agreement, keyed by the line of the while
    std::map<int, Predicate> before;      // predicate holding before each statement
    Agreement entry;
};

Labeling label_sequence(const Program& p, const Agreement& g_out, const Predicate& beta0,
                        const AgreementOptions& opt = {});
// Source listing with the labels as trailing comments.
std::string labeling_to_string(const Program& p, const Labeling& l);

}  // namespace absslice
