#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absslice/absint.hpp"

namespace absslice {

// Two states witnessing a dependency, with the two (abstracted) results.
struct DepWitness {
    Memory s1, s2;
    std::string r1, r2;
};

// Semantic dependency: states differing only in x give different values (grid [-bound, bound]).
std::optional<DepWitness> sem_dep_witness(const ExprPtr& e, const std::string& x, int bound = kIdBound);
bool sem_dep(const ExprPtr& e, const std::string& x, int bound = kIdBound);
bool sem_dep(const GuardPtr& g, const std::string& x, int bound = kIdBound);

struct DepQuery {
    ExprPtr e;
    DomainPtr rho;           // output property
    DomainMap eta;           // input properties of the variables
    AbsState ambient;        // restricts the states, in the eta domains
    GuardPtr beta;           // optional filter on states
    int bound = kIdBound;

    DepQuery(ExprPtr e, DomainPtr rho, DomainMap eta);
};

std::optional<DepWitness> ndep_witness(const DepQuery& q, const std::string& x);
bool ndep(const DepQuery& q, const std::string& x);
bool atom_dep(const DepQuery& q, const std::string& x);

// Atomicity condition: the atom e evaluates to on every refinement of the X variables of s
// (all other variables atomic), or nullopt when there is none. s is over the single domain d.
std::optional<AV> ac(const ExprPtr& e, const AbsState& s, const std::set<std::string>& X, const DomainPtr& d);

// Relevant variables of e for property d, starting from the ambient state (in d).
std::set<std::string> find_ndeps(const ExprPtr& e, const AbsState& ambient, const DomainPtr& d);

// Simplifies d0 until e is not narrow-dependent on X.
DomainPtr edep(const ExprPtr& e, const DomainPtr& d0, const std::set<std::string>& X,
               const AbsState& ambient = top_state());
// The property guaranteed by edep: abs_eval is atomic whenever the variables outside X are atoms.
bool non_dependent(const ExprPtr& e, const DomainPtr& d, const std::set<std::string>& X);

}  // namespace absslice
