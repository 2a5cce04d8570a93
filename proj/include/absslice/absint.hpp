#pragma once

#include <map>
#include <string>
#include <vector>

#include "absslice/domains.hpp"

namespace absslice {

// Domain chosen for each variable; unlisted variables use the default of their kind.
class DomainMap {
public:
    DomainMap(DomainPtr numeric, DomainPtr reference);
    DomainMap(const Program& p, DomainPtr numeric, DomainPtr reference);

    void set(const std::string& v, DomainPtr d);
    void set_reference(const std::string& v) { refs_[v] = true; }
    bool is_ref(const std::string& v) const;
    const DomainPtr& of(const std::string& v) const;
    const DomainPtr& numeric_default() const { return numeric_; }
    const DomainPtr& reference_default() const { return reference_; }

private:
    DomainPtr numeric_, reference_;
    std::map<std::string, DomainPtr> per_var_;
    std::map<std::string, bool> refs_;
};

// Variables missing from vals are top; a bottom state describes no concrete state.
struct AbsState {
    bool bottom = false;
    std::map<std::string, AV> vals;

    AV get(const std::string& v, const DomainMap& dm) const;
    bool operator==(const AbsState&) const = default;
};

enum class Tri { False, True, Unknown };

// The finest domain over the shared blocks; exact for guard evaluation.
const DomainPtr& block_domain(ValueKind k);

AbsState top_state();
AbsState bottom_state();
AbsState join(const AbsState& a, const AbsState& b, const DomainMap& dm);
bool leq(const AbsState& a, const AbsState& b, const DomainMap& dm);
AbsState alpha_state(const Memory& m, const std::vector<std::string>& vars, const DomainMap& dm);

// Compositional evaluation of e in the domain out; variables are converted from their own domains.
AV abs_eval(const ExprPtr& e, const AbsState& s, const DomainMap& dm, const Uco& out);
Tri abs_guard(const GuardPtr& g, const AbsState& s, const DomainMap& dm);
// Restricts s to the states where g evaluates to truth. Only var-vs-constant comparisons refine.
AbsState refine(const GuardPtr& g, bool truth, const AbsState& s, const DomainMap& dm);

// State before each line (joined over visits), plus kEndLine for the exit.
using Invariants = std::map<int, AbsState>;
Invariants infer_invariants(const Program& p, const DomainMap& dm, const AbsState& entry = top_state());

std::string to_string(const AbsState& s, const DomainMap& dm, const std::vector<std::string>& order);
std::string invariants_to_string(const Program& p, const Invariants& inv, const DomainMap& dm);

}  // namespace absslice
