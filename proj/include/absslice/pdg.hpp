#pragma once

#include <set>
#include <string>
#include <vector>

#include "absslice/domains.hpp"
#include "absslice/sharing.hpp"

namespace absslice {

struct PdgNode {
    enum class Kind { Entry, Assign, FieldUpdate, Guard, Read, Write };
    Kind kind = Kind::Entry;
    int line = 0;  // 0 for Entry
    const Stmt* stmt = nullptr;
    std::set<std::string> defs, uses;
};

struct PdgEdge {
    enum class Kind { Control, Flow, SemanticFlow };
    Kind kind = Kind::Control;
    int from = 0, to = 0;  // lines
    std::string var;       // Flow: the variable; Control: "T"/"F" branch or empty from Entry

    bool operator==(const PdgEdge&) const = default;
};

struct Pdg {
    std::vector<PdgNode> nodes;  // sorted by line; nodes[0] is Entry. Statements point into the program.
    std::vector<PdgEdge> edges;
    bool semantic = false;

    const PdgNode* node(int line) const;
    std::set<int> flow_predecessors(int line) const;
    std::set<std::pair<int, int>> flow_pairs() const;
};

Pdg build_pdg(const Program& p, const SharingInfo& sharing);
Pdg build_pdg(const Program& p);
// Flow edges kept only where the use semantically depends on the variable (grid [-bound, bound]).
Pdg build_semantic_pdg(const Program& p, int bound = kIdBound);

// Lines with a path to a target (targets included). Throws std::invalid_argument on unknown lines.
std::set<int> pdg_slice(const Pdg& g, const std::set<int>& targets);

std::string to_dot(const Pdg& g);
std::string pdg_to_string(const Pdg& g);

}  // namespace absslice
