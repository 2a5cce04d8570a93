#include "absslice/pdg.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "absslice/deps.hpp"

namespace absslice {

const PdgNode* Pdg::node(int line) const {
    for (const auto& n : nodes)
        if (n.line == line) return &n;
    return nullptr;
}

std::set<int> Pdg::flow_predecessors(int line) const {
    std::set<int> out;
    for (const auto& e : edges)
        if (e.to == line && e.kind != PdgEdge::Kind::Control) out.insert(e.from);
    return out;
}

std::set<std::pair<int, int>> Pdg::flow_pairs() const {
    std::set<std::pair<int, int>> out;
    for (const auto& e : edges)
        if (e.kind != PdgEdge::Kind::Control) out.insert({e.from, e.to});
    return out;
}

namespace {

using Def = std::pair<int, std::string>;  // defining line, variable
using Defs = std::set<Def>;

class Builder {
public:
    Builder(const Program& p, const SharingInfo& sh) : p_(p), sh_(sh) {}

    Pdg build() {
        g_.nodes.push_back(PdgNode{});
        Defs in;
        block(p_.body, in, 0, "");
        std::sort(g_.nodes.begin(), g_.nodes.end(), [](const PdgNode& a, const PdgNode& b) { return a.line < b.line; });
        for (const auto& [from, to, var] : flow_) g_.edges.push_back({PdgEdge::Kind::Flow, from, to, var});
        return g_;
    }

private:
    const Program& p_;
    const SharingInfo& sh_;
    Pdg g_;
    std::set<std::tuple<int, int, std::string>> flow_;
    std::set<int> made_;

    void make_node(const Stmt& s, PdgNode::Kind k, int parent, const std::string& branch) {
        if (!made_.insert(s.line).second) return;
        PdgNode n;
        n.kind = k;
        n.line = s.line;
        n.stmt = &s;
        n.uses = used_vars(s);
        switch (s.kind) {
            case Stmt::Kind::Assign:
            case Stmt::Kind::Read:
                n.defs = defined_vars(s);
                break;
            case Stmt::Kind::FieldUpdate:
                n.defs = sh_.share_of(s.var);
                break;
            default:
                break;
        }
        g_.nodes.push_back(n);
        g_.edges.push_back({PdgEdge::Kind::Control, parent, s.line, branch});
    }

    void use(const Stmt& s, const Defs& in) {
        for (const auto& v : used_vars(s))
            for (const auto& [line, var] : in)
                if (var == v) flow_.insert({line, s.line, v});
    }

    // Kills then adds; field updates do not kill.
    static void define(Defs& d, int line, const std::set<std::string>& vars, bool kill) {
        if (kill)
            for (auto it = d.begin(); it != d.end();) it = vars.count(it->second) ? d.erase(it) : std::next(it);
        for (const auto& v : vars) d.insert({line, v});
    }

    void block(const Block& b, Defs& d, int parent, const std::string& branch) {
        for (const auto& s : b) stmt(s, d, parent, branch);
    }

    void stmt(const Stmt& s, Defs& d, int parent, const std::string& branch) {
        switch (s.kind) {
            case Stmt::Kind::Skip:
                return;
            case Stmt::Kind::Assign:
                make_node(s, PdgNode::Kind::Assign, parent, branch);
                use(s, d);
                define(d, s.line, {s.var}, true);
                return;
            case Stmt::Kind::Read:
                make_node(s, PdgNode::Kind::Read, parent, branch);
                define(d, s.line, {s.vars.begin(), s.vars.end()}, true);
                return;
            case Stmt::Kind::Write:
                make_node(s, PdgNode::Kind::Write, parent, branch);
                use(s, d);
                return;
            case Stmt::Kind::FieldUpdate:
                make_node(s, PdgNode::Kind::FieldUpdate, parent, branch);
                use(s, d);
                define(d, s.line, sh_.share_of(s.var), false);
                return;
            case Stmt::Kind::If: {
                make_node(s, PdgNode::Kind::Guard, parent, branch);
                use(s, d);
                Defs t = d, f = d;
                block(s.then_block, t, s.line, "T");
                block(s.else_block, f, s.line, "F");
                t.insert(f.begin(), f.end());
                d = std::move(t);
                return;
            }
            case Stmt::Kind::While: {
                make_node(s, PdgNode::Kind::Guard, parent, branch);
                Defs head = d;
                for (;;) {
                    use(s, head);
                    Defs body = head;
                    block(s.then_block, body, s.line, "T");
                    Defs next = head;
                    next.insert(body.begin(), body.end());
                    if (next == head) break;
                    head = std::move(next);
                }
                d = std::move(head);
                return;
            }
        }
    }
};

bool involves_heap(const GuardPtr& g, const Program& p);

bool involves_heap(const ExprPtr& e, const Program& p) {
    if (!e) return false;
    switch (e->kind) {
        case Expr::Kind::Field:
        case Expr::Kind::Null:
        case Expr::Kind::New:
            return true;
        case Expr::Kind::Var:
            return p.is_ref(e->name);
        case Expr::Kind::Bin:
            return involves_heap(e->lhs, p) || involves_heap(e->rhs, p);
        case Expr::Kind::Cond:
            return involves_heap(e->guard, p) || involves_heap(e->lhs, p) || involves_heap(e->rhs, p);
        default:
            return false;
    }
}

bool involves_heap(const GuardPtr& g, const Program& p) {
    if (!g) return false;
    switch (g->kind) {
        case Guard::Kind::Cmp:
            return involves_heap(g->lhs, p) || involves_heap(g->rhs, p);
        case Guard::Kind::And:
        case Guard::Kind::Or:
            return involves_heap(g->a, p) || involves_heap(g->b, p);
        case Guard::Kind::Not:
            return involves_heap(g->a, p);
        default:
            return false;
    }
}

}  // namespace

Pdg build_pdg(const Program& p, const SharingInfo& sharing) { return Builder(p, sharing).build(); }

Pdg build_pdg(const Program& p) { return build_pdg(p, compute_sharing(p)); }

Pdg build_semantic_pdg(const Program& p, int bound) {
    Pdg g = build_pdg(p);
    g.semantic = true;
    std::vector<PdgEdge> kept;
    for (const auto& e : g.edges) {
        if (e.kind == PdgEdge::Kind::Control) {
            kept.push_back(e);
            continue;
        }
        const Stmt& s = *g.node(e.to)->stmt;
        bool keep = true;
        if (s.kind == Stmt::Kind::Assign && !involves_heap(s.expr, p))
            keep = sem_dep(s.expr, e.var, bound);
        else if (s.compound() && !involves_heap(s.guard, p))
            keep = sem_dep(s.guard, e.var, bound);
        if (keep) kept.push_back({PdgEdge::Kind::SemanticFlow, e.from, e.to, e.var});
    }
    g.edges = std::move(kept);
    return g;
}

std::set<int> pdg_slice(const Pdg& g, const std::set<int>& targets) {
    std::set<int> seen;
    std::deque<int> work;
    for (int t : targets) {
        if (t == 0 || !g.node(t)) throw std::invalid_argument("line " + std::to_string(t) + " is not a PDG node");
        if (seen.insert(t).second) work.push_back(t);
    }
    while (!work.empty()) {
        int n = work.front();
        work.pop_front();
        for (const auto& e : g.edges)
            if (e.to == n && e.from != 0 && seen.insert(e.from).second) work.push_back(e.from);
    }
    return seen;
}

namespace {

std::string node_label(const PdgNode& n) {
    if (n.kind == PdgNode::Kind::Entry) return "entry";
    std::string text = stmt_head(*n.stmt);
    std::string out = std::to_string(n.line) + ": ";
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string to_dot(const Pdg& g) {
    std::ostringstream out;
    out << "digraph pdg {\n  node [shape=box];\n";
    for (const auto& n : g.nodes) out << "  n" << n.line << " [label=\"" << node_label(n) << "\"];\n";
    for (const auto& e : g.edges) {
        out << "  n" << e.from << " -> n" << e.to << " [";
        switch (e.kind) {
            case PdgEdge::Kind::Control:
                out << "style=dashed, label=\"" << (e.var.empty() ? "c" : e.var) << "\"";
                break;
            case PdgEdge::Kind::Flow:
                out << "color=blue, label=\"" << e.var << "\"";
                break;
            case PdgEdge::Kind::SemanticFlow:
                out << "color=red, label=\"" << e.var << "\"";
                break;
        }
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

std::string pdg_to_string(const Pdg& g) {
    std::ostringstream out;
    for (const auto& n : g.nodes) out << "node " << node_label(n) << "\n";
    for (const auto& e : g.edges) {
        const char* k = e.kind == PdgEdge::Kind::Control ? "control" : e.kind == PdgEdge::Kind::Flow ? "flow" : "semantic-flow";
        out << k << " " << e.from << " -> " << e.to;
        if (!e.var.empty()) out << " (" << e.var << ")";
        out << "\n";
    }
    return out.str();
}

}  // namespace absslice
