#include "absslice/agreements.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "absslice/criteria.hpp"

namespace absslice {

namespace {

const DomainLibrary& lib() { return DomainLibrary::instance(); }

ValueKind kind_of(const std::string& v, const Program& p) {
    return p.is_ref(v) ? ValueKind::Reference : ValueKind::Numeric;
}

Value value_of(const Memory& m, const std::string& v, const Program& p) {
    auto it = m.store.find(v);
    if (it != m.store.end()) return it->second;
    return p.is_ref(v) ? Value::null() : Value::integer(0);
}

std::string cond_value(const GuardPtr& g, const Memory& m, const Program& p) {
    try {
        Memory mm = m;
        return eval_guard(g, mm, p) ? "T" : "F";
    } catch (const RuntimeError&) {
        return "E";
    }
}

CmpOp negate(CmpOp op) {
    switch (op) {
        case CmpOp::Eq:
            return CmpOp::Ne;
        case CmpOp::Ne:
            return CmpOp::Eq;
        case CmpOp::Lt:
            return CmpOp::Ge;
        case CmpOp::Le:
            return CmpOp::Gt;
        case CmpOp::Gt:
            return CmpOp::Le;
        case CmpOp::Ge:
            return CmpOp::Lt;
    }
    return op;
}

CmpOp mirror(CmpOp op) {
    switch (op) {
        case CmpOp::Lt:
            return CmpOp::Gt;
        case CmpOp::Le:
            return CmpOp::Ge;
        case CmpOp::Gt:
            return CmpOp::Lt;
        case CmpOp::Ge:
            return CmpOp::Le;
        default:
            return op;
    }
}

bool compare(CmpOp op, const Int& a, const Int& b) {
    switch (op) {
        case CmpOp::Eq:
            return a == b;
        case CmpOp::Ne:
            return a != b;
        case CmpOp::Lt:
            return a < b;
        case CmpOp::Le:
            return a <= b;
        case CmpOp::Gt:
            return a > b;
        case CmpOp::Ge:
            return a >= b;
    }
    return false;
}

std::vector<std::string> in_program_order(const std::set<std::string>& vs, const Program& p) {
    std::vector<std::string> out;
    for (const auto& v : p.var_order)
        if (vs.count(v)) out.push_back(v);
    for (const auto& v : vs)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

std::set<std::string> block_vars(const Block& b) {
    std::set<std::string> out;
    for (const Stmt* s : all_stmts(b)) {
        auto u = used_vars(*s), d = defined_vars(*s);
        out.insert(u.begin(), u.end());
        out.insert(d.begin(), d.end());
        if (s->kind == Stmt::Kind::FieldUpdate) out.insert(s->var);
    }
    return out;
}

std::set<std::string> agreement_vars(const Agreement& g) {
    std::set<std::string> out;
    for (const auto& [v, d] : g.vars) out.insert(v);
    for (const auto& [k, c] : g.conds) {
        auto vs = vars_of(c);
        out.insert(vs.begin(), vs.end());
    }
    return out;
}

std::string signature(const Agreement& g, const Memory& m, const Program& p) {
    std::string s;
    for (const auto& [v, d] : g.vars) s += d->observe(m, value_of(m, v, p)) + "|";
    for (const auto& [k, c] : g.conds) s += cond_value(c, m, p);
    return s;
}

int rank_sum(const Agreement& g) {
    int r = 0;
    for (const auto& [v, d] : g.vars) r += lib().rank(d);
    return r;
}

bool all_identity(const Agreement& g, const std::set<std::string>& vs, const Program& p) {
    for (const auto& v : vs)
        if (!g.of(v, p)->is_identity()) return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Agreements

void Agreement::set(const std::string& v, const DomainPtr& d) {
    if (d->is_top())
        vars.erase(v);
    else
        vars[v] = lib().canonical(d);
}

void Agreement::add_cond(const GuardPtr& g) { conds[to_string(g)] = g; }

DomainPtr Agreement::of(const std::string& v, const Program& p) const {
    auto it = vars.find(v);
    return it == vars.end() ? lib().top(kind_of(v, p)) : it->second;
}

bool Agreement::operator==(const Agreement& o) const {
    if (vars.size() != o.vars.size() || conds.size() != o.conds.size()) return false;
    for (const auto& [v, d] : vars) {
        auto it = o.vars.find(v);
        if (it == o.vars.end() || !d->same_partition(*it->second)) return false;
    }
    for (const auto& [k, c] : conds)
        if (!o.conds.count(k)) return false;
    return true;
}

Agreement parse_agreement(const std::string& text, const Program& p) {
    std::string t = text;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\n");
        auto e = s.find_last_not_of(" \t\n");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    t = trim(t);
    if (t.size() >= 2 && t.front() == '{' && t.back() == '}') t = t.substr(1, t.size() - 2);
    Agreement g;
    std::vector<std::string> items;
    int depth = 0;
    std::string cur;
    for (char c : t) {
        if (c == '[' || c == '(') ++depth;
        if (c == ']' || c == ')') --depth;
        if (c == ',' && depth == 0) {
            items.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    items.push_back(cur);
    for (auto item : items) {
        item = trim(item);
        if (item.empty()) continue;
        if (item.front() == '[') {
            if (item.back() != ']') throw std::invalid_argument("unterminated condition '" + item + "'");
            g.add_cond(parse_guard(item.substr(1, item.size() - 2)));
            continue;
        }
        auto at = item.find('@');
        if (at == std::string::npos) throw std::invalid_argument("expected domain@variable, got '" + item + "'");
        std::string dom = trim(item.substr(0, at)), var = trim(item.substr(at + 1));
        g.set(var, lib().get(dom, kind_of(var, p)));
    }
    return g;
}

std::string to_string(const Agreement& g, const std::vector<std::string>& order) {
    std::vector<std::string> names;
    for (const auto& v : order)
        if (g.vars.count(v)) names.push_back(v);
    for (const auto& [v, d] : g.vars)
        if (std::find(names.begin(), names.end(), v) == names.end()) names.push_back(v);
    std::string out = "{";
    bool first = true;
    for (const auto& v : names) {
        out += (first ? "" : ", ") + domain_name(g.vars.at(v)) + "@" + v;
        first = false;
    }
    for (const auto& [k, c] : g.conds) {
        out += (first ? "[" : ", [") + k + "]";
        first = false;
    }
    return out + "}";
}

bool leq(const Agreement& g1, const Agreement& g2) {
    for (const auto& [v, d2] : g2.vars) {
        auto it = g1.vars.find(v);
        if (it == g1.vars.end()) {
            if (!d2->is_top()) return false;
            continue;
        }
        if (!it->second->refines(*d2)) return false;
    }
    for (const auto& [k, c] : g2.conds) {
        if (g1.conds.count(k)) continue;
        // Identity on every variable of the guard fixes its value.
        for (const auto& v : vars_of(c)) {
            auto it = g1.vars.find(v);
            if (it == g1.vars.end() || !it->second->is_identity()) return false;
        }
    }
    return true;
}

Agreement meet(const Agreement& g1, const Agreement& g2) {
    Agreement g = g1;
    for (const auto& [v, d] : g2.vars) {
        auto it = g.vars.find(v);
        g.set(v, it == g.vars.end() ? d : lib().meet(it->second, d));
    }
    for (const auto& [k, c] : g2.conds) g.conds[k] = c;
    return g;
}

Agreement identity_agreement(const Program& p) {
    Agreement g;
    for (const auto& v : p.var_order) g.set(v, lib().id(kind_of(v, p)));
    return g;
}

bool agree(const Agreement& g, const Memory& m1, const Memory& m2, const Program& p) {
    for (const auto& [v, d] : g.vars)
        if (!d->same_class(m1, value_of(m1, v, p), m2, value_of(m2, v, p))) return false;
    for (const auto& [k, c] : g.conds)
        if (cond_value(c, m1, p) != cond_value(c, m2, p)) return false;
    return true;
}

// ---------------------------------------------------------------------------------------------
// Predicates

bool Predicate::holds(const Memory& m) const {
    for (const auto& f : facts) {
        auto it = m.store.find(f.var);
        Value v = it == m.store.end() ? Value::integer(0) : it->second;
        switch (f.kind) {
            case Fact::Kind::Cmp:
                if (!v.is_int() || !compare(f.op, v.num, f.value)) return false;
                break;
            case Fact::Kind::Null:
                if (!v.is_null()) return false;
                break;
            case Fact::Kind::NonNull:
                if (!v.is_loc()) return false;
                break;
        }
    }
    return true;
}

std::set<std::string> Predicate::vars() const {
    std::set<std::string> out;
    for (const auto& f : facts) out.insert(f.var);
    return out;
}

GuardPtr Predicate::to_guard() const {
    GuardPtr g;
    for (const auto& f : facts) {
        GuardPtr a;
        switch (f.kind) {
            case Fact::Kind::Cmp:
                a = Guard::cmp(f.op, Expr::var(f.var), Expr::lit(f.value));
                break;
            case Fact::Kind::Null:
                a = Guard::cmp(CmpOp::Eq, Expr::var(f.var), Expr::null());
                break;
            case Fact::Kind::NonNull:
                a = Guard::cmp(CmpOp::Ne, Expr::var(f.var), Expr::null());
                break;
        }
        g = g ? Guard::conj(g, a) : a;
    }
    return g;
}

void Predicate::add(const Fact& f) {
    if (std::find(facts.begin(), facts.end(), f) == facts.end()) facts.push_back(f);
}

namespace {

void collect_facts(const GuardPtr& g, bool positive, Predicate& out) {
    if (!g) return;
    switch (g->kind) {
        case Guard::Kind::And:
            if (positive) {
                collect_facts(g->a, true, out);
                collect_facts(g->b, true, out);
            }
            return;
        case Guard::Kind::Or:
            // not (a or b) = not a and not b
            if (!positive) {
                collect_facts(g->a, false, out);
                collect_facts(g->b, false, out);
            }
            return;
        case Guard::Kind::Not:
            collect_facts(g->a, !positive, out);
            return;
        case Guard::Kind::Cmp: {
            CmpOp op = positive ? g->op : negate(g->op);
            const ExprPtr &l = g->lhs, &r = g->rhs;
            auto null_fact = [&](const std::string& v) {
                if (op == CmpOp::Eq) out.add({Fact::Kind::Null, v, CmpOp::Eq, 0});
                if (op == CmpOp::Ne) out.add({Fact::Kind::NonNull, v, CmpOp::Ne, 0});
            };
            if (l->kind == Expr::Kind::Var && r->kind == Expr::Kind::Lit)
                out.add({Fact::Kind::Cmp, l->name, op, r->value});
            else if (l->kind == Expr::Kind::Lit && r->kind == Expr::Kind::Var)
                out.add({Fact::Kind::Cmp, r->name, mirror(op), l->value});
            else if (l->kind == Expr::Kind::Var && r->kind == Expr::Kind::Null)
                null_fact(l->name);
            else if (l->kind == Expr::Kind::Null && r->kind == Expr::Kind::Var)
                null_fact(r->name);
            return;
        }
        default:
            return;
    }
}

Predicate without(const Predicate& b, const std::set<std::string>& vs) {
    Predicate out;
    for (const auto& f : b.facts)
        if (!vs.count(f.var)) out.facts.push_back(f);
    return out;
}

}  // namespace

Predicate predicate_from_guard(const GuardPtr& g, const Program&) {
    Predicate out;
    collect_facts(g, true, out);
    return out;
}

Predicate conjoin(const Predicate& a, const Predicate& b) {
    Predicate out = a;
    for (const auto& f : b.facts) out.add(f);
    return out;
}

std::string to_string(const Predicate& b) {
    if (b.facts.empty()) return "true";
    std::string out;
    for (const auto& f : b.facts) {
        if (!out.empty()) out += " && ";
        switch (f.kind) {
            case Fact::Kind::Cmp:
                out += f.var + " " + to_string(f.op) + " " + f.value.str();
                break;
            case Fact::Kind::Null:
                out += f.var + " = null";
                break;
            case Fact::Kind::NonNull:
                out += f.var + " != null";
                break;
        }
    }
    return out;
}

Predicate transformed_predicate(const Stmt& s, const Predicate& beta, const Program& p) {
    switch (s.kind) {
        case Stmt::Kind::Skip:
        case Stmt::Kind::Read:  // inputs are bound before execution; read does not change them
        case Stmt::Kind::Write:
        case Stmt::Kind::FieldUpdate:
            return beta;
        case Stmt::Kind::Assign: {
            const std::string& x = s.var;
            const ExprPtr& e = s.expr;
            Predicate out = without(beta, {x});
            switch (e->kind) {
                case Expr::Kind::Lit:
                    out.add({Fact::Kind::Cmp, x, CmpOp::Eq, e->value});
                    break;
                case Expr::Kind::Null:
                    out.add({Fact::Kind::Null, x, CmpOp::Eq, 0});
                    break;
                case Expr::Kind::New:
                    out.add({Fact::Kind::NonNull, x, CmpOp::Ne, 0});
                    break;
                case Expr::Kind::Var:
                    for (const auto& f : beta.facts)
                        if (f.var == e->name) {
                            Fact g = f;
                            g.var = x;
                            out.add(g);
                        }
                    break;
                case Expr::Kind::Bin: {
                    // x := x + c and x := x - c shift the facts on x.
                    Int shift;
                    bool ok = false;
                    if (e->op == BinOp::Add || e->op == BinOp::Sub) {
                        if (e->lhs->kind == Expr::Kind::Var && e->lhs->name == x && e->rhs->kind == Expr::Kind::Lit) {
                            shift = e->op == BinOp::Add ? e->rhs->value : Int(-e->rhs->value);
                            ok = true;
                        } else if (e->op == BinOp::Add && e->rhs->kind == Expr::Kind::Var && e->rhs->name == x &&
                                   e->lhs->kind == Expr::Kind::Lit) {
                            shift = e->lhs->value;
                            ok = true;
                        }
                    }
                    if (ok)
                        for (const auto& f : beta.facts)
                            if (f.var == x && f.kind == Fact::Kind::Cmp) out.add({f.kind, x, f.op, f.value + shift});
                    break;
                }
                default:
                    break;
            }
            return out;
        }
        case Stmt::Kind::If: {
            Predicate t = transformed_predicate(s.then_block, conjoin(beta, predicate_from_guard(s.guard, p)), p);
            Predicate f = transformed_predicate(
                s.else_block, conjoin(beta, predicate_from_guard(Guard::neg(s.guard), p)), p);
            Predicate out;
            for (const auto& x : t.facts)
                if (std::find(f.facts.begin(), f.facts.end(), x) != f.facts.end()) out.add(x);
            return out;
        }
        case Stmt::Kind::While: {
            Predicate out = without(beta, assigned_vars(s.then_block));
            return conjoin(out, predicate_from_guard(Guard::neg(s.guard), p));
        }
    }
    return {};
}

Predicate transformed_predicate(const Block& b, const Predicate& beta, const Program& p) {
    Predicate cur = beta;
    for (const auto& s : b) cur = transformed_predicate(s, cur, p);
    return cur;
}

std::string to_string(TripleResult r) {
    switch (r) {
        case TripleResult::Holds:
            return "holds";
        case TripleResult::Fails:
            return "fails";
        case TripleResult::Inconclusive:
            return "inconclusive";
    }
    return "?";
}

// ---------------------------------------------------------------------------------------------
// Bounded concrete checks

namespace {

std::vector<std::string> grid_vars(const Program& p, const std::set<std::string>& vs) {
    return in_program_order(vs, p);
}

double grid_size(const Program& p, const std::vector<std::string>& vars, int bound) {
    double n = 1;
    int refs = 0;
    for (const auto& v : vars) {
        if (p.is_ref(v)) {
            const ClassDecl* c = p.classes.count(p.type_of(v).cls) ? &p.classes.at(p.type_of(v).cls) : nullptr;
            int self = 0;
            if (c)
                for (const auto& [f, t] : c->fields)
                    if (t.is_ref && t.cls == c->name) ++self;
            n *= 2 + 3 * self + refs++;
        } else {
            n *= 2 * bound + 1;
        }
    }
    return n;
}

bool run_block(const Block& s, Memory& m, const Program& p, std::size_t limit, bool& step_limit) {
    try {
        if (!exec_block(s, m, p, limit)) {
            step_limit = true;
            return false;
        }
        return true;
    } catch (const RuntimeError&) {
        return false;
    }
}

}  // namespace

TripleResult check_triple(const Program& p, const Agreement& g, const Predicate& beta, const Block& s,
                          const Agreement& g2, const AgreementOptions& opt) {
    std::set<std::string> vs = block_vars(s);
    for (const auto& v : agreement_vars(g)) vs.insert(v);
    for (const auto& v : agreement_vars(g2)) vs.insert(v);
    for (const auto& v : beta.vars()) vs.insert(v);
    auto vars = grid_vars(p, vs);
    if (grid_size(p, vars, opt.bound) > static_cast<double>(opt.max_states)) return TripleResult::Inconclusive;
    EnumOptions eo;
    eo.bound = opt.bound;
    std::map<std::string, std::string> seen;
    bool limit_hit = false;
    for (const auto& in : enumerate_memories(p, vars, eo)) {
        Memory m = initial_memory(p, in);
        if (!beta.holds(m)) continue;
        std::string key = signature(g, m, p);
        if (!run_block(s, m, p, opt.step_limit, limit_hit)) continue;
        std::string out = signature(g2, m, p);
        auto [it, fresh] = seen.emplace(key, out);
        if (!fresh && it->second != out) return TripleResult::Fails;
    }
    return limit_hit ? TripleResult::Inconclusive : TripleResult::Holds;
}

namespace {

// Objects a field update x.f may write through y: y.g1...gk (k <= depth) of x's class.
struct Target {
    std::string key;  // "y.g1.g2"
    std::size_t loc;
};

std::vector<Target> update_targets(const Memory& m, const Program& p, const std::string& y, const std::string& cls,
                                   int depth) {
    std::vector<Target> out;
    std::function<void(const Value&, const std::string&, int)> walk = [&](const Value& v, const std::string& key,
                                                                          int d) {
        if (!v.is_loc() || v.loc >= m.heap.size()) return;
        const Object& o = m.heap[v.loc];
        if (o.cls == cls) out.push_back({key, v.loc});
        if (d == depth) return;
        auto c = p.classes.find(o.cls);
        if (c == p.classes.end()) return;
        for (const auto& [f, t] : c->second.fields)
            if (t.is_ref) walk(o.fields.count(f) ? o.fields.at(f) : Value::null(), key + "." + f, d + 1);
    };
    walk(value_of(m, y, p), y, 0);
    return out;
}

struct FieldCase {
    Memory before;
    // Memory after writing the field through each target, keyed by target.
    std::vector<std::pair<std::string, Memory>> after;
};

std::vector<FieldCase> field_cases(const Program& p, const Predicate& beta, const Stmt& s,
                                   const std::set<std::string>& extra, const SharingInfo& sh,
                                   const AgreementOptions& opt, bool& too_big) {
    std::set<std::string> vs = extra;
    vs.insert(s.var);
    for (const auto& v : vars_of(s.expr)) vs.insert(v);
    for (const auto& v : sh.share_of(s.var)) vs.insert(v);
    for (const auto& v : beta.vars()) vs.insert(v);
    auto vars = grid_vars(p, vs);
    int bound = std::min(opt.bound, 2);
    too_big = grid_size(p, vars, bound) > static_cast<double>(opt.max_states);
    std::vector<FieldCase> out;
    if (too_big) return out;
    EnumOptions eo;
    eo.bound = bound;
    eo.may_alias = [&](const std::string& a, const std::string& b) { return sh.may_share(a, b) || sh.may_share(b, a); };
    const std::string cls = p.type_of(s.var).cls;
    const auto dalias = sh.dalias_of(s.var);
    for (const auto& in : enumerate_memories(p, vars, eo)) {
        Memory m = initial_memory(p, in);
        if (!beta.holds(m) || !value_of(m, s.var, p).is_loc()) continue;
        Value val;
        try {
            Memory mm = m;
            val = eval_expr(s.expr, mm, p);
        } catch (const RuntimeError&) {
            continue;
        }
        FieldCase fc{m, {}};
        std::set<std::string> keys;
        auto add = [&](const Target& t) {
            if (!keys.insert(t.key).second) return;
            Memory a = m;
            a.heap[t.loc].fields[s.field] = val;
            fc.after.emplace_back(t.key, std::move(a));
        };
        for (const auto& y : dalias) {
            Value yv = value_of(m, y, p);
            if (yv.is_loc()) add({y, yv.loc});
        }
        for (const auto& y : sh.share_of(s.var))
            for (const auto& t : update_targets(m, p, y, cls, opt.path_depth)) add(t);
        out.push_back(std::move(fc));
    }
    return out;
}

SharingInfo sharing_for(const Program& p, const AgreementOptions& opt) {
    return opt.sharing ? *opt.sharing : compute_sharing(p);
}

// Conditions (*), (**) and (***) of the field-update rule over the bounded heap catalog.
bool fassign_triple(const Program& p, const Agreement& g, const Predicate& beta, const Stmt& s, const Agreement& g2,
                    const SharingInfo& sh, const AgreementOptions& opt) {
    const auto dalias = sh.dalias_of(s.var);
    std::set<std::string> vs;
    for (const auto& [v, d] : g2.vars)
        if (!dalias.count(v) && !g.of(v, p)->refines(*d)) return false;
    for (const auto& v : agreement_vars(g)) vs.insert(v);
    for (const auto& v : agreement_vars(g2)) vs.insert(v);
    bool too_big = false;
    auto cases = field_cases(p, beta, s, vs, sh, opt, too_big);
    if (too_big) return false;
    std::map<std::pair<std::string, std::string>, std::string> seen;
    for (const auto& c : cases) {
        std::string key = signature(g, c.before, p);
        for (const auto& [target, after] : c.after) {
            std::string out = signature(g2, after, p);
            auto [it, fresh] = seen.emplace(std::pair{key, target}, out);
            if (!fresh && it->second != out) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------------------------
// Block-level reasoning: every integer falls in one of the numeric blocks, every reference in
// null / acyclic / cyclic. Enumerating blocks covers all values, beyond any grid.

bool expr_is_ref(const ExprPtr& e, const Program& p) {
    switch (e->kind) {
        case Expr::Kind::Null:
        case Expr::Kind::New:
            return true;
        case Expr::Kind::Var:
            return p.is_ref(e->name);
        case Expr::Kind::Field: {
            Type t = p.type_of(e->name);
            for (const auto& f : e->fields) {
                auto c = p.classes.find(t.cls);
                if (c == p.classes.end()) return false;
                const Type* ft = c->second.field_type(f);
                if (!ft) return false;
                t = *ft;
            }
            return t.is_ref;
        }
        case Expr::Kind::Cond:
            return expr_is_ref(e->lhs, p);
        default:
            return false;
    }
}

using Blocks = std::map<std::string, int>;

Mask eval_mask(const ExprPtr& e, const Blocks& b, const Program& p) {
    switch (e->kind) {
        case Expr::Kind::Lit:
            return Mask(1) << numeric_block(e->value);
        case Expr::Kind::Var: {
            auto it = b.find(e->name);
            return it == b.end() ? full_mask(kind_of(e->name, p)) : Mask(1) << it->second;
        }
        case Expr::Kind::Field:
            return full_mask(expr_is_ref(e, p) ? ValueKind::Reference : ValueKind::Numeric);
        case Expr::Kind::Bin:
            return block_op(e->op, eval_mask(e->lhs, b, p), eval_mask(e->rhs, b, p));
        case Expr::Kind::Cond:
            return eval_mask(e->lhs, b, p) | eval_mask(e->rhs, b, p);
        case Expr::Kind::Null:
            return 1;
        case Expr::Kind::New:
            return 2;
    }
    return 0;
}

Tri guard_on_blocks(const GuardPtr& g, const Blocks& b, const Program& p) {
    DomainMap dm(p, block_domain(ValueKind::Numeric), block_domain(ValueKind::Reference));
    AbsState s;
    for (const auto& [v, k] : b) s.vals[v] = block_domain(kind_of(v, p))->closure(Mask(1) << k);
    return abs_guard(g, s, dm);
}

int block_count(ValueKind k) { return k == ValueKind::Numeric ? numeric_block_count() : reference_block_count(); }

// Blocks of v allowed by the predicate.
Mask ambient_mask(const std::string& v, const Predicate& beta, const Program& p) {
    ValueKind k = kind_of(v, p);
    Mask m = full_mask(k);
    for (const auto& f : beta.facts) {
        if (f.var != v) continue;
        if (f.kind == Fact::Kind::Null) {
            m &= 1;
        } else if (f.kind == Fact::Kind::NonNull) {
            m &= 6;
        } else if (k == ValueKind::Numeric) {
            Mask ok = 0;
            GuardPtr g = Guard::cmp(f.op, Expr::var(v), Expr::lit(f.value));
            for (int b = 0; b < block_count(k); ++b)
                if (guard_on_blocks(g, {{v, b}}, p) != Tri::False) ok |= Mask(1) << b;
            m &= ok;
        }
    }
    return m;
}

// Calls f on every block assignment of vars compatible with beta; stops when f returns false.
bool for_blocks(const std::vector<std::string>& vars, const Predicate& beta, const Program& p,
                const std::function<bool(const Blocks&)>& f) {
    std::vector<Mask> allowed;
    for (const auto& v : vars) allowed.push_back(ambient_mask(v, beta, p));
    Blocks b;
    std::function<bool(std::size_t)> go = [&](std::size_t i) {
        if (i == vars.size()) return f(b);
        for (int k = 0; k < block_count(kind_of(vars[i], p)); ++k)
            if (allowed[i] >> k & 1) {
                b[vars[i]] = k;
                if (!go(i + 1)) return false;
            }
        return true;
    };
    return go(0);
}

// Class of block k in d; identity domains keep every block apart.
int block_class(const Uco& d, int k) { return d.is_identity() ? k : d.closure(Mask(1) << k); }

// Polynomials over + - * with integer coefficients; monomials are sorted variable lists.
using Monomial = std::vector<std::string>;
using Poly = std::map<Monomial, Int>;

constexpr std::size_t kMaxTerms = 64;

std::optional<Poly> to_poly(const ExprPtr& e, const Program& p) {
    switch (e->kind) {
        case Expr::Kind::Lit:
            return Poly{{{}, e->value}};
        case Expr::Kind::Var:
            if (p.is_ref(e->name)) return std::nullopt;
            return Poly{{{e->name}, 1}};
        case Expr::Kind::Bin: {
            if (e->op == BinOp::Div || e->op == BinOp::Mod) return std::nullopt;
            auto a = to_poly(e->lhs, p), b = to_poly(e->rhs, p);
            if (!a || !b) return std::nullopt;
            Poly out;
            if (e->op == BinOp::Mul) {
                for (const auto& [ma, ca] : *a)
                    for (const auto& [mb, cb] : *b) {
                        Monomial m = ma;
                        m.insert(m.end(), mb.begin(), mb.end());
                        std::sort(m.begin(), m.end());
                        out[m] += ca * cb;
                    }
            } else {
                out = *a;
                for (const auto& [m, c] : *b) out[m] += e->op == BinOp::Add ? c : Int(-c);
            }
            for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
            if (out.size() > kMaxTerms) return std::nullopt;
            return out;
        }
        default:
            return std::nullopt;
    }
}

ExprPtr from_poly(const Poly& q) {
    ExprPtr sum;
    for (const auto& [m, c] : q) {
        Int mag = c < 0 ? Int(-c) : c;
        ExprPtr term;
        if (m.empty() || mag != 1) term = Expr::lit(mag);
        for (const auto& v : m) term = term ? Expr::bin(BinOp::Mul, term, Expr::var(v)) : Expr::var(v);
        if (!sum)
            sum = c < 0 ? Expr::bin(BinOp::Sub, Expr::lit(0), term) : term;
        else
            sum = Expr::bin(c < 0 ? BinOp::Sub : BinOp::Add, sum, term);
    }
    return sum ? sum : Expr::lit(0);
}

// An equivalent expression without the variables that cancel out (e itself when none do).
ExprPtr simplified(const ExprPtr& e, const Program& p) {
    auto q = to_poly(e, p);
    if (!q) return e;
    ExprPtr s = from_poly(*q);
    return vars_of(s).size() < vars_of(e).size() ? s : e;
}

std::vector<std::string> unique_vars(const ExprPtr& e) {
    std::vector<std::string> out;
    for (const auto& v : ordered_vars(e))
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

// P-system assignment rule: G(x)(sigma(x)) = G(x)([[e]]sigma), and the guard conditions of g keep their
// value, for every block assignment satisfying beta.
bool passign(const Program& p, const Predicate& beta, const Stmt& s, const Agreement& g) {
    const std::string& x = s.var;
    if (s.expr->kind == Expr::Kind::Var && s.expr->name == x) return true;
    DomainPtr rho = g.of(x, p);
    if (!rho->is_top()) {
        const ExprPtr e = simplified(s.expr, p);
        auto vars = unique_vars(e);
        if (std::find(vars.begin(), vars.end(), x) == vars.end()) vars.push_back(x);
        bool ok = for_blocks(vars, beta, p, [&](const Blocks& b) {
            AV a = rho->closure(Mask(1) << b.at(x));
            if (!rho->is_atom(a)) return false;
            return (eval_mask(e, b, p) & ~rho->mask(a)) == 0;
        });
        if (!ok) return false;
    }
    for (const auto& [k, c] : g.conds) {
        if (!vars_of(c).count(x)) continue;
        GuardPtr c2 = substitute(c, x, s.expr);
        if (!c2) return false;
        std::set<std::string> vs = vars_of(c);
        for (const auto& v : vars_of(s.expr)) vs.insert(v);
        bool ok = for_blocks(in_program_order(vs, p), beta, p, [&](const Blocks& b) {
            Tri t1 = guard_on_blocks(c, b, p);
            return t1 != Tri::Unknown && t1 == guard_on_blocks(c2, b, p);
        });
        if (!ok) return false;
    }
    return true;
}

bool pfassign(const Program& p, const Predicate& beta, const Stmt& s, const Agreement& g, const AgreementOptions& opt) {
    SharingInfo sh = sharing_for(p, opt);
    bool too_big = false;
    auto cases = field_cases(p, beta, s, agreement_vars(g), sh, opt, too_big);
    if (too_big) return false;
    for (const auto& c : cases)
        for (const auto& [target, after] : c.after)
            if (!agree(g, c.before, after, p)) return false;
    return true;
}

Predicate loop_predicate(const Stmt& s, const Predicate& beta, const Program& p) {
    auto assigned = assigned_vars(s.then_block);
    Predicate base = beta;
    for (const auto& v : beta.vars())
        if (assigned.count(v)) {
            base = {};
            break;
        }
    return conjoin(base, predicate_from_guard(s.guard, p));
}

}  // namespace

bool p_prove(const Program& p, const Predicate& beta, const Stmt& s, const Agreement& g, const AgreementOptions& opt) {
    switch (s.kind) {
        case Stmt::Kind::Skip:
        case Stmt::Kind::Read:
        case Stmt::Kind::Write:
            return true;
        case Stmt::Kind::Assign:
            return passign(p, beta, s, g);
        case Stmt::Kind::FieldUpdate:
            return pfassign(p, beta, s, g, opt);
        case Stmt::Kind::If:
            return p_prove(p, conjoin(beta, predicate_from_guard(s.guard, p)), s.then_block, g, opt) &&
                   p_prove(p, conjoin(beta, predicate_from_guard(Guard::neg(s.guard), p)), s.else_block, g, opt);
        case Stmt::Kind::While:
            return p_prove(p, loop_predicate(s, beta, p), s.then_block, g, opt);
    }
    return false;
}

bool p_prove(const Program& p, const Predicate& beta, const Block& s, const Agreement& g, const AgreementOptions& opt) {
    Predicate cur = beta;
    for (const auto& st : s) {
        if (!p_prove(p, cur, st, g, opt)) return false;
        cur = transformed_predicate(st, cur, p);
    }
    return true;
}

Agreement guard_agreement(const GuardPtr& g, const Program& p, bool concrete) {
    Agreement out;
    auto vs = vars_of(g);
    if (vs.empty()) return out;
    if (concrete) {
        for (const auto& v : vs) out.set(v, lib().id(kind_of(v, p)));
        return out;
    }
    if (vs.size() == 1) {
        const std::string v = *vs.begin();
        ValueKind k = kind_of(v, p);
        std::vector<Tri> t;
        bool definite = true;
        for (int b = 0; b < block_count(k); ++b) {
            t.push_back(guard_on_blocks(g, {{v, b}}, p));
            if (t.back() == Tri::Unknown) definite = false;
        }
        for (const auto& d : lib().candidates(k)) {
            if (d->is_identity()) break;
            if (!definite) break;
            bool ok = true;
            for (int a = 0; a < block_count(k) && ok; ++a)
                for (int b = 0; b < block_count(k) && ok; ++b)
                    if (block_class(*d, a) == block_class(*d, b) && t[a] != t[b]) ok = false;
            if (ok) {
                out.set(v, d);
                return out;
            }
        }
        out.set(v, lib().id(k));
        return out;
    }
    out.add_cond(g);
    return out;
}

// ---------------------------------------------------------------------------------------------
// G-system

namespace {

struct Score {
    int entries, ranks;
    bool operator<(const Score& o) const { return entries != o.entries ? entries < o.entries : ranks < o.ranks; }
};

Score score(const Agreement& g) {
    return {static_cast<int>(g.vars.size() + g.conds.size()), rank_sum(g) + 100 * static_cast<int>(g.conds.size())};
}

// a is preferable to b: strictly weaker, or incomparable with a better score.
bool preferable(const Agreement& a, const Agreement& b) {
    bool ab = leq(a, b), ba = leq(b, a);
    if (ba && !ab) return true;
    if (ab) return false;
    return score(a) < score(b);
}

struct Combo {
    std::vector<DomainPtr> eta;
    int non_top = 0, ranks = 0;
};

// Per-variable candidate domains, ordered so that the first success is a weakest one.
std::vector<Combo> combos(const std::vector<std::string>& vars, const Program& p, bool concrete) {
    std::vector<Combo> out{{}};
    for (const auto& v : vars) {
        std::vector<DomainPtr> cands;
        for (const auto& d : lib().candidates(kind_of(v, p)))
            if (!concrete || d->is_top() || d->is_identity()) cands.push_back(d);
        std::vector<Combo> next;
        for (const auto& c : out)
            for (const auto& d : cands) {
                Combo n = c;
                n.eta.push_back(d);
                n.non_top += d->is_top() ? 0 : 1;
                n.ranks += lib().rank(d);
                next.push_back(std::move(n));
            }
        out = std::move(next);
    }
    std::stable_sort(out.begin(), out.end(), [](const Combo& a, const Combo& b) {
        return a.non_top != b.non_top ? a.non_top < b.non_top : a.ranks < b.ranks;
    });
    return out;
}

constexpr std::size_t kMaxSearchVars = 4;

class Solver {
public:
    Solver(const Program& p, const AgreementOptions& opt, Labeling* rec)
        : p_(p), opt_(opt), sh_(sharing_for(p, opt)), rec_(rec) {}

    Agreement block(const Block& b, const Agreement& post, const Predicate& beta, bool record) {
        std::vector<Predicate> betas{beta};
        for (const auto& s : b) betas.push_back(transformed_predicate(s, betas.back(), p_));
        Agreement g = post;
        for (std::size_t i = b.size(); i-- > 0;) {
            if (record && rec_) {
                rec_->after[b[i].line] = g;
                rec_->before[b[i].line] = betas[i];
            }
            g = stmt(b[i], g, betas[i], record);
        }
        return g;
    }

    Agreement stmt(const Stmt& s, const Agreement& post, const Predicate& beta, bool record) {
        switch (s.kind) {
            case Stmt::Kind::Skip:
            case Stmt::Kind::Read:
            case Stmt::Kind::Write:
                return post;
            case Stmt::Kind::Assign: {
                Agreement g = assign(s, post, beta);
                return !preferable(g, post) && passign(p_, beta, s, post) ? post : g;
            }
            case Stmt::Kind::FieldUpdate: {
                Agreement g = fassign(s, post, beta);
                return !preferable(g, post) && pfassign(p_, beta, s, post, opt_) ? post : g;
            }
            case Stmt::Kind::If:
                return if_stmt(s, post, beta, record);
            case Stmt::Kind::While:
                return while_stmt(s, post, beta, record);
        }
        return identity_agreement(p_);
    }

private:
    const Program& p_;
    AgreementOptions opt_;
    SharingInfo sh_;
    Labeling* rec_;

    // Guard conditions become per-variable domains when possible (always in concrete mode); the
    // ones outside keep (when given) are replaced by identity on their variables.
    Agreement normalize(const Agreement& g, const std::map<std::string, GuardPtr>* keep = nullptr) const {
        Agreement out;
        out.vars = g.vars;
        for (const auto& [k, c] : g.conds) {
            Agreement ga = guard_agreement(c, p_, opt_.concrete);
            if (ga.conds.empty() || !keep || keep->count(k)) {
                out = meet(out, ga);
            } else {
                Agreement id;
                for (const auto& v : vars_of(c)) id.set(v, lib().id(kind_of(v, p_)));
                out = meet(out, id);
            }
        }
        for (auto it = out.conds.begin(); it != out.conds.end();)
            it = all_identity(out, vars_of(it->second), p_) ? out.conds.erase(it) : std::next(it);
        return out;
    }

    Agreement assign(const Stmt& s, const Agreement& post, const Predicate& beta) const {
        const std::string& x = s.var;
        const ExprPtr& e = s.expr;
        Agreement base;
        base.vars = post.vars;
        base.vars.erase(x);
        for (const auto& [k, c] : post.conds) {
            if (!vars_of(c).count(x)) {
                base.conds[k] = c;
                continue;
            }
            GuardPtr c2 = substitute(c, x, e);
            if (c2) {
                base = meet(base, normalize([&] {
                    Agreement a;
                    a.add_cond(c2);
                    return a;
                }()));
            } else {
                for (const auto& v : vars_of(c))
                    if (v != x) base.set(v, lib().id(kind_of(v, p_)));
                for (const auto& v : vars_of(e)) base.set(v, lib().id(kind_of(v, p_)));
            }
        }
        DomainPtr rho = post.of(x, p_);
        if (rho->is_top()) return base;
        const ExprPtr se = simplified(e, p_);
        auto vars = unique_vars(se);
        if (vars.empty()) return base;
        auto with_eta = [&](const std::vector<DomainPtr>& eta) {
            Agreement g = base;
            for (std::size_t i = 0; i < vars.size(); ++i) {
                const auto& v = vars[i];
                DomainPtr cur = g.of(v, p_);
                g.set(v, cur->is_top() ? eta[i] : lib().meet(cur, eta[i]));
            }
            return g;
        };
        std::vector<DomainPtr> ids;
        for (const auto& v : vars) ids.push_back(lib().id(kind_of(v, p_)));
        if (vars.size() > kMaxSearchVars) return with_eta(ids);

        // Results of e for every block assignment allowed by beta.
        std::vector<std::pair<std::vector<int>, Mask>> table;
        for_blocks(vars, beta, p_, [&](const Blocks& b) {
            std::vector<int> ks;
            for (const auto& v : vars) ks.push_back(b.at(v));
            table.emplace_back(std::move(ks), eval_mask(se, b, p_));
            return true;
        });
        for (const auto& c : combos(vars, p_, opt_.concrete)) {
            Agreement g = with_eta(c.eta);
            if (all_identity(g, {vars.begin(), vars.end()}, p_)) return g;
            std::vector<DomainPtr> ds;
            for (const auto& v : vars) ds.push_back(g.of(v, p_));
            std::unordered_map<std::uint64_t, Mask> groups;
            bool ok = true;
            for (const auto& [ks, r] : table) {
                std::uint64_t key = 0;
                for (std::size_t i = 0; i < ks.size(); ++i) key = key * 64 + block_class(*ds[i], ks[i]);
                Mask& u = groups[key];
                u |= r;
                if (u != 0 && !rho->is_atom(rho->closure(u))) {
                    ok = false;
                    break;
                }
            }
            if (ok) return g;
        }
        return with_eta(ids);
    }

    Agreement fassign(const Stmt& s, const Agreement& post, const Predicate& beta) const {
        std::set<std::string> cs{s.var};
        for (const auto& v : vars_of(s.expr)) cs.insert(v);
        for (const auto& v : sh_.share_of(s.var))
            if (post.vars.count(v)) cs.insert(v);
        auto vars = in_program_order(cs, p_);
        auto with_eta = [&](const std::vector<DomainPtr>& eta) {
            Agreement g = post;
            for (std::size_t i = 0; i < vars.size(); ++i) {
                DomainPtr cur = g.of(vars[i], p_);
                g.set(vars[i], cur->is_top() ? eta[i] : lib().meet(cur, eta[i]));
            }
            return g;
        };
        std::vector<DomainPtr> ids;
        for (const auto& v : vars) ids.push_back(lib().id(kind_of(v, p_)));
        Agreement finest = with_eta(ids);
        if (!fassign_triple(p_, finest, beta, s, post, sh_, opt_)) return identity_agreement(p_);
        if (vars.size() > kMaxSearchVars - 1) return finest;
        for (const auto& c : combos(vars, p_, opt_.concrete)) {
            Agreement g = with_eta(c.eta);
            if (fassign_triple(p_, g, beta, s, post, sh_, opt_)) return g;
        }
        return finest;
    }

    Agreement if_stmt(const Stmt& s, const Agreement& post, const Predicate& beta, bool record) {
        Predicate bt = conjoin(beta, predicate_from_guard(s.guard, p_));
        Predicate bf = conjoin(beta, predicate_from_guard(Guard::neg(s.guard), p_));
        Agreement gt = block(s.then_block, post, bt, record);
        Agreement gf = block(s.else_block, post, bf, record);
        if (record && rec_) {
            rec_->then_entry[s.line] = gt;
            rec_->else_entry[s.line] = gf;
        }
        Agreement branches = meet(gt, gf);
        Agreement best = normalize(meet(guard_agreement(s.guard, p_, opt_.concrete), branches));
        Block whole{s};
        if (preferable(branches, best) && check_triple(p_, branches, beta, whole, post, opt_) == TripleResult::Holds)
            best = branches;
        if (preferable(post, best) && p_prove(p_, beta, s, post, opt_)) best = post;
        return best;
    }

    Agreement while_stmt(const Stmt& s, const Agreement& post, const Predicate& beta, bool record) {
        Predicate body_beta = loop_predicate(s, beta, p_);
        Agreement gb = guard_agreement(s.guard, p_, opt_.concrete);
        Agreement l = normalize(meet(post, gb));
        const auto keep = l.conds;
        bool stable = false;
        for (int round = 0; round < 64 && !stable; ++round) {
            Agreement entry = block(s.then_block, l, body_beta, false);
            Agreement next = normalize(meet(meet(l, entry), gb), &keep);
            stable = next == l;
            l = std::move(next);
        }
        if (!stable) l = identity_agreement(p_);
        if (record) {
            block(s.then_block, l, body_beta, true);
            if (rec_) rec_->loop[s.line] = l;
        }
        return l;
    }
};

}  // namespace

Agreement g_precondition(const Program& p, const Predicate& beta, const Stmt& s, const Agreement& g2,
                         const AgreementOptions& opt) {
    return Solver(p, opt, nullptr).stmt(s, g2, beta, false);
}

Agreement g_precondition(const Program& p, const Predicate& beta, const Block& s, const Agreement& g2,
                         const AgreementOptions& opt) {
    return Solver(p, opt, nullptr).block(s, g2, beta, false);
}

Labeling label_sequence(const Program& p, const Agreement& g_out, const Predicate& beta0, const AgreementOptions& opt) {
    Labeling l;
    Solver solver(p, opt, &l);
    l.entry = solver.block(p.body, g_out, beta0, true);
    return l;
}

std::string labeling_to_string(const Program& p, const Labeling& l) {
    PrintOptions po;
    auto str = [&](const Agreement& g) { return to_string(g, p.var_order); };
    for (const Stmt* s : all_stmts(p.body)) {
        auto after = l.after.find(s->line);
        switch (s->kind) {
            case Stmt::Kind::If:
                if (auto it = l.then_entry.find(s->line); it != l.then_entry.end()) po.after[s->line] = str(it->second);
                if (auto it = l.else_entry.find(s->line); it != l.else_entry.end())
                    po.else_entry[s->line] = str(it->second);
                if (after != l.after.end()) po.closing[s->line] = str(after->second);
                break;
            case Stmt::Kind::While:
                if (auto it = l.loop.find(s->line); it != l.loop.end()) po.after[s->line] = str(it->second);
                if (after != l.after.end()) po.closing[s->line] = str(after->second);
                break;
            default:
                if (after != l.after.end()) po.after[s->line] = str(after->second);
        }
    }
    return "// entry: " + str(l.entry) + "\n" + print_program(p, po);
}

}  // namespace absslice
