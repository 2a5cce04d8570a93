#include "absslice/absint.hpp"

#include <limits>
#include <sstream>

namespace absslice {

DomainMap::DomainMap(DomainPtr numeric, DomainPtr reference)
    : numeric_(std::move(numeric)), reference_(std::move(reference)) {}

DomainMap::DomainMap(const Program& p, DomainPtr numeric, DomainPtr reference)
    : DomainMap(std::move(numeric), std::move(reference)) {
    for (const auto& v : p.var_order)
        if (p.is_ref(v)) refs_[v] = true;
}

void DomainMap::set(const std::string& v, DomainPtr d) {
    if (d->kind() == ValueKind::Reference) refs_[v] = true;
    per_var_[v] = std::move(d);
}

bool DomainMap::is_ref(const std::string& v) const {
    auto it = refs_.find(v);
    return it != refs_.end() && it->second;
}

const DomainPtr& DomainMap::of(const std::string& v) const {
    auto it = per_var_.find(v);
    if (it != per_var_.end()) return it->second;
    return is_ref(v) ? reference_ : numeric_;
}

AV AbsState::get(const std::string& v, const DomainMap& dm) const {
    if (bottom) return 0;
    auto it = vals.find(v);
    return it == vals.end() ? dm.of(v)->top() : it->second;
}

const DomainPtr& block_domain(ValueKind k) {
    static const DomainPtr numeric = [] {
        std::vector<Mask> ms;
        for (int b = 0; b < numeric_block_count(); ++b) ms.push_back(Mask(1) << b);
        return std::make_shared<Uco>("blocks", ValueKind::Numeric, ms, std::map<Mask, std::string>{});
    }();
    static const DomainPtr reference = std::make_shared<Uco>(
        "blocks", ValueKind::Reference, std::vector<Mask>{1, 2, 4},
        std::map<Mask, std::string>{{1, "null"}, {2, "acyc"}, {4, "cyc"}});
    return k == ValueKind::Numeric ? numeric : reference;
}

AbsState top_state() { return {}; }

AbsState bottom_state() {
    AbsState s;
    s.bottom = true;
    return s;
}

AbsState join(const AbsState& a, const AbsState& b, const DomainMap& dm) {
    if (a.bottom) return b;
    if (b.bottom) return a;
    AbsState r;
    for (const auto& [v, x] : a.vals) {
        auto it = b.vals.find(v);
        if (it == b.vals.end()) continue;
        AV j = dm.of(v)->join(x, it->second);
        if (j != dm.of(v)->top()) r.vals[v] = j;
    }
    return r;
}

bool leq(const AbsState& a, const AbsState& b, const DomainMap& dm) {
    if (a.bottom) return true;
    if (b.bottom) return false;
    for (const auto& [v, y] : b.vals)
        if (!dm.of(v)->leq(a.get(v, dm), y)) return false;
    return true;
}

AbsState alpha_state(const Memory& m, const std::vector<std::string>& vars, const DomainMap& dm) {
    AbsState s;
    for (const auto& v : vars) s.vals[v] = dm.of(v)->alpha(m, v);
    return s;
}

namespace {

constexpr Mask kNullBlock = 1, kNonNullBlocks = 6;

bool is_ref_expr(const ExprPtr& e, const DomainMap& dm) {
    switch (e->kind) {
        case Expr::Kind::Null:
        case Expr::Kind::New:
            return true;
        case Expr::Kind::Var:
            return dm.is_ref(e->name);
        case Expr::Kind::Cond:
            return is_ref_expr(e->lhs, dm);
        default:
            return false;
    }
}

}  // namespace

AV abs_eval(const ExprPtr& e, const AbsState& s, const DomainMap& dm, const Uco& out) {
    if (s.bottom) return out.bot();
    switch (e->kind) {
        case Expr::Kind::Lit:
            return out.kind() == ValueKind::Numeric ? out.alpha_int(e->value) : out.top();
        case Expr::Kind::Var: {
            const Uco& d = *dm.of(e->name);
            if (d.kind() != out.kind()) return out.top();
            return out.convert(d, s.get(e->name, dm));
        }
        case Expr::Kind::Field:
            return out.top();
        case Expr::Kind::Bin:
            if (out.kind() != ValueKind::Numeric) return out.top();
            return out.abs_op(e->op, abs_eval(e->lhs, s, dm, out), abs_eval(e->rhs, s, dm, out));
        case Expr::Kind::Cond:
            switch (abs_guard(e->guard, s, dm)) {
                case Tri::True:
                    return abs_eval(e->lhs, refine(e->guard, true, s, dm), dm, out);
                case Tri::False:
                    return abs_eval(e->rhs, refine(e->guard, false, s, dm), dm, out);
                case Tri::Unknown:
                    return out.join(abs_eval(e->lhs, refine(e->guard, true, s, dm), dm, out),
                                    abs_eval(e->rhs, refine(e->guard, false, s, dm), dm, out));
            }
            break;
        case Expr::Kind::Null:
            return out.kind() == ValueKind::Reference ? out.closure(kNullBlock) : out.top();
        case Expr::Kind::New:
            // A fresh object has null reference fields, hence it is acyclic.
            return out.kind() == ValueKind::Reference ? out.closure(2) : out.top();
    }
    return out.top();
}

namespace {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

std::pair<long long, long long> block_interval(int b) {
    int n = 2 * kIdBound + 1;
    if (b < n) return {b - kIdBound, b - kIdBound};
    bool neg = b < n + 2;
    return neg ? std::pair{-kInf, -(kIdBound + 1LL)} : std::pair{kIdBound + 1LL, kInf};
}

bool numeric_block_possible(CmpOp op, int a, int b) {
    auto [alo, ahi] = block_interval(a);
    auto [blo, bhi] = block_interval(b);
    bool singleton = a < 2 * kIdBound + 1;
    switch (op) {
        case CmpOp::Eq:
            return a == b;
        case CmpOp::Ne:
            return a != b || !singleton;
        case CmpOp::Lt:
            return alo < bhi;
        case CmpOp::Le:
            return alo <= bhi;
        case CmpOp::Gt:
            return ahi > blo;
        case CmpOp::Ge:
            return ahi >= blo;
    }
    return true;
}

// Reference blocks: two references can be equal only in the same block; null is a single value.
bool reference_block_possible(CmpOp op, int a, int b) {
    if (op == CmpOp::Eq) return a == b;
    if (op == CmpOp::Ne) return a != b || a != 0;
    return true;
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

bool possible(CmpOp op, Mask a, Mask b, ValueKind k) {
    int n = k == ValueKind::Numeric ? numeric_block_count() : reference_block_count();
    for (int i = 0; i < n; ++i)
        if (a >> i & 1)
            for (int j = 0; j < n; ++j)
                if (b >> j & 1) {
                    bool ok = k == ValueKind::Numeric ? numeric_block_possible(op, i, j)
                                                      : reference_block_possible(op, i, j);
                    if (ok) return true;
                }
    return false;
}

// Blocks e may evaluate to, combined through the block tables without intermediate closures.
Mask abs_blocks(const ExprPtr& e, const AbsState& s, const DomainMap& dm, ValueKind k) {
    switch (e->kind) {
        case Expr::Kind::Lit:
            return k == ValueKind::Numeric ? Mask(1) << numeric_block(e->value) : full_mask(k);
        case Expr::Kind::Var: {
            const Uco& d = *dm.of(e->name);
            return d.kind() == k ? d.mask(s.get(e->name, dm)) : full_mask(k);
        }
        case Expr::Kind::Bin:
            if (k != ValueKind::Numeric) return full_mask(k);
            return block_op(e->op, abs_blocks(e->lhs, s, dm, k), abs_blocks(e->rhs, s, dm, k));
        case Expr::Kind::Cond:
            switch (abs_guard(e->guard, s, dm)) {
                case Tri::True:
                    return abs_blocks(e->lhs, refine(e->guard, true, s, dm), dm, k);
                case Tri::False:
                    return abs_blocks(e->rhs, refine(e->guard, false, s, dm), dm, k);
                case Tri::Unknown:
                    return abs_blocks(e->lhs, refine(e->guard, true, s, dm), dm, k) |
                           abs_blocks(e->rhs, refine(e->guard, false, s, dm), dm, k);
            }
            break;
        case Expr::Kind::Null:
            return k == ValueKind::Reference ? kNullBlock : full_mask(k);
        case Expr::Kind::New:
            return k == ValueKind::Reference ? Mask(2) : full_mask(k);
        default:
            break;
    }
    return full_mask(k);
}

std::pair<Mask, Mask> side_masks(const GuardPtr& g, const AbsState& s, const DomainMap& dm, ValueKind& k) {
    k = is_ref_expr(g->lhs, dm) || is_ref_expr(g->rhs, dm) ? ValueKind::Reference : ValueKind::Numeric;
    return {abs_blocks(g->lhs, s, dm, k), abs_blocks(g->rhs, s, dm, k)};
}

Tri tri_not(Tri t) {
    if (t == Tri::True) return Tri::False;
    if (t == Tri::False) return Tri::True;
    return Tri::Unknown;
}

}  // namespace

Tri abs_guard(const GuardPtr& g, const AbsState& s, const DomainMap& dm) {
    switch (g->kind) {
        case Guard::Kind::True:
            return Tri::True;
        case Guard::Kind::False:
            return Tri::False;
        case Guard::Kind::Not:
            return tri_not(abs_guard(g->a, s, dm));
        case Guard::Kind::And: {
            Tri a = abs_guard(g->a, s, dm), b = abs_guard(g->b, s, dm);
            if (a == Tri::False || b == Tri::False) return Tri::False;
            return a == Tri::True && b == Tri::True ? Tri::True : Tri::Unknown;
        }
        case Guard::Kind::Or: {
            Tri a = abs_guard(g->a, s, dm), b = abs_guard(g->b, s, dm);
            if (a == Tri::True || b == Tri::True) return Tri::True;
            return a == Tri::False && b == Tri::False ? Tri::False : Tri::Unknown;
        }
        case Guard::Kind::Cmp: {
            if (s.bottom) return Tri::Unknown;
            ValueKind k;
            auto [a, b] = side_masks(g, s, dm, k);
            bool t = possible(g->op, a, b, k), f = possible(negate(g->op), a, b, k);
            if (t && !f) return Tri::True;
            if (f && !t) return Tri::False;
            return Tri::Unknown;
        }
    }
    return Tri::Unknown;
}

AbsState refine(const GuardPtr& g, bool truth, const AbsState& s, const DomainMap& dm) {
    if (s.bottom) return s;
    Tri t = abs_guard(g, s, dm);
    if (t == (truth ? Tri::False : Tri::True)) return bottom_state();
    if (g->kind == Guard::Kind::Not) return refine(g->a, !truth, s, dm);
    if (g->kind != Guard::Kind::Cmp) return s;
    CmpOp op = truth ? g->op : negate(g->op);
    ExprPtr var = g->lhs, other = g->rhs;
    if (var->kind != Expr::Kind::Var) {
        std::swap(var, other);
        op = mirror(op);
    }
    if (var->kind != Expr::Kind::Var || !vars_of(other).empty()) return s;
    ValueKind k;
    auto [lm, rm] = side_masks(g, s, dm, k);
    Mask vm = var == g->lhs ? lm : rm, om = var == g->lhs ? rm : lm;
    int n = k == ValueKind::Numeric ? numeric_block_count() : reference_block_count();
    Mask keep = 0;
    for (int i = 0; i < n; ++i)
        if ((vm >> i & 1) && possible(op, Mask(1) << i, om, k)) keep |= Mask(1) << i;
    const Uco& d = *dm.of(var->name);
    if (d.kind() != k) return s;
    AV cur = s.get(var->name, dm);
    AV r = d.closure(d.mask(cur) & keep);
    if (r == d.bot()) return bottom_state();
    AbsState out = s;
    out.vals[var->name] = r;
    return out;
}

namespace {

class Interpreter {
public:
    Interpreter(const Program& p, const DomainMap& dm) : p_(p), dm_(dm) {}

    AbsState block(const Block& b, AbsState s) {
        for (const auto& st : b) s = stmt(st, s);
        return s;
    }

    Invariants& invariants() { return inv_; }

private:
    const Program& p_;
    const DomainMap& dm_;
    Invariants inv_;

    void record(int line, const AbsState& s) {
        auto it = inv_.find(line);
        if (it == inv_.end())
            inv_.emplace(line, s);
        else
            it->second = join(it->second, s, dm_);
    }

    void set(AbsState& s, const std::string& v, AV a) {
        if (a == dm_.of(v)->bot()) {
            s = bottom_state();
            return;
        }
        if (a == dm_.of(v)->top())
            s.vals.erase(v);
        else
            s.vals[v] = a;
    }

    AbsState stmt(const Stmt& st, AbsState s) {
        record(st.line, s);
        if (s.bottom) {
            // Unreachable code still gets (bottom) entries for nested lines.
            for (const Stmt* n : all_stmts(st.then_block)) record(n->line, s);
            for (const Stmt* n : all_stmts(st.else_block)) record(n->line, s);
            return s;
        }
        switch (st.kind) {
            case Stmt::Kind::Skip:
            case Stmt::Kind::Write:
                return s;
            case Stmt::Kind::Read:
                for (const auto& v : st.vars) s.vals.erase(v);
                return s;
            case Stmt::Kind::Assign:
                set(s, st.var, abs_eval(st.expr, s, dm_, *dm_.of(st.var)));
                return s;
            case Stmt::Kind::FieldUpdate: {
                // The heap changed: any non-null reference may now reach a cycle.
                for (auto it = s.vals.begin(); it != s.vals.end();) {
                    const Uco& d = *dm_.of(it->first);
                    if (d.kind() == ValueKind::Reference && (d.mask(it->second) & kNonNullBlocks)) {
                        AV w = d.closure(d.mask(it->second) | kNonNullBlocks);
                        if (w == d.top()) {
                            it = s.vals.erase(it);
                            continue;
                        }
                        it->second = w;
                    }
                    ++it;
                }
                const Uco& d = *dm_.of(st.var);
                set(s, st.var, d.closure(d.mask(s.get(st.var, dm_)) & kNonNullBlocks));
                return s;
            }
            case Stmt::Kind::If: {
                AbsState t = block(st.then_block, refine(st.guard, true, s, dm_));
                AbsState f = block(st.else_block, refine(st.guard, false, s, dm_));
                return join(t, f, dm_);
            }
            case Stmt::Kind::While: {
                // The first evaluation of the guard is kept apart from the later ones, so that the
                // exit state does not mix the pre-loop values with the loop's.
                AbsState exits = refine(st.guard, false, s, dm_);
                AbsState head = block(st.then_block, refine(st.guard, true, s, dm_));
                for (;;) {
                    record(st.line, head);
                    AbsState next = join(head, block(st.then_block, refine(st.guard, true, head, dm_)), dm_);
                    if (next == head) break;
                    head = next;
                }
                return join(exits, refine(st.guard, false, head, dm_), dm_);
            }
        }
        return s;
    }
};

}  // namespace

Invariants infer_invariants(const Program& p, const DomainMap& dm, const AbsState& entry) {
    Interpreter in(p, dm);
    AbsState out = in.block(p.body, entry);
    in.invariants()[kEndLine] = out;
    return in.invariants();
}

std::string to_string(const AbsState& s, const DomainMap& dm, const std::vector<std::string>& order) {
    if (s.bottom) return "bot";
    std::ostringstream out;
    bool first = true;
    for (const auto& v : order) {
        if (!first) out << " ";
        first = false;
        out << v << "↦" << dm.of(v)->value_name(s.get(v, dm));
    }
    return out.str();
}

std::string invariants_to_string(const Program& p, const Invariants& inv, const DomainMap& dm) {
    std::ostringstream out;
    for (const auto& [line, s] : inv) out << point_name(line) << ": " << to_string(s, dm, p.var_order) << "\n";
    return out.str();
}

}  // namespace absslice
