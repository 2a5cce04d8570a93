#include "absslice/concrete.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <set>
#include <sstream>

namespace absslice {

Value Memory::get(const std::string& v) const {
    auto it = store.find(v);
    return it == store.end() ? Value::integer(0) : it->second;
}

std::size_t Memory::alloc(const Program& p, const std::string& cls) {
    Object o;
    o.cls = cls;
    auto c = p.classes.find(cls);
    if (c != p.classes.end())
        for (const auto& [f, t] : c->second.fields) o.fields[f] = t.is_ref ? Value::null() : Value::integer(0);
    heap.push_back(std::move(o));
    return heap.size() - 1;
}

Memory initial_memory(const Program& p, const Memory& input) {
    Memory m;
    m.heap = input.heap;
    for (const auto& v : p.var_order) m.store[v] = p.is_ref(v) ? Value::null() : Value::integer(0);
    for (const auto& [v, val] : input.store) m.store[v] = val;
    return m;
}

namespace {

const Object& deref(const Memory& m, const Value& v, const std::string& what) {
    if (v.is_null()) throw RuntimeError("null dereference in " + what);
    if (!v.is_loc() || v.loc >= m.heap.size()) throw RuntimeError("invalid reference in " + what);
    return m.heap[v.loc];
}

Int euclid_mod(const Int& a, const Int& b) {
    Int r = a % b;
    if (r < 0) r += b < 0 ? Int(-b) : b;
    return r;
}

}  // namespace

Value eval_expr(const ExprPtr& e, Memory& m, const Program& p) {
    switch (e->kind) {
        case Expr::Kind::Lit:
            return Value::integer(e->value);
        case Expr::Kind::Var:
            return m.get(e->name);
        case Expr::Kind::Field: {
            Value v = m.get(e->name);
            for (const auto& f : e->fields) {
                const Object& o = deref(m, v, to_string(e));
                auto it = o.fields.find(f);
                if (it == o.fields.end()) throw RuntimeError("missing field " + f);
                v = it->second;
            }
            return v;
        }
        case Expr::Kind::Bin: {
            Value a = eval_expr(e->lhs, m, p), b = eval_expr(e->rhs, m, p);
            if (!a.is_int() || !b.is_int()) throw RuntimeError("arithmetic on references");
            switch (e->op) {
                case BinOp::Add:
                    return Value::integer(a.num + b.num);
                case BinOp::Sub:
                    return Value::integer(a.num - b.num);
                case BinOp::Mul:
                    return Value::integer(a.num * b.num);
                case BinOp::Div:
                    if (b.num == 0) throw RuntimeError("division by zero");
                    return Value::integer(a.num / b.num);
                case BinOp::Mod:
                    if (b.num == 0) throw RuntimeError("modulo by zero");
                    return Value::integer(euclid_mod(a.num, b.num));
            }
            break;
        }
        case Expr::Kind::Cond:
            return eval_guard(e->guard, m, p) ? eval_expr(e->lhs, m, p) : eval_expr(e->rhs, m, p);
        case Expr::Kind::Null:
            return Value::null();
        case Expr::Kind::New:
            return Value::location(m.alloc(p, e->name));
    }
    return Value::integer(0);
}

bool eval_guard(const GuardPtr& g, Memory& m, const Program& p) {
    switch (g->kind) {
        case Guard::Kind::True:
            return true;
        case Guard::Kind::False:
            return false;
        case Guard::Kind::And:
            return eval_guard(g->a, m, p) && eval_guard(g->b, m, p);
        case Guard::Kind::Or:
            return eval_guard(g->a, m, p) || eval_guard(g->b, m, p);
        case Guard::Kind::Not:
            return !eval_guard(g->a, m, p);
        case Guard::Kind::Cmp: {
            Value a = eval_expr(g->lhs, m, p), b = eval_expr(g->rhs, m, p);
            if (a.is_int() != b.is_int()) throw RuntimeError("comparison between integer and reference");
            if (!a.is_int()) {
                bool eq = a == b;
                if (g->op == CmpOp::Eq) return eq;
                if (g->op == CmpOp::Ne) return !eq;
                throw RuntimeError("ordering on references");
            }
            switch (g->op) {
                case CmpOp::Eq:
                    return a.num == b.num;
                case CmpOp::Ne:
                    return a.num != b.num;
                case CmpOp::Lt:
                    return a.num < b.num;
                case CmpOp::Le:
                    return a.num <= b.num;
                case CmpOp::Gt:
                    return a.num > b.num;
                case CmpOp::Ge:
                    return a.num >= b.num;
            }
        }
    }
    return false;
}

namespace {

struct StepLimitHit {};

class Runner {
public:
    Runner(const Program& p, Memory m, std::size_t limit, std::vector<ConcreteState>* out)
        : p_(p), mem_(std::move(m)), limit_(limit), out_(out) {}

    void block(const Block& b) {
        for (const auto& s : b) stmt(s);
    }

    Memory& memory() { return mem_; }

private:
    const Program& p_;
    Memory mem_;
    std::size_t limit_;
    std::vector<ConcreteState>* out_;
    std::map<int, int> visits_;
    std::size_t steps_ = 0;

    void emit(int line) {
        if (steps_ >= limit_) throw StepLimitHit{};
        ++steps_;
        int k = ++visits_[line];
        if (out_) out_->push_back({line, k, mem_});
    }

    void stmt(const Stmt& s) {
        emit(s.line);
        switch (s.kind) {
            case Stmt::Kind::Skip:
            case Stmt::Kind::Read:
            case Stmt::Kind::Write:
                return;
            case Stmt::Kind::Assign:
                mem_.set(s.var, eval_expr(s.expr, mem_, p_));
                return;
            case Stmt::Kind::FieldUpdate: {
                Value base = mem_.get(s.var);
                if (base.is_null()) throw RuntimeError("null dereference in " + s.var + "." + s.field);
                Value v = eval_expr(s.expr, mem_, p_);
                mem_.heap.at(base.loc).fields[s.field] = v;
                return;
            }
            case Stmt::Kind::If:
                if (eval_guard(s.guard, mem_, p_))
                    block(s.then_block);
                else
                    block(s.else_block);
                return;
            case Stmt::Kind::While:
                while (eval_guard(s.guard, mem_, p_)) {
                    block(s.then_block);
                    emit(s.line);
                }
                return;
        }
    }
};

}  // namespace

bool exec_block(const Block& b, Memory& m, const Program& p, std::size_t step_limit) {
    Runner r(p, m, step_limit, nullptr);
    try {
        r.block(b);
    } catch (const StepLimitHit&) {
        return false;
    }
    m = std::move(r.memory());
    return true;
}

Trajectory run(const Program& p, const Memory& input, std::size_t step_limit) {
    Trajectory t;
    Runner r(p, initial_memory(p, input), step_limit, &t.states);
    try {
        r.block(p.body);
        t.status = RunStatus::Completed;
        t.final = r.memory();
    } catch (const StepLimitHit&) {
        t.status = RunStatus::StepLimit;
        t.error = "step limit of " + std::to_string(step_limit) + " reached";
    } catch (const RuntimeError& e) {
        t.status = RunStatus::RuntimeError;
        t.error = e.what();
    }
    return t;
}

bool is_cyclic_value(const Memory& m, const Value& v) {
    if (!v.is_loc()) return false;
    // Iterative DFS with colors; a back edge means a reachable cycle.
    std::vector<int> color(m.heap.size(), 0);
    std::function<bool(std::size_t)> dfs = [&](std::size_t l) {
        color[l] = 1;
        for (const auto& [f, fv] : m.heap[l].fields) {
            if (!fv.is_loc()) continue;
            if (color[fv.loc] == 1) return true;
            if (color[fv.loc] == 0 && dfs(fv.loc)) return true;
        }
        color[l] = 2;
        return false;
    };
    return dfs(v.loc);
}

bool is_cyclic(const Memory& m, const std::string& v) { return is_cyclic_value(m, m.get(v)); }

bool ref_equal(const Memory& m1, const Value& a, const Memory& m2, const Value& b) {
    std::set<std::pair<std::size_t, std::size_t>> assumed;
    std::function<bool(const Value&, const Value&)> eq = [&](const Value& x, const Value& y) -> bool {
        if (x.kind != y.kind) return false;
        if (x.is_int()) return x.num == y.num;
        if (x.is_null()) return true;
        if (!assumed.insert({x.loc, y.loc}).second) return true;
        const Object& o1 = m1.heap[x.loc];
        const Object& o2 = m2.heap[y.loc];
        if (o1.cls != o2.cls || o1.fields.size() != o2.fields.size()) return false;
        for (const auto& [f, v1] : o1.fields) {
            auto it = o2.fields.find(f);
            if (it == o2.fields.end() || !eq(v1, it->second)) return false;
        }
        return true;
    };
    return eq(a, b);
}

std::string ref_signature(const Memory& m, const Value& v) {
    if (v.is_null()) return "null";
    if (v.is_int()) return v.num.str();
    // Reachable locations.
    std::vector<std::size_t> nodes;
    std::map<std::size_t, std::size_t> index;
    std::deque<std::size_t> work{v.loc};
    index[v.loc] = 0;
    nodes.push_back(v.loc);
    while (!work.empty()) {
        std::size_t l = work.front();
        work.pop_front();
        for (const auto& [f, fv] : m.heap[l].fields)
            if (fv.is_loc() && !index.count(fv.loc)) {
                index[fv.loc] = nodes.size();
                nodes.push_back(fv.loc);
                work.push_back(fv.loc);
            }
    }
    // Partition refinement: start from (class, scalar fields), split by successor blocks.
    std::size_t n = nodes.size();
    std::vector<std::size_t> block(n);
    {
        std::map<std::string, std::size_t> ids;
        for (std::size_t i = 0; i < n; ++i) {
            const Object& o = m.heap[nodes[i]];
            std::string key = o.cls;
            for (const auto& [f, fv] : o.fields)
                key += "|" + f + "=" + (fv.is_int() ? fv.num.str() : fv.is_null() ? "null" : "ref");
            block[i] = ids.emplace(key, ids.size()).first->second;
        }
    }
    while (true) {
        std::map<std::vector<std::size_t>, std::size_t> ids;
        std::vector<std::size_t> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::size_t> key{block[i]};
            for (const auto& [f, fv] : m.heap[nodes[i]].fields)
                if (fv.is_loc()) key.push_back(block[index[fv.loc]]);
            next[i] = ids.emplace(key, ids.size()).first->second;
        }
        std::size_t before = std::set<std::size_t>(block.begin(), block.end()).size();
        std::size_t after = ids.size();
        block = next;
        if (after == before) break;
    }
    // Canonical BFS over the quotient graph from the root block.
    std::map<std::size_t, std::size_t> canon;
    std::vector<std::size_t> rep_of_block(n, SIZE_MAX);
    for (std::size_t i = 0; i < n; ++i)
        if (rep_of_block[block[i]] == SIZE_MAX) rep_of_block[block[i]] = i;
    std::deque<std::size_t> q{block[0]};
    canon[block[0]] = 0;
    std::ostringstream out;
    while (!q.empty()) {
        std::size_t b = q.front();
        q.pop_front();
        const Object& o = m.heap[nodes[rep_of_block[b]]];
        out << "#" << canon[b] << ":" << o.cls << "{";
        bool first = true;
        for (const auto& [f, fv] : o.fields) {
            out << (first ? "" : ",") << f << "=";
            first = false;
            if (fv.is_int()) {
                out << fv.num.str();
            } else if (fv.is_null()) {
                out << "null";
            } else {
                std::size_t tb = block[index[fv.loc]];
                if (!canon.count(tb)) {
                    canon[tb] = canon.size();
                    q.push_back(tb);
                }
                out << "#" << canon[tb];
            }
        }
        out << "}";
    }
    return out.str();
}

namespace {

class MemoryParser {
public:
    explicit MemoryParser(const std::string& s) : s_(s) {}

    Memory parse() {
        skip_ws();
        while (i_ < s_.size()) {
            std::string name = ident();
            skip_ws();
            expect('=');
            Value v = value();
            mem_.store[name] = v;
            skip_ws();
            if (i_ < s_.size() && (s_[i_] == ',' || s_[i_] == ';')) {
                ++i_;
                skip_ws();
            }
        }
        resolve();
        return mem_;
    }

private:
    const std::string& s_;
    std::size_t i_ = 0;
    Memory mem_;
    std::vector<std::pair<std::pair<std::size_t, std::string>, std::size_t>> backrefs_;

    [[noreturn]] void fail(const std::string& m) const {
        throw ParseError("memory text, offset " + std::to_string(i_) + ": " + m, 0, 0);
    }
    void skip_ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    void expect(char c) {
        skip_ws();
        if (i_ >= s_.size() || s_[i_] != c) fail(std::string("expected '") + c + "'");
        ++i_;
    }
    std::string ident() {
        skip_ws();
        std::size_t j = i_;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
        if (j == i_) fail("expected name");
        std::string r = s_.substr(i_, j - i_);
        i_ = j;
        return r;
    }

    // Backreferences "#k" may point forward, so they are patched once all objects exist.
    Value value(std::size_t owner = SIZE_MAX, const std::string& field = "") {
        skip_ws();
        if (s_.compare(i_, 4, "null") == 0) {
            i_ += 4;
            return Value::null();
        }
        if (i_ < s_.size() && s_[i_] == '#') {
            ++i_;
            std::size_t j = i_;
            while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
            if (j == i_) fail("expected object index");
            std::size_t k = std::stoul(s_.substr(i_, j - i_));
            i_ = j;
            if (owner != SIZE_MAX) backrefs_.push_back({{owner, field}, k});
            return Value::location(k);
        }
        if (s_.compare(i_, 4, "obj:") == 0) {
            i_ += 4;
            std::string cls = ident();
            std::size_t loc = mem_.heap.size();
            mem_.heap.push_back(Object{cls, {}});
            expect('{');
            skip_ws();
            if (i_ < s_.size() && s_[i_] == '}') {
                ++i_;
                return Value::location(loc);
            }
            while (true) {
                std::string f = ident();
                expect('=');
                Value v = value(loc, f);
                mem_.heap[loc].fields[f] = v;
                skip_ws();
                if (i_ < s_.size() && s_[i_] == ',') {
                    ++i_;
                    continue;
                }
                expect('}');
                break;
            }
            return Value::location(loc);
        }
        std::size_t j = i_;
        if (j < s_.size() && s_[j] == '-') ++j;
        std::size_t d = j;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        if (j == d) fail("expected value");
        Value v = Value::integer(Int(s_.substr(i_, j - i_)));
        i_ = j;
        return v;
    }

    void resolve() {
        for (const auto& [ref, k] : backrefs_)
            if (k >= mem_.heap.size()) fail("object index #" + std::to_string(k) + " out of range");
        for (const auto& [v, val] : mem_.store)
            if (val.is_loc() && val.loc >= mem_.heap.size()) fail("object index out of range for " + v);
    }
};

}  // namespace

Memory parse_memory(const std::string& text) { return MemoryParser(text).parse(); }

namespace {

void value_text(const Memory& m, const Value& v, std::map<std::size_t, std::size_t>& seen, std::ostringstream& out) {
    if (v.is_int()) {
        out << v.num.str();
        return;
    }
    if (v.is_null()) {
        out << "null";
        return;
    }
    auto it = seen.find(v.loc);
    if (it != seen.end()) {
        out << "#" << it->second;
        return;
    }
    seen[v.loc] = seen.size();
    const Object& o = m.heap[v.loc];
    out << "obj:" << o.cls << "{";
    bool first = true;
    for (const auto& [f, fv] : o.fields) {
        out << (first ? "" : ",") << f << "=";
        first = false;
        value_text(m, fv, seen, out);
    }
    out << "}";
}

}  // namespace

std::string value_to_string(const Memory& m, const Value& v) {
    std::map<std::size_t, std::size_t> seen;
    std::ostringstream out;
    value_text(m, v, seen, out);
    return out.str();
}

std::string memory_to_string(const Memory& m, const std::vector<std::string>& order) {
    std::vector<std::string> names = order;
    if (names.empty())
        for (const auto& [v, val] : m.store) names.push_back(v);
    // Object numbering is shared across the whole line so "#k" references stay consistent.
    std::map<std::size_t, std::size_t> seen;
    std::ostringstream out;
    bool first = true;
    for (const auto& v : names) {
        auto it = m.store.find(v);
        if (it == m.store.end()) continue;
        out << (first ? "" : ", ") << v << "=";
        first = false;
        value_text(m, it->second, seen, out);
    }
    return out.str();
}

std::string point_name(int line) { return line == kEndLine ? "end" : std::to_string(line); }

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Completed:
            return "completed";
        case RunStatus::StepLimit:
            return "step-limit";
        case RunStatus::RuntimeError:
            return "runtime-error";
    }
    return "?";
}

std::string trajectory_to_string(const Trajectory& t, const std::vector<std::string>& order) {
    std::ostringstream out;
    for (const auto& s : t.states)
        out << point_name(s.point) << "^" << s.iteration << " | " << memory_to_string(s.memory, order) << "\n";
    if (t.status == RunStatus::Completed)
        out << "end^1 | " << memory_to_string(t.final, order) << "\n";
    out << "status: " << to_string(t.status);
    if (!t.error.empty()) out << " (" << t.error << ")";
    out << "\n";
    return out.str();
}

}  // namespace absslice
