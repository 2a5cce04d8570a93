#include "absslice/deps.hpp"

#include <deque>
#include <functional>
#include <map>

namespace absslice {

namespace {

const Program& no_program() {
    static const Program p;
    return p;
}

void for_grid(const std::vector<std::string>& vars, int bound, const std::function<bool(Memory&)>& f) {
    Memory m;
    std::function<bool(std::size_t)> go = [&](std::size_t i) {
        if (i == vars.size()) return f(m);
        for (int v = -bound; v <= bound; ++v) {
            m.store[vars[i]] = Value::integer(v);
            if (go(i + 1)) return true;
        }
        return false;
    };
    go(0);
}

std::optional<Value> try_eval(const ExprPtr& e, Memory m) {
    try {
        return eval_expr(e, m, no_program());
    } catch (const RuntimeError&) {
        return std::nullopt;
    }
}

std::optional<bool> try_guard(const GuardPtr& g, Memory m) {
    try {
        return eval_guard(g, m, no_program());
    } catch (const RuntimeError&) {
        return std::nullopt;
    }
}

std::vector<std::string> with(std::vector<std::string> vs, const std::set<std::string>& more) {
    for (const auto& v : more)
        if (std::find(vs.begin(), vs.end(), v) == vs.end()) vs.push_back(v);
    return vs;
}

template <class Eval>
std::optional<DepWitness> brute_dep(const std::vector<std::string>& vars, const std::string& x, int bound, Eval eval) {
    std::vector<std::string> others;
    for (const auto& v : vars)
        if (v != x) others.push_back(v);
    std::optional<DepWitness> w;
    for_grid(others, bound, [&](Memory& m) {
        std::optional<std::pair<Memory, std::string>> first;
        for (int v = -bound; v <= bound; ++v) {
            m.store[x] = Value::integer(v);
            auto r = eval(m);
            if (!r) continue;
            if (!first) {
                first = {m, *r};
            } else if (first->second != *r) {
                w = DepWitness{first->first, m, first->second, *r};
                return true;
            }
        }
        return false;
    });
    return w;
}

}  // namespace

std::optional<DepWitness> sem_dep_witness(const ExprPtr& e, const std::string& x, int bound) {
    if (!vars_of(e).count(x)) return std::nullopt;
    return brute_dep(ordered_vars(e), x, bound, [&](const Memory& m) -> std::optional<std::string> {
        auto v = try_eval(e, m);
        if (!v) return std::nullopt;
        return v->is_int() ? v->num.str() : std::string("ref");
    });
}

bool sem_dep(const ExprPtr& e, const std::string& x, int bound) { return sem_dep_witness(e, x, bound).has_value(); }

bool sem_dep(const GuardPtr& g, const std::string& x, int bound) {
    auto vars = vars_of(g);
    if (!vars.count(x)) return false;
    return brute_dep(std::vector<std::string>(vars.begin(), vars.end()), x, bound,
                     [&](const Memory& m) -> std::optional<std::string> {
                         auto v = try_guard(g, m);
                         if (!v) return std::nullopt;
                         return *v ? "true" : "false";
                     })
        .has_value();
}

DepQuery::DepQuery(ExprPtr e_, DomainPtr rho_, DomainMap eta_)
    : e(std::move(e_)), rho(std::move(rho_)), eta(std::move(eta_)) {}

namespace {

// Grid states admitted by the query, grouped by the eta-classes of the variables other than x.
// Each member carries the state's eta-class of x and its rho-class of e.
struct Member {
    Memory m;
    AV x_class;
    AV result;
};

std::map<std::vector<AV>, std::vector<Member>> groups(const DepQuery& q, const std::string& x) {
    std::vector<std::string> vars = ordered_vars(q.e);
    if (q.beta) vars = with(vars, vars_of(q.beta));
    if (std::find(vars.begin(), vars.end(), x) == vars.end()) vars.push_back(x);
    std::map<std::vector<AV>, std::vector<Member>> out;
    for_grid(vars, q.bound, [&](Memory& m) {
        for (const auto& [v, a] : q.ambient.vals)
            if (m.store.count(v) && !q.eta.of(v)->leq(q.eta.of(v)->alpha(m, v), a)) return false;
        if (q.ambient.bottom) return false;
        if (q.beta) {
            auto b = try_guard(q.beta, m);
            if (!b || !*b) return false;
        }
        auto r = try_eval(q.e, m);
        if (!r) return false;
        std::vector<AV> key;
        for (const auto& v : vars)
            if (v != x) key.push_back(q.eta.of(v)->alpha(m, v));
        out[key].push_back({m, q.eta.of(x)->alpha(m, x), q.rho->alpha_value(m, *r)});
        return false;
    });
    return out;
}

}  // namespace

std::optional<DepWitness> ndep_witness(const DepQuery& q, const std::string& x) {
    for (const auto& [key, ms] : groups(q, x))
        for (const auto& a : ms)
            if (a.result != ms.front().result)
                return DepWitness{ms.front().m, a.m, q.rho->value_name(ms.front().result), q.rho->value_name(a.result)};
    return std::nullopt;
}

bool ndep(const DepQuery& q, const std::string& x) { return ndep_witness(q, x).has_value(); }

bool atom_dep(const DepQuery& q, const std::string& x) {
    std::vector<std::string> vars = ordered_vars(q.e);
    const Uco& dx = *q.eta.of(x);
    for (const auto& [key, ms] : groups(q, x)) {
        std::set<AV> xs;
        for (const auto& m : ms) xs.insert(m.x_class);
        AbsState s;
        std::size_t i = 0;
        std::vector<std::string> all = vars;
        if (q.beta) all = with(all, vars_of(q.beta));
        if (std::find(all.begin(), all.end(), x) == all.end()) all.push_back(x);
        for (const auto& v : all)
            if (v != x) s.vals[v] = key[i++];
        for (AV a : xs)
            for (AV b : xs) {
                s.vals[x] = dx.join(a, b);
                if (!q.rho->is_atom(abs_eval(q.e, s, q.eta, *q.rho))) return true;
            }
    }
    return false;
}

namespace {

class AcSolver {
public:
    AcSolver(const ExprPtr& e, const std::set<std::string>& X, const DomainPtr& d)
        : e_(e), X_(X), d_(d), dm_(d, DomainLibrary::instance().top(ValueKind::Reference)) {
        for (const auto& v : ordered_vars(e))
            if (X.count(v)) order_.push_back(v);
    }

    std::optional<AV> solve(const AbsState& s) {
        auto key = s.vals;
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        std::optional<AV> r = compute(s);
        memo_[key] = r;
        return r;
    }

private:
    ExprPtr e_;
    std::set<std::string> X_;
    DomainPtr d_;
    DomainMap dm_;
    std::vector<std::string> order_;
    std::map<std::map<std::string, AV>, std::optional<AV>> memo_;

    std::optional<AV> compute(const AbsState& s) {
        AV r = abs_eval(e_, s, dm_, *d_);
        if (d_->is_atom(r)) return r;
        for (const auto& x : order_) {
            AV cur = s.get(x, dm_);
            if (d_->is_atom(cur)) continue;
            std::optional<AV> u;
            for (AV sub : d_->direct_subs(cur)) {
                AbsState t = s;
                t.vals[x] = sub;
                auto b = solve(t);
                if (!b || (u && *u != *b)) return std::nullopt;
                u = b;
            }
            return u;
        }
        return std::nullopt;
    }
};

// All states that agree with s on X and take atoms below s elsewhere (over the variables of e).
std::vector<AbsState> subs(const ExprPtr& e, const AbsState& s, const std::set<std::string>& X, const Uco& d,
                           const DomainMap& dm) {
    std::vector<AbsState> out{s};
    for (const auto& v : ordered_vars(e)) {
        if (X.count(v)) continue;
        std::vector<AbsState> next;
        AV cur = s.get(v, dm);
        for (AV a : d.atoms())
            if (d.leq(a, cur))
                for (auto t : out) {
                    t.vals[v] = a;
                    next.push_back(t);
                }
        out = std::move(next);
    }
    return out;
}

}  // namespace

std::optional<AV> ac(const ExprPtr& e, const AbsState& s, const std::set<std::string>& X, const DomainPtr& d) {
    return AcSolver(e, X, d).solve(s);
}

std::set<std::string> find_ndeps(const ExprPtr& e, const AbsState& ambient, const DomainPtr& d) {
    DomainMap dm(d, DomainLibrary::instance().top(ValueKind::Reference));
    std::vector<std::string> vars = ordered_vars(e);
    std::set<std::string> non_dep;
    std::set<std::set<std::string>> visited;
    std::function<void(const std::set<std::string>&)> prove = [&](const std::set<std::string>& X) {
        if (X.empty() || !visited.insert(X).second) return;
        AcSolver solver(e, X, d);
        bool ok = true;
        for (const auto& s : subs(e, ambient, X, *d, dm))
            if (!solver.solve(s)) {
                ok = false;
                break;
            }
        if (ok) {
            non_dep.insert(X.begin(), X.end());
            return;
        }
        // Removal order is the order of first occurrence in e.
        for (const auto& x : vars)
            if (X.count(x)) {
                auto Y = X;
                Y.erase(x);
                prove(Y);
            }
    };
    prove(std::set<std::string>(vars.begin(), vars.end()));
    std::set<std::string> out;
    for (const auto& v : vars)
        if (!non_dep.count(v)) out.insert(v);
    return out;
}

DomainPtr edep(const ExprPtr& e, const DomainPtr& d0, const std::set<std::string>& X, const AbsState& ambient) {
    if (d0->kind() != ValueKind::Numeric) throw std::invalid_argument("edep needs a numeric domain");
    const auto& refs = DomainLibrary::instance().top(ValueKind::Reference);
    std::vector<std::string> free;
    for (const auto& v : ordered_vars(e))
        if (!X.count(v)) free.push_back(v);
    // The start state is kept as block sets so it survives domain changes.
    std::map<std::string, Mask> start;
    for (const auto& [v, a] : ambient.vals) start[v] = d0->mask(a);

    DomainPtr rho = d0;
    int generation = 0;
    bool modified = true;
    while (modified) {
        modified = false;
        DomainMap dm(rho, refs);
        AbsState sp;
        for (const auto& [v, m] : start) sp.vals[v] = rho->closure(m);
        std::deque<AbsState> queue{sp};
        while (!queue.empty()) {
            AbsState s = queue.front();
            queue.pop_front();
            AV V = abs_eval(e, s, dm, *rho);
            if (rho->is_atom(V) || V == rho->bot()) continue;
            std::string open;
            for (const auto& v : free)
                if (!rho->is_atom(s.get(v, dm))) {
                    open = v;
                    break;
                }
            if (open.empty()) {
                std::vector<Mask> keep;
                for (Mask u : rho->masks())
                    if ((u & rho->mask(V)) == 0 || (rho->mask(V) & ~u) == 0) keep.push_back(u);
                rho = rho->restrict_to(keep, d0->name() + "/" + std::to_string(++generation));
                modified = true;
                break;
            }
            for (AV sub : rho->direct_subs(s.get(open, dm))) {
                AbsState t = s;
                t.vals[open] = sub;
                queue.push_back(t);
            }
        }
    }
    return DomainLibrary::instance().canonical(rho);
}

bool non_dependent(const ExprPtr& e, const DomainPtr& d, const std::set<std::string>& X) {
    DomainMap dm(d, DomainLibrary::instance().top(ValueKind::Reference));
    for (const auto& s : subs(e, top_state(), X, *d, dm)) {
        AV r = abs_eval(e, s, dm, *d);
        if (!d->is_atom(r) && r != d->bot()) return false;
    }
    return true;
}

}  // namespace absslice
