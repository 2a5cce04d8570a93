#include "absslice/sharing.hpp"

#include <functional>
#include <vector>

namespace absslice {

std::set<std::string> SharingInfo::share_of(const std::string& x) const {
    auto it = share.find(x);
    if (it == share.end()) return {x};
    auto s = it->second;
    s.insert(x);
    return s;
}

std::set<std::string> SharingInfo::dalias_of(const std::string& x) const {
    auto it = dalias.find(x);
    return it == dalias.end() ? std::set<std::string>{x} : it->second;
}

bool SharingInfo::may_share(const std::string& x, const std::string& y) const { return share_of(x).count(y) > 0; }

namespace {

class UnionFind {
public:
    std::string find(const std::string& x) {
        auto it = parent_.find(x);
        if (it == parent_.end()) {
            parent_[x] = x;
            return x;
        }
        if (it->second == x) return x;
        std::string r = find(it->second);
        parent_[x] = r;
        return r;
    }
    void unite(const std::string& a, const std::string& b) { parent_[find(a)] = find(b); }

private:
    std::map<std::string, std::string> parent_;
};

SharingInfo from_groups(const Program& p, UnionFind& uf) {
    SharingInfo s;
    std::vector<std::string> refs;
    for (const auto& v : p.var_order)
        if (p.is_ref(v)) refs.push_back(v);
    for (const auto& x : refs) {
        for (const auto& y : refs)
            if (uf.find(x) == uf.find(y)) s.share[x].insert(y);
        s.dalias[x] = {x};
    }
    return s;
}

}  // namespace

SharingInfo compute_sharing(const Program& p) {
    UnionFind uf;
    std::string first_input;
    for (const auto& v : live_at_entry(p))
        if (p.is_ref(v)) {
            if (first_input.empty())
                first_input = v;
            else
                uf.unite(v, first_input);
        }
    for (const auto& v : read_vars(p))
        if (p.is_ref(v)) {
            if (first_input.empty())
                first_input = v;
            else
                uf.unite(v, first_input);
        }
    for (const Stmt* s : all_stmts(p.body)) {
        if (s->kind != Stmt::Kind::Assign && s->kind != Stmt::Kind::FieldUpdate) continue;
        bool ref_target = s->kind == Stmt::Kind::FieldUpdate || p.is_ref(s->var);
        if (!ref_target) continue;
        for (const auto& y : vars_of(s->expr))
            if (p.is_ref(y)) uf.unite(s->var, y);
    }
    return from_groups(p, uf);
}

SharingInfo conservative_sharing(const Program& p) {
    UnionFind uf;
    std::string first;
    for (const auto& v : p.var_order)
        if (p.is_ref(v)) {
            if (first.empty())
                first = v;
            else
                uf.unite(v, first);
        }
    return from_groups(p, uf);
}

}  // namespace absslice
