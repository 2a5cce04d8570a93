#include "absslice/domains.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <set>
#include <sstream>

namespace absslice {

namespace {

constexpr int kOutNegEven = 2 * kIdBound + 1;
constexpr int kOutNegOdd = kOutNegEven + 1;
constexpr int kOutPosEven = kOutNegEven + 2;
constexpr int kOutPosOdd = kOutNegEven + 3;
constexpr int kNumBlocks = kOutNegEven + 4;
constexpr int kSampleReach = 20;

std::vector<std::vector<Int>> build_samples() {
    std::vector<std::vector<Int>> s(kNumBlocks);
    for (int v = -kIdBound; v <= kIdBound; ++v) s[v + kIdBound].push_back(v);
    for (int v = kIdBound + 1; v <= kSampleReach; ++v) {
        s[v % 2 == 0 ? kOutPosEven : kOutPosOdd].push_back(v);
        s[v % 2 == 0 ? kOutNegEven : kOutNegOdd].push_back(-v);
    }
    for (Int big : {Int(1000), Int(1000000000)}) {
        s[kOutPosEven].push_back(big);
        s[kOutPosOdd].push_back(big + 1);
        s[kOutNegEven].push_back(-big);
        s[kOutNegOdd].push_back(-big - 1);
    }
    return s;
}

const std::vector<std::vector<Int>>& samples_table() {
    static const auto s = build_samples();
    return s;
}

Int apply(BinOp op, const Int& a, const Int& b) {
    switch (op) {
        case BinOp::Add:
            return a + b;
        case BinOp::Sub:
            return a - b;
        case BinOp::Mul:
            return a * b;
        case BinOp::Div:
            return a / b;
        case BinOp::Mod: {
            Int r = a % b;
            if (r < 0) r += b < 0 ? Int(-b) : b;
            return r;
        }
    }
    return 0;
}

using OpTable = std::array<std::array<std::array<Mask, kNumBlocks>, kNumBlocks>, 5>;

OpTable build_ops() {
    OpTable t{};
    const auto& s = samples_table();
    const Mask full = (Mask(1) << kNumBlocks) - 1;
    for (int op = 0; op < 5; ++op)
        for (int i = 0; i < kNumBlocks; ++i)
            for (int j = 0; j < kNumBlocks; ++j) {
                BinOp o = static_cast<BinOp>(op);
                bool divides = o == BinOp::Div || o == BinOp::Mod;
                if (divides && j == kIdBound) {
                    t[op][i][j] = full;
                    continue;
                }
                Mask m = 0;
                for (const Int& a : s[i])
                    for (const Int& b : s[j]) m |= Mask(1) << numeric_block(apply(o, a, b));
                t[op][i][j] = m;
            }
    return t;
}

const OpTable& ops_table() {
    static const OpTable t = build_ops();
    return t;
}

Mask blocks_where(bool (*pred)(const Int&)) {
    Mask m = 0;
    const auto& s = samples_table();
    for (int b = 0; b < kNumBlocks; ++b)
        if (pred(s[b].front())) m |= Mask(1) << b;
    return m;
}

std::vector<Mask> meet_closure(std::vector<Mask> ms) {
    std::set<Mask> out(ms.begin(), ms.end());
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<Mask> cur(out.begin(), out.end());
        for (std::size_t i = 0; i < cur.size(); ++i)
            for (std::size_t j = i + 1; j < cur.size(); ++j)
                if (out.insert(cur[i] & cur[j]).second) changed = true;
    }
    return {out.begin(), out.end()};
}

}  // namespace

int numeric_block_count() { return kNumBlocks; }

int numeric_block(const Int& v) {
    if (v >= -kIdBound && v <= kIdBound) return static_cast<int>(v) + kIdBound;
    bool even = (v % 2) == 0;
    if (v < 0) return even ? kOutNegEven : kOutNegOdd;
    return even ? kOutPosEven : kOutPosOdd;
}

const std::vector<Int>& numeric_block_samples(int block) { return samples_table().at(block); }

int reference_block_count() { return 3; }

int reference_block(const Memory& m, const Value& v) {
    if (v.is_null()) return 0;
    return is_cyclic_value(m, v) ? 2 : 1;
}

Mask full_mask(ValueKind k) {
    int n = k == ValueKind::Numeric ? kNumBlocks : 3;
    return (Mask(1) << n) - 1;
}

Uco::Uco(std::string name, ValueKind kind, std::vector<Mask> masks, std::map<Mask, std::string> names,
         bool identity)
    : name_(std::move(name)), kind_(kind), identity_(identity) {
    masks.push_back(0);
    masks.push_back(full_mask(kind));
    masks = meet_closure(masks);
    std::sort(masks.begin(), masks.end(), [](Mask a, Mask b) {
        int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });
    masks_ = masks;
    for (std::size_t i = 0; i < masks_.size(); ++i) {
        index_[masks_[i]] = static_cast<AV>(i);
        auto it = names.find(masks_[i]);
        if (masks_[i] == 0)
            names_.push_back("bot");
        else if (masks_[i] == full_mask(kind))
            names_.push_back("top");
        else if (it != names.end())
            names_.push_back(it->second);
        else
            names_.push_back("v" + std::to_string(masks_[i]));
    }
}

std::optional<AV> Uco::find(const std::string& n) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == n) return static_cast<AV>(i);
    return std::nullopt;
}

AV Uco::closure(Mask m) const {
    // Masks are sorted by size, so the first superset is the least one (the family is meet-closed).
    for (std::size_t i = 0; i < masks_.size(); ++i)
        if ((m & ~masks_[i]) == 0) return static_cast<AV>(i);
    return top();
}

std::vector<AV> Uco::atoms() const {
    std::vector<AV> out;
    for (AV a = 1; a < size(); ++a)
        if (is_atom(a)) out.push_back(a);
    return out;
}

bool Uco::is_atom(AV a) const {
    if (masks_[a] == 0) return false;
    for (AV b = 1; b < size(); ++b)
        if (b != a && leq(b, a)) return false;
    return true;
}

std::vector<AV> Uco::direct_subs(AV a) const {
    std::vector<AV> out;
    for (AV b = 1; b < size(); ++b) {
        if (b == a || !leq(b, a)) continue;
        bool direct = true;
        for (AV c = 1; c < size() && direct; ++c)
            if (c != a && c != b && leq(b, c) && leq(c, a)) direct = false;
        if (direct) out.push_back(b);
    }
    return out;
}

AV Uco::alpha_int(const Int& v) const { return closure(Mask(1) << numeric_block(v)); }

AV Uco::alpha_ints(const std::vector<Int>& vs) const {
    Mask m = 0;
    for (const auto& v : vs) m |= Mask(1) << numeric_block(v);
    return closure(m);
}

AV Uco::alpha_ref(const Memory& m, const Value& v) const { return closure(Mask(1) << reference_block(m, v)); }

AV Uco::alpha_value(const Memory& m, const Value& v) const {
    if (kind_ == ValueKind::Numeric) {
        if (!v.is_int()) throw std::logic_error("numeric domain " + name_ + " applied to a reference");
        return alpha_int(v.num);
    }
    if (v.is_int()) throw std::logic_error("reference domain " + name_ + " applied to an integer");
    return alpha_ref(m, v);
}

Mask block_op(BinOp op, Mask a, Mask b) {
    const auto& t = ops_table()[static_cast<int>(op)];
    Mask r = 0;
    for (int i = 0; i < kNumBlocks; ++i)
        if (a >> i & 1)
            for (int j = 0; j < kNumBlocks; ++j)
                if (b >> j & 1) r |= t[i][j];
    return r;
}

AV Uco::abs_op(BinOp op, AV a, AV b) const {
    if (kind_ != ValueKind::Numeric) throw std::logic_error("no arithmetic in reference domain " + name_);
    Mask ma = masks_[a], mb = masks_[b];
    if (ma == 0 || mb == 0) return bot();
    return closure(block_op(op, ma, mb));
}

std::vector<Int> Uco::samples(AV a) const {
    std::vector<Int> out;
    if (kind_ != ValueKind::Numeric) return out;
    for (int b = 0; b < kNumBlocks; ++b)
        if (masks_[a] >> b & 1) {
            const auto& s = samples_table()[b];
            out.insert(out.end(), s.begin(), s.end());
        }
    return out;
}

bool Uco::same_class(const Memory& m1, const Value& v1, const Memory& m2, const Value& v2) const {
    if (identity_) {
        if (v1.is_int() || v2.is_int()) return v1.is_int() && v2.is_int() && v1.num == v2.num;
        return ref_equal(m1, v1, m2, v2);
    }
    return alpha_value(m1, v1) == alpha_value(m2, v2);
}

std::string Uco::observe(const Memory& m, const Value& v) const {
    if (identity_) return v.is_int() ? v.num.str() : ref_signature(m, v);
    return value_name(alpha_value(m, v));
}

bool Uco::refines(const Uco& other) const {
    if (kind_ != other.kind_) return false;
    if (identity_) return true;
    if (other.identity_) return false;
    int n = kind_ == ValueKind::Numeric ? kNumBlocks : 3;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (closure(Mask(1) << i) == closure(Mask(1) << j) &&
                other.closure(Mask(1) << i) != other.closure(Mask(1) << j))
                return false;
    return true;
}

DomainPtr Uco::restrict_to(const std::vector<Mask>& keep, const std::string& name) const {
    std::map<Mask, std::string> names;
    for (Mask m : keep) names[m] = value_name(index_.at(m));
    return std::make_shared<Uco>(name, kind_, keep, names, false);
}

std::string Uco::describe() const {
    std::ostringstream out;
    out << name_ << " (" << (kind_ == ValueKind::Numeric ? "numeric" : "reference") << "):";
    for (AV a = 0; a < size(); ++a) {
        out << " " << names_[a];
        if (is_atom(a)) out << "*";
    }
    return out.str();
}

namespace {

DomainPtr make_numeric(const std::string& name, std::vector<std::pair<Mask, std::string>> vals,
                       bool identity = false) {
    std::vector<Mask> ms;
    std::map<Mask, std::string> names;
    for (auto& [m, n] : vals) {
        ms.push_back(m);
        names[m] = n;
    }
    return std::make_shared<Uco>(name, ValueKind::Numeric, ms, names, identity);
}

bool is_neg(const Int& v) { return v < 0; }
bool is_pos(const Int& v) { return v > 0; }
bool is_zero(const Int& v) { return v == 0; }
bool is_even(const Int& v) { return v % 2 == 0; }
bool is_odd(const Int& v) { return v % 2 != 0; }

}  // namespace

DomainLibrary::DomainLibrary() {
    const Mask neg = blocks_where(is_neg), pos = blocks_where(is_pos), zero = blocks_where(is_zero);
    const Mask even = blocks_where(is_even), odd = blocks_where(is_odd);
    std::vector<std::pair<Mask, std::string>> idv;
    for (int v = -kIdBound; v <= kIdBound; ++v) idv.push_back({Mask(1) << (v + kIdBound), std::to_string(v)});
    numeric_.push_back(make_numeric("top", {}));
    numeric_.push_back(make_numeric("zero", {{zero, "zero"}, {neg | pos, "nonzero"}}));
    numeric_.push_back(make_numeric("par", {{even, "even"}, {odd, "odd"}}));
    numeric_.push_back(make_numeric("sign", {{neg, "neg"}, {zero, "zero"}, {pos, "pos"}}));
    numeric_.push_back(make_numeric("parsign", {{even, "even"},
                                                {odd, "odd"},
                                                {neg, "neg"},
                                                {zero, "zero"},
                                                {pos, "pos"},
                                                {neg & even, "negeven"},
                                                {neg & odd, "negodd"},
                                                {pos & even, "poseven"},
                                                {pos & odd, "posodd"}}));
    numeric_.push_back(make_numeric("id", idv, true));

    const Mask rnull = 1, racyc = 2, rcyc = 4;
    auto ref = [](const std::string& n, std::vector<std::pair<Mask, std::string>> vals, bool identity = false) {
        std::vector<Mask> ms;
        std::map<Mask, std::string> names;
        for (auto& [m, s] : vals) {
            ms.push_back(m);
            names[m] = s;
        }
        return std::make_shared<Uco>(n, ValueKind::Reference, ms, names, identity);
    };
    reference_.push_back(ref("top", {}));
    reference_.push_back(ref("null", {{rnull, "null"}, {racyc | rcyc, "nonnull"}}));
    reference_.push_back(ref("cyc", {{rnull | racyc, "acyc"}, {rcyc, "cyc"}}));
    reference_.push_back(ref("nullcyc", {{rnull, "null"},
                                         {racyc | rcyc, "nonnull"},
                                         {rnull | racyc, "acyc"},
                                         {rcyc, "cyc"},
                                         {racyc, "nonnull&acyc"}}));
    // Only null is a singleton class at the block level; everything else is compared structurally.
    reference_.push_back(ref("id", {{rnull, "null"}}, true));
}

const DomainLibrary& DomainLibrary::instance() {
    static const DomainLibrary lib;
    return lib;
}

DomainPtr DomainLibrary::get(const std::string& name, ValueKind kind) const {
    std::string n = name == "parSign" ? "parsign" : name;
    for (const auto& d : candidates(kind))
        if (d->name() == n) return d;
    throw UnknownDomain("unknown " + std::string(kind == ValueKind::Numeric ? "numeric" : "reference") +
                        " domain '" + name + "'");
}

bool DomainLibrary::has(const std::string& name, ValueKind kind) const {
    for (const auto& d : candidates(kind))
        if (d->name() == name) return true;
    return false;
}

const std::vector<DomainPtr>& DomainLibrary::candidates(ValueKind k) const {
    return k == ValueKind::Numeric ? numeric_ : reference_;
}

std::vector<std::string> DomainLibrary::names(ValueKind k) const {
    std::vector<std::string> out;
    for (const auto& d : candidates(k)) out.push_back(d->name());
    return out;
}

DomainPtr DomainLibrary::canonical(const DomainPtr& d) const {
    for (const auto& c : candidates(d->kind()))
        if (c->is_identity() == d->is_identity() && c->same_partition(*d)) return c;
    return d;
}

DomainPtr DomainLibrary::meet(const DomainPtr& a, const DomainPtr& b) const {
    if (a->refines(*b)) return canonical(a);
    if (b->refines(*a)) return canonical(b);
    return canonical(reduced_product(a, b));
}

int DomainLibrary::rank(const DomainPtr& d) const {
    const auto& c = candidates(d->kind());
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i]->is_identity() == d->is_identity() && c[i]->same_partition(*d)) return static_cast<int>(i);
    // Unnamed products sit between the named ones by number of classes.
    return static_cast<int>(c.size()) - 1;
}

DomainPtr reduced_product(const DomainPtr& a, const DomainPtr& b) {
    if (a->kind() != b->kind()) throw std::invalid_argument("reduced product of numeric and reference domains");
    if (a->is_identity()) return a;
    if (b->is_identity()) return b;
    if (b->is_top()) return a;
    if (a->is_top()) return b;
    std::vector<Mask> ms = a->masks();
    ms.insert(ms.end(), b->masks().begin(), b->masks().end());
    ms = meet_closure(ms);
    std::map<Mask, std::string> names;
    for (Mask m : ms) {
        if (a->contains(m)) {
            names[m] = a->value_name(a->closure(m));
        } else if (b->contains(m)) {
            names[m] = b->value_name(b->closure(m));
        } else {
            names[m] = a->value_name(a->closure(m)) + "&" + b->value_name(b->closure(m));
        }
    }
    return std::make_shared<Uco>(a->name() + "&" + b->name(), a->kind(), ms, names, false);
}

std::string domain_name(const DomainPtr& d) { return d->name(); }

}  // namespace absslice
