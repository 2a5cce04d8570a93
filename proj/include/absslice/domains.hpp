#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absslice/concrete.hpp"
#include "absslice/lang.hpp"

namespace absslice {

// All numeric domains are closures over one shared partition of the integers: a block per value
// in [-kIdBound, kIdBound] plus four blocks (sign x parity) for values outside. Reference domains
// share the blocks {null, non-null acyclic, cyclic}. A domain is the meet-closed family of block
// sets that are its fix-points.
inline constexpr int kIdBound = 4;

enum class ValueKind { Numeric, Reference };

class UnknownDomain : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Mask = std::uint32_t;
using AV = int;  // index of an abstract value in its domain's carrier

class Uco;
using DomainPtr = std::shared_ptr<const Uco>;

class Uco {
public:
    // masks must be meet-closed and contain the empty and the full mask.
    Uco(std::string name, ValueKind kind, std::vector<Mask> masks, std::map<Mask, std::string> names,
        bool identity = false);

    const std::string& name() const { return name_; }
    ValueKind kind() const { return kind_; }
    bool is_identity() const { return identity_; }
    bool is_top() const { return masks_.size() == 2 && !identity_; }

    int size() const { return static_cast<int>(masks_.size()); }
    AV bot() const { return 0; }
    AV top() const { return size() - 1; }
    Mask mask(AV a) const { return masks_.at(a); }
    const std::vector<Mask>& masks() const { return masks_; }
    const std::string& value_name(AV a) const { return names_.at(a); }
    std::optional<AV> find(const std::string& value_name) const;

    bool leq(AV a, AV b) const { return (masks_[a] & ~masks_[b]) == 0; }
    AV join(AV a, AV b) const { return closure(masks_[a] | masks_[b]); }
    AV meet(AV a, AV b) const { return index_.at(masks_[a] & masks_[b]); }
    AV closure(Mask m) const;
    bool contains(Mask m) const { return index_.count(m) > 0; }

    std::vector<AV> atoms() const;
    bool is_atom(AV a) const;
    std::vector<AV> direct_subs(AV a) const;  // lower covers, excluding bottom

    AV alpha_int(const Int& v) const;
    AV alpha_ints(const std::vector<Int>& vs) const;
    AV alpha_ref(const Memory& m, const Value& v) const;
    AV alpha_value(const Memory& m, const Value& v) const;
    AV alpha(const Memory& m, const std::string& var) const { return alpha_value(m, m.get(var)); }
    // Value of another domain's element in this domain (both over the same blocks).
    AV convert(const Uco& from, AV a) const { return closure(from.mask(a)); }

    // Numeric operators; best correct approximation from the block tables.
    AV abs_op(BinOp op, AV a, AV b) const;

    // Sample integers of the concretization (a finite, representative subset).
    std::vector<Int> samples(AV a) const;

    // Whether two concrete values are in the same class. The identity domains compare exactly
    // (references structurally), independently of kIdBound.
    bool same_class(const Memory& m1, const Value& v1, const Memory& m2, const Value& v2) const;
    // Text identifying the class of a value; equal texts iff same_class.
    std::string observe(const Memory& m, const Value& v) const;

    // Fix-point inclusion: every class of this domain lies inside a class of other.
    bool refines(const Uco& other) const;
    bool same_partition(const Uco& other) const { return refines(other) && other.refines(*this); }

    // Subdomain made of the given fix-points (used by ATOMIZE).
    DomainPtr restrict_to(const std::vector<Mask>& keep, const std::string& name) const;

    std::string describe() const;  // "name: v1 < v2 ..." listing

private:
    std::string name_;
    ValueKind kind_;
    bool identity_;
    std::vector<Mask> masks_;
    std::vector<std::string> names_;
    std::map<Mask, AV> index_;
};

// Shared block universe.
int numeric_block_count();
int numeric_block(const Int& v);
const std::vector<Int>& numeric_block_samples(int block);
int reference_block_count();
int reference_block(const Memory& m, const Value& v);  // 0 null, 1 acyclic, 2 cyclic
Mask full_mask(ValueKind k);
// Blocks reachable by op from any pair of blocks in a and b (union of the block tables).
Mask block_op(BinOp op, Mask a, Mask b);

// Reduced product (Moore closure of the union of fix-points). Identity absorbs everything.
DomainPtr reduced_product(const DomainPtr& a, const DomainPtr& b);

// Named domains: numeric id, top, par, sign, parsign, zero; reference id, top, null, cyc, nullcyc.
class DomainLibrary {
public:
    static const DomainLibrary& instance();

    DomainPtr get(const std::string& name, ValueKind kind) const;  // throws UnknownDomain
    bool has(const std::string& name, ValueKind kind) const;
    DomainPtr id(ValueKind k) const { return get("id", k); }
    DomainPtr top(ValueKind k) const { return get("top", k); }
    // Library domains ordered from coarse to fine (the candidate list for searches).
    const std::vector<DomainPtr>& candidates(ValueKind k) const;
    // Meet of two domains, mapped back to a library domain with the same partition when one exists.
    DomainPtr meet(const DomainPtr& a, const DomainPtr& b) const;
    DomainPtr canonical(const DomainPtr& d) const;
    // Position in the candidate list of the library domain with the same partition (fineness rank).
    int rank(const DomainPtr& d) const;
    std::vector<std::string> names(ValueKind k) const;

private:
    DomainLibrary();
    std::vector<DomainPtr> numeric_, reference_;
};

// Name of a domain as printed in agreements: library name, or the product spelling.
std::string domain_name(const DomainPtr& d);

}  // namespace absslice
