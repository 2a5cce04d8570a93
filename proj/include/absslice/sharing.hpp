#pragma once

#include <map>
#include <set>
#include <string>

#include "absslice/lang.hpp"

namespace absslice {

// Possible sharing (over-approximation) and definite aliasing (under-approximation) between
// reference variables.
struct SharingInfo {
    std::map<std::string, std::set<std::string>> share;
    std::map<std::string, std::set<std::string>> dalias;

    // Variables whose reachable heap may overlap with x's (always contains x).
    std::set<std::string> share_of(const std::string& x) const;
    std::set<std::string> dalias_of(const std::string& x) const;
    bool may_share(const std::string& x, const std::string& y) const;
};

// Flow-insensitive pass: reference assignments x:=y, x:=y.f and x.f:=y join the groups of x and y;
// all reference inputs start in one group. DALIAS(x) = {x}.
SharingInfo compute_sharing(const Program& p);
// Every pair of reference variables may share.
SharingInfo conservative_sharing(const Program& p);

}  // namespace absslice
