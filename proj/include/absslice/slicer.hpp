#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "absslice/agreements.hpp"
#include "absslice/criteria.hpp"

namespace absslice {

struct SliceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SliceOptions {
    AgreementOptions agreements;
    EnumOptions verify;  // grid of the final check
};

struct SliceResult {
    Program slice;
    std::set<int> kept, erased;
    Agreement g_out;
    Predicate beta0;
    Labeling labels;  // labels of the original program
    Verdict verdict;  // of the emitted program against the original
    // Verification of the erasure failed and the original program was emitted instead.
    bool fallback = false;
};

// The agreement a criterion asks for at its observation point.
Agreement criterion_agreement(const SlicingCriterion& c, const Program& p);
// Facts implied by the criterion's inputs.
Predicate criterion_predicate(const SlicingCriterion& c, const Program& p);

// Throws SliceError when c does not observe the end of p, or is a KL criterion.
SliceResult abstract_slice(const Program& p, const SlicingCriterion& c, const SliceOptions& opt = {});
// abstract_slice with every group replaced by identity.
SliceResult concrete_slice(const Program& p, const SlicingCriterion& c, const SliceOptions& opt = {});

Verdict verify_slice(const Program& p, const Program& q, const SlicingCriterion& c, const EnumOptions& opt = {});

// Listing of the original with erased statements as blank lines.
std::string slice_listing(const Program& p, const SliceResult& r);
std::string slice_report_json(const Program& p, const SlicingCriterion& c, const SliceResult& r);

// Every slice emitted by this process, with its verification outcome.
struct Emission {
    std::string program, slice, criterion;
    Verdict::Kind verdict;
    bool fallback;
};
std::vector<Emission> emitted_slices();
void clear_emitted_slices();

}  // namespace absslice
