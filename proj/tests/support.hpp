#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "absslice/deps.hpp"
#include "absslice/pdg.hpp"
#include "absslice/slicer.hpp"

namespace test_support {

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::string corpus_path(const std::string& name) { return std::string(ABSSLICE_CORPUS_DIR) + "/" + name; }

inline absslice::Program program(const std::string& text) {
    absslice::Program p = absslice::parse_program(text);
    absslice::check_program(p);
    return p;
}

inline absslice::Program corpus_program(const std::string& name) { return program(slurp(corpus_path(name + ".prog"))); }

inline absslice::SlicingCriterion criterion(const std::string& text, const absslice::Program& p) {
    absslice::SlicingCriterion c = absslice::parse_criterion(text);
    absslice::check_criterion(c, p);
    return c;
}

inline absslice::SlicingCriterion corpus_criterion(const std::string& name, const absslice::Program& p) {
    return criterion(slurp(corpus_path(name + ".crit")), p);
}

inline absslice::DomainPtr num(const std::string& name) {
    return absslice::DomainLibrary::instance().get(name, absslice::ValueKind::Numeric);
}

inline absslice::DomainPtr ref(const std::string& name) {
    return absslice::DomainLibrary::instance().get(name, absslice::ValueKind::Reference);
}

inline std::set<int> lines(const absslice::Program& p) {
    auto l = absslice::lines_of(p);
    return {l.begin(), l.end()};
}

}  // namespace test_support
