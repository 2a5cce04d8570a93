#include "absslice/slicer.hpp"

#include <mutex>

#include "json.hpp"

namespace absslice {

namespace {

std::mutex registry_mutex;
std::vector<Emission> registry;

const Stmt* first_erasable(const Block& b, const Labeling& l, const Program& p, const AgreementOptions& opt) {
    for (const auto& s : b) {
        if (s.kind == Stmt::Kind::Skip) return &s;
        if (s.kind == Stmt::Kind::Read || s.kind == Stmt::Kind::Write) continue;
        auto before = l.before.find(s.line);
        auto after = l.after.find(s.line);
        if (before != l.before.end() && after != l.after.end() && p_prove(p, before->second, s, after->second, opt))
            return &s;
        if (const Stmt* t = first_erasable(s.then_block, l, p, opt)) return t;
        if (const Stmt* t = first_erasable(s.else_block, l, p, opt)) return t;
    }
    return nullptr;
}

int last_write_line(const Program& p) {
    if (p.body.empty() || p.body.back().kind != Stmt::Kind::Write) return 0;
    return p.body.back().line;
}

void check_form(const Program& p, const SlicingCriterion& c) {
    if (c.kl) throw SliceError("KL criteria are not supported by the slicer");
    if (c.occurrences.size() != 1) throw SliceError("the slicer needs a single observation point at the end");
    const Occurrence& o = c.occurrences.front();
    if (!o.all) throw SliceError("the slicer needs every visit of the observation point");
    if (o.line != kEndLine && o.line != last_write_line(p))
        throw SliceError("the observation point must be the end of the program");
}

void record(const Program& p, const SliceResult& r, const SlicingCriterion& c) {
    std::lock_guard<std::mutex> lock(registry_mutex);
    registry.push_back({print_program(p), print_program(r.slice), criterion_to_string(c), r.verdict.kind, r.fallback});
}

SliceResult run_slicer(const Program& p, const SlicingCriterion& c0, const SliceOptions& opt) {
    SlicingCriterion c = c0;
    check_criterion(c, p);
    check_form(p, c);
    SliceResult r;
    r.g_out = criterion_agreement(c, p);
    r.beta0 = criterion_predicate(c, p);
    r.labels = label_sequence(p, r.g_out, r.beta0, opt.agreements);
    Program cur = p;
    for (;;) {
        Labeling l = label_sequence(cur, r.g_out, r.beta0, opt.agreements);
        const Stmt* s = first_erasable(cur.body, l, cur, opt.agreements);
        if (!s) break;
        const Block whole{*s};
        for (const Stmt* t : all_stmts(whole)) r.erased.insert(t->line);
        cur = erase_lines(cur, {s->line});
    }
    r.slice = cur;
    for (int line : lines_of(p))
        if (!r.erased.count(line)) r.kept.insert(line);
    EnumOptions eo = opt.verify;
    for (const auto& [v, range] : c.inputs.ranges) eo.ranges.emplace(v, range);
    r.verdict = verify_slice(p, r.slice, c, eo);
    if (!r.verdict.ok() && !r.erased.empty()) {
        r.fallback = true;
        r.slice = p;
        r.kept.insert(r.erased.begin(), r.erased.end());
        r.erased.clear();
        r.verdict = verify_slice(p, p, c, eo);
    }
    record(p, r, c);
    return r;
}

}  // namespace

Agreement criterion_agreement(const SlicingCriterion& c, const Program& p) {
    const DomainLibrary& lib = DomainLibrary::instance();
    Agreement g;
    for (const auto& grp : c.abs) {
        for (const auto& v : grp.vars) {
            ValueKind k = p.is_ref(v) ? ValueKind::Reference : ValueKind::Numeric;
            std::string name = grp.domain;
            // Joint properties are implied by the per-variable ones.
            if (grp.kind == AbsGroup::Kind::SignProd) name = "sign";
            if (grp.kind == AbsGroup::Kind::ParSum) name = "par";
            DomainPtr d = lib.get(name, k);
            auto it = g.vars.find(v);
            g.set(v, it == g.vars.end() ? d : lib.meet(it->second, d));
        }
    }
    return g;
}

Predicate criterion_predicate(const SlicingCriterion& c, const Program& p) {
    Predicate b;
    if (c.inputs.kind == InputSpec::Kind::Cond && c.inputs.cond) b = predicate_from_guard(c.inputs.cond, p);
    for (const auto& [v, range] : c.inputs.ranges) {
        b.add({Fact::Kind::Cmp, v, CmpOp::Ge, range.first});
        b.add({Fact::Kind::Cmp, v, CmpOp::Le, range.second});
    }
    return b;
}

SliceResult abstract_slice(const Program& p, const SlicingCriterion& c, const SliceOptions& opt) {
    return run_slicer(p, c, opt);
}

SliceResult concrete_slice(const Program& p, const SlicingCriterion& c, const SliceOptions& opt) {
    SlicingCriterion ci = c;
    for (auto& grp : ci.abs) {
        grp.kind = AbsGroup::Kind::Single;
        grp.domain = "id";
    }
    std::vector<AbsGroup> split;
    for (const auto& grp : ci.abs)
        for (const auto& v : grp.vars) split.push_back({AbsGroup::Kind::Single, {v}, "id"});
    ci.abs = split;
    SliceOptions o = opt;
    o.agreements.concrete = true;
    return run_slicer(p, ci, o);
}

Verdict verify_slice(const Program& p, const Program& q, const SlicingCriterion& c, const EnumOptions& opt) {
    return is_slice(p, q, c, opt);
}

std::string slice_listing(const Program& p, const SliceResult& r) {
    PrintOptions po;
    po.gaps = r.erased;
    return print_program(p, po);
}

std::string slice_report_json(const Program& p, const SlicingCriterion& c, const SliceResult& r) {
    nlohmann::ordered_json j;
    j["criterion"] = criterion_to_string(c);
    j["kept"] = std::vector<int>(r.kept.begin(), r.kept.end());
    j["erased"] = std::vector<int>(r.erased.begin(), r.erased.end());
    j["final_agreement"] = to_string(r.g_out, p.var_order);
    j["entry_agreement"] = to_string(r.labels.entry, p.var_order);
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (const auto& [line, g] : r.labels.after) labels[std::to_string(line)] = to_string(g, p.var_order);
    j["labels"] = labels;
    j["verdict"] = to_string(r.verdict.kind);
    j["checked_inputs"] = r.verdict.checked;
    if (!r.verdict.detail.empty()) j["detail"] = r.verdict.detail;
    j["fallback"] = r.fallback;
    return j.dump(2);
}

std::vector<Emission> emitted_slices() {
    std::lock_guard<std::mutex> lock(registry_mutex);
    return registry;
}

void clear_emitted_slices() {
    std::lock_guard<std::mutex> lock(registry_mutex);
    registry.clear();
}

}  // namespace absslice
