#include "absslice/criteria.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace absslice {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n"), e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// Splits on sep outside braces.
std::vector<std::string> split_top(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '{') ++depth;
        if (ch == '}') --depth;
        if (ch == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

int parse_line(const std::string& s) {
    if (s == "end") return kEndLine;
    try {
        std::size_t used = 0;
        int l = std::stoi(s, &used);
        if (used != s.size() || l <= 0) throw CriterionError("bad line '" + s + "'");
        return l;
    } catch (const std::logic_error&) {
        throw CriterionError("bad line '" + s + "'");
    }
}

Occurrence parse_occurrence(const std::string& tok) {
    Occurrence o;
    auto colon = tok.find(':');
    o.line = parse_line(tok.substr(0, colon));
    if (colon == std::string::npos) return o;
    std::string its = tok.substr(colon + 1);
    if (its == "N" || its == "*") return o;
    o.all = false;
    for (const auto& k : split_top(its, ',')) {
        try {
            int v = std::stoi(k);
            if (v <= 0) throw CriterionError("iterations start at 1");
            o.iterations.insert(v);
        } catch (const std::logic_error&) {
            throw CriterionError("bad iteration '" + k + "'");
        }
    }
    return o;
}

bool known_domain(const std::string& name) {
    const auto& lib = DomainLibrary::instance();
    return lib.has(name, ValueKind::Numeric) || lib.has(name, ValueKind::Reference) || name == "parSign";
}

AbsGroup parse_group(const std::string& item) {
    auto colon = item.rfind(':');
    if (colon == std::string::npos) throw CriterionError("abstraction '" + item + "' needs var:domain");
    std::string lhs = trim(item.substr(0, colon)), dom = trim(item.substr(colon + 1));
    AbsGroup g;
    if (!lhs.empty() && lhs.front() == '{') {
        if (lhs.back() != '}') throw CriterionError("unclosed group '" + lhs + "'");
        for (const auto& v : split_top(lhs.substr(1, lhs.size() - 2), ',')) g.vars.push_back(v);
        if (dom == "signprod")
            g.kind = AbsGroup::Kind::SignProd;
        else if (dom == "parsum")
            g.kind = AbsGroup::Kind::ParSum;
        else if (g.vars.size() == 1 && known_domain(dom))
            g.domain = dom == "parSign" ? "parsign" : dom;
        else
            throw UnknownDomain("unknown relational domain '" + dom + "' (use signprod or parsum)");
        g.domain = g.kind == AbsGroup::Kind::Single ? g.domain : dom;
        return g;
    }
    if (!known_domain(dom)) throw UnknownDomain("unknown domain '" + dom + "'");
    g.vars = {lhs};
    g.domain = dom == "parSign" ? "parsign" : dom;
    return g;
}

std::pair<Int, Int> parse_range(const std::string& s) {
    auto dots = s.find("..");
    if (dots == std::string::npos) throw CriterionError("range '" + s + "' needs lo..hi");
    try {
        Int lo(trim(s.substr(0, dots))), hi(trim(s.substr(dots + 2)));
        if (lo > hi) throw CriterionError("empty range '" + s + "'");
        return {lo, hi};
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const CriterionError*>(&e)) throw;
        throw CriterionError("bad range '" + s + "'");
    }
}

DomainPtr resolve(const AbsGroup& g, const Program& p) {
    ValueKind k = p.is_ref(g.vars.front()) ? ValueKind::Reference : ValueKind::Numeric;
    return DomainLibrary::instance().get(g.domain, k);
}

}  // namespace

const AbsGroup* SlicingCriterion::group_of(const std::string& v) const {
    for (const auto& g : abs)
        if (std::find(g.vars.begin(), g.vars.end(), v) != g.vars.end()) return &g;
    return nullptr;
}

SlicingCriterion parse_criterion(const std::string& text) {
    SlicingCriterion c;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    bool have_vars = false;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw CriterionError("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        try {
            if (key == "inputs") {
                if (val == "all") {
                    c.inputs.kind = InputSpec::Kind::All;
                } else if (val == "list") {
                    c.inputs.kind = InputSpec::Kind::List;
                } else if (val.rfind("cond:", 0) == 0) {
                    c.inputs.kind = InputSpec::Kind::Cond;
                    c.inputs.cond = parse_guard(val.substr(5));
                } else {
                    throw CriterionError("inputs must be all, list or cond:<guard>");
                }
            } else if (key == "mem") {
                c.inputs.memories.push_back(parse_memory(val));
            } else if (key == "vars") {
                have_vars = true;
                for (const auto& v : split_top(val, ',')) c.vars.push_back(v);
            } else if (key == "occ") {
                std::istringstream toks(val);
                std::string tok;
                while (toks >> tok) c.occurrences.push_back(parse_occurrence(tok));
            } else if (key == "kl") {
                if (val != "true" && val != "false") throw CriterionError("kl must be true or false");
                c.kl = val == "true";
            } else if (key == "abs") {
                for (const auto& item : split_top(val, ',')) c.abs.push_back(parse_group(item));
            } else if (key == "range") {
                for (const auto& item : split_top(val, ',')) {
                    auto colon = item.find(':');
                    if (colon == std::string::npos) throw CriterionError("range needs var:lo..hi");
                    c.inputs.ranges[trim(item.substr(0, colon))] = parse_range(item.substr(colon + 1));
                }
            } else {
                throw CriterionError("unknown key '" + key + "'");
            }
        } catch (const ParseError& e) {
            throw CriterionError("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const CriterionError& e) {
            throw CriterionError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (c.inputs.kind == InputSpec::Kind::List && c.inputs.memories.empty())
        throw CriterionError("inputs=list needs at least one mem= line");
    if (!have_vars)
        for (const auto& g : c.abs)
            for (const auto& v : g.vars)
                if (std::find(c.vars.begin(), c.vars.end(), v) == c.vars.end()) c.vars.push_back(v);
    std::set<std::string> seen;
    for (const auto& g : c.abs)
        for (const auto& v : g.vars) {
            if (!seen.insert(v).second) throw CriterionError("variable " + v + " in two abstraction groups");
            if (std::find(c.vars.begin(), c.vars.end(), v) == c.vars.end())
                throw CriterionError("abstraction for " + v + " which is not in vars");
        }
    for (const auto& v : c.vars)
        if (!seen.count(v)) c.abs.push_back(AbsGroup{AbsGroup::Kind::Single, {v}, "id"});
    return c;
}

std::string criterion_to_string(const SlicingCriterion& c) {
    std::ostringstream out;
    switch (c.inputs.kind) {
        case InputSpec::Kind::All:
            out << "inputs=all\n";
            break;
        case InputSpec::Kind::List:
            out << "inputs=list\n";
            for (const auto& m : c.inputs.memories) out << "mem=" << memory_to_string(m) << "\n";
            break;
        case InputSpec::Kind::Cond:
            out << "inputs=cond:" << to_string(c.inputs.cond) << "\n";
            break;
    }
    if (!c.inputs.ranges.empty()) {
        out << "range=";
        bool first = true;
        for (const auto& [v, r] : c.inputs.ranges) {
            out << (first ? "" : ",") << v << ":" << r.first.str() << ".." << r.second.str();
            first = false;
        }
        out << "\n";
    }
    out << "vars=";
    for (std::size_t i = 0; i < c.vars.size(); ++i) out << (i ? "," : "") << c.vars[i];
    out << "\nocc=";
    for (std::size_t i = 0; i < c.occurrences.size(); ++i) {
        const auto& o = c.occurrences[i];
        out << (i ? " " : "") << point_name(o.line) << ":";
        if (o.all) {
            out << "N";
        } else {
            bool first = true;
            for (int k : o.iterations) {
                out << (first ? "" : ",") << k;
                first = false;
            }
        }
    }
    out << "\nkl=" << (c.kl ? "true" : "false") << "\nabs=";
    for (std::size_t i = 0; i < c.abs.size(); ++i) {
        const auto& g = c.abs[i];
        out << (i ? "," : "");
        if (g.kind == AbsGroup::Kind::Single) {
            out << g.vars.front() << ":" << g.domain;
        } else {
            out << "{";
            for (std::size_t j = 0; j < g.vars.size(); ++j) out << (j ? "," : "") << g.vars[j];
            out << "}:" << (g.kind == AbsGroup::Kind::SignProd ? "signprod" : "parsum");
        }
    }
    out << "\n";
    return out.str();
}

void check_criterion(SlicingCriterion& c, const Program& p) {
    auto lines = lines_of(p);
    for (const auto& o : c.occurrences)
        if (o.line != kEndLine && std::find(lines.begin(), lines.end(), o.line) == lines.end())
            throw CriterionError("occurrence line " + std::to_string(o.line) + " is not a program line");
    for (const auto& g : c.abs) {
        if (g.kind == AbsGroup::Kind::Single) {
            resolve(g, p);
            continue;
        }
        for (const auto& v : g.vars)
            if (p.is_ref(v)) throw CriterionError("relational group over reference variable " + v);
    }
}

std::vector<std::string> abstract_restrict(const Memory& m, const SlicingCriterion& c, const Program& p) {
    static const DomainPtr sign = DomainLibrary::instance().get("sign", ValueKind::Numeric);
    static const DomainPtr par = DomainLibrary::instance().get("par", ValueKind::Numeric);
    std::vector<std::string> out;
    for (const auto& g : c.abs) {
        if (g.kind == AbsGroup::Kind::Single) {
            out.push_back(resolve(g, p)->observe(m, m.get(g.vars.front())));
            continue;
        }
        bool prod = g.kind == AbsGroup::Kind::SignProd;
        Int acc = prod ? 1 : 0;
        for (const auto& v : g.vars) {
            Value x = m.get(v);
            if (!x.is_int()) throw CriterionError("relational group over non-integer " + v);
            acc = prod ? Int(acc * x.num) : Int(acc + x.num);
        }
        const Uco& d = prod ? *sign : *par;
        out.push_back(d.value_name(d.alpha_int(acc)));
    }
    return out;
}

Projection project(const Trajectory& t, const SlicingCriterion& c, const Program& p, const std::set<int>& lines) {
    auto interesting = [&](int line, int k) {
        for (const auto& o : c.occurrences)
            if (o.line == line && (o.all || o.iterations.count(k))) return true;
        return false;
    };
    Projection out;
    for (const auto& s : t.states) {
        if (interesting(s.point, s.iteration))
            out.push_back({s.point, s.iteration, false, abstract_restrict(s.memory, c, p)});
        else if (lines.count(s.point))
            out.push_back({s.point, s.iteration, true, {}});
    }
    if (t.status == RunStatus::Completed && interesting(kEndLine, 1))
        out.push_back({kEndLine, 1, false, abstract_restrict(t.final, c, p)});
    return out;
}

std::string projection_to_string(const Projection& pr) {
    std::ostringstream out;
    out << "<";
    for (std::size_t i = 0; i < pr.size(); ++i) {
        const auto& e = pr[i];
        out << (i ? ", " : "") << "(" << point_name(e.line) << "^" << e.iteration << ", ";
        if (e.marker) {
            out << "bot";
        } else {
            for (std::size_t j = 0; j < e.obs.size(); ++j) out << (j ? " " : "") << e.obs[j];
        }
        out << ")";
    }
    out << ">";
    return out.str();
}

std::vector<std::string> input_vars(const Program& p, const Program* q) {
    std::set<std::string> want = live_at_entry(p);
    auto rp = read_vars(p);
    want.insert(rp.begin(), rp.end());
    if (q) {
        auto lq = live_at_entry(*q), rq = read_vars(*q);
        want.insert(lq.begin(), lq.end());
        want.insert(rq.begin(), rq.end());
    }
    std::vector<std::string> out;
    for (const auto& v : p.var_order)
        if (want.erase(v)) out.push_back(v);
    if (q)
        for (const auto& v : q->var_order)
            if (want.erase(v)) out.push_back(v);
    out.insert(out.end(), want.begin(), want.end());
    return out;
}

namespace {

// Shapes of an input reference of class cls, as builders appending objects to a memory.
std::vector<std::function<Value(Memory&)>> shape_catalog(const Program& p, const std::string& cls) {
    std::vector<std::function<Value(Memory&)>> out;
    out.push_back([](Memory&) { return Value::null(); });
    out.push_back([&p, cls](Memory& m) { return Value::location(m.alloc(p, cls)); });
    auto c = p.classes.find(cls);
    if (c == p.classes.end()) return out;
    for (const auto& [f, t] : c->second.fields) {
        if (!t.is_ref || t.cls != cls) continue;
        std::string field = f;
        out.push_back([&p, cls, field](Memory& m) {
            auto a = m.alloc(p, cls), b = m.alloc(p, cls);
            m.heap[a].fields[field] = Value::location(b);
            return Value::location(a);
        });
        out.push_back([&p, cls, field](Memory& m) {
            auto a = m.alloc(p, cls);
            m.heap[a].fields[field] = Value::location(a);
            return Value::location(a);
        });
        out.push_back([&p, cls, field](Memory& m) {
            auto a = m.alloc(p, cls), b = m.alloc(p, cls);
            m.heap[a].fields[field] = Value::location(b);
            m.heap[b].fields[field] = Value::location(a);
            return Value::location(a);
        });
    }
    return out;
}

}  // namespace

std::vector<Memory> enumerate_memories(const Program& p, const std::vector<std::string>& vars,
                                       const EnumOptions& opt) {
    std::vector<Memory> out;
    Memory cur;
    std::function<void(std::size_t)> go = [&](std::size_t i) {
        if (i == vars.size()) {
            out.push_back(cur);
            return;
        }
        const std::string& v = vars[i];
        if (!p.is_ref(v)) {
            Int lo = -opt.bound, hi = opt.bound;
            if (auto it = opt.ranges.find(v); it != opt.ranges.end()) std::tie(lo, hi) = it->second;
            for (Int x = lo; x <= hi; ++x) {
                cur.store[v] = Value::integer(x);
                go(i + 1);
            }
            cur.store.erase(v);
            return;
        }
        std::string cls = p.type_of(v).cls;
        for (const auto& make : shape_catalog(p, cls)) {
            Memory saved = cur;
            cur.store[v] = make(cur);
            go(i + 1);
            cur = std::move(saved);
        }
        for (std::size_t j = 0; j < i; ++j) {
            const std::string& w = vars[j];
            if (!p.is_ref(w) || p.type_of(w).cls != cls || !cur.get(w).is_loc()) continue;
            if (opt.may_alias && !opt.may_alias(w, v)) continue;
            cur.store[v] = cur.get(w);
            go(i + 1);
        }
        cur.store.erase(v);
    };
    go(0);
    return out;
}

namespace {

EnumOptions with_ranges(const SlicingCriterion& c, EnumOptions opt) {
    for (const auto& [v, r] : c.inputs.ranges) opt.ranges[v] = r;
    return opt;
}

bool cond_holds(const GuardPtr& g, const Memory& m, const Program& p) {
    try {
        Memory mm = initial_memory(p, m);
        return eval_guard(g, mm, p);
    } catch (const RuntimeError&) {
        return false;
    }
}

}  // namespace

namespace {

std::vector<Memory> inputs_over(const SlicingCriterion& c, const Program& p, std::vector<std::string> vars,
                                const EnumOptions& opt) {
    if (c.inputs.kind == InputSpec::Kind::List) return c.inputs.memories;
    auto add = [&](const std::string& v) {
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    };
    if (c.inputs.cond)
        for (const auto& v : vars_of(c.inputs.cond)) add(v);
    for (const auto& [v, r] : c.inputs.ranges) add(v);
    auto all = enumerate_memories(p, vars, with_ranges(c, opt));
    if (c.inputs.kind == InputSpec::Kind::All) return all;
    std::vector<Memory> out;
    for (auto& m : all)
        if (cond_holds(c.inputs.cond, m, p)) out.push_back(std::move(m));
    return out;
}

// Input variables that can influence what c observes in p or q; the others need no enumeration.
std::vector<std::string> observed_input_vars(const SlicingCriterion& c, const Program& p, const Program& q) {
    std::set<std::string> xs(c.vars.begin(), c.vars.end()), at_exit;
    std::map<int, std::set<std::string>> observed;
    for (const auto& o : c.occurrences) {
        if (o.line == kEndLine)
            at_exit = xs;
        else
            observed[o.line] = xs;
    }
    std::set<std::string> want;
    for (const Program* prog : {&p, &q}) {
        auto live = live_at_entry(*prog, at_exit, observed), reads = read_vars(*prog);
        want.insert(live.begin(), live.end());
        want.insert(reads.begin(), reads.end());
    }
    std::vector<std::string> out;
    for (const auto& v : input_vars(p, &q))
        if (want.count(v)) out.push_back(v);
    return out;
}

}  // namespace

std::vector<Memory> criterion_inputs(const SlicingCriterion& c, const Program& p, const Program* q,
                                     const EnumOptions& opt) {
    return inputs_over(c, p, input_vars(p, q), opt);
}

bool in_inputs(const SlicingCriterion& c, const Memory& m, const Program& p, const EnumOptions& opt) {
    if (c.inputs.kind == InputSpec::Kind::List) {
        for (const auto& x : c.inputs.memories) {
            bool same = true;
            std::set<std::string> names;
            for (const auto& [v, val] : x.store) names.insert(v);
            for (const auto& [v, val] : m.store) names.insert(v);
            for (const auto& v : names)
                if (value_to_string(x, x.get(v)) != value_to_string(m, m.get(v))) same = false;
            if (same) return true;
        }
        return false;
    }
    EnumOptions o = with_ranges(c, opt);
    for (const auto& [v, val] : m.store) {
        if (!val.is_int()) continue;
        Int lo = -o.bound, hi = o.bound;
        if (auto it = o.ranges.find(v); it != o.ranges.end()) std::tie(lo, hi) = it->second;
        if (val.num < lo || val.num > hi) return false;
    }
    return c.inputs.kind == InputSpec::Kind::All || cond_holds(c.inputs.cond, m, p);
}

std::string to_string(Verdict::Kind k) {
    switch (k) {
        case Verdict::Kind::Equivalent:
            return "equivalent";
        case Verdict::Kind::Counterexample:
            return "counterexample";
        case Verdict::Kind::Inconclusive:
            return "inconclusive";
    }
    return "?";
}

Verdict equivalent(const Program& p, const Program& q, const SlicingCriterion& c, const EnumOptions& opt) {
    std::set<int> lines;
    if (c.kl) {
        auto lp = lines_of(p), lq = lines_of(q);
        std::set<int> sq(lq.begin(), lq.end());
        for (int l : lp)
            if (sq.count(l)) lines.insert(l);
    }
    Verdict v;
    for (const auto& mu : inputs_over(c, p, observed_input_vars(c, p, q), opt)) {
        Trajectory tp = run(p, mu, opt.step_limit);
        // Inputs on which the original fails are outside its domain of definition.
        if (tp.status == RunStatus::RuntimeError) continue;
        ++v.checked;
        if (tp.status == RunStatus::StepLimit) {
            v.kind = Verdict::Kind::Inconclusive;
            v.witness = mu;
            v.detail = "P: " + tp.error;
            return v;
        }
        Trajectory tq = run(q, mu, opt.step_limit);
        if (tq.status == RunStatus::StepLimit) {
            v.kind = Verdict::Kind::Inconclusive;
            v.witness = mu;
            v.detail = "Q: " + tq.error;
            return v;
        }
        if (tq.status == RunStatus::RuntimeError) {
            v.kind = Verdict::Kind::Counterexample;
            v.witness = mu;
            v.detail = "Q fails: " + tq.error;
            return v;
        }
        Projection pp = project(tp, c, p, lines), pq = project(tq, c, p, lines);
        if (pp != pq) {
            v.kind = Verdict::Kind::Counterexample;
            v.witness = mu;
            v.detail = "P: " + projection_to_string(pp) + "\nQ: " + projection_to_string(pq);
            return v;
        }
    }
    return v;
}

Verdict is_slice(const Program& p, const Program& q, const SlicingCriterion& c, const EnumOptions& opt) {
    if (!is_subprogram(q, p)) {
        Verdict v;
        v.kind = Verdict::Kind::Counterexample;
        v.detail = "not a subprogram";
        return v;
    }
    return equivalent(p, q, c, opt);
}

namespace {

bool occurrences_included(const std::vector<Occurrence>& o1, const std::vector<Occurrence>& o2) {
    std::map<int, std::pair<bool, std::set<int>>> cover;
    for (const auto& o : o2) {
        auto& [all, its] = cover[o.line];
        all = all || o.all;
        its.insert(o.iterations.begin(), o.iterations.end());
    }
    for (const auto& o : o1) {
        auto it = cover.find(o.line);
        if (it == cover.end()) return false;
        const auto& [all, its] = it->second;
        if (all) continue;
        if (o.all) return false;
        for (int k : o.iterations)
            if (!its.count(k)) return false;
    }
    return true;
}

// Whether the observation of g1 is determined by the observations c2 makes.
bool group_refined(const AbsGroup& g1, const SlicingCriterion& c2, const Program& p) {
    const auto& lib = DomainLibrary::instance();
    if (g1.kind == AbsGroup::Kind::Single) {
        const AbsGroup* g2 = c2.group_of(g1.vars.front());
        if (!g2 || g2->kind != AbsGroup::Kind::Single) return false;
        return resolve(*g2, p)->refines(*resolve(g1, p));
    }
    for (const auto& g2 : c2.abs)
        if (g2.kind == g1.kind && std::set(g2.vars.begin(), g2.vars.end()) == std::set(g1.vars.begin(), g1.vars.end()))
            return true;
    // Per-variable sign (parity) determines the sign of a product (parity of a sum).
    DomainPtr need = lib.get(g1.kind == AbsGroup::Kind::SignProd ? "sign" : "par", ValueKind::Numeric);
    for (const auto& v : g1.vars) {
        const AbsGroup* g2 = c2.group_of(v);
        if (!g2 || g2->kind != AbsGroup::Kind::Single || !resolve(*g2, p)->refines(*need)) return false;
    }
    return true;
}

}  // namespace

bool criterion_subsumes(const SlicingCriterion& c1, const SlicingCriterion& c2, const Program& p,
                        const EnumOptions& opt) {
    for (const auto& v : c1.vars)
        if (std::find(c2.vars.begin(), c2.vars.end(), v) == c2.vars.end()) return false;
    if (c1.kl && !c2.kl) return false;
    if (!occurrences_included(c1.occurrences, c2.occurrences)) return false;
    for (const auto& g : c1.abs)
        if (!group_refined(g, c2, p)) return false;
    if (c2.inputs.kind == InputSpec::Kind::All && c1.inputs.kind != InputSpec::Kind::List) {
        // Fast path: the grid of c1 lies in the grid of c2 when its ranges do.
        bool inside = true;
        EnumOptions o1 = with_ranges(c1, opt), o2 = with_ranges(c2, opt);
        for (const auto& v : input_vars(p)) {
            if (p.is_ref(v)) continue;
            auto r1 = o1.ranges.count(v) ? o1.ranges.at(v) : std::pair<Int, Int>{-opt.bound, opt.bound};
            auto r2 = o2.ranges.count(v) ? o2.ranges.at(v) : std::pair<Int, Int>{-opt.bound, opt.bound};
            if (r1.first < r2.first || r1.second > r2.second) inside = false;
        }
        if (inside) return true;
    }
    for (const auto& m : criterion_inputs(c1, p, nullptr, opt))
        if (!in_inputs(c2, m, p, opt)) return false;
    return true;
}

}  // namespace absslice
