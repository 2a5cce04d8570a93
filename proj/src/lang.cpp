#include "absslice/lang.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace absslice {

ExprPtr Expr::lit(Int v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Lit;
    e->value = std::move(v);
    return e;
}
ExprPtr Expr::var(std::string n) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    e->name = std::move(n);
    return e;
}
ExprPtr Expr::field(std::string base, std::vector<std::string> fs) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Field;
    e->name = std::move(base);
    e->fields = std::move(fs);
    return e;
}
ExprPtr Expr::bin(BinOp op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Bin;
    e->op = op;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}
ExprPtr Expr::cond(GuardPtr g, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Cond;
    e->guard = std::move(g);
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}
ExprPtr Expr::null() {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Null;
    return e;
}
ExprPtr Expr::make_new(std::string cls) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::New;
    e->name = std::move(cls);
    return e;
}

GuardPtr Guard::truth(bool v) {
    auto g = std::make_shared<Guard>();
    g->kind = v ? Kind::True : Kind::False;
    return g;
}
GuardPtr Guard::cmp(CmpOp op, ExprPtr l, ExprPtr r) {
    auto g = std::make_shared<Guard>();
    g->kind = Kind::Cmp;
    g->op = op;
    g->lhs = std::move(l);
    g->rhs = std::move(r);
    return g;
}
GuardPtr Guard::conj(GuardPtr a, GuardPtr b) {
    auto g = std::make_shared<Guard>();
    g->kind = Kind::And;
    g->a = std::move(a);
    g->b = std::move(b);
    return g;
}
GuardPtr Guard::disj(GuardPtr a, GuardPtr b) {
    auto g = std::make_shared<Guard>();
    g->kind = Kind::Or;
    g->a = std::move(a);
    g->b = std::move(b);
    return g;
}
GuardPtr Guard::neg(GuardPtr a) {
    auto g = std::make_shared<Guard>();
    g->kind = Kind::Not;
    g->a = std::move(a);
    return g;
}

const Type* ClassDecl::field_type(const std::string& f) const {
    for (const auto& [n, t] : fields)
        if (n == f) return &t;
    return nullptr;
}

Type Program::type_of(const std::string& v) const {
    auto it = types.find(v);
    return it == types.end() ? Type::integer() : it->second;
}

static std::string where(int l, int c) { return "line " + std::to_string(l) + ", column " + std::to_string(c); }

ParseError::ParseError(const std::string& msg, int l, int c)
    : std::runtime_error(l > 0 ? where(l, c) + ": " + msg : msg), line(l), column(c) {}

namespace {

enum class Tok { Ident, Number, Sym, End };

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    static const char* syms[] = {":=", "==", "!=", "<>", "<=", ">=", "&&", "||", "<", ">", "=", "+", "-", "*",
                                 "/",  "%",  "(",  ")",  "{",  "}",  ";",  ",",  ".", "?", ":", "!"};
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        if (c == '#') {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Tok::Ident, s.substr(i, j - i), line, col});
            adv(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            out.push_back({Tok::Number, s.substr(i, j - i), line, col});
            adv(j - i);
            continue;
        }
        bool found = false;
        for (const char* sym : syms) {
            size_t n = std::char_traits<char>::length(sym);
            if (s.compare(i, n, sym) == 0) {
                out.push_back({Tok::Sym, sym, line, col});
                adv(n);
                found = true;
                break;
            }
        }
        if (!found) throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

const std::set<std::string> kKeywords = {"skip", "if",  "else", "while", "do",  "read",  "write", "new",
                                         "null", "class", "int", "and",  "or",  "not",  "true",  "false", "mod"};

class Parser {
public:
    explicit Parser(std::vector<Token> t) : toks_(std::move(t)) {}

    Program program() {
        Program p;
        while (true) {
            if (is_ident("class")) {
                class_decl(p);
            } else if (is_decl_start(p)) {
                var_decl(p);
            } else {
                break;
            }
        }
        int next_line = 1;
        p.body = block_until_end(next_line);
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
        return p;
    }

    ExprPtr expr_only() {
        auto e = expr();
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
        return e;
    }

    GuardPtr guard_only() {
        auto g = guard();
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
        return g;
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
    std::set<std::string> class_names_;
    int last_line_ = 0;

    const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    [[noreturn]] void fail(const std::string& m) const { throw ParseError(m, peek().line, peek().col); }
    bool is_sym(const char* s, size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }
    bool is_ident(const char* s, size_t k = 0) const { return peek(k).kind == Tok::Ident && peek(k).text == s; }
    bool accept_sym(const char* s) {
        if (is_sym(s)) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect_sym(const char* s) {
        if (!accept_sym(s)) fail(std::string("expected '") + s + "'");
    }
    std::string ident() {
        if (peek().kind != Tok::Ident || kKeywords.count(peek().text)) fail("expected identifier");
        return toks_[pos_++].text;
    }

    bool is_decl_start(const Program& p) const {
        if (is_ident("int") && peek(1).kind == Tok::Ident) return true;
        return peek().kind == Tok::Ident && !kKeywords.count(peek().text) &&
               (class_names_.count(peek().text) || p.classes.count(peek().text)) && peek(1).kind == Tok::Ident;
    }

    Type type_name() {
        if (is_ident("int")) {
            ++pos_;
            return Type::integer();
        }
        return Type::ref(ident());
    }

    void class_decl(Program& p) {
        ++pos_;
        ClassDecl c;
        c.name = ident();
        class_names_.insert(c.name);
        if (p.classes.count(c.name)) fail("duplicate class " + c.name);
        expect_sym("{");
        while (!accept_sym("}")) {
            Type t = type_name();
            do {
                std::string f = ident();
                if (c.field_type(f)) fail("duplicate field " + f);
                c.fields.emplace_back(f, t);
            } while (accept_sym(","));
            expect_sym(";");
        }
        accept_sym(";");
        p.class_order.push_back(c.name);
        p.classes[c.name] = std::move(c);
    }

    void var_decl(Program& p) {
        Type t = type_name();
        do {
            std::string v = ident();
            if (p.types.count(v)) fail("duplicate declaration of " + v);
            p.types[v] = t;
            p.var_order.push_back(v);
            p.explicit_decls.push_back(v);
        } while (accept_sym(","));
        expect_sym(";");
    }

    Block block_until_end(int& next_line) {
        Block b;
        while (peek().kind != Tok::End && !is_sym("}")) b.push_back(statement(next_line));
        return b;
    }

    Block braced_or_single(int& next_line) {
        if (accept_sym("{")) {
            Block b = block_until_end(next_line);
            expect_sym("}");
            return b;
        }
        Block b;
        b.push_back(statement(next_line));
        return b;
    }

    int take_line(int& next_line) {
        int line = next_line;
        if (peek().kind == Tok::Number && is_sym(":", 1)) {
            const Token& t = peek();
            line = std::stoi(t.text);
            if (line <= last_line_) throw ParseError("line label " + t.text + " is not increasing", t.line, t.col);
            pos_ += 2;
        }
        if (line <= 0) fail("line labels start at 1");
        last_line_ = line;
        next_line = line + 1;
        return line;
    }

    std::vector<std::string> var_list() {
        std::vector<std::string> vs;
        expect_sym("(");
        if (!is_sym(")")) {
            do vs.push_back(ident());
            while (accept_sym(","));
        }
        expect_sym(")");
        return vs;
    }

    Stmt statement(int& next_line) {
        Stmt s;
        s.line = take_line(next_line);
        if (is_ident("skip")) {
            ++pos_;
            s.kind = Stmt::Kind::Skip;
        } else if (is_ident("read") || is_ident("write")) {
            s.kind = is_ident("read") ? Stmt::Kind::Read : Stmt::Kind::Write;
            ++pos_;
            s.vars = var_list();
        } else if (is_ident("if")) {
            ++pos_;
            s.kind = Stmt::Kind::If;
            expect_sym("(");
            s.guard = guard();
            expect_sym(")");
            accept_ident("then");
            s.then_block = braced_or_single(next_line);
            accept_sym(";");
            if (is_ident("else")) {
                ++pos_;
                s.else_block = braced_or_single(next_line);
            }
            accept_sym(";");
            return s;
        } else if (is_ident("while")) {
            ++pos_;
            s.kind = Stmt::Kind::While;
            expect_sym("(");
            s.guard = guard();
            expect_sym(")");
            accept_ident("do");
            s.then_block = braced_or_single(next_line);
            accept_sym(";");
            return s;
        } else {
            std::string v = ident();
            if (accept_sym(".")) {
                s.kind = Stmt::Kind::FieldUpdate;
                s.var = v;
                s.field = ident();
                if (is_sym(".")) fail("field updates take the form x.f := e");
            } else {
                s.kind = Stmt::Kind::Assign;
                s.var = v;
            }
            if (!accept_sym(":=") && !accept_sym("=")) fail("expected ':='");
            s.expr = expr();
        }
        accept_sym(";");
        return s;
    }

    bool accept_ident(const char* s) {
        if (is_ident(s)) {
            ++pos_;
            return true;
        }
        return false;
    }

    // Expressions. A conditional expression is "guard ? e1 : e2".
    ExprPtr expr() {
        size_t save = pos_;
        try {
            GuardPtr g = guard();
            if (accept_sym("?")) {
                ExprPtr a = expr();
                expect_sym(":");
                ExprPtr b = expr();
                return Expr::cond(g, a, b);
            }
        } catch (const ParseError&) {
        }
        pos_ = save;
        return sum();
    }

    ExprPtr sum() {
        ExprPtr e = term();
        while (is_sym("+") || is_sym("-")) {
            BinOp op = is_sym("+") ? BinOp::Add : BinOp::Sub;
            ++pos_;
            e = Expr::bin(op, e, term());
        }
        return e;
    }

    ExprPtr term() {
        ExprPtr e = unary();
        while (is_sym("*") || is_sym("/") || is_sym("%") || is_ident("mod")) {
            BinOp op = is_sym("*") ? BinOp::Mul : is_sym("/") ? BinOp::Div : BinOp::Mod;
            ++pos_;
            e = Expr::bin(op, e, unary());
        }
        return e;
    }

    ExprPtr unary() {
        if (accept_sym("-")) {
            if (peek().kind == Tok::Number) {
                Int v(toks_[pos_++].text);
                return Expr::lit(-v);
            }
            return Expr::bin(BinOp::Sub, Expr::lit(0), unary());
        }
        return atom();
    }

    ExprPtr atom() {
        const Token& t = peek();
        if (t.kind == Tok::Number) {
            ++pos_;
            return Expr::lit(Int(t.text));
        }
        if (accept_sym("(")) {
            ExprPtr e = expr();
            expect_sym(")");
            return e;
        }
        if (is_ident("null")) {
            ++pos_;
            return Expr::null();
        }
        if (is_ident("new")) {
            ++pos_;
            std::string c = ident();
            if (accept_sym("(")) expect_sym(")");
            return Expr::make_new(c);
        }
        std::string v = ident();
        std::vector<std::string> fs;
        while (is_sym(".") && peek(1).kind == Tok::Ident) {
            ++pos_;
            fs.push_back(ident());
        }
        return fs.empty() ? Expr::var(v) : Expr::field(v, fs);
    }

    GuardPtr guard() {
        GuardPtr g = guard_and();
        while (is_ident("or") || is_sym("||")) {
            ++pos_;
            g = Guard::disj(g, guard_and());
        }
        return g;
    }

    GuardPtr guard_and() {
        GuardPtr g = guard_not();
        while (is_ident("and") || is_sym("&&")) {
            ++pos_;
            g = Guard::conj(g, guard_not());
        }
        return g;
    }

    GuardPtr guard_not() {
        if (is_ident("not") || is_sym("!")) {
            ++pos_;
            return Guard::neg(guard_not());
        }
        if (is_ident("true") || is_ident("false")) {
            bool v = is_ident("true");
            ++pos_;
            return Guard::truth(v);
        }
        if (is_sym("(")) {
            size_t save = pos_;
            try {
                ++pos_;
                GuardPtr g = guard();
                expect_sym(")");
                if (!is_cmp_op() && !is_arith_op()) return g;
            } catch (const ParseError&) {
            }
            pos_ = save;
        }
        ExprPtr l = sum();
        if (!is_cmp_op()) fail("expected comparison");
        CmpOp op = cmp_op();
        ExprPtr r = sum();
        return Guard::cmp(op, l, r);
    }

    bool is_arith_op() const {
        return is_sym("+") || is_sym("-") || is_sym("*") || is_sym("/") || is_sym("%") || is_ident("mod");
    }
    bool is_cmp_op() const {
        return is_sym("=") || is_sym("==") || is_sym("!=") || is_sym("<>") || is_sym("<") || is_sym("<=") ||
               is_sym(">") || is_sym(">=");
    }
    CmpOp cmp_op() {
        std::string t = toks_[pos_++].text;
        if (t == "=" || t == "==") return CmpOp::Eq;
        if (t == "!=" || t == "<>") return CmpOp::Ne;
        if (t == "<") return CmpOp::Lt;
        if (t == "<=") return CmpOp::Le;
        if (t == ">") return CmpOp::Gt;
        return CmpOp::Ge;
    }
};

// ---- type checking ----

struct Checker {
    Program& p;

    [[noreturn]] void fail(const std::string& m, int line) const {
        throw ParseError("statement " + std::to_string(line) + ": " + m, 0, 0);
    }

    void note_var(const std::string& v) {
        if (!p.types.count(v)) {
            p.types[v] = Type::integer();
            p.var_order.push_back(v);
        }
    }

    // Returns the type; "null" is reported as ref with empty class.
    Type type(const ExprPtr& e, int line) {
        switch (e->kind) {
            case Expr::Kind::Lit:
                return Type::integer();
            case Expr::Kind::Var:
                note_var(e->name);
                return p.type_of(e->name);
            case Expr::Kind::Field: {
                note_var(e->name);
                Type t = p.type_of(e->name);
                for (const auto& f : e->fields) {
                    if (!t.is_ref) fail("field access on integer in " + to_string(e), line);
                    auto c = p.classes.find(t.cls);
                    if (c == p.classes.end()) fail("unknown class " + t.cls, line);
                    const Type* ft = c->second.field_type(f);
                    if (!ft) fail("class " + t.cls + " has no field " + f, line);
                    t = *ft;
                }
                return t;
            }
            case Expr::Kind::Bin: {
                Type a = type(e->lhs, line), b = type(e->rhs, line);
                if (a.is_ref || b.is_ref) fail("arithmetic on references in " + to_string(e), line);
                return Type::integer();
            }
            case Expr::Kind::Cond: {
                guard(e->guard, line);
                Type a = type(e->lhs, line), b = type(e->rhs, line);
                if (a.is_ref != b.is_ref) fail("conditional arms of different kinds", line);
                if (a.is_ref && a.cls.empty()) return b;
                if (a.is_ref && !b.cls.empty() && a.cls != b.cls) fail("conditional arms of different classes", line);
                return a;
            }
            case Expr::Kind::Null:
                return Type::ref("");
            case Expr::Kind::New:
                if (!p.classes.count(e->name)) fail("unknown class " + e->name, line);
                return Type::ref(e->name);
        }
        return Type::integer();
    }

    void guard(const GuardPtr& g, int line) {
        switch (g->kind) {
            case Guard::Kind::True:
            case Guard::Kind::False:
                return;
            case Guard::Kind::And:
            case Guard::Kind::Or:
                guard(g->a, line);
                guard(g->b, line);
                return;
            case Guard::Kind::Not:
                guard(g->a, line);
                return;
            case Guard::Kind::Cmp: {
                Type a = type(g->lhs, line), b = type(g->rhs, line);
                if (a.is_ref != b.is_ref) fail("comparison between integer and reference", line);
                if (a.is_ref && g->op != CmpOp::Eq && g->op != CmpOp::Ne) fail("ordering on references", line);
                return;
            }
        }
    }

    void assignable(const Type& target, const Type& value, int line) {
        if (target.is_ref != value.is_ref) fail("type mismatch between integer and reference", line);
        if (target.is_ref && !value.cls.empty() && value.cls != target.cls)
            fail("class mismatch: " + target.cls + " vs " + value.cls, line);
    }

    void block(const Block& b) {
        for (const auto& s : b) stmt(s);
    }

    void stmt(const Stmt& s) {
        switch (s.kind) {
            case Stmt::Kind::Skip:
                return;
            case Stmt::Kind::Assign: {
                note_var(s.var);
                assignable(p.type_of(s.var), type(s.expr, s.line), s.line);
                return;
            }
            case Stmt::Kind::FieldUpdate: {
                note_var(s.var);
                Type t = p.type_of(s.var);
                if (!t.is_ref) fail("field update on integer variable " + s.var, s.line);
                const Type* ft = p.classes.at(t.cls).field_type(s.field);
                if (!ft) fail("class " + t.cls + " has no field " + s.field, s.line);
                assignable(*ft, type(s.expr, s.line), s.line);
                return;
            }
            case Stmt::Kind::If:
                guard(s.guard, s.line);
                block(s.then_block);
                block(s.else_block);
                return;
            case Stmt::Kind::While:
                guard(s.guard, s.line);
                block(s.then_block);
                return;
            case Stmt::Kind::Read:
            case Stmt::Kind::Write:
                for (const auto& v : s.vars) note_var(v);
                return;
        }
    }

    void placement() {
        const Block& b = p.body;
        size_t i = 0;
        while (i < b.size() && b[i].kind == Stmt::Kind::Read) ++i;
        size_t j = b.size();
        while (j > i && b[j - 1].kind == Stmt::Kind::Write) --j;
        for (size_t k = i; k < j; ++k)
            if (b[k].kind == Stmt::Kind::Read || b[k].kind == Stmt::Kind::Write)
                fail(std::string(b[k].kind == Stmt::Kind::Read ? "read" : "write") +
                         (b[k].kind == Stmt::Kind::Read ? " must appear at the beginning of the program"
                                                        : " must appear at the end of the program"),
                     b[k].line);
        std::function<void(const Block&)> nested = [&](const Block& bb) {
            for (const auto& s : bb) {
                if (s.kind == Stmt::Kind::Read || s.kind == Stmt::Kind::Write)
                    fail("read/write cannot be nested", s.line);
                nested(s.then_block);
                nested(s.else_block);
            }
        };
        for (const auto& s : b) {
            nested(s.then_block);
            nested(s.else_block);
        }
    }

    void run() {
        for (const auto& [name, c] : p.classes)
            for (const auto& [f, t] : c.fields)
                if (t.is_ref && !p.classes.count(t.cls))
                    throw ParseError("unknown class " + t.cls + " for field " + name + "." + f, 0, 0);
        for (const auto& [v, t] : p.types)
            if (t.is_ref && !p.classes.count(t.cls)) throw ParseError("unknown class " + t.cls + " for " + v, 0, 0);
        block(p.body);
        placement();
    }
};

void collect(const Block& b, std::vector<const Stmt*>& out) {
    for (const auto& s : b) {
        out.push_back(&s);
        collect(s.then_block, out);
        collect(s.else_block, out);
    }
}

void expr_vars(const ExprPtr& e, std::vector<std::string>& out);
void guard_vars(const GuardPtr& g, std::vector<std::string>& out);

void add_unique(std::vector<std::string>& out, const std::string& v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

void expr_vars(const ExprPtr& e, std::vector<std::string>& out) {
    if (!e) return;
    switch (e->kind) {
        case Expr::Kind::Var:
        case Expr::Kind::Field:
            add_unique(out, e->name);
            return;
        case Expr::Kind::Bin:
            expr_vars(e->lhs, out);
            expr_vars(e->rhs, out);
            return;
        case Expr::Kind::Cond:
            guard_vars(e->guard, out);
            expr_vars(e->lhs, out);
            expr_vars(e->rhs, out);
            return;
        default:
            return;
    }
}

void guard_vars(const GuardPtr& g, std::vector<std::string>& out) {
    if (!g) return;
    switch (g->kind) {
        case Guard::Kind::Cmp:
            expr_vars(g->lhs, out);
            expr_vars(g->rhs, out);
            return;
        case Guard::Kind::And:
        case Guard::Kind::Or:
            guard_vars(g->a, out);
            guard_vars(g->b, out);
            return;
        case Guard::Kind::Not:
            guard_vars(g->a, out);
            return;
        default:
            return;
    }
}

int prec(const ExprPtr& e) {
    switch (e->kind) {
        case Expr::Kind::Cond:
            return 0;
        case Expr::Kind::Bin:
            return (e->op == BinOp::Add || e->op == BinOp::Sub) ? 1 : 2;
        default:
            return 3;
    }
}

std::string expr_str(const ExprPtr& e);

std::string wrap(const ExprPtr& e, int min_prec) {
    std::string s = expr_str(e);
    return prec(e) < min_prec ? "(" + s + ")" : s;
}

std::string guard_str(const GuardPtr& g, int ctx);

std::string expr_str(const ExprPtr& e) {
    switch (e->kind) {
        case Expr::Kind::Lit:
            return e->value < 0 ? "(" + e->value.str() + ")" : e->value.str();
        case Expr::Kind::Var:
            return e->name;
        case Expr::Kind::Field: {
            std::string s = e->name;
            for (const auto& f : e->fields) s += "." + f;
            return s;
        }
        case Expr::Kind::Bin: {
            int p = prec(e);
            // Left-associative: the right operand needs parentheses at equal precedence.
            return wrap(e->lhs, p) + " " + to_string(e->op) + " " + wrap(e->rhs, p + 1);
        }
        case Expr::Kind::Cond:
            return guard_str(e->guard, 0) + " ? " + wrap(e->lhs, 1) + " : " + wrap(e->rhs, 0);
        case Expr::Kind::Null:
            return "null";
        case Expr::Kind::New:
            return "new " + e->name;
    }
    return "?";
}

// ctx: 0 = top, 1 = inside or, 2 = inside and, 3 = inside not
std::string guard_str(const GuardPtr& g, int ctx) {
    switch (g->kind) {
        case Guard::Kind::True:
            return "true";
        case Guard::Kind::False:
            return "false";
        case Guard::Kind::Cmp:
            return expr_str(g->lhs) + " " + to_string(g->op) + " " + expr_str(g->rhs);
        case Guard::Kind::Or: {
            std::string s = guard_str(g->a, 1) + " or " + guard_str(g->b, 2);
            return ctx > 1 ? "(" + s + ")" : s;
        }
        case Guard::Kind::And: {
            std::string s = guard_str(g->a, 2) + " and " + guard_str(g->b, 3);
            return ctx > 2 ? "(" + s + ")" : s;
        }
        case Guard::Kind::Not:
            return "not (" + guard_str(g->a, 0) + ")";
    }
    return "?";
}

}  // namespace

Program parse_program(const std::string& text) {
    Parser ps(lex(text));
    Program p = ps.program();
    check_program(p);
    return p;
}

ExprPtr parse_expr(const std::string& text) { return Parser(lex(text)).expr_only(); }
GuardPtr parse_guard(const std::string& text) { return Parser(lex(text)).guard_only(); }

void check_program(Program& p) { Checker{p}.run(); }

std::vector<const Stmt*> all_stmts(const Block& b) {
    std::vector<const Stmt*> out;
    collect(b, out);
    return out;
}

std::vector<int> lines_of(const Program& p) {
    std::vector<int> out;
    for (const Stmt* s : all_stmts(p.body)) out.push_back(s->line);
    std::sort(out.begin(), out.end());
    return out;
}

const Stmt* stmt_at(const Program& p, int line) {
    for (const Stmt* s : all_stmts(p.body))
        if (s->line == line) return s;
    return nullptr;
}

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Expr::Kind::Lit:
            return a->value == b->value;
        case Expr::Kind::Var:
            return a->name == b->name;
        case Expr::Kind::Field:
            return a->name == b->name && a->fields == b->fields;
        case Expr::Kind::Bin:
            return a->op == b->op && same_expr(a->lhs, b->lhs) && same_expr(a->rhs, b->rhs);
        case Expr::Kind::Cond:
            return same_guard(a->guard, b->guard) && same_expr(a->lhs, b->lhs) && same_expr(a->rhs, b->rhs);
        case Expr::Kind::Null:
            return true;
        case Expr::Kind::New:
            return a->name == b->name;
    }
    return false;
}

bool same_guard(const GuardPtr& a, const GuardPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Guard::Kind::True:
        case Guard::Kind::False:
            return true;
        case Guard::Kind::Cmp:
            return a->op == b->op && same_expr(a->lhs, b->lhs) && same_expr(a->rhs, b->rhs);
        case Guard::Kind::And:
        case Guard::Kind::Or:
            return same_guard(a->a, b->a) && same_guard(a->b, b->b);
        case Guard::Kind::Not:
            return same_guard(a->a, b->a);
    }
    return false;
}

static bool same_block(const Block& a, const Block& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!same_stmt(a[i], b[i])) return false;
    return true;
}

bool same_stmt(const Stmt& a, const Stmt& b) {
    return a.kind == b.kind && a.line == b.line && a.var == b.var && a.field == b.field &&
           same_expr(a.expr, b.expr) && same_guard(a.guard, b.guard) && a.vars == b.vars &&
           same_block(a.then_block, b.then_block) && same_block(a.else_block, b.else_block);
}

// Statement identity at a line ignores nested blocks: erasing inside a branch keeps the header.
// q's statement a is b, or b's write with some variables dropped.
static bool same_head(const Stmt& a, const Stmt& b) {
    bool vars_ok = a.vars == b.vars;
    if (a.kind == Stmt::Kind::Write && b.kind == Stmt::Kind::Write) {
        std::size_t j = 0;
        for (const auto& v : b.vars)
            if (j < a.vars.size() && a.vars[j] == v) ++j;
        vars_ok = j == a.vars.size();
    }
    return a.kind == b.kind && a.var == b.var && a.field == b.field && same_expr(a.expr, b.expr) &&
           same_guard(a.guard, b.guard) && vars_ok;
}

bool is_subprogram(const Program& q, const Program& p) {
    std::map<int, const Stmt*> pl;
    std::map<const Stmt*, const Stmt*> parent_p;
    std::function<void(const Block&, const Stmt*)> walk = [&](const Block& b, const Stmt* parent) {
        for (const auto& s : b) {
            pl[s.line] = &s;
            parent_p[&s] = parent;
            walk(s.then_block, &s);
            walk(s.else_block, &s);
        }
    };
    walk(p.body, nullptr);
    bool ok = true;
    std::function<void(const Block&, const Stmt*)> check = [&](const Block& b, const Stmt* parent) {
        int prev = 0;
        for (const auto& s : b) {
            auto it = pl.find(s.line);
            if (it == pl.end() || !same_head(s, *it->second) || s.line <= prev) {
                ok = false;
                return;
            }
            prev = s.line;
            // Nesting must be preserved: the enclosing statement in q must be the enclosing one in p.
            const Stmt* pp = parent_p[it->second];
            if ((pp ? pp->line : 0) != (parent ? parent->line : 0)) {
                ok = false;
                return;
            }
            if (s.kind == Stmt::Kind::If) {
                // Branch membership must be preserved.
                for (const auto& t : s.then_block) {
                    bool in_then = false;
                    for (const Stmt* x : all_stmts(it->second->then_block)) in_then |= x->line == t.line;
                    if (!in_then) ok = false;
                }
                for (const auto& t : s.else_block) {
                    bool in_else = false;
                    for (const Stmt* x : all_stmts(it->second->else_block)) in_else |= x->line == t.line;
                    if (!in_else) ok = false;
                }
            }
            check(s.then_block, &s);
            check(s.else_block, &s);
        }
    };
    check(q.body, nullptr);
    return ok;
}

std::set<std::string> vars_of(const ExprPtr& e) {
    std::vector<std::string> v;
    expr_vars(e, v);
    return {v.begin(), v.end()};
}

std::set<std::string> vars_of(const GuardPtr& g) {
    std::vector<std::string> v;
    guard_vars(g, v);
    return {v.begin(), v.end()};
}

std::vector<std::string> ordered_vars(const ExprPtr& e) {
    std::vector<std::string> v;
    expr_vars(e, v);
    return v;
}

std::set<std::string> assigned_vars(const Block& b) {
    std::set<std::string> out;
    for (const Stmt* s : all_stmts(b))
        if (s->kind == Stmt::Kind::Assign || s->kind == Stmt::Kind::Read) {
            if (s->kind == Stmt::Kind::Assign) out.insert(s->var);
            for (const auto& v : s->vars) out.insert(v);
        }
    return out;
}

std::set<std::string> used_vars(const Stmt& s) {
    std::set<std::string> out;
    switch (s.kind) {
        case Stmt::Kind::Assign:
            out = vars_of(s.expr);
            break;
        case Stmt::Kind::FieldUpdate:
            out = vars_of(s.expr);
            out.insert(s.var);
            break;
        case Stmt::Kind::If:
        case Stmt::Kind::While:
            out = vars_of(s.guard);
            break;
        case Stmt::Kind::Write:
            out.insert(s.vars.begin(), s.vars.end());
            break;
        default:
            break;
    }
    return out;
}

std::set<std::string> defined_vars(const Stmt& s) {
    if (s.kind == Stmt::Kind::Assign) return {s.var};
    if (s.kind == Stmt::Kind::Read) return {s.vars.begin(), s.vars.end()};
    return {};
}

std::set<std::string> read_vars(const Program& p) {
    std::set<std::string> out;
    for (const auto& s : p.body)
        if (s.kind == Stmt::Kind::Read) out.insert(s.vars.begin(), s.vars.end());
    return out;
}

std::set<std::string> live_at_entry(const Program& p, const std::set<std::string>& at_exit,
                                    const std::map<int, std::set<std::string>>& observed) {
    // Backward liveness over the structured program; field updates do not kill.
    std::function<std::set<std::string>(const Block&, std::set<std::string>)> live_block;
    auto observe = [&](const Stmt& s, std::set<std::string>& live) {
        if (auto it = observed.find(s.line); it != observed.end()) live.insert(it->second.begin(), it->second.end());
    };
    std::function<std::set<std::string>(const Stmt&, std::set<std::string>)> transfer;
    std::function<std::set<std::string>(const Stmt&, std::set<std::string>)> live_stmt =
        [&](const Stmt& s, std::set<std::string> out) {
            auto in = transfer(s, std::move(out));
            observe(s, in);
            return in;
        };
    transfer = [&](const Stmt& s, std::set<std::string> out) -> std::set<std::string> {
        switch (s.kind) {
            case Stmt::Kind::Assign: {
                out.erase(s.var);
                auto u = vars_of(s.expr);
                out.insert(u.begin(), u.end());
                return out;
            }
            case Stmt::Kind::FieldUpdate: {
                auto u = used_vars(s);
                out.insert(u.begin(), u.end());
                return out;
            }
            case Stmt::Kind::Read:
                for (const auto& v : s.vars) out.erase(v);
                return out;
            case Stmt::Kind::Write:
                out.insert(s.vars.begin(), s.vars.end());
                return out;
            case Stmt::Kind::If: {
                auto a = live_block(s.then_block, out);
                auto b = live_block(s.else_block, out);
                a.insert(b.begin(), b.end());
                auto u = vars_of(s.guard);
                a.insert(u.begin(), u.end());
                return a;
            }
            case Stmt::Kind::While: {
                std::set<std::string> in = out;
                auto u = vars_of(s.guard);
                in.insert(u.begin(), u.end());
                observe(s, in);
                while (true) {
                    auto body_in = live_block(s.then_block, in);
                    std::set<std::string> next = in;
                    next.insert(body_in.begin(), body_in.end());
                    if (next == in) return in;
                    in = next;
                }
            }
            default:
                return out;
        }
    };
    live_block = [&](const Block& b, std::set<std::string> out) {
        for (auto it = b.rbegin(); it != b.rend(); ++it) out = live_stmt(*it, out);
        return out;
    };
    return live_block(p.body, at_exit);
}

std::set<std::string> live_at_entry(const Program& p) {
    // Every variable is observable at the exit point.
    return live_at_entry(p, {p.var_order.begin(), p.var_order.end()});
}

std::string to_string(BinOp op) {
    switch (op) {
        case BinOp::Add:
            return "+";
        case BinOp::Sub:
            return "-";
        case BinOp::Mul:
            return "*";
        case BinOp::Div:
            return "/";
        case BinOp::Mod:
            return "mod";
    }
    return "?";
}

std::string to_string(CmpOp op) {
    switch (op) {
        case CmpOp::Eq:
            return "=";
        case CmpOp::Ne:
            return "!=";
        case CmpOp::Lt:
            return "<";
        case CmpOp::Le:
            return "<=";
        case CmpOp::Gt:
            return ">";
        case CmpOp::Ge:
            return ">=";
    }
    return "?";
}

std::string to_string(const ExprPtr& e) { return e ? expr_str(e) : ""; }
std::string to_string(const GuardPtr& g) { return g ? guard_str(g, 0) : ""; }

static std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

std::string stmt_head(const Stmt& s) {
    switch (s.kind) {
        case Stmt::Kind::Skip:
            return "skip;";
        case Stmt::Kind::Assign:
            return s.var + " := " + to_string(s.expr) + ";";
        case Stmt::Kind::FieldUpdate:
            return s.var + "." + s.field + " := " + to_string(s.expr) + ";";
        case Stmt::Kind::If:
            return "if (" + to_string(s.guard) + ") {";
        case Stmt::Kind::While:
            return "while (" + to_string(s.guard) + ") {";
        case Stmt::Kind::Read:
            return "read(" + join(s.vars, ", ") + ");";
        case Stmt::Kind::Write:
            return "write(" + join(s.vars, ", ") + ");";
    }
    return "";
}

ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& by) {
    if (!e) return e;
    switch (e->kind) {
        case Expr::Kind::Var:
            return e->name == x ? by : e;
        case Expr::Kind::Field:
            if (e->name != x) return e;
            if (by->kind == Expr::Kind::Var) return Expr::field(by->name, e->fields);
            if (by->kind == Expr::Kind::Field) {
                auto fs = by->fields;
                fs.insert(fs.end(), e->fields.begin(), e->fields.end());
                return Expr::field(by->name, fs);
            }
            return nullptr;
        case Expr::Kind::Bin: {
            auto a = substitute(e->lhs, x, by), b = substitute(e->rhs, x, by);
            if (!a || !b) return nullptr;
            return Expr::bin(e->op, a, b);
        }
        case Expr::Kind::Cond: {
            auto g = substitute(e->guard, x, by);
            auto a = substitute(e->lhs, x, by), b = substitute(e->rhs, x, by);
            if (!g || !a || !b) return nullptr;
            return Expr::cond(g, a, b);
        }
        default:
            return e;
    }
}

GuardPtr substitute(const GuardPtr& g, const std::string& x, const ExprPtr& by) {
    switch (g->kind) {
        case Guard::Kind::Cmp: {
            auto a = substitute(g->lhs, x, by), b = substitute(g->rhs, x, by);
            if (!a || !b) return nullptr;
            return Guard::cmp(g->op, a, b);
        }
        case Guard::Kind::And:
        case Guard::Kind::Or: {
            auto a = substitute(g->a, x, by), b = substitute(g->b, x, by);
            if (!a || !b) return nullptr;
            return g->kind == Guard::Kind::And ? Guard::conj(a, b) : Guard::disj(a, b);
        }
        case Guard::Kind::Not: {
            auto a = substitute(g->a, x, by);
            return a ? Guard::neg(a) : nullptr;
        }
        default:
            return g;
    }
}

namespace {

struct Printer {
    const PrintOptions& opt;
    std::ostringstream out;
    int width = 1;

    std::string label(int line) const {
        std::string l = std::to_string(line) + ":";
        return l + std::string(width + 2 - l.size(), ' ');
    }
    std::string blank() const { return std::string(width + 2, ' '); }

    void emit(const std::string& prefix, int depth, const std::string& text, const std::string& comment) {
        std::string s = prefix + std::string(2 * depth, ' ') + text;
        if (!comment.empty()) s += "  // " + comment;
        while (!s.empty() && s.back() == ' ') s.pop_back();
        out << s << "\n";
    }

    std::string after(int line) const {
        auto it = opt.after.find(line);
        return it == opt.after.end() ? "" : it->second;
    }

    void gap(const Stmt& s) {
        out << "\n";
        for (const Stmt* t : all_stmts(s.then_block)) (void)t, out << "\n";
        for (const Stmt* t : all_stmts(s.else_block)) (void)t, out << "\n";
        if (s.compound()) out << "\n";
        if (s.kind == Stmt::Kind::If && !s.else_block.empty()) out << "\n";
    }

    void block(const Block& b, int depth) {
        for (const auto& s : b) stmt(s, depth);
    }

    void stmt(const Stmt& s, int depth) {
        if (opt.gaps.count(s.line)) {
            gap(s);
            return;
        }
        emit(label(s.line), depth, stmt_head(s), after(s.line));
        if (s.kind == Stmt::Kind::If || s.kind == Stmt::Kind::While) {
            block(s.then_block, depth + 1);
            std::string closing;
            if (auto it = opt.closing.find(s.line); it != opt.closing.end()) closing = it->second;
            if (s.kind == Stmt::Kind::If && !s.else_block.empty()) {
                std::string ee;
                if (auto it = opt.else_entry.find(s.line); it != opt.else_entry.end()) ee = it->second;
                emit(blank(), depth, "} else {", ee);
                block(s.else_block, depth + 1);
            }
            emit(blank(), depth, "}", closing);
        }
    }
};

}  // namespace

std::string print_program(const Program& p, const PrintOptions& opt) {
    Printer pr{opt, {}, 1};
    int maxl = 1;
    for (int l : lines_of(p)) maxl = std::max(maxl, l);
    pr.width = static_cast<int>(std::to_string(maxl).size()) + 1;
    if (opt.declarations) {
        for (const auto& cn : p.class_order) {
            const ClassDecl& c = p.classes.at(cn);
            std::string s = "class " + c.name + " {";
            for (const auto& [f, t] : c.fields) s += " " + (t.is_ref ? t.cls : std::string("int")) + " " + f + ";";
            pr.out << s << " }\n";
        }
        for (const auto& v : p.explicit_decls) {
            Type t = p.type_of(v);
            pr.out << (t.is_ref ? t.cls : std::string("int")) << " " << v << ";\n";
        }
    }
    pr.block(p.body, 0);
    if (auto it = opt.after.find(kEndLine); it != opt.after.end()) pr.out << pr.blank() << "// end: " << it->second << "\n";
    return pr.out.str();
}

static Block erase_block(const Block& b, const std::set<int>& lines) {
    Block out;
    for (const auto& s : b) {
        if (lines.count(s.line)) continue;
        Stmt t = s;
        t.then_block = erase_block(s.then_block, lines);
        t.else_block = erase_block(s.else_block, lines);
        out.push_back(std::move(t));
    }
    return out;
}

Program erase_lines(const Program& p, const std::set<int>& lines) {
    Program q = p;
    q.body = erase_block(p.body, lines);
    return q;
}

}  // namespace absslice
