#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace absslice {

using Int = boost::multiprecision::cpp_int;

// Pseudo line number of the program exit point (the state after the last statement).
inline constexpr int kEndLine = 1 << 30;

enum class BinOp { Add, Sub, Mul, Div, Mod };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Expr;
struct Guard;
using ExprPtr = std::shared_ptr<const Expr>;
using GuardPtr = std::shared_ptr<const Guard>;

struct Expr {
    enum class Kind { Lit, Var, Field, Bin, Cond, Null, New };
    Kind kind = Kind::Lit;
    Int value;                        // Lit
    std::string name;                 // Var, Field (base variable), New (class)
    std::vector<std::string> fields;  // Field: x.f1...fn
    BinOp op = BinOp::Add;            // Bin
    ExprPtr lhs, rhs;                 // Bin operands, Cond arms
    GuardPtr guard;                   // Cond

    static ExprPtr lit(Int v);
    static ExprPtr var(std::string n);
    static ExprPtr field(std::string base, std::vector<std::string> fs);
    static ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b);
    static ExprPtr cond(GuardPtr g, ExprPtr a, ExprPtr b);
    static ExprPtr null();
    static ExprPtr make_new(std::string cls);
};

struct Guard {
    enum class Kind { True, False, Cmp, And, Or, Not };
    Kind kind = Kind::True;
    CmpOp op = CmpOp::Eq;
    ExprPtr lhs, rhs;  // Cmp
    GuardPtr a, b;     // And, Or (a, b); Not (a)

    static GuardPtr truth(bool v);
    static GuardPtr cmp(CmpOp op, ExprPtr l, ExprPtr r);
    static GuardPtr conj(GuardPtr a, GuardPtr b);
    static GuardPtr disj(GuardPtr a, GuardPtr b);
    static GuardPtr neg(GuardPtr a);
};

struct Stmt;
using Block = std::vector<Stmt>;

struct Stmt {
    enum class Kind { Skip, Assign, FieldUpdate, If, While, Read, Write };
    Kind kind = Kind::Skip;
    int line = 0;                   // logical line number (program point)
    std::string var;                // Assign / FieldUpdate target
    std::string field;              // FieldUpdate
    ExprPtr expr;                   // Assign / FieldUpdate
    GuardPtr guard;                 // If / While
    Block then_block;               // If then-branch, While body
    Block else_block;               // If else-branch
    std::vector<std::string> vars;  // Read / Write

    bool compound() const { return kind == Kind::If || kind == Kind::While; }
};

struct Type {
    bool is_ref = false;
    std::string cls;  // class name when is_ref

    bool operator==(const Type&) const = default;
    static Type integer() { return {}; }
    static Type ref(std::string c) { return {true, std::move(c)}; }
};

struct ClassDecl {
    std::string name;
    std::vector<std::pair<std::string, Type>> fields;

    const Type* field_type(const std::string& f) const;
};

struct Program {
    Block body;
    std::map<std::string, ClassDecl> classes;
    std::vector<std::string> class_order;
    std::map<std::string, Type> types;
    std::vector<std::string> var_order;  // declaration order, then first use
    std::vector<std::string> explicit_decls;

    Type type_of(const std::string& v) const;
    bool is_ref(const std::string& v) const { return type_of(v).is_ref; }
};

struct ParseError : std::runtime_error {
    int line, column;
    ParseError(const std::string& msg, int l, int c);
};

Program parse_program(const std::string& text);
ExprPtr parse_expr(const std::string& text);
GuardPtr parse_guard(const std::string& text);

// Type-checks p and fills implicit integer variables. Throws ParseError.
void check_program(Program& p);

bool is_subprogram(const Program& q, const Program& p);
const Stmt* stmt_at(const Program& p, int line);

// Traversal helpers.
std::vector<const Stmt*> all_stmts(const Block& b);
std::vector<int> lines_of(const Program& p);
std::set<std::string> vars_of(const ExprPtr& e);
std::set<std::string> vars_of(const GuardPtr& g);
std::vector<std::string> ordered_vars(const ExprPtr& e);
std::set<std::string> assigned_vars(const Block& b);
std::set<std::string> used_vars(const Stmt& s);  // direct uses (not nested blocks)
std::set<std::string> defined_vars(const Stmt& s);  // direct definitions (not nested blocks)

// Variables read before any definition in p (including uses by write).
std::set<std::string> live_at_entry(const Program& p);
// Liveness with the given variables observed at the exit and before the given lines.
std::set<std::string> live_at_entry(const Program& p, const std::set<std::string>& at_exit,
                                    const std::map<int, std::set<std::string>>& observed = {});
std::set<std::string> read_vars(const Program& p);

std::string to_string(BinOp op);
std::string to_string(CmpOp op);
std::string to_string(const ExprPtr& e);
std::string to_string(const GuardPtr& g);
std::string stmt_head(const Stmt& s);  // single-line rendering of a simple statement or compound header

bool same_expr(const ExprPtr& a, const ExprPtr& b);
bool same_guard(const GuardPtr& a, const GuardPtr& b);
bool same_stmt(const Stmt& a, const Stmt& b);  // deep structural equality

ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& by);  // nullptr if impossible
GuardPtr substitute(const GuardPtr& g, const std::string& x, const ExprPtr& by);

// Pretty printer. Statements carry explicit "N:" labels, so the output re-parses to the same program.
struct PrintOptions {
    // Statements listed here are printed as blank lines (erased), keeping their place.
    std::set<int> gaps;
    // Per-line trailing comments; key kEndLine is emitted after the last statement.
    std::map<int, std::string> after;
    // Comments for the entry of else-branches, keyed by the line of the if.
    std::map<int, std::string> else_entry;
    // Comments for the line closing an if/while, keyed by its line.
    std::map<int, std::string> closing;
    bool declarations = true;
};
std::string print_program(const Program& p, const PrintOptions& opt = {});

// Returns a copy of p where the listed statements are removed (compound statements entirely).
Program erase_lines(const Program& p, const std::set<int>& lines);

}  // namespace absslice
