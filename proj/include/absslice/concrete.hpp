#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absslice/lang.hpp"

namespace absslice {

struct Value {
    enum class Kind { Int, Loc, Null };
    Kind kind = Kind::Int;
    Int num;
    std::size_t loc = 0;

    static Value integer(Int v) { return {Kind::Int, std::move(v), 0}; }
    static Value location(std::size_t l) { return {Kind::Loc, Int(0), l}; }
    static Value null() { return {Kind::Null, Int(0), 0}; }

    bool is_int() const { return kind == Kind::Int; }
    bool is_loc() const { return kind == Kind::Loc; }
    bool is_null() const { return kind == Kind::Null; }
    bool operator==(const Value& o) const {
        return kind == o.kind && (kind != Kind::Int || num == o.num) && (kind != Kind::Loc || loc == o.loc);
    }
};

struct Object {
    std::string cls;
    std::map<std::string, Value> fields;
};

struct Memory {
    std::map<std::string, Value> store;
    std::vector<Object> heap;

    // Missing variables read as integer 0.
    Value get(const std::string& v) const;
    void set(const std::string& v, Value val) { store[v] = std::move(val); }
    std::size_t alloc(const Program& p, const std::string& cls);
};

struct ConcreteState {
    int point = 0;
    int iteration = 0;
    Memory memory;
};

enum class RunStatus { Completed, StepLimit, RuntimeError };

struct Trajectory {
    std::vector<ConcreteState> states;
    RunStatus status = RunStatus::Completed;
    std::string error;
    Memory final;  // memory at the exit point (meaningful when completed)
};

struct RuntimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultStepLimit = 10000;

// Initial memory of p: every variable 0 or null, overridden by the given input.
Memory initial_memory(const Program& p, const Memory& input = {});

Value eval_expr(const ExprPtr& e, Memory& m, const Program& p);
bool eval_guard(const GuardPtr& g, Memory& m, const Program& p);

// Executes a statement sequence in place (no trajectory); throws RuntimeError.
// Returns false when the step budget was exhausted.
bool exec_block(const Block& b, Memory& m, const Program& p, std::size_t step_limit = kDefaultStepLimit);

Trajectory run(const Program& p, const Memory& input, std::size_t step_limit = kDefaultStepLimit);

bool is_cyclic(const Memory& m, const std::string& v);
bool is_cyclic_value(const Memory& m, const Value& v);

// Structural reference equality (numeric fields equal, reference fields equal), cycle-safe.
bool ref_equal(const Memory& m1, const Value& a, const Memory& m2, const Value& b);
// Canonical text of the reachable structure; equal signatures iff ref_equal.
std::string ref_signature(const Memory& m, const Value& v);

// "x=3, y=null, z=obj:C{next=null}"; "#k" refers to the k-th object (0-based, creation order).
Memory parse_memory(const std::string& text);
std::string value_to_string(const Memory& m, const Value& v);
std::string memory_to_string(const Memory& m, const std::vector<std::string>& order = {});
std::string point_name(int line);
std::string trajectory_to_string(const Trajectory& t, const std::vector<std::string>& order = {});
std::string to_string(RunStatus s);

}  // namespace absslice
