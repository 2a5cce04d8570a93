#pragma once

#include <random>
#include <string>
#include <vector>

// Random program text over a few integer variables. Loops count a private counter up to a small
// bound, so every generated program terminates.
namespace test_gen {

class Gen {
public:
    explicit Gen(unsigned seed) : rng_(seed) {}

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
    template <class T>
    const T& pick(const std::vector<T>& xs) { return xs[uniform(0, static_cast<int>(xs.size()) - 1)]; }
    std::mt19937& rng() { return rng_; }

    std::string literal() {
        int v = uniform(-3, 3);
        return v < 0 ? "(0 - " + std::to_string(-v) + ")" : std::to_string(v);
    }

    std::string expr(const std::vector<std::string>& vars, int depth) {
        if (depth == 0 || coin(0.3)) return coin(0.7) ? pick(vars) : literal();
        int op = uniform(0, 4);
        if (op == 4) return "(" + expr(vars, depth - 1) + ") mod " + std::to_string(uniform(2, 4));
        static const char* ops[] = {" + ", " - ", " * ", " + "};
        return "(" + expr(vars, depth - 1) + ops[op] + expr(vars, depth - 1) + ")";
    }

    std::string guard(const std::vector<std::string>& vars) {
        static const std::vector<std::string> cmps = {"=", "!=", "<", "<=", ">", ">="};
        return pick(vars) + " " + pick(cmps) + " " + (coin() ? literal() : pick(vars));
    }

    std::string block(const std::vector<std::string>& vars, int depth, int n) {
        std::string out;
        for (int i = 0; i < n; ++i) out += stmt(vars, depth) + " ";
        return out;
    }

    std::string stmt(const std::vector<std::string>& vars, int depth) {
        int k = depth > 0 ? uniform(0, 5) : 0;
        if (k <= 3) return pick(vars) + " := " + expr(vars, 2) + ";";
        if (k == 4)
            return "if (" + guard(vars) + ") { " + block(vars, depth - 1, uniform(1, 2)) + "} else { " +
                   block(vars, depth - 1, uniform(0, 2)) + "}";
        std::string c = "k" + std::to_string(counter_++);
        return c + " := 0; while (" + c + " < " + std::to_string(uniform(1, 3)) + ") { " +
               block(vars, depth - 1, uniform(1, 2)) + c + " := " + c + " + 1; }";
    }

    std::string program(const std::vector<std::string>& vars, int n) {
        counter_ = 0;
        return block(vars, 2, n);
    }

private:
    std::mt19937 rng_;
    int counter_ = 0;
};

}  // namespace test_gen
