#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "gblgp/grammar.hpp"
#include "gblgp/program.hpp"

namespace gblgp {

struct SamplerBudget {
    int register_count = 13;
    int max_instructions = 200;
};

struct SampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Recursive leftmost derivation into a linear instruction sequence.
// A derivation step at destination register k emits exactly one
// instruction, after the instructions of its sub-derivations:
//   binary      left at r[k], right at r[k+1], then r[k] = r[k] op r[k+1]
//   unary       argument at r[k], then r[k] = f(r[k])
//   pass/brack  sub-derivation at r[k], then identity r[k] = r[k]
//   terminal    load r[k] = value / input
// `budget` is the instruction allowance for this subtree; admissibility
// masks productions whose minimal completion exceeds it, and binary
// splits once the right register would reach the register count.
// The chooser receives (rule index, admissible flags, binary depth).
template <typename Chooser>
void derive(const Grammar& g, int rule, int dest, int budget, int binary_depth,
            const SamplerBudget& limits, std::vector<Instruction>& out, Chooser&& choose) {
    const Rule& r = g.rules[static_cast<size_t>(rule)];
    std::vector<bool> admissible(r.productions.size(), false);
    bool any = false;
    for (size_t j = 0; j < r.productions.size(); ++j) {
        const Production& p = r.productions[j];
        if (g.production_min_cost[static_cast<size_t>(rule)][j] > budget) continue;
        if (p.kind == Production::Kind::Binary && dest + 1 >= limits.register_count) continue;
        admissible[j] = true;
        any = true;
    }
    if (!any) throw SampleError("no admissible production for rule " + r.lhs);

    int j = choose(rule, admissible, binary_depth);
    if (j < 0 || j >= static_cast<int>(r.productions.size()) || !admissible[static_cast<size_t>(j)])
        throw SampleError("chooser returned inadmissible production");

    const Production& p = r.productions[static_cast<size_t>(j)];
    ProductionId id{rule, j};
    switch (p.kind) {
    case Production::Kind::ConstTerminal: {
        Instruction in = Instruction::load(dest, Operand::constant(p.value));
        in.production = id;
        out.push_back(in);
        break;
    }
    case Production::Kind::InputTerminal: {
        Instruction in = Instruction::load(dest, Operand::input(p.input_index));
        in.production = id;
        out.push_back(in);
        break;
    }
    case Production::Kind::PassThrough:
    case Production::Kind::Bracketed: {
        derive(g, p.left_rule, dest, budget - 1, binary_depth, limits, out, choose);
        Instruction in = Instruction::identity(dest);
        in.production = id;
        out.push_back(in);
        break;
    }
    case Production::Kind::Unary: {
        derive(g, p.left_rule, dest, budget - 1, binary_depth, limits, out, choose);
        Instruction in = Instruction::unary(dest, p.op, Operand::reg(dest));
        in.production = id;
        out.push_back(in);
        break;
    }
    case Production::Kind::Binary: {
        int right_min = g.rule_min_cost[static_cast<size_t>(p.right_rule)];
        size_t before = out.size();
        derive(g, p.left_rule, dest, budget - 1 - right_min, binary_depth + 1, limits, out, choose);
        int left_used = static_cast<int>(out.size() - before);
        derive(g, p.right_rule, dest + 1, budget - 1 - left_used, binary_depth + 1, limits, out, choose);
        Instruction in = Instruction::binary(dest, p.op, Operand::reg(dest), Operand::reg(dest + 1));
        in.production = id;
        out.push_back(in);
        break;
    }
    }
}

struct ProbChooser {
    const Grammar& grammar;
    std::mt19937_64& rng;

    int operator()(int rule, const std::vector<bool>& admissible, int /*binary_depth*/) {
        const auto& probs = grammar.rules[static_cast<size_t>(rule)].probs;
        double total = 0.0;
        for (size_t j = 0; j < probs.size(); ++j)
            if (admissible[j]) total += probs[j];
        if (total <= 0.0) throw SampleError("admissible productions all have zero probability");
        std::uniform_real_distribution<double> uni(0.0, total);
        double u = uni(rng);
        double acc = 0.0;
        int last = -1;
        for (size_t j = 0; j < probs.size(); ++j) {
            if (!admissible[j]) continue;
            last = static_cast<int>(j);
            acc += probs[j];
            if (u < acc) return last;
        }
        return last;
    }
};

}  // namespace detail

// One derivation attempt with a caller-supplied production chooser.
// Used directly by tests that force specific derivations.
template <typename Chooser>
Program derive_program(const Grammar& g, const SamplerBudget& budget, Chooser&& choose) {
    Program prog;
    prog.register_count = budget.register_count;
    detail::derive(g, g.start, 0, budget.max_instructions, 0, budget, prog.instructions,
                   std::forward<Chooser>(choose));
    return prog;
}

// Samples a program from the grammar distribution. Failed attempts
// (budget exhaustion) are redrawn up to 25 times; afterwards a single
// load of a random terminal is returned.
inline Program sample_program(const Grammar& g, const SamplerBudget& budget, std::mt19937_64& rng) {
    if (budget.register_count < 2) throw std::invalid_argument("register_count must be >= 2");
    if (budget.max_instructions < 1) throw std::invalid_argument("max_instructions must be positive");
    for (int attempt = 0; attempt < 25; ++attempt) {
        try {
            return derive_program(g, budget, detail::ProbChooser{g, rng});
        } catch (const SampleError&) {
        }
    }
    // Fallback: uniform random terminal production.
    std::vector<ProductionId> terminals;
    for (size_t i = 0; i < g.rules.size(); ++i)
        for (size_t j = 0; j < g.rules[i].productions.size(); ++j)
            if (g.rules[i].productions[j].is_terminal())
                terminals.push_back({static_cast<int>(i), static_cast<int>(j)});
    if (terminals.empty()) throw SampleError("grammar has no terminal productions");
    std::uniform_int_distribution<size_t> pick(0, terminals.size() - 1);
    ProductionId id = terminals[pick(rng)];
    const Production& p = g.production(id);
    Instruction in = p.kind == Production::Kind::ConstTerminal
                         ? Instruction::load(0, Operand::constant(p.value))
                         : Instruction::load(0, Operand::input(p.input_index));
    in.production = id;
    Program prog;
    prog.register_count = budget.register_count;
    prog.instructions.push_back(in);
    return prog;
}

// Replays stored production tags as a derivation and rebuilds the
// expression they encode. Tag order must match the sampler's postorder.
inline std::string expression_from_tags(const Grammar& g, const Program& prog) {
    std::vector<std::string> stack;
    for (const auto& in : prog.instructions) {
        if (!in.production) throw SampleError("untracked instruction in tag replay");
        const Production& p = g.production(*in.production);
        switch (p.kind) {
        case Production::Kind::ConstTerminal:
            stack.push_back(format_number(p.value));
            break;
        case Production::Kind::InputTerminal:
            stack.push_back("x" + std::to_string(p.input_index + 1));
            break;
        case Production::Kind::PassThrough:
        case Production::Kind::Bracketed:
            if (stack.empty()) throw SampleError("tag replay underflow");
            break;
        case Production::Kind::Unary: {
            if (stack.empty()) throw SampleError("tag replay underflow");
            stack.back() = std::string(op_name(p.op)) + "(" + stack.back() + ")";
            break;
        }
        case Production::Kind::Binary: {
            if (stack.size() < 2) throw SampleError("tag replay underflow");
            std::string right = stack.back();
            stack.pop_back();
            stack.back() = "(" + stack.back() + op_name(p.op) + right + ")";
            break;
        }
        }
    }
    if (stack.size() != 1) throw SampleError("tag replay did not reduce to one expression");
    std::string out = stack.back();
    if (out.size() >= 2 && out.front() == '(' && out.back() == ')') {
        int depth = 0;
        bool wraps = true;
        for (size_t i = 0; i + 1 < out.size(); ++i) {
            if (out[i] == '(') ++depth;
            if (out[i] == ')') --depth;
            if (depth == 0) { wraps = false; break; }
        }
        if (wraps) out = out.substr(1, out.size() - 2);
    }
    return out;
}

}  // namespace gblgp
