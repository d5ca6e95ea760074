#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <vector>

#include "gblgp/grammar.hpp"
#include "gblgp/program.hpp"

namespace gblgp {

struct MutationConfig {
    double macro_rate = 0.75;
    double insertion_prob = 0.66;
    double deletion_prob = 0.33;
    double micro_rate = 0.25;
    int min_size = 1;
    int max_size = 200;
    std::vector<int> constant_pool = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<OpKind> operator_pool = {OpKind::Add, OpKind::Sub, OpKind::Mul, OpKind::Div, OpKind::Load};
    int input_dim = 1;
};

// Maps a mutated instruction back onto a grammar production. Operators
// and terminals resolve through a direct lookup; identities resolve by
// walking the tag of the most recent writer of the argument register.
// Cascade effects on surrounding instructions are ignored.
inline std::optional<ProductionId> reassociate(const Instruction& instr, const Grammar& g,
                                               const std::vector<Instruction>& context) {
    auto find = [&](auto&& pred) -> std::optional<ProductionId> {
        for (size_t i = 0; i < g.rules.size(); ++i)
            for (size_t j = 0; j < g.rules[i].productions.size(); ++j)
                if (pred(g.rules[i].productions[j]))
                    return ProductionId{static_cast<int>(i), static_cast<int>(j)};
        return std::nullopt;
    };

    switch (instr.op) {
    case OpKind::Identity: {
        // Resolve which pass-through production applies from what the
        // argument register currently holds.
        std::optional<ProductionId> writer;
        for (auto it = context.rbegin(); it != context.rend(); ++it) {
            if (it->dest == instr.args[0].index) {
                writer = it->production;
                break;
            }
        }
        if (!writer) return std::nullopt;
        int child = writer->rule;
        return find([&](const Production& p) {
            return (p.kind == Production::Kind::PassThrough || p.kind == Production::Kind::Bracketed) &&
                   p.left_rule == child;
        });
    }
    case OpKind::Load: {
        const Operand& src = instr.args[0];
        if (src.kind == Operand::Kind::Constant)
            return find([&](const Production& p) {
                return p.kind == Production::Kind::ConstTerminal && p.value == src.value;
            });
        if (src.kind == Operand::Kind::Input)
            return find([&](const Production& p) {
                return p.kind == Production::Kind::InputTerminal && p.input_index == src.index;
            });
        return std::nullopt;
    }
    case OpKind::Sin:
    case OpKind::Cos:
    case OpKind::Exp:
    case OpKind::Ln:
        return find([&](const Production& p) {
            return p.kind == Production::Kind::Unary && p.op == instr.op;
        });
    default:
        return find([&](const Production& p) {
            return p.kind == Production::Kind::Binary && p.op == instr.op;
        });
    }
}

namespace detail {

inline Operand random_operand(const MutationConfig& cfg, int register_count, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 2);
    switch (kind(rng)) {
    case 0: {
        std::uniform_int_distribution<int> r(0, register_count - 1);
        return Operand::reg(r(rng));
    }
    case 1: {
        std::uniform_int_distribution<size_t> c(0, cfg.constant_pool.size() - 1);
        return Operand::constant(static_cast<double>(cfg.constant_pool[c(rng)]));
    }
    default: {
        std::uniform_int_distribution<int> d(0, cfg.input_dim - 1);
        return Operand::input(d(rng));
    }
    }
}

inline Instruction random_instruction(const MutationConfig& cfg, int register_count, std::mt19937_64& rng) {
    std::uniform_int_distribution<size_t> pick(0, cfg.operator_pool.size() - 1);
    OpKind op = cfg.operator_pool[pick(rng)];
    std::uniform_int_distribution<int> r(0, register_count - 1);
    Instruction in;
    in.dest = r(rng);
    in.op = op;
    in.args[0] = random_operand(cfg, register_count, rng);
    if (arity(op) == 2) in.args[1] = random_operand(cfg, register_count, rng);
    return in;
}

inline std::vector<int> effective_indices(const Program& prog) {
    auto mask = effective_mask(prog);
    std::vector<int> idx;
    for (int i = 0; i < prog.size(); ++i)
        if (mask[static_cast<size_t>(i)]) idx.push_back(i);
    return idx;
}

}  // namespace detail

inline Program random_program(const MutationConfig& cfg, int register_count, int size,
                              std::mt19937_64& rng) {
    if (size < cfg.min_size || size > cfg.max_size)
        throw std::invalid_argument("size outside [min_size, max_size]");
    Program prog;
    prog.register_count = register_count;
    for (int i = 0; i < size; ++i)
        prog.instructions.push_back(detail::random_instruction(cfg, register_count, rng));
    return prog;
}

// Effective macro-mutation: insert a random instruction whose dest is
// read by a later effective instruction (or is the output register),
// or delete a uniformly chosen effective instruction. Size clamps:
// insertion at max_size degrades to deletion, deletion at min_size is
// a no-op.
inline Program macro_mutate(const Program& prog, const MutationConfig& cfg, std::mt19937_64& rng,
                            const Grammar* grammar = nullptr) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double p_insert = cfg.insertion_prob / (cfg.insertion_prob + cfg.deletion_prob);
    bool insert = uni(rng) < p_insert;
    if (insert && prog.size() >= cfg.max_size) insert = false;

    Program out = prog;
    if (insert) {
        std::uniform_int_distribution<int> at(0, prog.size());
        int pos = at(rng);
        Instruction in = detail::random_instruction(cfg, prog.register_count, rng);
        // Effective destination: a register some later effective
        // instruction reads, or the output register when appending.
        auto mask = effective_mask(prog);
        std::vector<int> candidates;
        for (int i = pos; i < prog.size(); ++i) {
            if (!mask[static_cast<size_t>(i)]) continue;
            const Instruction& later = prog.instructions[static_cast<size_t>(i)];
            for (int a = 0; a < arity(later.op); ++a)
                if (later.args[a].kind == Operand::Kind::Register)
                    candidates.push_back(later.args[a].index);
        }
        if (candidates.empty()) {
            in.dest = prog.output_register();
        } else {
            std::uniform_int_distribution<size_t> c(0, candidates.size() - 1);
            in.dest = candidates[c(rng)];
        }
        if (grammar) {
            std::vector<Instruction> context(prog.instructions.begin(),
                                             prog.instructions.begin() + pos);
            in.production = reassociate(in, *grammar, context);
        }
        out.instructions.insert(out.instructions.begin() + pos, in);
    } else {
        if (prog.size() <= cfg.min_size) return out;
        auto idx = detail::effective_indices(prog);
        if (idx.empty()) return out;
        std::uniform_int_distribution<size_t> pick(0, idx.size() - 1);
        out.instructions.erase(out.instructions.begin() + idx[pick(rng)]);
    }
    return out;
}

// Effective micro-mutation: change one element (destination register,
// operator, or one operand) of a uniformly chosen effective
// instruction, then re-associate its production tag. Operator swaps
// stay within the same arity class; destination changes keep the tag.
inline Program micro_mutate(const Program& prog, const MutationConfig& cfg, std::mt19937_64& rng,
                            const Grammar* grammar = nullptr) {
    auto idx = detail::effective_indices(prog);
    if (idx.empty()) return prog;
    std::uniform_int_distribution<size_t> pick(0, idx.size() - 1);
    int at = idx[pick(rng)];
    Program out = prog;
    Instruction& in = out.instructions[static_cast<size_t>(at)];

    std::vector<OpKind> op_alts;
    for (OpKind o : cfg.operator_pool)
        if (o != in.op && arity(o) == arity(in.op) && (is_unary_fn(o) == is_unary_fn(in.op)) &&
            o != OpKind::Identity && in.op != OpKind::Identity && (o == OpKind::Load) == (in.op == OpKind::Load))
            op_alts.push_back(o);

    enum Element { Dest, Op, Arg };
    std::vector<Element> applicable = {Dest};
    if (!op_alts.empty()) applicable.push_back(Op);
    if (in.op != OpKind::Identity) applicable.push_back(Arg);

    std::uniform_int_distribution<size_t> which(0, applicable.size() - 1);
    bool retag = true;
    switch (applicable[which(rng)]) {
    case Dest: {
        if (prog.register_count > 1) {
            std::uniform_int_distribution<int> r(0, prog.register_count - 2);
            int nd = r(rng);
            if (nd >= in.dest) ++nd;
            in.dest = nd;
            if (in.op == OpKind::Identity) in.args[0] = Operand::reg(nd);
        }
        retag = false;  // tag depends on operator/operand only
        break;
    }
    case Op: {
        std::uniform_int_distribution<size_t> o(0, op_alts.size() - 1);
        in.op = op_alts[o(rng)];
        break;
    }
    case Arg: {
        std::uniform_int_distribution<int> slot(0, arity(in.op) - 1);
        int a = slot(rng);
        Operand cur = in.args[static_cast<size_t>(a)];
        for (int tries = 0; tries < 16; ++tries) {
            Operand alt = detail::random_operand(cfg, prog.register_count, rng);
            if (!(alt == cur)) {
                in.args[static_cast<size_t>(a)] = alt;
                break;
            }
        }
        break;
    }
    }
    if (retag && grammar) {
        std::vector<Instruction> context(out.instructions.begin(), out.instructions.begin() + at);
        in.production = reassociate(in, *grammar, context);
    }
    return out;
}

// Per-individual application policy: macro with probability macro_rate,
// independently micro with probability micro_rate; if neither fires,
// one macro-mutation is forced so the offspring differs from its
// parent.
inline Program apply_variation(const Program& prog, const MutationConfig& cfg, std::mt19937_64& rng,
                               const Grammar* grammar = nullptr) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    bool macro = uni(rng) < cfg.macro_rate;
    bool micro = uni(rng) < cfg.micro_rate;
    if (!macro && !micro) macro = true;
    Program out = prog;
    if (macro) out = macro_mutate(out, cfg, rng, grammar);
    if (micro) out = micro_mutate(out, cfg, rng, grammar);
    return out;
}

}  // namespace gblgp
