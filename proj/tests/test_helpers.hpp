#pragma once

#include <random>

#include "gblgp/mutation.hpp"
#include "gblgp/program.hpp"

namespace testutil {

using namespace gblgp;

// The four-instruction example program computing x^2 + x:
//   0: r[1] = x1 * 1
//   1: r[2] = x1 * r[1]
//   2: r[0] = r[2] + 3     (non-effective)
//   3: r[4] = r[2] + r[1]
inline Program square_plus_x_program() {
    Program p;
    p.register_count = 5;
    p.instructions = {
        Instruction::binary(1, OpKind::Mul, Operand::input(0), Operand::constant(1)),
        Instruction::binary(2, OpKind::Mul, Operand::input(0), Operand::reg(1)),
        Instruction::binary(0, OpKind::Add, Operand::reg(2), Operand::constant(3)),
        Instruction::binary(4, OpKind::Add, Operand::reg(2), Operand::reg(1)),
    };
    return p;
}

// The eight-instruction sampled encoding of x1 + 1 under the
// arithmetic grammar (rules: 0 Exp, 1 Term, 2 Factor, 3 Num, 4 X).
inline Program x_plus_one_program() {
    auto tag = [](Instruction in, int rule, int prod) {
        in.production = ProductionId{rule, prod};
        return in;
    };
    Program p;
    p.register_count = 13;
    p.instructions = {
        tag(Instruction::load(0, Operand::input(0)), 4, 0),
        tag(Instruction::identity(0), 2, 2),
        tag(Instruction::identity(0), 1, 2),
        tag(Instruction::identity(0), 0, 2),
        tag(Instruction::load(1, Operand::constant(1)), 3, 0),
        tag(Instruction::identity(1), 2, 1),
        tag(Instruction::identity(1), 1, 2),
        tag(Instruction::binary(0, OpKind::Add, Operand::reg(0), Operand::reg(1)), 0, 0),
    };
    return p;
}

inline MutationConfig arith_mutation_config(int input_dim = 1) {
    MutationConfig cfg;
    cfg.operator_pool = {OpKind::Add, OpKind::Sub, OpKind::Mul, OpKind::Div, OpKind::Load};
    cfg.input_dim = input_dim;
    return cfg;
}

}  // namespace testutil
