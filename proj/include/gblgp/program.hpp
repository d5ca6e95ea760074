#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gblgp {

// (rule index, production index) of the grammar derivation step that
// emitted an instruction. Instructions created outside a derivation
// carry no id ("untracked").
struct ProductionId {
    int rule = -1;
    int production = -1;

    friend bool operator==(const ProductionId&, const ProductionId&) = default;
};

enum class OpKind {
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Exp,
    Ln,
    Load,
    Identity,
};

inline int arity(OpKind op) {
    switch (op) {
    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Mul:
    case OpKind::Div:
        return 2;
    default:
        return 1;
    }
}

inline bool is_binary(OpKind op) { return arity(op) == 2; }
inline bool is_unary_fn(OpKind op) {
    return op == OpKind::Sin || op == OpKind::Cos || op == OpKind::Exp || op == OpKind::Ln;
}

inline const char* op_name(OpKind op) {
    switch (op) {
    case OpKind::Add: return "+";
    case OpKind::Sub: return "-";
    case OpKind::Mul: return "*";
    case OpKind::Div: return "/";
    case OpKind::Sin: return "sin";
    case OpKind::Cos: return "cos";
    case OpKind::Exp: return "exp";
    case OpKind::Ln: return "ln";
    case OpKind::Load: return "load";
    case OpKind::Identity: return "id";
    }
    return "?";
}

struct Operand {
    enum class Kind { Register, Constant, Input };

    Kind kind = Kind::Register;
    int index = 0;       // register number or input dimension
    double value = 0.0;  // constant payload

    static Operand reg(int r) { return {Kind::Register, r, 0.0}; }
    static Operand input(int i) { return {Kind::Input, i, 0.0}; }
    static Operand constant(double v) { return {Kind::Constant, 0, v}; }

    friend bool operator==(const Operand&, const Operand&) = default;
};

struct Instruction {
    int dest = 0;
    OpKind op = OpKind::Load;
    std::array<Operand, 2> args{};
    std::optional<ProductionId> production;

    static Instruction load(int dest, Operand src) {
        Instruction in;
        in.dest = dest;
        in.op = OpKind::Load;
        in.args[0] = src;
        return in;
    }

    static Instruction identity(int reg) {
        Instruction in;
        in.dest = reg;
        in.op = OpKind::Identity;
        in.args[0] = Operand::reg(reg);
        return in;
    }

    static Instruction unary(int dest, OpKind fn, Operand arg) {
        Instruction in;
        in.dest = dest;
        in.op = fn;
        in.args[0] = arg;
        return in;
    }

    static Instruction binary(int dest, OpKind op, Operand a, Operand b) {
        Instruction in;
        in.dest = dest;
        in.op = op;
        in.args[0] = a;
        in.args[1] = b;
        return in;
    }
};

// Ordered instruction sequence over a fixed register file. The dest
// register of the last instruction holds the program output.
struct Program {
    std::vector<Instruction> instructions;
    int register_count = 0;

    bool empty() const { return instructions.empty(); }
    int size() const { return static_cast<int>(instructions.size()); }
    int output_register() const { return instructions.back().dest; }
};

struct ProgramError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Any real MAE of interest is far below this.
inline constexpr double kWorstFitness = 1e12;

namespace detail {

inline double protected_div(double a, double b) {
    if (std::abs(b) < 1e-9) return 1.0;
    return a / b;
}

inline double protected_ln(double x) {
    double a = std::abs(x);
    if (a < 1e-9) return 0.0;
    return std::log(a);
}

inline double protected_exp(double x) { return std::exp(std::min(x, 32.0)); }

inline double finite_or_zero(double x) { return std::isfinite(x) ? x : 0.0; }

}  // namespace detail

inline void validate(const Program& prog, int input_dim = -1) {
    if (prog.instructions.empty()) throw ProgramError("empty program");
    if (prog.register_count <= 0) throw ProgramError("register count must be positive");
    for (const auto& in : prog.instructions) {
        if (in.dest < 0 || in.dest >= prog.register_count)
            throw ProgramError("destination register out of range");
        for (int a = 0; a < arity(in.op); ++a) {
            const Operand& o = in.args[a];
            if (o.kind == Operand::Kind::Register && (o.index < 0 || o.index >= prog.register_count))
                throw ProgramError("source register out of range");
            if (o.kind == Operand::Kind::Input && input_dim >= 0 && (o.index < 0 || o.index >= input_dim))
                throw ProgramError("input index out of range");
        }
        if (in.op == OpKind::Identity &&
            (in.args[0].kind != Operand::Kind::Register || in.args[0].index != in.dest))
            throw ProgramError("identity instruction must read its own destination");
    }
}

// Executes the program over a zero-initialized register file under
// protected semantics. Always returns a finite value.
inline double evaluate(const Program& prog, const std::vector<double>& inputs) {
    if (prog.instructions.empty()) throw ProgramError("empty program");
    std::vector<double> regs(static_cast<size_t>(prog.register_count), 0.0);

    auto fetch = [&](const Operand& o) -> double {
        switch (o.kind) {
        case Operand::Kind::Register:
            if (o.index < 0 || o.index >= prog.register_count)
                throw ProgramError("source register out of range");
            return regs[static_cast<size_t>(o.index)];
        case Operand::Kind::Input:
            if (o.index < 0 || o.index >= static_cast<int>(inputs.size()))
                throw ProgramError("input index out of range");
            return inputs[static_cast<size_t>(o.index)];
        case Operand::Kind::Constant:
            return o.value;
        }
        return 0.0;
    };

    for (const auto& in : prog.instructions) {
        if (in.dest < 0 || in.dest >= prog.register_count)
            throw ProgramError("destination register out of range");
        double r = 0.0;
        switch (in.op) {
        case OpKind::Add: r = fetch(in.args[0]) + fetch(in.args[1]); break;
        case OpKind::Sub: r = fetch(in.args[0]) - fetch(in.args[1]); break;
        case OpKind::Mul: r = fetch(in.args[0]) * fetch(in.args[1]); break;
        case OpKind::Div: r = detail::protected_div(fetch(in.args[0]), fetch(in.args[1])); break;
        case OpKind::Sin: r = std::sin(fetch(in.args[0])); break;
        case OpKind::Cos: r = std::cos(fetch(in.args[0])); break;
        case OpKind::Exp: r = detail::protected_exp(fetch(in.args[0])); break;
        case OpKind::Ln: r = detail::protected_ln(fetch(in.args[0])); break;
        case OpKind::Load:
        case OpKind::Identity: r = fetch(in.args[0]); break;
        }
        regs[static_cast<size_t>(in.dest)] = detail::finite_or_zero(r);
    }
    return regs[static_cast<size_t>(prog.output_register())];
}

// Backward liveness pass. The last instruction is effective; scanning
// backward, an instruction is effective iff its dest is live, in which
// case the dest is killed and its register sources become live.
inline std::vector<bool> effective_mask(const Program& prog) {
    const int n = prog.size();
    std::vector<bool> mask(static_cast<size_t>(n), false);
    if (n == 0) return mask;
    std::vector<bool> live(static_cast<size_t>(prog.register_count), false);
    live[static_cast<size_t>(prog.output_register())] = true;
    for (int i = n - 1; i >= 0; --i) {
        const Instruction& in = prog.instructions[static_cast<size_t>(i)];
        if (!live[static_cast<size_t>(in.dest)]) continue;
        mask[static_cast<size_t>(i)] = true;
        live[static_cast<size_t>(in.dest)] = false;
        for (int a = 0; a < arity(in.op); ++a)
            if (in.args[a].kind == Operand::Kind::Register)
                live[static_cast<size_t>(in.args[a].index)] = true;
    }
    return mask;
}

// Copy of the program with its non-effective instructions removed.
// Output-identical on every input, since dropped instructions never
// reach the output register.
inline Program effective_program(const Program& prog) {
    auto mask = effective_mask(prog);
    Program out;
    out.register_count = prog.register_count;
    for (int i = 0; i < prog.size(); ++i)
        if (mask[static_cast<size_t>(i)]) out.instructions.push_back(prog.instructions[static_cast<size_t>(i)]);
    return out;
}

inline int effective_size(const Program& prog) {
    auto mask = effective_mask(prog);
    int n = 0;
    for (bool b : mask) n += b ? 1 : 0;
    return n;
}

inline std::string format_number(double v) {
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string operand_text(const Operand& o) {
    switch (o.kind) {
    case Operand::Kind::Register: return "r[" + std::to_string(o.index) + "]";
    case Operand::Kind::Input: return "x" + std::to_string(o.index + 1);
    case Operand::Kind::Constant: return format_number(o.value);
    }
    return "?";
}

// Symbolic back-substitution of the effective instructions into an
// infix expression. Identity and load steps introduce no structure, so
// `x1+1`-style outputs fall out of sampled identity chains directly.
inline std::string decode_expression(const Program& prog) {
    validate(prog);
    auto mask = effective_mask(prog);
    std::vector<std::string> expr(static_cast<size_t>(prog.register_count), "0");

    auto operand_expr = [&](const Operand& o) -> std::string {
        if (o.kind == Operand::Kind::Register) return expr[static_cast<size_t>(o.index)];
        return operand_text(o);
    };

    for (int i = 0; i < prog.size(); ++i) {
        if (!mask[static_cast<size_t>(i)]) continue;
        const Instruction& in = prog.instructions[static_cast<size_t>(i)];
        std::string e;
        switch (in.op) {
        case OpKind::Load:
        case OpKind::Identity:
            e = operand_expr(in.args[0]);
            break;
        case OpKind::Sin:
        case OpKind::Cos:
        case OpKind::Exp:
        case OpKind::Ln:
            e = std::string(op_name(in.op)) + "(" + operand_expr(in.args[0]) + ")";
            break;
        default:
            e = "(" + operand_expr(in.args[0]) + op_name(in.op) + operand_expr(in.args[1]) + ")";
            break;
        }
        expr[static_cast<size_t>(in.dest)] = e;
    }

    std::string out = expr[static_cast<size_t>(prog.output_register())];
    // Drop redundant outermost parentheses.
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

// Line-oriented text form, e.g. `0: r[1] = x1 * 1  # prod (4,0)`.
inline std::string to_text(const Program& prog) {
    std::ostringstream os;
    for (int i = 0; i < prog.size(); ++i) {
        const Instruction& in = prog.instructions[static_cast<size_t>(i)];
        os << i << ": r[" << in.dest << "] = ";
        switch (in.op) {
        case OpKind::Load:
        case OpKind::Identity:
            os << operand_text(in.args[0]);
            break;
        case OpKind::Sin:
        case OpKind::Cos:
        case OpKind::Exp:
        case OpKind::Ln:
            os << op_name(in.op) << "(" << operand_text(in.args[0]) << ")";
            break;
        default:
            os << operand_text(in.args[0]) << " " << op_name(in.op) << " " << operand_text(in.args[1]);
            break;
        }
        if (in.production)
            os << "  # prod (" << in.production->rule << "," << in.production->production << ")";
        os << "\n";
    }
    return os.str();
}

namespace detail {

inline Operand parse_operand(const std::string& tok) {
    if (tok.size() > 3 && tok.rfind("r[", 0) == 0 && tok.back() == ']')
        return Operand::reg(std::stoi(tok.substr(2, tok.size() - 3)));
    if (tok.size() > 1 && tok[0] == 'x' && std::isdigit(static_cast<unsigned char>(tok[1])))
        return Operand::input(std::stoi(tok.substr(1)) - 1);
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw ProgramError("bad operand token: " + tok);
    return Operand::constant(v);
}

}  // namespace detail

// Parses the text form produced by to_text.
inline Program from_text(const std::string& text, int register_count) {
    Program prog;
    prog.register_count = register_count;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::optional<ProductionId> prod;
        if (auto h = line.find('#'); h != std::string::npos) {
            std::string comment = line.substr(h + 1);
            auto l = comment.find('(');
            auto c = comment.find(',');
            auto r = comment.find(')');
            if (l != std::string::npos && c != std::string::npos && r != std::string::npos)
                prod = ProductionId{std::stoi(comment.substr(l + 1, c - l - 1)),
                                    std::stoi(comment.substr(c + 1, r - c - 1))};
            line = line.substr(0, h);
        }
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        if (toks.empty()) continue;
        // "<i>:" "r[d]" "=" rhs...
        if (toks.size() < 4 || toks[2] != "=") throw ProgramError("bad instruction line: " + line);
        Operand destop = detail::parse_operand(toks[1]);
        if (destop.kind != Operand::Kind::Register) throw ProgramError("bad destination: " + line);
        int dest = destop.index;
        Instruction in;
        in.dest = dest;
        in.production = prod;
        if (toks.size() == 4) {
            std::string rhs = toks[3];
            bool unary = false;
            for (OpKind f : {OpKind::Sin, OpKind::Cos, OpKind::Exp, OpKind::Ln}) {
                std::string pre = std::string(op_name(f)) + "(";
                if (rhs.rfind(pre, 0) == 0 && rhs.back() == ')') {
                    in.op = f;
                    in.args[0] = detail::parse_operand(rhs.substr(pre.size(), rhs.size() - pre.size() - 1));
                    unary = true;
                    break;
                }
            }
            if (!unary) {
                Operand src = detail::parse_operand(rhs);
                if (src.kind == Operand::Kind::Register && src.index == dest) {
                    in.op = OpKind::Identity;
                    in.args[0] = src;
                } else {
                    in.op = OpKind::Load;
                    in.args[0] = src;
                }
            }
        } else if (toks.size() == 6) {
            std::string op = toks[4];
            if (op == "+") in.op = OpKind::Add;
            else if (op == "-") in.op = OpKind::Sub;
            else if (op == "*") in.op = OpKind::Mul;
            else if (op == "/") in.op = OpKind::Div;
            else throw ProgramError("bad operator: " + op);
            in.args[0] = detail::parse_operand(toks[3]);
            in.args[1] = detail::parse_operand(toks[5]);
        } else {
            throw ProgramError("bad instruction line: " + line);
        }
        prog.instructions.push_back(in);
    }
    if (prog.instructions.empty()) throw ProgramError("empty program text");
    return prog;
}

}  // namespace gblgp
