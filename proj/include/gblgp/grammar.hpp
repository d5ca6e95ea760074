#pragma once

#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gblgp/program.hpp"

namespace gblgp {

struct GrammarError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One right-hand side of a rule, pre-classified for the sampler.
struct Production {
    enum class Kind {
        Binary,         // Exp + Term
        Unary,          // sin(Arg)
        PassThrough,    // Term
        Bracketed,      // (Exp)
        ConstTerminal,  // 5
        InputTerminal,  // x2
    };

    Kind kind = Kind::PassThrough;
    OpKind op = OpKind::Load;  // Binary operator or Unary function
    int left_rule = -1;        // Binary left / Unary, PassThrough, Bracketed child
    int right_rule = -1;       // Binary right
    double value = 0.0;        // ConstTerminal payload
    int input_index = -1;      // InputTerminal dimension
    std::string text;          // original DSL token(s), for display

    bool is_terminal() const {
        return kind == Kind::ConstTerminal || kind == Kind::InputTerminal;
    }
    // True when choosing this production opens another register (binary
    // split) or re-enters the expression rule (bracketed recursion).
    bool is_recursive_split() const {
        return kind == Kind::Binary || kind == Kind::Bracketed;
    }
};

struct Rule {
    std::string lhs;
    std::vector<Production> productions;
    std::vector<double> probs;
};

// Stochastic context-free grammar: ordered rules, each carrying a
// probability distribution over its productions. Rule 0 is the start
// symbol. min_cost tables give the smallest number of instructions a
// full derivation of a production/rule can emit.
struct Grammar {
    std::vector<Rule> rules;
    int start = 0;
    std::vector<std::vector<int>> production_min_cost;
    std::vector<int> rule_min_cost;

    int rule_index(const std::string& name) const {
        for (size_t i = 0; i < rules.size(); ++i)
            if (rules[i].lhs == name) return static_cast<int>(i);
        return -1;
    }

    const Production& production(ProductionId id) const {
        return rules[static_cast<size_t>(id.rule)].productions[static_cast<size_t>(id.production)];
    }

    int input_dimension() const {
        int d = 0;
        for (const auto& r : rules)
            for (const auto& p : r.productions)
                if (p.kind == Production::Kind::InputTerminal) d = std::max(d, p.input_index + 1);
        return d;
    }

    std::vector<OpKind> operator_set() const {
        std::vector<OpKind> ops;
        for (const auto& r : rules)
            for (const auto& p : r.productions) {
                if (p.kind != Production::Kind::Binary && p.kind != Production::Kind::Unary) continue;
                bool seen = false;
                for (OpKind o : ops) seen = seen || o == p.op;
                if (!seen) ops.push_back(p.op);
            }
        return ops;
    }
};

namespace detail {

inline constexpr int kInfCost = std::numeric_limits<int>::max() / 4;

inline void compute_min_costs(Grammar& g) {
    const size_t n = g.rules.size();
    g.rule_min_cost.assign(n, kInfCost);
    g.production_min_cost.resize(n);
    for (size_t i = 0; i < n; ++i)
        g.production_min_cost[i].assign(g.rules[i].productions.size(), kInfCost);

    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < g.rules[i].productions.size(); ++j) {
                const Production& p = g.rules[i].productions[j];
                int c = kInfCost;
                switch (p.kind) {
                case Production::Kind::ConstTerminal:
                case Production::Kind::InputTerminal:
                    c = 1;
                    break;
                case Production::Kind::PassThrough:
                case Production::Kind::Bracketed:
                case Production::Kind::Unary:
                    if (g.rule_min_cost[static_cast<size_t>(p.left_rule)] < kInfCost)
                        c = 1 + g.rule_min_cost[static_cast<size_t>(p.left_rule)];
                    break;
                case Production::Kind::Binary: {
                    int l = g.rule_min_cost[static_cast<size_t>(p.left_rule)];
                    int r = g.rule_min_cost[static_cast<size_t>(p.right_rule)];
                    if (l < kInfCost && r < kInfCost) c = 1 + l + r;
                    break;
                }
                }
                if (c < g.production_min_cost[i][j]) {
                    g.production_min_cost[i][j] = c;
                    changed = true;
                }
                if (c < g.rule_min_cost[i]) {
                    g.rule_min_cost[i] = c;
                    changed = true;
                }
            }
        }
    }
}

inline std::optional<OpKind> binary_op_from_token(const std::string& t) {
    if (t == "+") return OpKind::Add;
    if (t == "-") return OpKind::Sub;
    if (t == "*") return OpKind::Mul;
    if (t == "/") return OpKind::Div;
    return std::nullopt;
}

inline std::optional<OpKind> unary_op_from_name(const std::string& t) {
    if (t == "sin") return OpKind::Sin;
    if (t == "cos") return OpKind::Cos;
    if (t == "exp") return OpKind::Exp;
    if (t == "ln") return OpKind::Ln;
    return std::nullopt;
}

inline bool is_number_token(const std::string& t) {
    if (t.empty()) return false;
    size_t pos = 0;
    try {
        (void)std::stod(t, &pos);
    } catch (...) {
        return false;
    }
    return pos == t.size();
}

}  // namespace detail

// Grammar DSL, one rule per line:
//   LHS := prodA | prodB | ... | probs p1 p2 ...
// Productions are whitespace-separated tokens; non-terminals are names
// that appear as some LHS; `(Exp)` is bracketed recursion; `sin(Arg)`
// is a unary function; numbers and x1..xD are terminals. `#` starts a
// comment. Probabilities are renormalized to sum to 1.
inline Grammar parse_grammar(std::istream& is) {
    struct RawRule {
        std::string lhs;
        std::vector<std::string> prod_texts;
        std::vector<double> probs;
        int line = 0;
    };

    std::vector<RawRule> raw;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
        bool blank = true;
        for (char c : line) blank = blank && std::isspace(static_cast<unsigned char>(c));
        if (blank) continue;

        auto sep = line.find(":=");
        if (sep == std::string::npos)
            throw GrammarError("line " + std::to_string(lineno) + ": missing ':='");
        RawRule r;
        r.line = lineno;
        {
            std::istringstream ls(line.substr(0, sep));
            if (!(ls >> r.lhs)) throw GrammarError("line " + std::to_string(lineno) + ": empty rule name");
            std::string extra;
            if (ls >> extra) throw GrammarError("line " + std::to_string(lineno) + ": bad rule name");
        }

        std::string rhs = line.substr(sep + 2);
        std::vector<std::string> chunks;
        {
            size_t begin = 0;
            while (true) {
                size_t bar = rhs.find('|', begin);
                chunks.push_back(rhs.substr(begin, bar == std::string::npos ? bar : bar - begin));
                if (bar == std::string::npos) break;
                begin = bar + 1;
            }
        }
        bool probs_seen = false;
        for (auto& chunk : chunks) {
            std::istringstream cs(chunk);
            std::vector<std::string> toks;
            std::string t;
            while (cs >> t) toks.push_back(t);
            if (toks.empty()) continue;
            if (toks[0] == "probs") {
                probs_seen = true;
                for (size_t k = 1; k < toks.size(); ++k) {
                    try {
                        r.probs.push_back(std::stod(toks[k]));
                    } catch (...) {
                        throw GrammarError("line " + std::to_string(lineno) + ": bad probability '" + toks[k] + "'");
                    }
                }
                continue;
            }
            if (probs_seen)
                throw GrammarError("line " + std::to_string(lineno) + ": production after probs");
            std::string text;
            for (size_t k = 0; k < toks.size(); ++k) text += (k ? " " : "") + toks[k];
            r.prod_texts.push_back(text);
        }
        if (r.prod_texts.empty())
            throw GrammarError("line " + std::to_string(lineno) + ": rule has no productions");
        if (!probs_seen)
            throw GrammarError("line " + std::to_string(lineno) + ": missing probs");
        raw.push_back(std::move(r));
    }
    if (raw.empty()) throw GrammarError("grammar has no rules");

    Grammar g;
    g.rules.resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) g.rules[i].lhs = raw[i].lhs;

    auto rule_of = [&](const std::string& name) { return g.rule_index(name); };

    for (size_t i = 0; i < raw.size(); ++i) {
        const RawRule& r = raw[i];
        if (r.probs.size() != r.prod_texts.size())
            throw GrammarError("line " + std::to_string(r.line) + ": " + std::to_string(r.prod_texts.size()) +
                               " productions but " + std::to_string(r.probs.size()) + " probabilities");
        double total = 0.0;
        for (double p : r.probs) {
            if (p < 0.0)
                throw GrammarError("line " + std::to_string(r.line) + ": negative probability");
            total += p;
        }
        if (total <= 0.0)
            throw GrammarError("line " + std::to_string(r.line) + ": probabilities sum to zero");
        for (double p : r.probs) g.rules[i].probs.push_back(p / total);

        for (const std::string& text : r.prod_texts) {
            std::istringstream ts(text);
            std::vector<std::string> toks;
            std::string t;
            while (ts >> t) toks.push_back(t);

            Production p;
            p.text = text;
            if (toks.size() == 3) {
                auto op = detail::binary_op_from_token(toks[1]);
                int l = rule_of(toks[0]);
                int rr = rule_of(toks[2]);
                if (!op || l < 0 || rr < 0)
                    throw GrammarError("line " + std::to_string(r.line) + ": bad binary production '" + text + "'");
                p.kind = Production::Kind::Binary;
                p.op = *op;
                p.left_rule = l;
                p.right_rule = rr;
            } else if (toks.size() == 1) {
                const std::string& tok = toks[0];
                auto open = tok.find('(');
                if (open != std::string::npos && tok.back() == ')') {
                    std::string inner = tok.substr(open + 1, tok.size() - open - 2);
                    int child = rule_of(inner);
                    if (child < 0)
                        throw GrammarError("line " + std::to_string(r.line) + ": unknown non-terminal '" + inner + "'");
                    if (open == 0) {
                        p.kind = Production::Kind::Bracketed;
                        p.left_rule = child;
                    } else {
                        auto fn = detail::unary_op_from_name(tok.substr(0, open));
                        if (!fn)
                            throw GrammarError("line " + std::to_string(r.line) + ": unknown function '" + tok + "'");
                        p.kind = Production::Kind::Unary;
                        p.op = *fn;
                        p.left_rule = child;
                    }
                } else if (int child = rule_of(tok); child >= 0) {
                    p.kind = Production::Kind::PassThrough;
                    p.left_rule = child;
                } else if (tok.size() > 1 && tok[0] == 'x' &&
                           std::isdigit(static_cast<unsigned char>(tok[1]))) {
                    p.kind = Production::Kind::InputTerminal;
                    p.input_index = std::stoi(tok.substr(1)) - 1;
                    if (p.input_index < 0)
                        throw GrammarError("line " + std::to_string(r.line) + ": bad input terminal '" + tok + "'");
                } else if (detail::is_number_token(tok)) {
                    p.kind = Production::Kind::ConstTerminal;
                    p.value = std::stod(tok);
                } else {
                    throw GrammarError("line " + std::to_string(r.line) + ": unknown non-terminal '" + tok + "'");
                }
            } else {
                throw GrammarError("line " + std::to_string(r.line) + ": bad production '" + text + "'");
            }
            g.rules[i].productions.push_back(std::move(p));
        }
    }

    detail::compute_min_costs(g);
    if (g.rule_min_cost[static_cast<size_t>(g.start)] >= detail::kInfCost)
        throw GrammarError("start rule has no terminating derivation");
    return g;
}

inline Grammar parse_grammar(const std::string& text) {
    std::istringstream is(text);
    return parse_grammar(is);
}

}  // namespace gblgp
