#include <catch_amalgamated.hpp>

#include <deque>
#include <fstream>
#include <random>

#include "gblgp/grammar.hpp"
#include "gblgp/program.hpp"
#include "gblgp/sampler.hpp"
#include "test_helpers.hpp"

using namespace gblgp;

namespace {

Grammar arith_grammar() {
    std::ifstream is(std::string(GRAMMAR_DIR) + "/arith_x1.scfg");
    REQUIRE(is);
    return parse_grammar(is);
}

Grammar func_grammar() {
    std::ifstream is(std::string(GRAMMAR_DIR) + "/func_x1.scfg");
    REQUIRE(is);
    return parse_grammar(is);
}

// Chooser that replays a fixed script of production indices in
// derivation (leftmost) order.
struct ScriptedChooser {
    std::deque<int> script;
    int operator()(int /*rule*/, const std::vector<bool>& /*adm*/, int /*depth*/) {
        REQUIRE_FALSE(script.empty());
        int j = script.front();
        script.pop_front();
        return j;
    }
};

}  // namespace

TEST_CASE("forced derivation reproduces the x+1 encoding") {
    Grammar g = arith_grammar();
    // Exp=>Exp+Term; left: Exp=>Term=>Factor=>X=>x1; right: Term=>Factor=>Num=>1
    ScriptedChooser chooser{{0, 2, 2, 2, 0, 2, 1, 0}};
    Program p = derive_program(g, {13, 200}, chooser);

    Program expected = testutil::x_plus_one_program();
    REQUIRE(p.size() == expected.size());
    for (int i = 0; i < p.size(); ++i) {
        const auto& a = p.instructions[static_cast<size_t>(i)];
        const auto& b = expected.instructions[static_cast<size_t>(i)];
        CHECK(a.dest == b.dest);
        CHECK(a.op == b.op);
        CHECK(a.production == b.production);
    }
    CHECK(evaluate(p, {3.0}) == Catch::Approx(4.0));
    CHECK(decode_expression(p) == "x1+1");
}

TEST_CASE("single terminal start rule yields one load") {
    Grammar g = parse_grammar(std::string("S := 7 | probs 1.0\n"));
    std::mt19937_64 rng(1);
    Program p = sample_program(g, {2, 10}, rng);
    REQUIRE(p.size() == 1);
    CHECK(p.instructions[0].op == OpKind::Load);
    CHECK(evaluate(p, {}) == 7.0);
}

TEST_CASE("forced full binary derivations meet the depth/register law") {
    Grammar g = arith_grammar();
    const int exp_rule = g.rule_index("Exp");
    const int factor_rule = g.rule_index("Factor");

    for (int depth = 1; depth <= 9; ++depth) {
        auto chooser = [&](int rule, const std::vector<bool>& adm, int binary_depth) -> int {
            const auto& prods = g.rules[static_cast<size_t>(rule)].productions;
            if (binary_depth < depth) {
                for (size_t j = 0; j < prods.size(); ++j)
                    if (adm[j] && prods[j].kind == Production::Kind::Binary) return static_cast<int>(j);
                if (rule == factor_rule) return 0;  // (Exp): re-enter the binary rule
            }
            // cheapest terminating path
            int best = -1;
            for (size_t j = 0; j < prods.size(); ++j) {
                if (!adm[j]) continue;
                if (best < 0 || g.production_min_cost[static_cast<size_t>(rule)][j] <
                                    g.production_min_cost[static_cast<size_t>(rule)][static_cast<size_t>(best)])
                    best = static_cast<int>(j);
            }
            return best;
        };
        Program p = derive_program(g, {depth + 2, 1 << 16}, chooser);

        int binaries = 0;
        int peak_binary_dest = 0;
        int peak_register = 0;
        for (const auto& in : p.instructions) {
            if (is_binary(in.op)) {
                ++binaries;
                peak_binary_dest = std::max(peak_binary_dest, in.dest);
            }
            peak_register = std::max(peak_register, in.dest);
        }
        CHECK(binaries == (1 << depth) - 1);
        CHECK(peak_binary_dest == depth - 1);
        // terminal loads of the rightmost spine sit one register higher
        CHECK(peak_register == depth);
        (void)exp_rule;
    }
}

TEST_CASE("sampled programs are fully effective and within budget") {
    std::mt19937_64 rng(99);
    for (const Grammar& g : {arith_grammar(), func_grammar()}) {
        const SamplerBudget budget{13, 200};
        for (int i = 0; i < 500; ++i) {
            Program p = sample_program(g, budget, rng);
            REQUIRE_FALSE(p.empty());
            CHECK(p.size() <= budget.max_instructions);
            int peak = 0;
            for (const auto& in : p.instructions) peak = std::max(peak, in.dest);
            CHECK(peak < budget.register_count);
            CHECK(effective_size(p) == p.size());
        }
    }
}

TEST_CASE("tag replay matches decoded expressions") {
    std::mt19937_64 rng(123);
    for (const Grammar& g : {arith_grammar(), func_grammar()}) {
        for (int i = 0; i < 500; ++i) {
            Program p = sample_program(g, {13, 200}, rng);
            CHECK(expression_from_tags(g, p) == decode_expression(p));
        }
    }
}

TEST_CASE("pass-through-only grammars stay on register zero") {
    Grammar g = parse_grammar(std::string(
        "Exp := Exp + Term | Term | probs 0.0 1.0\nTerm := 1 | x1 | probs 0.5 0.5\n"));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        Program p = sample_program(g, {13, 200}, rng);
        for (const auto& in : p.instructions) CHECK(in.dest == 0);
    }
}

TEST_CASE("tight register budget masks binary splits") {
    Grammar g = arith_grammar();
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        Program p = sample_program(g, {2, 50}, rng);
        for (const auto& in : p.instructions) CHECK(in.dest < 2);
    }
    for (int i = 0; i < 200; ++i) {
        Program p = sample_program(g, {13, 10}, rng);
        CHECK(p.size() <= 10);
    }
}

TEST_CASE("unsatisfiable draws fall back to a single terminal load") {
    Grammar g = parse_grammar(std::string("Exp := Exp + Exp | 5 | probs 1.0 0.0\n"));
    std::mt19937_64 rng(3);
    Program p = sample_program(g, {2, 100}, rng);
    REQUIRE(p.size() == 1);
    CHECK(p.instructions[0].op == OpKind::Load);
    CHECK(evaluate(p, {}) == 5.0);
    CHECK(p.instructions[0].production == ProductionId{0, 1});
}

TEST_CASE("sampling is seed-reproducible") {
    Grammar g = func_grammar();
    std::mt19937_64 a(42), b(42);
    for (int i = 0; i < 50; ++i) {
        Program pa = sample_program(g, {13, 200}, a);
        Program pb = sample_program(g, {13, 200}, b);
        CHECK(to_text(pa) == to_text(pb));
    }
}
