#include <catch_amalgamated.hpp>

#include <fstream>

#include "gblgp/grammar.hpp"

using namespace gblgp;

namespace {

const char* kArithGrammar = R"(
# comment line
Exp := Exp + Term | Exp - Term | Term | probs 0.33 0.33 0.33
Term := Term * Factor | Term / Factor | Factor | probs 0.33 0.33 0.33
Factor := (Exp) | Num | X | probs 0.33 0.33 0.33
Num := 1 | 2 | 3 | 4 | 5 | 6 | 7 | 8 | 9 | probs 0.11 0.11 0.11 0.11 0.11 0.11 0.11 0.11 0.11
X := x1 | probs 1.0
)";

const char* kWeightedGrammar = R"(
Exp := Exp + Term | Exp - Term | Term | probs 0.5 0.25 0.25
Term := Term * Factor | Term / Factor | Factor | probs 0.5 0.0 0.5
Factor := (Exp) | Num | X | probs 0.1 0.1 0.8
Num := 1 | 2 | 3 | 4 | 5 | 6 | probs 0.11 0.11 0.33 0.0 0.0 0.11
X := x1 | x2 | probs 0.8 0.2
)";

}  // namespace

TEST_CASE("parse the arithmetic grammar") {
    Grammar g = parse_grammar(std::string(kArithGrammar));
    REQUIRE(g.rules.size() == 5);
    CHECK(g.rules[0].lhs == "Exp");
    REQUIRE(g.rules[0].productions.size() == 3);
    // 0.33 0.33 0.33 renormalizes to exact thirds
    for (double p : g.rules[0].probs) CHECK(p == Catch::Approx(1.0 / 3.0));
    double sum = 0.0;
    for (double p : g.rules[3].probs) sum += p;
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));

    CHECK(g.rules[0].productions[0].kind == Production::Kind::Binary);
    CHECK(g.rules[0].productions[0].op == OpKind::Add);
    CHECK(g.rules[0].productions[0].left_rule == 0);
    CHECK(g.rules[0].productions[0].right_rule == 1);
    CHECK(g.rules[0].productions[2].kind == Production::Kind::PassThrough);
    CHECK(g.rules[2].productions[0].kind == Production::Kind::Bracketed);
    CHECK(g.rules[2].productions[0].left_rule == 0);
    CHECK(g.rules[3].productions[4].kind == Production::Kind::ConstTerminal);
    CHECK(g.rules[3].productions[4].value == 5.0);
    CHECK(g.rules[4].productions[0].kind == Production::Kind::InputTerminal);
    CHECK(g.rules[4].productions[0].input_index == 0);
    CHECK(g.input_dimension() == 1);
}

TEST_CASE("parse keeps stated probability ratios") {
    Grammar g = parse_grammar(std::string(kWeightedGrammar));
    CHECK(g.rules[0].probs[0] == Catch::Approx(0.5));
    CHECK(g.rules[0].probs[1] == Catch::Approx(0.25));
    CHECK(g.rules[0].probs[2] == Catch::Approx(0.25));
    CHECK(g.rules[1].probs[1] == 0.0);
    CHECK(g.input_dimension() == 2);
}

TEST_CASE("parse unary function productions") {
    Grammar g = parse_grammar(std::string(
        "Exp := sin(Exp) | cos(Exp) | exp(Exp) | ln(Exp) | x1 | probs 0.2 0.2 0.2 0.2 0.2\n"));
    CHECK(g.rules[0].productions[0].kind == Production::Kind::Unary);
    CHECK(g.rules[0].productions[0].op == OpKind::Sin);
    CHECK(g.rules[0].productions[3].op == OpKind::Ln);
}

TEST_CASE("parse errors carry line numbers") {
    SECTION("probability count mismatch") {
        CHECK_THROWS_WITH(parse_grammar(std::string("A := 1 | 2 | 3 | probs 0.5 0.5\n")),
                          Catch::Matchers::ContainsSubstring("line 1"));
    }
    SECTION("unknown non-terminal") {
        CHECK_THROWS_WITH(parse_grammar(std::string("A := Missing | probs 1.0\n")),
                          Catch::Matchers::ContainsSubstring("unknown non-terminal"));
    }
    SECTION("negative probability") {
        CHECK_THROWS_WITH(parse_grammar(std::string("A := 1 | 2 | probs 0.5 -0.5\n")),
                          Catch::Matchers::ContainsSubstring("negative"));
    }
    SECTION("empty rule") {
        CHECK_THROWS_AS(parse_grammar(std::string("A := | probs\n")), GrammarError);
    }
    SECTION("non-terminating grammar") {
        CHECK_THROWS_WITH(parse_grammar(std::string("A := (A) | A | probs 0.5 0.5\n")),
                          Catch::Matchers::ContainsSubstring("terminating"));
    }
}

TEST_CASE("minimal derivation costs") {
    Grammar g = parse_grammar(std::string(kArithGrammar));
    // Exp -> Term -> Factor -> Num/X -> terminal: 4 instructions
    CHECK(g.rule_min_cost[0] == 4);
    CHECK(g.rule_min_cost[1] == 3);
    CHECK(g.rule_min_cost[2] == 2);
    CHECK(g.rule_min_cost[3] == 1);
    CHECK(g.rule_min_cost[4] == 1);
    // Exp + Term costs 1 + 4 + 3
    CHECK(g.production_min_cost[0][0] == 8);
}

TEST_CASE("shipped grammar files parse") {
    for (const char* name : {"arith_x1.scfg", "func_x1.scfg", "func_x3.scfg", "func_x5.scfg"}) {
        std::ifstream is(std::string(GRAMMAR_DIR) + "/" + name);
        REQUIRE(is);
        CHECK_NOTHROW(parse_grammar(is));
    }
}

TEST_CASE("operator set extraction") {
    Grammar g = parse_grammar(std::string(kArithGrammar));
    auto ops = g.operator_set();
    CHECK(ops.size() == 4);
}
