#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gblgp/dataset.hpp"
#include "gblgp/grammar.hpp"
#include "gblgp/mutation.hpp"
#include "gblgp/program.hpp"
#include "gblgp/sampler.hpp"
#include "gblgp/update.hpp"

namespace gblgp {

enum class Algorithm { Effmut, GbLgp, Hybrid1, Hybrid2 };

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::Effmut: return "effmut";
    case Algorithm::GbLgp: return "gblgp";
    case Algorithm::Hybrid1: return "hybrid1";
    case Algorithm::Hybrid2: return "hybrid2";
    }
    return "?";
}

inline Algorithm algorithm_from_name(const std::string& s) {
    if (s == "effmut") return Algorithm::Effmut;
    if (s == "gblgp") return Algorithm::GbLgp;
    if (s == "hybrid1") return Algorithm::Hybrid1;
    if (s == "hybrid2") return Algorithm::Hybrid2;
    throw std::invalid_argument("unknown algorithm: " + s);
}

struct AlgorithmConfig {
    Algorithm algorithm = Algorithm::Effmut;
    int population_size = 100;
    int generations = 100;
    int elite = 1;
    int tournament_size = 2;
    int registers = 8;  // 8 for effmut, 13 for the grammar-based methods
    int initial_size = 20;
    int top_n = 3;            // N best used for the grammar update
    int resample_period = 2;  // s, hybrid v1
    double alpha = 0.1;
    // 0 selects ceil(population_size / 2) steady-state steps per
    // generation, the conventional full-budget interpretation.
    int steps_per_generation = 0;
    double success_threshold = 1e-5;
    bool success_on_test = true;
    MutationConfig mutation;
    uint64_t seed = 1;

    bool grammar_based() const { return algorithm != Algorithm::Effmut; }
    int steps() const {
        return steps_per_generation > 0 ? steps_per_generation : (population_size + 1) / 2;
    }
    SamplerBudget sampler_budget() const { return {registers, mutation.max_size}; }
};

struct GenerationTelemetry {
    int generation = 0;
    double best_train_mae = 0.0;
    double best_test_mae = 0.0;
    double mean_effective_pct = 0.0;
    double mean_effective_size = 0.0;
    double mean_total_size = 0.0;
    std::vector<std::vector<double>> grammar_probs;  // grammar-based algorithms only
};

struct RunRecord {
    std::string algorithm;
    std::string benchmark;
    uint64_t seed = 0;
    std::string best_program_text;
    std::string best_expression;
    double final_train_mae = 0.0;
    double final_test_mae = 0.0;
    bool success = false;
    int best_effective_size = 0;
    int best_total_size = 0;
    std::vector<GenerationTelemetry> telemetry;
    double wall_seconds = 0.0;
};

struct EvolutionState {
    std::vector<Program> population;
    std::vector<double> fitness;  // train MAE, minimized
    int best_index = 0;

    void refresh_best() {
        best_index = 0;
        for (size_t i = 1; i < fitness.size(); ++i)
            if (fitness[i] < fitness[static_cast<size_t>(best_index)])
                best_index = static_cast<int>(i);
    }
};

// Winner = lowest fitness among `size` distinct uniformly drawn
// indices, loser = highest; ties break toward the lower index.
inline std::pair<int, int> tournament(const std::vector<double>& fitness, int size,
                                      std::mt19937_64& rng) {
    const int n = static_cast<int>(fitness.size());
    if (n == 0) throw std::invalid_argument("empty population");
    if (size > n) throw std::invalid_argument("tournament size exceeds population");
    std::vector<int> chosen;
    while (static_cast<int>(chosen.size()) < size) {
        std::uniform_int_distribution<int> pick(0, n - 1);
        int c = pick(rng);
        if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) chosen.push_back(c);
    }
    int winner = chosen[0], loser = chosen[0];
    for (int c : chosen) {
        if (fitness[static_cast<size_t>(c)] < fitness[static_cast<size_t>(winner)] ||
            (fitness[static_cast<size_t>(c)] == fitness[static_cast<size_t>(winner)] && c < winner))
            winner = c;
        if (fitness[static_cast<size_t>(c)] > fitness[static_cast<size_t>(loser)] ||
            (fitness[static_cast<size_t>(c)] == fitness[static_cast<size_t>(loser)] && c < loser))
            loser = c;
    }
    return {winner, loser};
}

// One steady-state generation: ceil(P/2) tournament steps. Each step
// copies the winner over the loser and mutates the winner slot. The
// current best individual is never a replacement target, so the best
// program always survives in the loser-slot copy.
inline void effmut_generation(EvolutionState& state, const AlgorithmConfig& cfg,
                              const Dataset& train, std::mt19937_64& rng,
                              const Grammar* grammar = nullptr) {
    const int steps = cfg.steps();
    for (int s = 0; s < steps; ++s) {
        std::pair<int, int> pair{0, 0};
        for (int tries = 0; tries < 64; ++tries) {
            pair = tournament(state.fitness, cfg.tournament_size, rng);
            if (pair.second != state.best_index) break;
        }
        auto [winner, loser] = pair;
        if (loser == state.best_index || winner == loser) continue;

        state.population[static_cast<size_t>(loser)] = state.population[static_cast<size_t>(winner)];
        state.fitness[static_cast<size_t>(loser)] = state.fitness[static_cast<size_t>(winner)];
        if (state.best_index == winner) state.best_index = loser;

        Program mutated =
            apply_variation(state.population[static_cast<size_t>(winner)], cfg.mutation, rng, grammar);
        state.population[static_cast<size_t>(winner)] = std::move(mutated);
        state.fitness[static_cast<size_t>(winner)] =
            evaluate_dataset(state.population[static_cast<size_t>(winner)], train);
        if (state.fitness[static_cast<size_t>(winner)] <
            state.fitness[static_cast<size_t>(state.best_index)])
            state.best_index = winner;
    }
}

// EDA-style generation: update the grammar from the N best, then
// resample everything but the elite from the updated grammar.
inline Grammar gblgp_generation(EvolutionState& state, const Grammar& grammar,
                                const AlgorithmConfig& cfg, const Dataset& train,
                                std::mt19937_64& rng) {
    std::vector<int> order(state.population.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return state.fitness[static_cast<size_t>(a)] < state.fitness[static_cast<size_t>(b)];
    });

    std::vector<Program> best;
    for (int k = 0; k < cfg.top_n && k < static_cast<int>(order.size()); ++k)
        best.push_back(state.population[static_cast<size_t>(order[static_cast<size_t>(k)])]);

    Grammar updated = update_probabilities(grammar, usage_proportions(best, grammar), cfg.alpha);

    // The elite is kept in canonical form (dead code stripped) so a
    // resampled population is fully effective; its outputs, and hence
    // its fitness, are unchanged.
    Program elite = effective_program(state.population[static_cast<size_t>(order[0])]);
    double elite_fit = state.fitness[static_cast<size_t>(order[0])];

    const SamplerBudget budget = cfg.sampler_budget();
    for (int i = 0; i < static_cast<int>(state.population.size()); ++i) {
        if (i == 0) {
            state.population[0] = elite;
            state.fitness[0] = elite_fit;
            continue;
        }
        state.population[static_cast<size_t>(i)] = sample_program(updated, budget, rng);
        state.fitness[static_cast<size_t>(i)] =
            evaluate_dataset(state.population[static_cast<size_t>(i)], train);
    }
    state.refresh_best();
    return updated;
}

// Hybrid v1: full grammar resample every `resample_period` generations,
// mutation-driven steady state otherwise.
inline Grammar hybrid1_generation(EvolutionState& state, const Grammar& grammar,
                                  const AlgorithmConfig& cfg, const Dataset& train,
                                  int generation_index, std::mt19937_64& rng) {
    if (generation_index % cfg.resample_period == 0)
        return gblgp_generation(state, grammar, cfg, train, rng);
    effmut_generation(state, cfg, train, rng, &grammar);
    return grammar;
}

// Hybrid v2: update the grammar from the current top N, then fill the
// next population with the elite, half freshly sampled individuals,
// and half tournament winners paired with their mutated copies.
inline Grammar hybrid2_generation(EvolutionState& state, const Grammar& grammar,
                                  const AlgorithmConfig& cfg, const Dataset& train,
                                  std::mt19937_64& rng) {
    std::vector<int> order(state.population.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return state.fitness[static_cast<size_t>(a)] < state.fitness[static_cast<size_t>(b)];
    });
    std::vector<Program> best;
    for (int k = 0; k < cfg.top_n && k < static_cast<int>(order.size()); ++k)
        best.push_back(state.population[static_cast<size_t>(order[static_cast<size_t>(k)])]);
    Grammar updated = update_probabilities(grammar, usage_proportions(best, grammar), cfg.alpha);

    const int pop = static_cast<int>(state.population.size());
    const int elite = std::min(cfg.elite, pop);
    const int sampled = (pop - elite + 1) / 2;
    const int mutated = pop - elite - sampled;

    std::vector<Program> next;
    std::vector<double> next_fit;
    next.reserve(static_cast<size_t>(pop));
    for (int k = 0; k < elite; ++k) {
        next.push_back(state.population[static_cast<size_t>(order[static_cast<size_t>(k)])]);
        next_fit.push_back(state.fitness[static_cast<size_t>(order[static_cast<size_t>(k)])]);
    }
    const SamplerBudget budget = cfg.sampler_budget();
    for (int k = 0; k < sampled; ++k) {
        next.push_back(sample_program(updated, budget, rng));
        next_fit.push_back(evaluate_dataset(next.back(), train));
    }
    while (static_cast<int>(next.size()) < pop) {
        auto [winner, loser] = tournament(state.fitness, cfg.tournament_size, rng);
        (void)loser;
        next.push_back(state.population[static_cast<size_t>(winner)]);
        next_fit.push_back(state.fitness[static_cast<size_t>(winner)]);
        if (static_cast<int>(next.size()) >= pop) break;
        next.push_back(apply_variation(state.population[static_cast<size_t>(winner)], cfg.mutation,
                                       rng, &updated));
        next_fit.push_back(evaluate_dataset(next.back(), train));
    }
    (void)mutated;

    state.population = std::move(next);
    state.fitness = std::move(next_fit);
    state.refresh_best();
    return updated;
}

namespace detail {

inline GenerationTelemetry snapshot(const EvolutionState& state, int generation,
                                    const Dataset& test, const Grammar* grammar) {
    GenerationTelemetry t;
    t.generation = generation;
    t.best_train_mae = state.fitness[static_cast<size_t>(state.best_index)];
    t.best_test_mae = evaluate_dataset(state.population[static_cast<size_t>(state.best_index)], test);
    double pct = 0.0, eff = 0.0, tot = 0.0;
    for (const auto& p : state.population) {
        int e = effective_size(p);
        pct += 100.0 * static_cast<double>(e) / static_cast<double>(p.size());
        eff += e;
        tot += p.size();
    }
    const double n = static_cast<double>(state.population.size());
    t.mean_effective_pct = pct / n;
    t.mean_effective_size = eff / n;
    t.mean_total_size = tot / n;
    if (grammar)
        for (const auto& r : grammar->rules) t.grammar_probs.push_back(r.probs);
    return t;
}

}  // namespace detail

// Runs one seeded evolution and returns the full record. Deterministic
// in (config, grammar, datasets, seed) apart from wall_seconds.
inline RunRecord run(const AlgorithmConfig& cfg, const Grammar* grammar, const Dataset& train,
                     const Dataset& test, const std::string& benchmark_name = "") {
    if (cfg.grammar_based()) {
        if (!grammar) throw std::invalid_argument("grammar-based algorithm needs a grammar");
        if (grammar->input_dimension() > train.dimension())
            throw std::invalid_argument("grammar input dimension exceeds dataset dimension");
    }
    if (train.dimension() != test.dimension())
        throw std::invalid_argument("train/test dimension mismatch");

    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(cfg.seed);

    EvolutionState state;
    state.population.reserve(static_cast<size_t>(cfg.population_size));
    const SamplerBudget budget = cfg.sampler_budget();
    for (int i = 0; i < cfg.population_size; ++i) {
        if (cfg.grammar_based())
            state.population.push_back(sample_program(*grammar, budget, rng));
        else
            state.population.push_back(
                random_program(cfg.mutation, cfg.registers, cfg.initial_size, rng));
        state.fitness.push_back(evaluate_dataset(state.population.back(), train));
    }
    state.refresh_best();

    Grammar current = cfg.grammar_based() ? *grammar : Grammar{};

    RunRecord rec;
    rec.algorithm = algorithm_name(cfg.algorithm);
    rec.benchmark = benchmark_name;
    rec.seed = cfg.seed;

    for (int g = 0; g < cfg.generations; ++g) {
        switch (cfg.algorithm) {
        case Algorithm::Effmut:
            effmut_generation(state, cfg, train, rng);
            break;
        case Algorithm::GbLgp:
            current = gblgp_generation(state, current, cfg, train, rng);
            break;
        case Algorithm::Hybrid1:
            current = hybrid1_generation(state, current, cfg, train, g, rng);
            break;
        case Algorithm::Hybrid2:
            current = hybrid2_generation(state, current, cfg, train, rng);
            break;
        }
        rec.telemetry.push_back(detail::snapshot(state, g, test,
                                                 cfg.grammar_based() ? &current : nullptr));
    }

    const Program& best = state.population[static_cast<size_t>(state.best_index)];
    rec.best_program_text = to_text(best);
    rec.best_expression = decode_expression(best);
    rec.final_train_mae = state.fitness[static_cast<size_t>(state.best_index)];
    rec.final_test_mae = evaluate_dataset(best, test);
    rec.best_effective_size = effective_size(best);
    rec.best_total_size = best.size();
    rec.success = (cfg.success_on_test ? rec.final_test_mae : rec.final_train_mae) <
                  cfg.success_threshold;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace gblgp
