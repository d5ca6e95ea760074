#pragma once

#include <stdexcept>
#include <vector>

#include "gblgp/grammar.hpp"
#include "gblgp/program.hpp"

namespace gblgp {

// Per-rule usage proportions pooled over a set of tagged programs,
// mirroring the shape of Grammar probability vectors.
struct ProportionTable {
    std::vector<std::vector<double>> proportions;
    std::vector<long> rule_counts;

    bool used(int rule) const { return rule_counts[static_cast<size_t>(rule)] > 0; }
};

// Pooled counts over all tagged instructions of all programs.
// Untracked instructions are skipped; rules with zero total count are
// flagged unused.
template <typename ProgramRange>
ProportionTable usage_proportions(const ProgramRange& programs, const Grammar& g) {
    ProportionTable table;
    table.rule_counts.assign(g.rules.size(), 0);
    table.proportions.resize(g.rules.size());
    std::vector<std::vector<long>> counts(g.rules.size());
    for (size_t i = 0; i < g.rules.size(); ++i) {
        counts[i].assign(g.rules[i].productions.size(), 0);
        table.proportions[i].assign(g.rules[i].productions.size(), 0.0);
    }

    for (const Program& prog : programs) {
        for (const auto& in : prog.instructions) {
            if (!in.production) continue;
            const ProductionId id = *in.production;
            if (id.rule < 0 || id.rule >= static_cast<int>(g.rules.size()) || id.production < 0 ||
                id.production >= static_cast<int>(g.rules[static_cast<size_t>(id.rule)].productions.size()))
                throw std::out_of_range("production tag out of range");
            ++counts[static_cast<size_t>(id.rule)][static_cast<size_t>(id.production)];
            ++table.rule_counts[static_cast<size_t>(id.rule)];
        }
    }

    for (size_t i = 0; i < g.rules.size(); ++i) {
        if (table.rule_counts[i] == 0) continue;
        for (size_t j = 0; j < counts[i].size(); ++j)
            table.proportions[i][j] =
                static_cast<double>(counts[i][j]) / static_cast<double>(table.rule_counts[i]);
    }
    return table;
}

// PBIL-style convex blend: Prob' = (1-alpha)*Prob + alpha*Prop for
// every used rule; unused rules keep their previous distribution.
inline Grammar update_probabilities(const Grammar& g, const ProportionTable& table, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0,1]");
    if (table.proportions.size() != g.rules.size())
        throw std::invalid_argument("proportion table shape mismatch");
    Grammar out = g;
    for (size_t i = 0; i < g.rules.size(); ++i) {
        if (!table.used(static_cast<int>(i))) continue;
        if (table.proportions[i].size() != g.rules[i].probs.size())
            throw std::invalid_argument("proportion table shape mismatch");
        for (size_t j = 0; j < g.rules[i].probs.size(); ++j)
            out.rules[i].probs[j] = (1.0 - alpha) * g.rules[i].probs[j] + alpha * table.proportions[i][j];
    }
    return out;
}

}  // namespace gblgp
