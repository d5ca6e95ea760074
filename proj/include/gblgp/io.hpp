#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gblgp/evolution.hpp"
#include "gblgp/stats.hpp"

namespace gblgp {

using json = nlohmann::json;

inline json to_json(const RunRecord& rec) {
    json t = json::array();
    for (const auto& g : rec.telemetry) {
        json e = {
            {"generation", g.generation},
            {"best_train_mae", g.best_train_mae},
            {"best_test_mae", g.best_test_mae},
            {"mean_effective_pct", g.mean_effective_pct},
            {"mean_effective_size", g.mean_effective_size},
            {"mean_total_size", g.mean_total_size},
        };
        if (!g.grammar_probs.empty()) e["grammar_probs"] = g.grammar_probs;
        t.push_back(std::move(e));
    }
    return json{
        {"algorithm", rec.algorithm},
        {"benchmark", rec.benchmark},
        {"seed", rec.seed},
        {"best_program", rec.best_program_text},
        {"best_expression", rec.best_expression},
        {"final_train_mae", rec.final_train_mae},
        {"final_test_mae", rec.final_test_mae},
        {"success", rec.success},
        {"best_effective_size", rec.best_effective_size},
        {"best_total_size", rec.best_total_size},
        {"telemetry", std::move(t)},
        {"wall_seconds", rec.wall_seconds},
    };
}

inline RunRecord run_record_from_json(const json& j) {
    RunRecord rec;
    rec.algorithm = j.at("algorithm").get<std::string>();
    rec.benchmark = j.at("benchmark").get<std::string>();
    rec.seed = j.at("seed").get<uint64_t>();
    rec.best_program_text = j.at("best_program").get<std::string>();
    rec.best_expression = j.at("best_expression").get<std::string>();
    rec.final_train_mae = j.at("final_train_mae").get<double>();
    rec.final_test_mae = j.at("final_test_mae").get<double>();
    rec.success = j.at("success").get<bool>();
    rec.best_effective_size = j.at("best_effective_size").get<int>();
    rec.best_total_size = j.at("best_total_size").get<int>();
    rec.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& e : j.at("telemetry")) {
        GenerationTelemetry g;
        g.generation = e.at("generation").get<int>();
        g.best_train_mae = e.at("best_train_mae").get<double>();
        g.best_test_mae = e.at("best_test_mae").get<double>();
        g.mean_effective_pct = e.at("mean_effective_pct").get<double>();
        g.mean_effective_size = e.at("mean_effective_size").get<double>();
        g.mean_total_size = e.at("mean_total_size").get<double>();
        if (e.contains("grammar_probs"))
            g.grammar_probs = e.at("grammar_probs").get<std::vector<std::vector<double>>>();
        rec.telemetry.push_back(std::move(g));
    }
    return rec;
}

// Batch experiment description: which algorithms run on which
// benchmarks, how many seeded runs each, and where results land.
struct ExperimentManifest {
    std::vector<std::string> benchmarks;
    std::vector<std::string> algorithms;
    std::string grammar_file;
    int runs = 1;
    uint64_t base_seed = 1;
    std::string output_dir;
    json overrides;  // experiment parameter overrides by name
};

inline ExperimentManifest manifest_from_json(const json& j) {
    ExperimentManifest m;
    if (j.at("benchmarks").is_string())
        m.benchmarks = {j.at("benchmarks").get<std::string>()};
    else
        m.benchmarks = j.at("benchmarks").get<std::vector<std::string>>();
    if (j.at("algorithms").is_string())
        m.algorithms = {j.at("algorithms").get<std::string>()};
    else
        m.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    m.grammar_file = j.value("grammar", "");
    m.runs = j.value("runs", 1);
    m.base_seed = j.value("seed", uint64_t{1});
    m.output_dir = j.value("output", "");
    m.overrides = j.value("params", json::object());
    if (m.runs < 1) throw std::invalid_argument("manifest: runs must be >= 1");
    return m;
}

inline ExperimentManifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest: " + path);
    json j;
    is >> j;
    return manifest_from_json(j);
}

inline void apply_overrides(AlgorithmConfig& cfg, const json& params) {
    cfg.population_size = params.value("population_size", cfg.population_size);
    cfg.generations = params.value("generations", cfg.generations);
    cfg.elite = params.value("elite", cfg.elite);
    cfg.tournament_size = params.value("tournament_size", cfg.tournament_size);
    if (params.contains("registers")) cfg.registers = params.at("registers").get<int>();
    cfg.initial_size = params.value("initial_size", cfg.initial_size);
    cfg.top_n = params.value("n", cfg.top_n);
    cfg.resample_period = params.value("s", cfg.resample_period);
    cfg.alpha = params.value("alpha", cfg.alpha);
    cfg.steps_per_generation = params.value("steps_per_generation", cfg.steps_per_generation);
    cfg.success_threshold = params.value("success_threshold", cfg.success_threshold);
    cfg.success_on_test = params.value("success_on_test", cfg.success_on_test);
    cfg.mutation.macro_rate = params.value("macro_rate", cfg.mutation.macro_rate);
    cfg.mutation.micro_rate = params.value("micro_rate", cfg.mutation.micro_rate);
    cfg.mutation.insertion_prob = params.value("insertion", cfg.mutation.insertion_prob);
    cfg.mutation.deletion_prob = params.value("deletion", cfg.mutation.deletion_prob);
    cfg.mutation.max_size = params.value("max_size", cfg.mutation.max_size);
}

// Standard experiment defaults for one algorithm; registers differ between effmut
// and the grammar-based methods.
inline AlgorithmConfig default_config(Algorithm alg) {
    AlgorithmConfig cfg;
    cfg.algorithm = alg;
    cfg.registers = alg == Algorithm::Effmut ? 8 : 13;
    return cfg;
}

inline std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

inline void write_summary_csv(const AggregateResult& agg, std::ostream& os) {
    os << "method,runs,mmae,mad,success_rate,mean_effective_size,mean_total_size\n";
    for (const auto& s : agg.summaries)
        os << s.method << "," << s.runs << "," << csv_number(s.mmae) << "," << csv_number(s.mad)
           << "," << csv_number(s.success_rate) << "," << csv_number(s.mean_effective_size) << ","
           << csv_number(s.mean_total_size) << "\n";
}

inline void write_pairwise_csv(const AggregateResult& agg, std::ostream& os) {
    os << "method_a,method_b,statistic,p_value,significant\n";
    for (const auto& p : agg.pairwise)
        os << p.method_a << "," << p.method_b << "," << csv_number(p.statistic) << ","
           << csv_number(p.p_value) << "," << (p.significant ? 1 : 0) << "\n";
}

inline std::string summary_table_text(const AggregateResult& agg) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "Method" << std::right << std::setw(14) << "MMAE"
       << std::setw(14) << "MAD" << std::setw(10) << "Success" << std::setw(12) << "EffSize"
       << std::setw(12) << "TotSize" << "\n";
    for (const auto& s : agg.summaries) {
        os << std::left << std::setw(10) << s.method << std::right << std::setw(14)
           << std::setprecision(3) << std::scientific << s.mmae << std::setw(14) << s.mad
           << std::fixed << std::setprecision(2) << std::setw(10) << s.success_rate << std::setw(12)
           << s.mean_effective_size << std::setw(12) << s.mean_total_size << "\n";
        os.unsetf(std::ios::floatfield);
    }
    if (!agg.pairwise.empty()) {
        os << "\n" << std::left << std::setw(24) << "Pair" << std::right << std::setw(14)
           << "p-value" << "\n";
        for (const auto& p : agg.pairwise) {
            os << std::left << std::setw(24) << (p.method_a + " x " + p.method_b) << std::right
               << std::setw(14) << std::setprecision(3) << std::scientific << p.p_value << "\n";
            os.unsetf(std::ios::floatfield);
        }
    }
    return os.str();
}

// Mean per-generation effective-code percentage per method, one column
// per method.
inline void write_effective_code_csv(const std::map<std::string, std::vector<RunRecord>>& by_method,
                                     std::ostream& os) {
    os << "generation";
    size_t gens = 0;
    for (const auto& [m, recs] : by_method) {
        os << "," << m;
        for (const auto& r : recs) gens = std::max(gens, r.telemetry.size());
    }
    os << "\n";
    for (size_t g = 0; g < gens; ++g) {
        os << g;
        for (const auto& [m, recs] : by_method) {
            double sum = 0.0;
            int n = 0;
            for (const auto& r : recs)
                if (g < r.telemetry.size()) {
                    sum += r.telemetry[g].mean_effective_pct;
                    ++n;
                }
            os << "," << (n ? csv_number(sum / n) : std::string(""));
        }
        os << "\n";
    }
}

// Mean probability trace per production per generation, for the rules
// of one method's grammar snapshots.
inline void write_probability_trace_csv(const std::vector<RunRecord>& recs, const Grammar& grammar,
                                        std::ostream& os) {
    os << "generation";
    for (size_t i = 0; i < grammar.rules.size(); ++i)
        for (size_t j = 0; j < grammar.rules[i].productions.size(); ++j)
            os << "," << grammar.rules[i].lhs << ":" << grammar.rules[i].productions[j].text;
    os << "\n";
    size_t gens = 0;
    for (const auto& r : recs) gens = std::max(gens, r.telemetry.size());
    for (size_t g = 0; g < gens; ++g) {
        os << g;
        for (size_t i = 0; i < grammar.rules.size(); ++i) {
            for (size_t j = 0; j < grammar.rules[i].productions.size(); ++j) {
                double sum = 0.0;
                int n = 0;
                for (const auto& r : recs) {
                    if (g >= r.telemetry.size()) continue;
                    const auto& probs = r.telemetry[g].grammar_probs;
                    if (i < probs.size() && j < probs[i].size()) {
                        sum += probs[i][j];
                        ++n;
                    }
                }
                os << "," << (n ? csv_number(sum / n) : std::string(""));
            }
        }
        os << "\n";
    }
}

inline RunStats run_stats(const RunRecord& rec) {
    RunStats s;
    s.benchmark = rec.benchmark;
    s.test_mae = rec.final_test_mae;
    s.success = rec.success;
    s.effective_size = rec.best_effective_size;
    s.total_size = rec.best_total_size;
    return s;
}

}  // namespace gblgp
