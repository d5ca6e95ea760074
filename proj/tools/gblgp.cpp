// Command-line driver: batch experiment execution, result aggregation,
// grammar validation, and one-off sampling.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gblgp/gblgp.hpp"

namespace fs = std::filesystem;
using namespace gblgp;

namespace {

std::string default_output_dir() {
    if (const char* env = std::getenv("GBLGP_OUT")) return env;
    return "results";
}

Grammar load_grammar_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open grammar file: " + path);
    return parse_grammar(is);
}

AlgorithmConfig make_config(Algorithm alg, const ExperimentManifest& manifest,
                            const Grammar* grammar, const BenchmarkSpec& bench) {
    AlgorithmConfig cfg = default_config(alg);
    if (grammar) {
        cfg.mutation.operator_pool = grammar->operator_set();
        cfg.mutation.operator_pool.push_back(OpKind::Load);
    }
    cfg.mutation.input_dim = bench.dimension;
    apply_overrides(cfg, manifest.overrides);
    return cfg;
}

std::string record_filename(const std::string& bench, const std::string& alg, uint64_t seed) {
    return bench + "_" + alg + "_seed" + std::to_string(seed) + ".json";
}

void run_parallel(int jobs, int count, const std::function<void(int)>& work) {
    std::atomic<int> next{0};
    auto worker = [&] {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            work(i);
        }
    };
    int n = std::max(1, std::min(jobs, count));
    std::vector<std::thread> pool;
    for (int t = 0; t < n - 1; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

void emit_reports(const std::map<std::string, std::map<std::string, std::vector<RunRecord>>>& grouped,
                  const fs::path& out, const Grammar* grammar) {
    for (const auto& [bench, by_method] : grouped) {
        std::map<std::string, std::vector<RunStats>> stats;
        for (const auto& [method, recs] : by_method)
            for (const auto& r : recs) stats[method].push_back(run_stats(r));
        bool pairwise_ok = true;
        for (const auto& [method, v] : stats) pairwise_ok = pairwise_ok && v.size() >= 2;
        AggregateResult agg;
        if (stats.size() >= 1) {
            // pairwise tests need at least two runs per method
            if (pairwise_ok || stats.size() == 1) {
                agg = aggregate(stats);
            } else {
                for (const auto& [method, v] : stats) {
                    std::vector<double> maes;
                    for (const auto& s : v) maes.push_back(s.test_mae);
                    MethodSummary ms = descriptive_stats(maes);
                    ms.method = method;
                    agg.summaries.push_back(ms);
                }
            }
        }
        {
            std::ofstream os(out / (bench + "_summary.csv"));
            write_summary_csv(agg, os);
        }
        {
            std::ofstream os(out / (bench + "_pairwise.csv"));
            write_pairwise_csv(agg, os);
        }
        {
            std::ofstream os(out / (bench + "_effective_code.csv"));
            write_effective_code_csv(by_method, os);
        }
        for (const auto& [method, recs] : by_method) {
            bool has_probs = false;
            for (const auto& r : recs) has_probs = has_probs || !r.telemetry.empty() &&
                                                    !r.telemetry.front().grammar_probs.empty();
            if (!has_probs) continue;
            std::ofstream os(out / (bench + "_" + method + "_probability_trace.csv"));
            if (grammar) {
                write_probability_trace_csv(recs, *grammar, os);
            } else {
                // no grammar file at hand: emit generic production labels
                const auto& shape = recs.front().telemetry.front().grammar_probs;
                Grammar g;
                g.rules.resize(shape.size());
                for (size_t i = 0; i < shape.size(); ++i) {
                    g.rules[i].lhs = "rule" + std::to_string(i);
                    g.rules[i].productions.resize(shape[i].size());
                    for (size_t j = 0; j < shape[i].size(); ++j)
                        g.rules[i].productions[j].text = "p" + std::to_string(j);
                }
                write_probability_trace_csv(recs, g, os);
            }
        }
        std::cout << "== " << bench << " ==\n" << summary_table_text(agg) << "\n";
    }
}

int cmd_run(const std::string& manifest_path, int jobs) {
    ExperimentManifest manifest = load_manifest(manifest_path);
    fs::path out = manifest.output_dir.empty() ? default_output_dir() : manifest.output_dir;
    fs::create_directories(out);

    std::optional<Grammar> grammar;
    if (!manifest.grammar_file.empty()) grammar = load_grammar_file(manifest.grammar_file);

    struct Task {
        std::string bench;
        Algorithm alg;
        uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const auto& bench : manifest.benchmarks) {
        find_benchmark(bench);  // fail fast on unknown names
        for (const auto& alg : manifest.algorithms)
            for (int k = 0; k < manifest.runs; ++k)
                tasks.push_back({bench, algorithm_from_name(alg), manifest.base_seed + static_cast<uint64_t>(k)});
    }
    for (const auto& t : tasks)
        if (t.alg != Algorithm::Effmut && !grammar)
            throw std::runtime_error("manifest: grammar file required for " +
                                     std::string(algorithm_name(t.alg)));

    std::map<std::string, std::map<std::string, std::vector<RunRecord>>> grouped;
    std::mutex mu;

    run_parallel(jobs, static_cast<int>(tasks.size()), [&](int i) {
        const Task& t = tasks[static_cast<size_t>(i)];
        const BenchmarkSpec& bench = find_benchmark(t.bench);
        Dataset train = generate_dataset(bench, Split::Train, t.seed);
        Dataset test = generate_dataset(bench, Split::Test, t.seed);
        AlgorithmConfig cfg = make_config(t.alg, manifest, grammar ? &*grammar : nullptr, bench);
        cfg.seed = t.seed;
        RunRecord rec = run(cfg, grammar ? &*grammar : nullptr, train, test, t.bench);
        {
            std::ofstream os(out / record_filename(t.bench, rec.algorithm, t.seed));
            os << to_json(rec).dump(2) << "\n";
        }
        std::lock_guard<std::mutex> lock(mu);
        grouped[t.bench][rec.algorithm].push_back(rec);
        std::cout << t.bench << " " << rec.algorithm << " seed=" << t.seed
                  << " test_mae=" << rec.final_test_mae << (rec.success ? " success" : "") << "\n";
    });

    emit_reports(grouped, out, grammar ? &*grammar : nullptr);
    return 0;
}

int cmd_report(const std::string& dir, const std::string& grammar_path) {
    fs::path in(dir);
    if (!fs::is_directory(in)) {
        std::cerr << "not a directory: " << dir << "\n";
        return 1;
    }
    std::optional<Grammar> grammar;
    if (!grammar_path.empty()) grammar = load_grammar_file(grammar_path);

    std::map<std::string, std::map<std::string, std::vector<RunRecord>>> grouped;
    int loaded = 0, skipped = 0;
    for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.path().extension() != ".json") continue;
        try {
            std::ifstream is(entry.path());
            json j;
            is >> j;
            RunRecord rec = run_record_from_json(j);
            grouped[rec.benchmark][rec.algorithm].push_back(std::move(rec));
            ++loaded;
        } catch (const std::exception& e) {
            std::cerr << "skipping " << entry.path().filename().string() << ": " << e.what() << "\n";
            ++skipped;
        }
    }
    if (loaded == 0) {
        std::cerr << "no run records found in " << dir << "\n";
        return 1;
    }
    emit_reports(grouped, in, grammar ? &*grammar : nullptr);
    return skipped > 0 ? 2 : 0;
}

int cmd_grammar_check(const std::string& path) {
    try {
        Grammar g = load_grammar_file(path);
        std::cout << path << ": " << g.rules.size() << " rules\n";
        for (size_t i = 0; i < g.rules.size(); ++i) {
            const Rule& r = g.rules[i];
            std::cout << "  [" << i << "] " << r.lhs << " :=";
            for (size_t j = 0; j < r.productions.size(); ++j)
                std::cout << (j ? " | " : " ") << r.productions[j].text;
            std::cout << "  probs";
            for (double p : r.probs) std::cout << " " << p;
            std::cout << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "invalid grammar: " << e.what() << "\n";
        return 1;
    }
}

int cmd_sample(const std::string& path, uint64_t seed, int registers, int max_instructions) {
    Grammar g = load_grammar_file(path);
    std::mt19937_64 rng(seed);
    Program prog = sample_program(g, {registers, max_instructions}, rng);
    std::cout << to_text(prog);
    std::cout << "expression: " << decode_expression(prog) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grammar-based linear genetic programming for symbolic regression"};
    app.require_subcommand(1);

    std::string manifest_path;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    auto* run_cmd = app.add_subcommand("run", "Execute the experiments described by a manifest");
    run_cmd->add_option("--manifest", manifest_path, "Manifest JSON file")->required();
    run_cmd->add_option("--jobs", jobs, "Parallel runs");

    std::string report_dir, report_grammar;
    auto* report_cmd = app.add_subcommand("report", "Regenerate summaries from stored run records");
    report_cmd->add_option("dir", report_dir, "Directory with RunRecord JSON files")->required();
    report_cmd->add_option("--grammar", report_grammar, "Grammar file for production labels");

    std::string check_path;
    auto* check_cmd = app.add_subcommand("grammar-check", "Parse and validate a grammar file");
    check_cmd->add_option("file", check_path, "Grammar DSL file")->required();

    std::string sample_path;
    uint64_t sample_seed = 1;
    int sample_registers = 13;
    int sample_max = 200;
    auto* sample_cmd = app.add_subcommand("sample", "Print one sampled program with production tags");
    sample_cmd->add_option("--grammar", sample_path, "Grammar DSL file")->required();
    sample_cmd->add_option("--seed", sample_seed, "Random seed");
    sample_cmd->add_option("--registers", sample_registers, "Register count");
    sample_cmd->add_option("--max-instructions", sample_max, "Instruction budget");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(manifest_path, jobs);
        if (report_cmd->parsed()) return cmd_report(report_dir, report_grammar);
        if (check_cmd->parsed()) return cmd_grammar_check(check_path);
        if (sample_cmd->parsed())
            return cmd_sample(sample_path, sample_seed, sample_registers, sample_max);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
