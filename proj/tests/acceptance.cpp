// Acceptance suite: eight end-to-end criteria, one PASS/FAIL line each.
// Exits nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gblgp/gblgp.hpp"

using namespace gblgp;

namespace {

std::string g_grammar_dir;

Grammar load_grammar(const std::string& name) {
    std::ifstream is(g_grammar_dir + "/" + name);
    if (!is) throw std::runtime_error("cannot open grammar: " + g_grammar_dir + "/" + name);
    return parse_grammar(is);
}

AlgorithmConfig experiment_config(Algorithm alg) {
    AlgorithmConfig cfg = default_config(alg);  // standard experiment defaults
    return cfg;
}

std::vector<RunRecord> run_batch(const std::string& benchmark, Algorithm alg,
                                 const Grammar* grammar, int runs, uint64_t base_seed) {
    const BenchmarkSpec& spec = find_benchmark(benchmark);
    std::vector<RunRecord> out;
    for (int i = 0; i < runs; ++i) {
        AlgorithmConfig cfg = experiment_config(alg);
        cfg.seed = base_seed + static_cast<uint64_t>(i);
        Dataset train = generate_dataset(spec, Split::Train, cfg.seed);
        Dataset test = generate_dataset(spec, Split::Test, cfg.seed);
        out.push_back(run(cfg, grammar, train, test, benchmark));
    }
    return out;
}

double success_rate(const std::vector<RunRecord>& recs) {
    int s = 0;
    for (const auto& r : recs) s += r.success ? 1 : 0;
    return static_cast<double>(s) / static_cast<double>(recs.size());
}

std::vector<double> test_maes(const std::vector<RunRecord>& recs) {
    std::vector<double> v;
    for (const auto& r : recs) v.push_back(r.final_test_mae);
    return v;
}

int g_failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("%s: criterion %d (%s)%s%s\n", ok ? "PASS" : "FAIL", idx, name,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

// ---- criteria 1 & 2 & 4 share nguyen1/nguyen2 batches -----------------

void criteria_1_2_4(const Grammar& arith) {
    std::vector<RunRecord> gb1 = run_batch("nguyen1", Algorithm::GbLgp, &arith, 30, 100);
    std::vector<RunRecord> em1 = run_batch("nguyen1", Algorithm::Effmut, nullptr, 30, 100);

    double sr_gb = success_rate(gb1), sr_em = success_rate(em1);
    PairwiseTestResult w = wilcoxon_rank_sum(test_maes(gb1), test_maes(em1));
    {
        char buf[160];
        std::snprintf(buf, sizeof buf, "success gblgp=%.2f effmut=%.2f, p=%.3g", sr_gb, sr_em,
                      w.p_value);
        report(1, "nguyen1 success-rate gap with significance",
               sr_gb >= 0.60 && sr_em <= 0.50 && w.p_value < 0.05, buf);
    }

    {
        std::vector<RunRecord> gb2 = run_batch("nguyen2", Algorithm::GbLgp, &arith, 30, 200);
        std::vector<RunRecord> em2 = run_batch("nguyen2", Algorithm::Effmut, nullptr, 30, 200);
        double a = success_rate(gb2), b = success_rate(em2);
        char buf[160];
        std::snprintf(buf, sizeof buf, "success gblgp=%.2f effmut=%.2f", a, b);
        report(2, "nguyen2 success-rate gap >= 0.2", a - b >= 0.2, buf);
    }

    // criterion 4: effective-code curves on nguyen1, 10 runs per method
    bool gb_always_full = true, em_low_after_10 = true, hy_full_on_resample = true;
    for (int i = 0; i < 10; ++i) {
        for (const auto& t : gb1[static_cast<size_t>(i)].telemetry)
            if (t.mean_effective_pct < 100.0 - 1e-9) gb_always_full = false;
        for (const auto& t : em1[static_cast<size_t>(i)].telemetry)
            if (t.generation > 10 && t.mean_effective_pct >= 80.0) em_low_after_10 = false;
    }
    std::vector<RunRecord> hy1 = run_batch("nguyen1", Algorithm::Hybrid1, &arith, 10, 100);
    for (const auto& r : hy1)
        for (const auto& t : r.telemetry)
            if (t.generation % 2 == 0 && t.mean_effective_pct < 100.0 - 1e-9)
                hy_full_on_resample = false;
    {
        char buf[200];
        std::snprintf(buf, sizeof buf, "gblgp_full=%d effmut_below80=%d hybrid1_resample_full=%d",
                      gb_always_full ? 1 : 0, em_low_after_10 ? 1 : 0, hy_full_on_resample ? 1 : 0);
        report(4, "effective-code percentage curves",
               gb_always_full && em_low_after_10 && hy_full_on_resample, buf);
    }
}

void criterion_3(const Grammar& func) {
    std::vector<RunRecord> gb = run_batch("nguyen6", Algorithm::GbLgp, &func, 30, 300);
    std::vector<RunRecord> em = run_batch("nguyen6", Algorithm::Effmut, nullptr, 30, 300);
    double m_gb = median(test_maes(gb)), m_em = median(test_maes(em));
    PairwiseTestResult w = wilcoxon_rank_sum(test_maes(gb), test_maes(em));
    char buf[160];
    std::snprintf(buf, sizeof buf, "MMAE gblgp=%.4g effmut=%.4g, p=%.3g", m_gb, m_em, w.p_value);
    report(3, "nguyen6 MMAE direction with significance", m_gb < m_em && w.p_value < 0.05, buf);
}

void criterion_5(const Grammar& arith) {
    bool ok = true;
    std::string detail;
    const int factor_rule = arith.rule_index("Factor");
    for (int depth = 1; depth <= 9 && ok; ++depth) {
        auto chooser = [&](int rule, const std::vector<bool>& adm, int binary_depth) -> int {
            const auto& prods = arith.rules[static_cast<size_t>(rule)].productions;
            if (binary_depth < depth) {
                for (size_t j = 0; j < prods.size(); ++j)
                    if (adm[j] && prods[j].kind == Production::Kind::Binary)
                        return static_cast<int>(j);
                if (rule == factor_rule) return 0;  // (Exp): re-enter the binary rule
            }
            int best = -1;
            for (size_t j = 0; j < prods.size(); ++j) {
                if (!adm[j]) continue;
                if (best < 0 ||
                    arith.production_min_cost[static_cast<size_t>(rule)][j] <
                        arith.production_min_cost[static_cast<size_t>(rule)][static_cast<size_t>(best)])
                    best = static_cast<int>(j);
            }
            return best;
        };
        Program p = derive_program(arith, {depth + 2, 1 << 16}, chooser);
        int binaries = 0, peak_binary_dest = 0;
        for (const auto& in : p.instructions)
            if (is_binary(in.op)) {
                ++binaries;
                peak_binary_dest = std::max(peak_binary_dest, in.dest);
            }
        if (binaries != (1 << depth) - 1 || peak_binary_dest != depth - 1) {
            ok = false;
            detail = "depth " + std::to_string(depth) + ": " + std::to_string(binaries) +
                     " binaries, peak dest " + std::to_string(peak_binary_dest);
        }
    }
    if (ok) detail = "depths 1..9: 2^D-1 binary instructions, peak register index D-1";
    report(5, "forced full-binary derivation law", ok, detail);
}

void criterion_6(const Grammar& arith) {
    const BenchmarkSpec& spec = find_benchmark("nguyen1");
    Dataset train = generate_dataset(spec, Split::Train, 77);
    Dataset test = generate_dataset(spec, Split::Test, 77);

    bool sums_ok = true;
    {
        AlgorithmConfig cfg = experiment_config(Algorithm::GbLgp);
        cfg.seed = 77;
        RunRecord rec = run(cfg, &arith, train, test, "nguyen1");
        for (const auto& t : rec.telemetry)
            for (const auto& row : t.grammar_probs) {
                double s = 0.0;
                for (double p : row) s += p;
                if (std::abs(s - 1.0) > 1e-9) sums_ok = false;
            }
    }

    bool alpha0_ok = true;
    {
        AlgorithmConfig cfg = experiment_config(Algorithm::GbLgp);
        cfg.seed = 78;
        cfg.alpha = 0.0;
        cfg.generations = 20;
        RunRecord rec = run(cfg, &arith, train, test, "nguyen1");
        for (const auto& t : rec.telemetry)
            for (size_t i = 0; i < arith.rules.size(); ++i)
                if (t.grammar_probs[i] != arith.rules[i].probs) alpha0_ok = false;
    }

    bool alpha1_ok = true;
    {
        std::mt19937_64 rng(9);
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<Program> sampled;
            for (int k = 0; k < 3; ++k) sampled.push_back(sample_program(arith, {13, 200}, rng));
            ProportionTable t = usage_proportions(sampled, arith);
            Grammar u = update_probabilities(arith, t, 1.0);
            for (size_t i = 0; i < u.rules.size(); ++i) {
                if (!t.used(static_cast<int>(i))) {
                    if (u.rules[i].probs != arith.rules[i].probs) alpha1_ok = false;
                } else if (u.rules[i].probs != t.proportions[i]) {
                    alpha1_ok = false;
                }
            }
        }
    }

    char buf[120];
    std::snprintf(buf, sizeof buf, "sums=%d alpha0_fixed=%d alpha1_proportions=%d", sums_ok ? 1 : 0,
                  alpha0_ok ? 1 : 0, alpha1_ok ? 1 : 0);
    report(6, "probability update invariants", sums_ok && alpha0_ok && alpha1_ok, buf);
}

void criterion_7(const Grammar& arith, const Grammar& func) {
    // (a) effective_mask vs deletion oracle on 100 random programs
    std::mt19937_64 rng(55);
    MutationConfig mcfg;
    std::uniform_real_distribution<double> input(-3.0, 3.0);
    long total = 0, agree = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Program p = random_program(mcfg, 8, 20, rng);
        std::vector<std::vector<double>> probes;
        for (int k = 0; k < 16; ++k) probes.push_back({input(rng)});
        auto mask = effective_mask(p);
        for (int i = 0; i < p.size(); ++i) {
            bool oracle = i + 1 == p.size();
            if (!oracle) {
                Program del = p;
                del.instructions.erase(del.instructions.begin() + i);
                for (const auto& x : probes)
                    if (evaluate(p, x) != evaluate(del, x)) {
                        oracle = true;
                        break;
                    }
            }
            ++total;
            if (mask[static_cast<size_t>(i)] == oracle) ++agree;
        }
    }
    double agreement = static_cast<double>(agree) / static_cast<double>(total);
    bool mask_ok = agreement >= 0.99;

    // (b) tag round trip on 1000 sampled programs
    bool tags_ok = true;
    for (int i = 0; i < 500; ++i) {
        Program a = sample_program(arith, {13, 200}, rng);
        if (expression_from_tags(arith, a) != decode_expression(a)) tags_ok = false;
        Program f = sample_program(func, {13, 200}, rng);
        if (expression_from_tags(func, f) != decode_expression(f)) tags_ok = false;
    }

    // (c) approximate vs exact rank-sum p-values, combined n <= 20,
    // tie-free continuous samples
    bool wilcoxon_ok = true;
    double worst = 0.0;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        int n1 = 6 + static_cast<int>(rng() % 5);
        int n2 = 6 + static_cast<int>(rng() % 5);
        if (n1 + n2 > 20) continue;
        std::vector<double> a, b;
        for (int i = 0; i < n1; ++i) a.push_back(uni(rng));
        for (int i = 0; i < n2; ++i) b.push_back(uni(rng) + 0.2 * (rep % 3));
        double pe = wilcoxon_exact(a, b).p_value;
        double pa = wilcoxon_approx(a, b).p_value;
        worst = std::max(worst, std::abs(pe - pa));
        if (std::abs(pe - pa) > 0.01) wilcoxon_ok = false;
    }

    char buf[160];
    std::snprintf(buf, sizeof buf, "mask_agreement=%.4f tags=%d wilcoxon_worst_gap=%.4f",
                  agreement, tags_ok ? 1 : 0, worst);
    report(7, "oracle suites", mask_ok && tags_ok && wilcoxon_ok, buf);
}

void criterion_8(const Grammar& arith) {
    bool ok = true;
    const BenchmarkSpec& spec = find_benchmark("nguyen1");
    Dataset train = generate_dataset(spec, Split::Train, 5);
    Dataset test = generate_dataset(spec, Split::Test, 5);
    for (Algorithm alg :
         {Algorithm::Effmut, Algorithm::GbLgp, Algorithm::Hybrid1, Algorithm::Hybrid2}) {
        AlgorithmConfig cfg = experiment_config(alg);
        cfg.population_size = 30;
        cfg.generations = 15;
        cfg.seed = 5;
        const Grammar* g = cfg.grammar_based() ? &arith : nullptr;
        json a = to_json(run(cfg, g, train, test, "nguyen1"));
        json b = to_json(run(cfg, g, train, test, "nguyen1"));
        a.erase("wall_seconds");
        b.erase("wall_seconds");
        if (a != b) ok = false;
    }
    report(8, "same-seed runs produce identical records", ok, "");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <grammar-dir>\n");
        return 2;
    }
    g_grammar_dir = argv[1];
    try {
        Grammar arith = load_grammar("arith_x1.scfg");
        Grammar func = load_grammar("func_x1.scfg");

        criterion_5(arith);
        criterion_6(arith);
        criterion_7(arith, func);
        criterion_8(arith);
        criteria_1_2_4(arith);
        criterion_3(func);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d of 8 criteria passed\n", 8 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
