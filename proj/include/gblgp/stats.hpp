#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gblgp {

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty list");
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// MAD = median |V_i - median(V)|.
inline double median_absolute_deviation(const std::vector<double>& v) {
    double m = median(v);
    std::vector<double> dev;
    dev.reserve(v.size());
    for (double x : v) dev.push_back(std::abs(x - m));
    return median(dev);
}

struct MethodSummary {
    std::string method;
    double mmae = 0.0;
    double mad = 0.0;
    double success_rate = 0.0;
    int runs = 0;
    double mean_effective_size = 0.0;
    double mean_total_size = 0.0;
};

inline MethodSummary descriptive_stats(const std::vector<double>& test_maes,
                                       double threshold = 1e-5) {
    if (test_maes.empty()) throw std::invalid_argument("empty sample");
    MethodSummary s;
    s.runs = static_cast<int>(test_maes.size());
    s.mmae = median(test_maes);
    s.mad = median_absolute_deviation(test_maes);
    int succ = 0;
    for (double v : test_maes) succ += v < threshold ? 1 : 0;
    s.success_rate = static_cast<double>(succ) / static_cast<double>(s.runs);
    return s;
}

struct PairwiseTestResult {
    std::string method_a;
    std::string method_b;
    double statistic = 0.0;  // rank sum of the first sample
    double p_value = 1.0;
    bool significant = false;  // at alpha = 0.05
};

namespace detail {

// Midranks of the combined sample, returned as (ranks_a, ranks_b),
// doubled so that ties with .5 midranks stay integral.
inline std::pair<std::vector<long>, std::vector<long>> doubled_midranks(
    const std::vector<double>& a, const std::vector<double>& b) {
    struct Item {
        double v;
        int from;
    };
    std::vector<Item> items;
    for (double v : a) items.push_back({v, 0});
    for (double v : b) items.push_back({v, 1});
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return x.v < y.v; });

    std::vector<long> ra, rb;
    size_t i = 0;
    while (i < items.size()) {
        size_t j = i;
        while (j < items.size() && items[j].v == items[i].v) ++j;
        // doubled midrank of positions i..j-1 (1-based ranks)
        long doubled = static_cast<long>(i + 1 + j);  // (i+1 + j) = 2 * average rank
        for (size_t k = i; k < j; ++k)
            (items[k].from == 0 ? ra : rb).push_back(doubled);
        i = j;
    }
    return {ra, rb};
}

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace detail

// Exact two-sided rank-sum p-value by enumerating the distribution of
// the rank sum over all choose(n1+n2, n1) assignments (midranks kept
// fixed, so ties are handled exactly).
inline PairwiseTestResult wilcoxon_exact(const std::vector<double>& a, const std::vector<double>& b) {
    auto [ra, rb] = detail::doubled_midranks(a, b);
    const size_t n1 = ra.size(), n2 = rb.size();
    std::vector<long> all(ra);
    all.insert(all.end(), rb.begin(), rb.end());

    long w_obs = 0;
    for (long r : ra) w_obs += r;

    long max_sum = 0;
    for (long r : all) max_sum += r;

    // dp[k][s] = number of k-subsets of the combined ranks with doubled
    // rank sum s. Counts fit a double exactly for n <= 20.
    std::vector<std::vector<double>> dp(n1 + 1, std::vector<double>(static_cast<size_t>(max_sum + 1), 0.0));
    dp[0][0] = 1.0;
    for (long r : all) {
        for (size_t k = std::min(n1, dp.size() - 1); k >= 1; --k) {
            for (long s = max_sum; s >= r; --s)
                dp[k][static_cast<size_t>(s)] += dp[k - 1][static_cast<size_t>(s - r)];
        }
    }

    double total = 0.0, le = 0.0, ge = 0.0;
    for (long s = 0; s <= max_sum; ++s) {
        double c = dp[n1][static_cast<size_t>(s)];
        total += c;
        if (s <= w_obs) le += c;
        if (s >= w_obs) ge += c;
    }

    PairwiseTestResult res;
    res.statistic = static_cast<double>(w_obs) / 2.0;
    res.p_value = std::min(1.0, 2.0 * std::min(le / total, ge / total));
    res.significant = res.p_value < 0.05;
    (void)n2;
    return res;
}

// Edgeworth approximation of the rank-sum null distribution. The first
// four moments of the rank sum (drawing n1 midranks without
// replacement) are exact, including under ties, so the expansion is
// accurate well below 0.01 even for small samples.
inline PairwiseTestResult wilcoxon_approx(const std::vector<double>& a, const std::vector<double>& b) {
    auto [ra, rb] = detail::doubled_midranks(a, b);
    const double n1 = static_cast<double>(ra.size());
    const double n = n1 + static_cast<double>(rb.size());

    std::vector<double> all;
    for (long r : ra) all.push_back(static_cast<double>(r));
    for (long r : rb) all.push_back(static_cast<double>(r));

    double w = 0.0;
    for (long r : ra) w += static_cast<double>(r);

    double mean = 0.0;
    for (double r : all) mean += r;
    mean /= n;
    // centered power sums of the rank population
    double s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (double r : all) {
        double d = r - mean;
        s2 += d * d;
        s3 += d * d * d;
        s4 += d * d * d * d;
    }
    // inclusion probabilities of 1..4 distinct population items
    auto falling = [&](double k) {
        double num = 1.0, den = 1.0;
        for (int i = 0; i < static_cast<int>(k); ++i) {
            num *= n1 - i;
            den *= n - i;
        }
        return den > 0.0 ? num / den : 0.0;
    };
    const double p1 = falling(1), p2 = falling(2), p3 = falling(3), p4 = falling(4);

    const double mu = n1 * mean;
    const double m2 = s2 * (p1 - p2);
    const double m3 = s3 * (p1 - 3.0 * p2 + 2.0 * p3);
    const double m4 = s4 * (p1 - 7.0 * p2 + 12.0 * p3 - 6.0 * p4) +
                      3.0 * s2 * s2 * (p2 - 2.0 * p3 + p4);

    PairwiseTestResult res;
    res.statistic = w / 2.0;
    if (m2 <= 0.0) {
        res.p_value = 1.0;
        res.significant = false;
        return res;
    }

    const double sigma = std::sqrt(m2);
    const double g1 = m3 / (m2 * sigma);
    const double g2 = m4 / (m2 * m2) - 3.0;

    auto edgeworth_cdf = [&](double x) {
        double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
        double cdf = 1.0 - detail::normal_sf(x);
        double h2 = x * x - 1.0;
        double h3 = x * x * x - 3.0 * x;
        double h5 = x * x * x * x * x - 10.0 * x * x * x + 15.0 * x;
        double f = cdf - phi * (g1 / 6.0 * h2 + g2 / 24.0 * h3 + g1 * g1 / 72.0 * h5);
        return std::clamp(f, 0.0, 1.0);
    };

    // continuity correction at half the lattice span of the doubled
    // rank sums (2 without ties, 1 with)
    long span = 0;
    long base = ra.empty() ? rb.front() : ra.front();
    for (double r : all) span = std::gcd(span, std::lround(r) - base);
    const double cc = span > 0 ? static_cast<double>(span) / 2.0 : 0.5;

    double p_le = edgeworth_cdf((w + cc - mu) / sigma);
    double p_ge = 1.0 - edgeworth_cdf((w - cc - mu) / sigma);
    res.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge));
    res.significant = res.p_value < 0.05;
    return res;
}

// Two-sided rank-sum test: exact enumeration up to combined n = 20,
// normal approximation beyond.
inline PairwiseTestResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
    if (a.size() + b.size() <= 20) return wilcoxon_exact(a, b);
    return wilcoxon_approx(a, b);
}

// Per-run inputs for cross-method aggregation.
struct RunStats {
    std::string benchmark;
    double test_mae = 0.0;
    bool success = false;
    double effective_size = 0.0;
    double total_size = 0.0;
};

struct AggregateResult {
    std::vector<MethodSummary> summaries;
    std::vector<PairwiseTestResult> pairwise;
};

inline AggregateResult aggregate(const std::map<std::string, std::vector<RunStats>>& per_method,
                                 double threshold = 1e-5) {
    AggregateResult out;
    std::string benchmark;
    std::map<std::string, std::vector<double>> maes;
    for (const auto& [method, runs] : per_method) {
        if (runs.empty()) throw std::invalid_argument("method with no runs: " + method);
        std::vector<double> v;
        double eff = 0.0, tot = 0.0;
        int succ = 0;
        for (const auto& r : runs) {
            if (benchmark.empty()) benchmark = r.benchmark;
            if (r.benchmark != benchmark)
                throw std::invalid_argument("mixed benchmarks in aggregation: " + r.benchmark +
                                            " vs " + benchmark);
            v.push_back(r.test_mae);
            eff += r.effective_size;
            tot += r.total_size;
            succ += r.success ? 1 : 0;
        }
        MethodSummary s = descriptive_stats(v, threshold);
        s.method = method;
        s.success_rate = static_cast<double>(succ) / static_cast<double>(runs.size());
        s.mean_effective_size = eff / static_cast<double>(runs.size());
        s.mean_total_size = tot / static_cast<double>(runs.size());
        out.summaries.push_back(s);
        maes[method] = std::move(v);
    }
    for (auto it = maes.begin(); it != maes.end(); ++it) {
        for (auto jt = std::next(it); jt != maes.end(); ++jt) {
            PairwiseTestResult r = wilcoxon_rank_sum(it->second, jt->second);
            r.method_a = it->first;
            r.method_b = jt->first;
            out.pairwise.push_back(r);
        }
    }
    return out;
}

}  // namespace gblgp
