#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gblgp/dataset.hpp"

namespace gblgp {

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One sampling spec per variable: c uniform draws in [a,b], or the
// evenly spaced grid a, a+c, ..., <= b (grids apply to all variables
// jointly and define the row count).
struct SamplingSpec {
    enum class Kind { Uniform, Grid };
    Kind kind = Kind::Uniform;
    double a = 0.0;
    double b = 1.0;
    double c = 0.0;  // draw count (Uniform) or step (Grid)
};

struct BenchmarkSpec {
    std::string name;
    int dimension = 1;
    std::function<double(const std::vector<double>&)> target;
    std::vector<SamplingSpec> train;  // one entry per variable
    std::vector<SamplingSpec> test;
};

inline double target_value(const BenchmarkSpec& spec, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != spec.dimension)
        throw std::invalid_argument("input dimension mismatch for " + spec.name);
    return spec.target(x);
}

namespace detail {

inline BenchmarkSpec univariate(std::string name, std::function<double(double)> f,
                                SamplingSpec train, SamplingSpec test) {
    BenchmarkSpec s;
    s.name = std::move(name);
    s.dimension = 1;
    s.target = [f = std::move(f)](const std::vector<double>& x) { return f(x[0]); };
    s.train = {train};
    s.test = {test};
    return s;
}

inline SamplingSpec uniform(double a, double b, double c) {
    return {SamplingSpec::Kind::Uniform, a, b, c};
}

inline SamplingSpec grid(double a, double b, double c) {
    return {SamplingSpec::Kind::Grid, a, b, c};
}

}  // namespace detail

// Built-in symbolic regression targets. Five-variate functions map
// variables (x, y, z, v, w) onto inputs x1..x5 in that order.
inline std::vector<BenchmarkSpec> benchmark_registry() {
    using detail::grid;
    using detail::uniform;
    std::vector<BenchmarkSpec> all;

    auto poly = [](int order) {
        return [order](double x) {
            double sum = 0.0;
            for (int k = 1; k <= order; ++k) sum += std::pow(x, k);
            return sum;
        };
    };
    all.push_back(detail::univariate("nguyen1", poly(3), uniform(-1, 1, 20), uniform(-1, 1, 20)));
    all.push_back(detail::univariate("nguyen2", poly(4), uniform(-1, 1, 20), uniform(-1, 1, 20)));
    all.push_back(detail::univariate("nguyen3", poly(5), uniform(-1, 1, 20), uniform(-1, 1, 20)));
    all.push_back(detail::univariate("nguyen4", poly(6), uniform(-1, 1, 20), uniform(-1, 1, 20)));
    all.push_back(detail::univariate(
        "nguyen6", [](double x) { return std::sin(x) * std::sin(x + x * x); },
        uniform(-1, 1, 20), uniform(-1, 1, 20)));
    all.push_back(detail::univariate(
        "keijzer4",
        [](double x) {
            double s = std::sin(x), c = std::cos(x);
            return x * x * x * std::exp(-x) * c * s * (s * s * c - 1.0);
        },
        grid(0.0, 10.0, 0.05), grid(0.05, 10.05, 0.05)));

    {
        BenchmarkSpec s;
        s.name = "keijzer5";
        s.dimension = 3;
        s.target = [](const std::vector<double>& in) {
            double x = in[0], y = in[1], z = in[2];
            return 30.0 * x * z / ((x - 10.0) * y * y);
        };
        s.train = {uniform(-1, 1, 500), uniform(1, 2, 500), uniform(-1, 1, 500)};
        s.test = {uniform(-1, 1, 10000), uniform(1, 2, 10000), uniform(-1, 1, 10000)};
        all.push_back(s);
    }
    {
        BenchmarkSpec s;
        s.name = "korns3";
        s.dimension = 5;
        s.target = [](const std::vector<double>& in) {
            double x = in[0], y = in[1], v = in[3], w = in[4];
            return -5.41 + 4.9 * (v - x + y / w) / (3.0 * w);
        };
        s.train.assign(5, uniform(-50, 50, 500));
        s.test.assign(5, uniform(-50, 50, 10000));
        all.push_back(s);
    }
    {
        BenchmarkSpec s;
        s.name = "korns5";
        s.dimension = 5;
        s.target = [](const std::vector<double>& in) {
            double w = in[4];
            if (w <= 0.0) throw DomainError("korns5 requires w > 0");
            return 3.0 + 2.13 * std::log(w);
        };
        s.train.assign(5, uniform(0, 50, 500));
        s.test.assign(5, uniform(0, 50, 10000));
        all.push_back(s);
    }
    return all;
}

inline const BenchmarkSpec& find_benchmark(const std::string& name) {
    static const std::vector<BenchmarkSpec> all = benchmark_registry();
    for (const auto& s : all)
        if (s.name == name) return s;
    throw std::invalid_argument("unknown benchmark: " + name);
}

enum class Split { Train, Test };

// Uniform specs draw seed-reproducible iid points; grid specs are
// deterministic regardless of seed. Rows hitting a domain error (or a
// non-finite target) are redrawn for uniform specs and abort for
// grids; korns5 additionally redraws w below 1e-6 to stay clear of
// ln(0).
inline Dataset generate_dataset(const BenchmarkSpec& spec, Split which, uint64_t seed) {
    const auto& cols = which == Split::Train ? spec.train : spec.test;
    if (static_cast<int>(cols.size()) != spec.dimension)
        throw std::invalid_argument("sampling spec dimension mismatch");
    std::mt19937_64 rng(seed * 2 + (which == Split::Train ? 0 : 1));

    Dataset data;
    data.provenance = spec.name + (which == Split::Train ? "/train" : "/test") +
                      "/seed=" + std::to_string(seed);

    bool any_grid = false;
    for (const auto& c : cols) any_grid = any_grid || c.kind == SamplingSpec::Kind::Grid;

    if (any_grid) {
        // Grids are univariate in this suite.
        if (spec.dimension != 1) throw std::invalid_argument("grid sampling supports D=1 only");
        const SamplingSpec& c = cols[0];
        for (long i = 0;; ++i) {
            double x = c.a + static_cast<double>(i) * c.c;
            if (x > c.b + 1e-12) break;
            std::vector<double> row = {x};
            double y = spec.target(row);
            if (!std::isfinite(y)) throw DomainError("non-finite target on grid for " + spec.name);
            data.inputs.push_back(row);
            data.targets.push_back(y);
        }
        return data;
    }

    int cases = static_cast<int>(cols[0].c);
    for (const auto& c : cols)
        if (static_cast<int>(c.c) != cases)
            throw std::invalid_argument("inconsistent draw counts across variables");

    for (int i = 0; i < cases; ++i) {
        for (int tries = 0; tries < 1000; ++tries) {
            std::vector<double> row(static_cast<size_t>(spec.dimension));
            for (int j = 0; j < spec.dimension; ++j) {
                std::uniform_real_distribution<double> uni(cols[static_cast<size_t>(j)].a,
                                                           cols[static_cast<size_t>(j)].b);
                row[static_cast<size_t>(j)] = uni(rng);
            }
            if (spec.name == "korns5" && row[4] < 1e-6) continue;
            try {
                double y = spec.target(row);
                if (!std::isfinite(y)) continue;
                data.inputs.push_back(std::move(row));
                data.targets.push_back(y);
                break;
            } catch (const DomainError&) {
            }
        }
        if (static_cast<int>(data.targets.size()) != i + 1)
            throw DomainError("could not draw an in-domain row for " + spec.name);
    }
    return data;
}

}  // namespace gblgp
