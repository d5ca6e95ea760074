#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gblgp/program.hpp"

namespace gblgp {

struct Dataset {
    std::vector<std::vector<double>> inputs;  // cases x D
    std::vector<double> targets;
    std::string provenance;

    int cases() const { return static_cast<int>(targets.size()); }
    int dimension() const { return inputs.empty() ? 0 : static_cast<int>(inputs.front().size()); }
};

// Mean absolute error of the program over the dataset. A non-finite
// accumulation maps to kWorstFitness.
inline double evaluate_dataset(const Program& prog, const Dataset& data) {
    if (data.cases() == 0) throw std::invalid_argument("empty dataset");
    double sum = 0.0;
    for (int i = 0; i < data.cases(); ++i) {
        double out = evaluate(prog, data.inputs[static_cast<size_t>(i)]);
        sum += std::abs(out - data.targets[static_cast<size_t>(i)]);
    }
    double mae = sum / data.cases();
    return std::isfinite(mae) ? mae : kWorstFitness;
}

inline void write_csv(const Dataset& data, std::ostream& os) {
    const int d = data.dimension();
    for (int j = 0; j < d; ++j) os << "x" << (j + 1) << ",";
    os << "y\n";
    os.precision(17);
    for (int i = 0; i < data.cases(); ++i) {
        for (int j = 0; j < d; ++j) os << data.inputs[static_cast<size_t>(i)][static_cast<size_t>(j)] << ",";
        os << data.targets[static_cast<size_t>(i)] << "\n";
    }
}

inline Dataset read_csv(std::istream& is) {
    Dataset data;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty csv");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 2) throw std::runtime_error("bad csv row: " + line);
        data.targets.push_back(row.back());
        row.pop_back();
        data.inputs.push_back(std::move(row));
    }
    return data;
}

}  // namespace gblgp
