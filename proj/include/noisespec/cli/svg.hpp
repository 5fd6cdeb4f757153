#pragma once

#include <string>
#include <vector>

namespace noisespec::cli::svg {

struct Series {
    std::string label;
    std::vector<double> y;
};

/// Line chart against the sample index (1-based); `log_y` plots log10 values.
std::string line_chart(const std::string& title, const std::vector<Series>& series, bool log_y);

/// Heatmap of values in [0, 1] with the value printed in each cell.
std::string heatmap(const std::string& title, const std::vector<std::vector<double>>& cells);

/// Scatter of predicted against true values with the identity line.
std::string scatter(const std::string& title, const std::vector<double>& truth,
                    const std::vector<double>& pred);

} // namespace noisespec::cli::svg
