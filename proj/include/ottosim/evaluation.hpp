#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ottosim/dataset.hpp"

namespace ottosim {

// Sample Pearson product-moment correlation. Both series need length >= 2
// and non-zero variance; throws ZeroVariance otherwise.
double pearson_r(const std::vector<double>& observed, const std::vector<double>& predicted);

// Mean of 100 * |obs - pred| / |obs| over all points. Any observed value of
// exactly zero throws ZeroObserved naming the first offending index; batch
// reporting excludes such rows instead (see evaluate_predictions).
double mape(const std::vector<double>& observed, const std::vector<double>& predicted);

struct OutputMetrics {
    double pearson_r = 0.0;
    double mape = 0.0;               // percent
    std::size_t excluded_zeros = 0;  // rows dropped from MAPE (observed == 0)
};

struct MetricReport {
    std::string model;
    std::array<OutputMetrics, kNumOutputs> outputs;  // dataset output order
    double train_seconds = 0.0;
    double inference_seconds = 0.0;
    std::size_t points = 0;
};

// Per-output metrics on original-scale matrices (n x 5 each). Rows whose
// observed value is zero are excluded from that output's MAPE with a count;
// Pearson r uses every row.
MetricReport evaluate_predictions(const std::string& model, const Eigen::MatrixXd& observed,
                                  const Eigen::MatrixXd& predicted);

// Writes the comparison artifacts: a long-format CSV (header
// model,output,metric,value; one row per model x output x {r, mape}) and a
// parallel-coordinate SVG of MAPE with one axis per output and one polyline
// per model.
void emit_report(const std::vector<MetricReport>& reports, const std::filesystem::path& csv_path,
                 const std::filesystem::path& svg_path);

}  // namespace ottosim
