#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ottosim {

inline constexpr std::size_t kNumInputs = 10;
inline constexpr std::size_t kNumOutputs = 5;

// Canonical column order for the regression problem and its CSV files.
const std::vector<std::string>& input_names();
const std::vector<std::string>& output_names();

// Row-aligned input/output table plus provenance (which drive trace a row
// came from and when). Immutable by convention once loaded; everything
// downstream shares datasets read-only.
struct Dataset {
    Eigen::MatrixXd inputs;   // n x 10
    Eigen::MatrixXd outputs;  // n x 5
    std::vector<std::int64_t> trace_id;
    std::vector<double> t;    // seconds within the trace

    std::size_t rows() const { return static_cast<std::size_t>(inputs.rows()); }

    // Shape agreement and finiteness; throws ConfigError on violation.
    void validate() const;
};

Dataset subset(const Dataset& data, std::size_t begin, std::size_t end);

struct ColumnScaler {
    double min = 0.0;
    double max = 1.0;
    double mean = 0.0;
    double std = 1.0;
};

// Two-stage scaling fitted per column: min-max to [0,1] over the fitted
// data, then mean/std of the min-max-scaled values. Applied in that order;
// inverted in the reverse order. Never clamps, so out-of-range data
// extrapolates linearly.
struct ScalerParams {
    std::vector<ColumnScaler> input_cols;   // 10
    std::vector<ColumnScaler> output_cols;  // 5
    std::size_t fitted_on = 0;              // row count of the fitting set
};

ScalerParams fit_scalers(const Dataset& data);
Dataset transform(const Dataset& data, const ScalerParams& params);
Dataset inverse_transform(const Dataset& data, const ScalerParams& params);

// Matrix-level access for inference pipelines that carry inputs or outputs
// alone (column count must match the corresponding scaler set).
Eigen::MatrixXd transform_inputs(const Eigen::MatrixXd& inputs, const ScalerParams& params);
Eigen::MatrixXd inverse_transform_outputs(const Eigen::MatrixXd& outputs,
                                          const ScalerParams& params);

// CSV persistence. Schema: trace_id, t, the ten input columns, the five
// output columns, in that order. Numeric cells use shortest round-trip
// formatting so write followed by read reproduces every double bit-for-bit.
// The reader streams in two passes (count, then parse) to keep memory at
// matrix size even for multi-million-row campaign files.
Dataset read_csv(const std::filesystem::path& path);
void write_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace ottosim
