#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ottosim/dataset.hpp"
#include "ottosim/drive_cycle.hpp"
#include "ottosim/engine.hpp"
#include "ottosim/evaluation.hpp"
#include "ottosim/surrogate.hpp"

namespace ottosim {

// Everything the experiment commands need, loadable from one JSON file.
// The defaults reproduce the canonical study: a 64-cycle / 96,000-row
// training regime, two 4-cycle in-envelope test regimes, and one shifted
// regime at 1.2x fuel and 0.83x engine speed.
struct ExperimentConfig {
    EngineGeometry geometry;
    WorkingFluid fluid;
    VehicleConfig vehicle;

    // campaign
    double dtheta = 1.0;               // CAD
    std::size_t trace_samples = 1500;  // seconds per commute = rows per cycle
    // Level lists for the six varied parameters, GridPoint field order.
    // Factorial sweeps enumerate the levels; sampled regimes draw from
    // [front, back] of each list, so the lists also define the envelope.
    std::array<std::vector<double>, 6> grid{{
        {263.0, 275.5, 288.0, 300.5, 313.0},   // ambient temp, K
        {0.0, 0.0075, 0.015, 0.0225, 0.03},    // humidity mass fraction
        {0.0, 8.0, 16.0, 24.0, 32.0},          // valve retard, CAD
        {8.5, 9.75, 11.0, 12.25, 13.5},        // compression ratio
        {-32.0, -26.0, -20.0, -14.0, -8.0},    // spark advance, CAD
        {0.85, 0.925, 1.0, 1.075, 1.15},       // final-drive multiplier
    }};

    // dataset regimes
    std::size_t train_cycles = 64;
    std::size_t test_cycles = 4;
    RegimeShift shift{1.2, 0.83};  // out-of-envelope fuel / rpm scaling

    // network and training
    MlpSpec network;
    std::uint64_t init_seed = 1;  // weight initialization
    TrainConfig train;
    std::size_t transfer_rows = 1500;  // adaptation slice of test-data-2
    int transfer_epochs = 50;

    // baselines
    double ridge_lambda = 1.0;
    int knn_k = 5;
    int tree_max_depth = -1;  // unlimited
    int tree_min_leaf = 1;

    std::vector<std::size_t> study_sizes{3000, 12000, 48000, 96000};

    std::uint64_t seed = 20240814;  // master seed for traces and designs
    std::filesystem::path output_dir = "out";

    void validate() const;
};

// Parses a JSON experiment file over the defaults. Unknown keys anywhere in
// the document are rejected so a typo cannot silently fall back to a
// default. The returned config has been validated.
ExperimentConfig load_config(const std::filesystem::path& path);

// 64-bit FNV-1a over the canonical JSON form of the config, as 16 hex
// digits. Two configs hash equal iff every effective setting matches; the
// hash is recorded in every manifest so outputs can be traced to a config.
std::string config_hash(const ExperimentConfig& config);

// Dataset regimes in canonical order: train-data-1 (train_cycles sampled
// cycles), test-data-1a (one shared commute under test_cycles sampled
// points), test-data-1b (test_cycles fresh commutes), and test-data-2 (the
// 1a cases rerun under the fuel/rpm shift).
const std::array<std::string, 4>& regime_names();

// Model methods in canonical order: dnn, lm, rg, knn, dt.
const std::array<std::string, 5>& method_names();

struct GenerateResult {
    std::array<CampaignSummary, 4> regimes;  // regime_names() order
    std::filesystem::path manifest_path;
    double wall_seconds = 0.0;
};

// Builds commute traces and sampled designs from config.seed, runs the
// four regime campaigns, and writes data/<regime>/{campaign.csv,
// case_times.csv, design.csv, manifest.json} plus a top-level manifest
// under output_dir. Bit-identical output for any worker count.
GenerateResult cmd_generate(const ExperimentConfig& config, int workers = 1);

struct TrainOutcome {
    std::filesystem::path model_path;
    std::vector<double> loss_history;  // per-epoch means; empty for baselines
    double train_seconds = 0.0;
    std::size_t rows = 0;
};

// Fits one method on the training regime and writes
// models/model-<method>.json (plus loss-dnn.csv for the network). Scalers
// are fitted on the same rows and embedded in the model file, so a saved
// model is self-contained. Reruns with the same config are bit-identical.
TrainOutcome cmd_train(const ExperimentConfig& config, const std::string& method);

struct EvaluateResult {
    std::vector<MetricReport> reports;  // model file order
    std::filesystem::path csv_path;
    std::filesystem::path svg_path;
};

// Scores saved models on one regime and writes
// reports/<regime>/report.{csv,svg}. Files may be any mix of network and
// baseline saves; each report row is named by the file stem with any
// "model-" prefix dropped.
EvaluateResult cmd_evaluate(const ExperimentConfig& config,
                            const std::vector<std::filesystem::path>& model_files,
                            const std::string& regime);

struct SizeStudyRow {
    std::size_t size = 0;
    std::string output;
    double mape = 0.0;  // percent, on test-data-1a
};

struct SizeStudyResult {
    std::vector<SizeStudyRow> rows;                  // |sizes| x 5, size-major
    std::vector<std::filesystem::path> model_paths;  // one network per size
    std::filesystem::path csv_path;
};

// Trains one network per training-set size (whole cycles taken from the
// front of the training regime), evaluates each on test-data-1a, and
// writes the size-vs-MAPE table under reports/size-study/. Sizes must be
// positive multiples of trace_samples.
SizeStudyResult cmd_size_study(const ExperimentConfig& config,
                               const std::vector<std::size_t>& sizes);

struct TransferResult {
    std::vector<MetricReport> before;  // method_names() order
    std::vector<MetricReport> after;   // same order and schema
    bool frozen_bits_identical = false;
    std::size_t adaptation_rows = 0;
    std::size_t eval_rows = 0;
    std::filesystem::path before_csv;
    std::filesystem::path after_csv;
};

// Adapts the trained network to the shifted regime: fine-tunes on the
// first transfer_rows rows of test-data-2 with the first three hidden
// layers frozen, and retrains every baseline from scratch on the training
// regime plus the same rows (their only adaptation path). Reports metrics
// on the held-out remainder of test-data-2 before and after; the
// adaptation rows never appear in the evaluation set.
TransferResult cmd_transfer(const ExperimentConfig& config);

struct ReportResult {
    std::vector<std::string> regimes;  // regimes found under data/
    std::filesystem::path summary_path;
};

// Evaluates every saved base model on every regime present under data/ and
// writes per-regime reports plus reports/summary.csv keyed by regime.
ReportResult cmd_report(const ExperimentConfig& config);

}  // namespace ottosim
