#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ottosim/engine.hpp"

namespace ottosim {

// One second of a commute: vehicle speed and fuel demand.
struct CycleSample {
    double t = 0.0;              // s
    double vehicle_speed = 0.0;  // m/s
    double fuel_flow = 0.0;      // kg/s, whole engine
};

// 1 Hz transient trace. The canonical commute is 1,500 samples (25 min);
// shorter traces are legal and used for fast sweeps.
struct DriveCycleTrace {
    std::string id;
    std::vector<CycleSample> samples;

    void validate() const;
};

// Synthetic urban commute: seeded idle/accelerate/cruise/brake segments.
// Speeds live on a 0.25 m/s lattice and fuel follows a deterministic road
// load model, so a trace revisits exact operating points and per-case
// caching of the cycle simulation pays off.
DriveCycleTrace generate_commute_trace(const std::string& id, std::uint64_t seed,
                                       std::size_t n_samples = 1500);

struct VehicleConfig {
    std::array<double, 5> gear_ratios{3.5, 2.1, 1.4, 1.0, 0.8};
    double final_drive = 3.9;
    double wheel_radius = 0.31;  // m
    double idle_rpm = 800.0;
    std::array<double, 4> upshift_speeds{5.0, 10.0, 16.0, 23.0};  // m/s

    void validate() const;
};

// Gear picked by speed thresholds alone (no hysteresis), clamped at idle.
double rpm_from_speed(const VehicleConfig& vehicle, double speed);

// The six campaign-varied parameters. gear_ratio scales the final drive.
struct GridPoint {
    double ambient_temp = 293.0;     // K
    double humidity = 0.01;          // water mass fraction
    double valve_timing_deg = 16.0;  // CAD retard, sets internal EGR
    double compression_ratio = 10.0;
    double spark_deg = -20.0;        // CAD
    double gear_ratio = 1.0;         // final-drive multiplier
};

// Out-of-envelope transform: fuel_flow and post-gear-map rpm multipliers.
struct RegimeShift {
    double fuel_scale = 1.0;
    double rpm_scale = 1.0;
};

struct OutputAggregate {
    double peak = 0.0;
    double average = 0.0;
    double cumulative = 0.0;
};

struct DriveCycleResult {
    std::string trace_id;
    std::vector<double> t;
    Eigen::MatrixXd inputs;             // rows x 10, dataset input order
    Eigen::MatrixXd outputs;            // rows x 5, dataset output order
    std::vector<std::uint8_t> flagged;  // non-physical sample, excluded from ML
    std::array<OutputAggregate, 5> aggregates;  // over unflagged rows
    int max_newton_iterations = 0;

    std::size_t rows() const { return t.size(); }
    std::size_t flagged_count() const;
};

// Quasi-steady closure: every 1 Hz sample maps to one steady engine cycle
// evaluated independently; repeated (speed, fuel) samples reuse the result.
DriveCycleResult simulate_drive_cycle(const EngineGeometry& geom, const WorkingFluid& fluid,
                                      const VehicleConfig& vehicle, const DriveCycleTrace& trace,
                                      const GridPoint& params, const RegimeShift& shift = {},
                                      double dtheta = 1.0);

struct CampaignSpec {
    std::vector<DriveCycleTrace> traces;
    // Level lists for the six GridPoint parameters, in GridPoint field order.
    std::array<std::vector<double>, 6> grid;
    std::uint64_t seed = 0;  // recorded in the manifest; campaign itself draws nothing
    std::filesystem::path output_path;  // directory for dataset, timing log, manifest
    RegimeShift shift{};
    double dtheta = 1.0;  // CAD

    std::size_t grid_cases() const;
    void validate() const;
};

struct CampaignSummary {
    std::size_t cases = 0;
    std::size_t rows_written = 0;
    std::size_t flagged_rows = 0;
    double case_seconds_min = 0.0;
    double case_seconds_max = 0.0;
    double wall_seconds = 0.0;
    int max_newton_iterations = 0;
    std::filesystem::path dataset_path;
    std::filesystem::path timing_path;
    std::filesystem::path manifest_path;
};

// Task farm over trace x grid cases. Case order is trace-major with the
// grid enumerated lexicographically (last parameter fastest); the output is
// written in that order no matter how many workers run, so files are
// bit-identical across worker counts. Rows carry the case index as
// trace_id. On write failure a manifest marked partial is left behind.
CampaignSummary run_campaign(const CampaignSpec& spec, const EngineGeometry& geom,
                             const WorkingFluid& fluid, const VehicleConfig& vehicle,
                             int workers);

// One explicitly paired trace and parameter point.
struct CampaignCase {
    std::size_t trace_index = 0;
    GridPoint point;
};

// Campaign over an explicit case list instead of a factorial product; used
// by sampled designs where each case carries its own parameter point. Same
// output layout, ordering guarantees, and manifest contract as
// run_campaign, with cases written in list order.
struct CaseListSpec {
    std::vector<DriveCycleTrace> traces;
    std::vector<CampaignCase> cases;
    std::uint64_t seed = 0;  // recorded in the manifest
    std::filesystem::path output_path;
    RegimeShift shift{};
    double dtheta = 1.0;  // CAD

    void validate() const;
};

CampaignSummary run_cases(const CaseListSpec& spec, const EngineGeometry& geom,
                          const WorkingFluid& fluid, const VehicleConfig& vehicle, int workers);

}  // namespace ottosim
