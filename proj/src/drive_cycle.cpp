#include "ottosim/drive_cycle.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <utility>

#include "json.hpp"
#include "ottosim/dataset.hpp"
#include "ottosim/errors.hpp"
#include "ottosim/prng.hpp"
#include "ottosim/table.hpp"

namespace ottosim {

namespace {

// Load model tying the trace's fuel demand to mutually consistent engine
// inputs. One "full load" is the fuel matching a reference-density cylinder
// fill at stoichiometry; the throttle and mixture maps interpolate on the
// demanded fraction of that fill.
constexpr double kAirDensityRef = 101325.0 / (287.0 * 293.0);  // kg/m^3
constexpr double kVolumetricEff = 0.50;     // charge fraction at full load
constexpr double kPhiLean = 0.95;           // mixture map endpoints
constexpr double kPhiSpan = 0.15;           // phi = lean + span * load
constexpr double kManifoldFloor = 0.32;     // inlet pressure map, fraction of 1 atm
constexpr double kManifoldSpan = 0.62;
constexpr double kEgrPerValveDeg = 0.25 / 40.0;  // internal EGR vs valve retard
constexpr double kWallTemp = 450.0;         // K

// Road-load constants for the synthetic commute (reference compact car).
constexpr double kVehicleMass = 1400.0;       // kg
constexpr double kRollingCoeff = 0.012;
constexpr double kHalfRhoCdA = 0.372;         // kg/m
constexpr double kBrakeEfficiency = 0.30;
constexpr double kFuelLhvRef = 44.0e6;        // J/kg
constexpr double kIdleFuelFlow = 1.5e-4;      // kg/s
constexpr double kSpeedLattice = 0.25;        // m/s quantization

// Headroom so generated traces stay deliverable under the harshest grid
// point and out-of-envelope shift (gear x0.85, rpm x0.83, fuel x1.2).
constexpr double kWorstRpmFactor = 0.85 * 0.83;
constexpr double kWorstFuelScale = 1.2;

double full_load_fuel(const EngineGeometry& geom, const WorkingFluid& fluid) {
    return kAirDensityRef * geom.displacement() * kVolumetricEff / fluid.stoich_afr;
}

double quantize_speed(double v) {
    return std::max(0.0, std::round(v / kSpeedLattice) * kSpeedLattice);
}

// Tractive fuel demand of the reference car at speed v and acceleration a.
double road_load_fuel(double v, double a) {
    if (v <= 0.0) return kIdleFuelFlow;
    if (a < 0.0) return 0.0;  // overrun fuel cut: injection stops while braking in gear
    const double force = kVehicleMass * (a + 9.81 * kRollingCoeff) + kHalfRhoCdA * v * v;
    const double power = std::max(force, 0.0) * v;
    return kIdleFuelFlow + power / (kBrakeEfficiency * kFuelLhvRef);
}

struct DerivedInputs {
    OperatingPoint op;
    std::array<double, kNumInputs> row;
};

// The ten ML inputs and the engine operating point for one trace sample.
// Everything downstream of (speed, fuel_flow, params, shift) is
// deterministic, which is what makes per-case result caching sound.
DerivedInputs derive_inputs(const EngineGeometry& geom, const WorkingFluid& fluid,
                            const VehicleConfig& scaled_vehicle, const GridPoint& params,
                            double speed, double fuel_flow, const RegimeShift& shift) {
    const double rpm = rpm_from_speed(scaled_vehicle, speed) * shift.rpm_scale;
    const double cycles_per_s = rpm / 120.0;  // four-stroke
    const double fuel_full = full_load_fuel(geom, fluid);
    const double phi_max = kPhiLean + kPhiSpan;

    // Delivered fuel is capped at the richest mixture the full-load charge
    // supports; generated traces never reach the cap by construction.
    const double demanded = fuel_flow * shift.fuel_scale / cycles_per_s;
    const double fuel_per_cycle = std::min(demanded, phi_max * fuel_full);
    const double load = std::min(fuel_per_cycle / fuel_full, 1.0);

    const double phi = kPhiLean + kPhiSpan * load;
    const double afr = fluid.stoich_afr / phi;
    const double inlet_pressure = 101325.0 * (kManifoldFloor + kManifoldSpan * load);
    const double egr = params.valve_timing_deg * kEgrPerValveDeg;
    // Fuel-cut samples still breathe; estimate the fill from manifold state.
    const double intake_air =
        fuel_per_cycle > 0.0
            ? fuel_per_cycle * afr
            : inlet_pressure * geom.displacement() / (fluid.gas_constant * params.ambient_temp);

    DerivedInputs d;
    d.op.rpm = rpm;
    d.op.fuel_per_cycle = fuel_per_cycle;
    d.op.afr = afr;
    d.op.inlet_pressure = inlet_pressure;
    d.op.intake_air_mass = intake_air;
    d.op.ambient_temp = params.ambient_temp;
    d.op.humidity = params.humidity;
    d.op.egr_fraction = egr;
    d.op.valve_timing_deg = params.valve_timing_deg;
    d.op.wall_temp = kWallTemp;

    d.row = {params.ambient_temp,    params.humidity, params.valve_timing_deg,
             params.compression_ratio, params.spark_deg, params.gear_ratio,
             fuel_per_cycle * cycles_per_s, afr,          inlet_pressure,
             intake_air};
    return d;
}

}  // namespace

void DriveCycleTrace::validate() const {
    if (id.empty()) throw ConfigError("drive cycle trace needs an id");
    if (samples.empty()) throw ConfigError("drive cycle trace has no samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const CycleSample& s = samples[i];
        if (s.t != static_cast<double>(i))
            throw ConfigError("trace " + id + ": samples must be 1 s apart starting at 0");
        if (!(s.vehicle_speed >= 0.0) || !std::isfinite(s.vehicle_speed))
            throw ConfigError("trace " + id + ": negative or non-finite speed");
        if (!(s.fuel_flow >= 0.0) || !std::isfinite(s.fuel_flow))
            throw ConfigError("trace " + id + ": negative or non-finite fuel flow");
    }
}

void VehicleConfig::validate() const {
    for (std::size_t i = 1; i < gear_ratios.size(); ++i) {
        if (!(gear_ratios[i] < gear_ratios[i - 1]))
            throw ConfigError("gear ratios must be strictly decreasing");
    }
    for (std::size_t i = 1; i < upshift_speeds.size(); ++i) {
        if (!(upshift_speeds[i] > upshift_speeds[i - 1]))
            throw ConfigError("upshift speeds must be strictly increasing");
    }
    if (!(final_drive > 0.0) || !(wheel_radius > 0.0) || !(idle_rpm > 0.0))
        throw ConfigError("vehicle parameters must be positive");
}

double rpm_from_speed(const VehicleConfig& vehicle, double speed) {
    if (!(speed >= 0.0)) throw ConfigError("speed must be non-negative");
    std::size_t gear = 0;
    while (gear < vehicle.upshift_speeds.size() && speed >= vehicle.upshift_speeds[gear]) ++gear;
    const double wheel_rev_per_s = speed / (2.0 * 3.14159265358979323846 * vehicle.wheel_radius);
    const double rpm = wheel_rev_per_s * vehicle.gear_ratios[gear] * vehicle.final_drive * 60.0;
    return std::max(vehicle.idle_rpm, rpm);
}

DriveCycleTrace generate_commute_trace(const std::string& id, std::uint64_t seed,
                                       std::size_t n_samples) {
    if (n_samples == 0) throw ConfigError("trace length must be at least one sample");
    const EngineGeometry ref_geom;
    const WorkingFluid ref_fluid;
    const VehicleConfig ref_vehicle;
    const double fuel_cap_cycle = (kPhiLean + kPhiSpan) * full_load_fuel(ref_geom, ref_fluid);

    // Deliverable fuel rate at this speed under the harshest campaign case.
    auto feasible_fuel = [&](double v) {
        const double worst_rpm = std::max(ref_vehicle.idle_rpm * 0.83,
                                          rpm_from_speed(ref_vehicle, v) * kWorstRpmFactor);
        return fuel_cap_cycle * (worst_rpm / 120.0) / kWorstFuelScale;
    };

    Rng rng(seed);
    DriveCycleTrace trace;
    trace.id = id;
    trace.samples.reserve(n_samples);

    enum class Phase { Idle, Accel, Cruise, Decel };
    Phase phase = Phase::Idle;
    double v = 0.0, accel = 0.0, target = 0.0;
    std::uint64_t remaining = 4 + rng.bounded(18);

    auto pick_target = [&] { return quantize_speed(4.0 + rng.uniform() * 14.0); };

    for (std::size_t i = 0; i < n_samples; ++i) {
        double a_now = 0.0;
        switch (phase) {
            case Phase::Idle:
                v = 0.0;
                break;
            case Phase::Accel:
                a_now = accel;
                break;
            case Phase::Cruise:
                break;
            case Phase::Decel:
                a_now = -accel;
                break;
        }

        CycleSample s;
        s.t = static_cast<double>(i);
        s.vehicle_speed = v;
        s.fuel_flow = std::min(road_load_fuel(v, a_now), feasible_fuel(v));
        trace.samples.push_back(s);

        switch (phase) {
            case Phase::Idle:
                if (--remaining == 0) {
                    target = pick_target();
                    // taper acceleration with speed so demand stays sane
                    accel = (0.6 + rng.uniform() * 1.0) * (1.0 - target / 30.0);
                    phase = Phase::Accel;
                }
                break;
            case Phase::Accel:
                v = quantize_speed(v + accel);
                if (v >= target) {
                    v = target;
                    phase = Phase::Cruise;
                    remaining = 8 + rng.bounded(35);
                }
                break;
            case Phase::Cruise:
                if (--remaining == 0) {
                    if (rng.uniform() < 0.5) {
                        target = 0.0;
                    } else {
                        target = pick_target();
                    }
                    if (target > v) {
                        accel = (0.6 + rng.uniform() * 1.0) * (1.0 - target / 30.0);
                        phase = Phase::Accel;
                    } else {
                        accel = 0.9 + rng.uniform() * 1.3;
                        phase = Phase::Decel;
                    }
                }
                break;
            case Phase::Decel:
                v = std::max(target, quantize_speed(v - accel));
                if (v <= target) {
                    v = target;
                    if (v == 0.0) {
                        phase = Phase::Idle;
                        remaining = 4 + rng.bounded(18);
                    } else {
                        phase = Phase::Cruise;
                        remaining = 8 + rng.bounded(35);
                    }
                }
                break;
        }
    }
    return trace;
}

std::size_t DriveCycleResult::flagged_count() const {
    std::size_t n = 0;
    for (std::uint8_t f : flagged) n += f;
    return n;
}

DriveCycleResult simulate_drive_cycle(const EngineGeometry& geom, const WorkingFluid& fluid,
                                      const VehicleConfig& vehicle, const DriveCycleTrace& trace,
                                      const GridPoint& params, const RegimeShift& shift,
                                      double dtheta) {
    trace.validate();
    vehicle.validate();
    if (!(shift.fuel_scale > 0.0) || !(shift.rpm_scale > 0.0))
        throw ConfigError("regime shift multipliers must be positive");

    EngineGeometry case_geom = geom;
    case_geom.compression_ratio = params.compression_ratio;
    VehicleConfig case_vehicle = vehicle;
    case_vehicle.final_drive *= params.gear_ratio;
    case_vehicle.validate();
    CombustionSpec combustion;
    combustion.spark_deg = params.spark_deg;

    const std::size_t n = trace.samples.size();
    DriveCycleResult result;
    result.trace_id = trace.id;
    result.t.resize(n);
    result.inputs.resize(static_cast<Eigen::Index>(n), kNumInputs);
    result.outputs.resize(static_cast<Eigen::Index>(n), kNumOutputs);
    result.flagged.assign(n, 0);

    struct CachedCycle {
        bool ok;
        CycleOutputs out;
    };
    std::map<std::pair<double, double>, CachedCycle> memo;

    for (std::size_t i = 0; i < n; ++i) {
        const CycleSample& s = trace.samples[i];
        const DerivedInputs d =
            derive_inputs(case_geom, fluid, case_vehicle, params, s.vehicle_speed, s.fuel_flow,
                          shift);
        result.t[i] = s.t;
        for (std::size_t c = 0; c < kNumInputs; ++c) {
            result.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = d.row[c];
        }

        const auto key = std::make_pair(s.vehicle_speed, s.fuel_flow);
        auto found = memo.find(key);
        if (found == memo.end()) {
            CachedCycle cached;
            try {
                cached.out = simulate_engine_cycle(case_geom, fluid, combustion, d.op, dtheta);
                // snap quadrature noise so motored samples read exactly zero
                if (std::fabs(cached.out.torque) < 1e-6) cached.out.torque = 0.0;
                cached.ok = true;
            } catch (const NonPhysicalState&) {
                cached = CachedCycle{false, CycleOutputs{}};
            }
            found = memo.emplace(key, cached).first;
        }

        const CachedCycle& cycle = found->second;
        if (!cycle.ok) {
            result.flagged[i] = 1;
            result.outputs.row(static_cast<Eigen::Index>(i)).setZero();
            continue;
        }
        result.outputs(static_cast<Eigen::Index>(i), 0) = cycle.out.exhaust_temp;
        result.outputs(static_cast<Eigen::Index>(i), 1) = cycle.out.exhaust_pressure;
        result.outputs(static_cast<Eigen::Index>(i), 2) = cycle.out.no_ppm;
        result.outputs(static_cast<Eigen::Index>(i), 3) = cycle.out.co_ppm;
        result.outputs(static_cast<Eigen::Index>(i), 4) = cycle.out.torque;
        result.max_newton_iterations =
            std::max(result.max_newton_iterations, cycle.out.max_newton_iterations);
    }

    for (std::size_t c = 0; c < kNumOutputs; ++c) {
        OutputAggregate agg;
        std::size_t kept = 0;
        bool first = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (result.flagged[i]) continue;
            const double value =
                result.outputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
            agg.cumulative += value;
            agg.peak = first ? value : std::max(agg.peak, value);
            first = false;
            ++kept;
        }
        agg.average = kept > 0 ? agg.cumulative / static_cast<double>(kept) : 0.0;
        result.aggregates[c] = agg;
    }
    return result;
}

std::size_t CampaignSpec::grid_cases() const {
    std::size_t n = 1;
    for (const auto& levels : grid) n *= levels.size();
    return n;
}

void CampaignSpec::validate() const {
    if (traces.empty()) throw ConfigError("campaign needs at least one trace");
    for (const auto& trace : traces) trace.validate();
    for (const auto& levels : grid) {
        if (levels.empty()) throw ConfigError("every grid parameter needs at least one level");
    }
    if (!(dtheta > 0.0 && dtheta <= 1.0))
        throw ConfigError("campaign dtheta must be in (0, 1] CAD");
    if (output_path.empty()) throw ConfigError("campaign needs an output path");
}

void CaseListSpec::validate() const {
    if (traces.empty()) throw ConfigError("campaign needs at least one trace");
    for (const auto& trace : traces) trace.validate();
    if (cases.empty()) throw ConfigError("campaign needs at least one case");
    for (const auto& c : cases) {
        if (c.trace_index >= traces.size())
            throw ConfigError("campaign case references trace " + std::to_string(c.trace_index) +
                              " but only " + std::to_string(traces.size()) + " traces are given");
    }
    if (!(dtheta > 0.0 && dtheta <= 1.0))
        throw ConfigError("campaign dtheta must be in (0, 1] CAD");
    if (output_path.empty()) throw ConfigError("campaign needs an output path");
}

namespace {

GridPoint grid_point_at(const std::array<std::vector<double>, 6>& grid, std::size_t index) {
    // lexicographic enumeration, last parameter fastest
    std::array<std::size_t, 6> idx{};
    for (int p = 5; p >= 0; --p) {
        const std::size_t levels = grid[static_cast<std::size_t>(p)].size();
        idx[static_cast<std::size_t>(p)] = index % levels;
        index /= levels;
    }
    GridPoint pt;
    pt.ambient_temp = grid[0][idx[0]];
    pt.humidity = grid[1][idx[1]];
    pt.valve_timing_deg = grid[2][idx[2]];
    pt.compression_ratio = grid[3][idx[3]];
    pt.spark_deg = grid[4][idx[4]];
    pt.gear_ratio = grid[5][idx[5]];
    return pt;
}

std::string dataset_header() {
    std::string header = "trace_id,t";
    for (const auto& name : input_names()) header += "," + name;
    for (const auto& name : output_names()) header += "," + name;
    return header;
}

void append_case_rows(std::string& buffer, std::size_t case_id, const DriveCycleResult& result) {
    const std::string id = std::to_string(case_id);
    for (std::size_t i = 0; i < result.rows(); ++i) {
        if (result.flagged[i]) continue;
        buffer += id;
        buffer += ',';
        buffer += csv::format_double(result.t[i]);
        for (std::size_t c = 0; c < kNumInputs; ++c) {
            buffer += ',';
            buffer += csv::format_double(
                result.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
        }
        for (std::size_t c = 0; c < kNumOutputs; ++c) {
            buffer += ',';
            buffer += csv::format_double(
                result.outputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
        }
        buffer += '\n';
    }
}

struct CaseSlot {
    std::unique_ptr<DriveCycleResult> result;
    std::exception_ptr error;
    double seconds = 0.0;
    bool done = false;
};

// Fully resolved campaign: every case is an explicit (trace, point) pair.
// Both public entry points funnel through run_plan so case ordering, worker
// handling, and the output layout are identical regardless of how the case
// list was built.
struct RunPlan {
    const std::vector<DriveCycleTrace>* traces = nullptr;
    std::vector<CampaignCase> cases;
    std::uint64_t seed = 0;
    std::filesystem::path output_path;
    RegimeShift shift{};
    double dtheta = 1.0;
    std::vector<std::size_t> grid_levels;  // empty for explicit case lists
};

CampaignSummary run_plan(const RunPlan& plan, const EngineGeometry& geom,
                         const WorkingFluid& fluid, const VehicleConfig& vehicle, int workers) {
    if (workers < 1) throw ConfigError("campaign needs at least one worker");

    const std::size_t n_cases = plan.cases.size();
    std::filesystem::create_directories(plan.output_path);

    CampaignSummary summary;
    summary.cases = n_cases;
    summary.dataset_path = plan.output_path / "campaign.csv";
    summary.timing_path = plan.output_path / "case_times.csv";
    summary.manifest_path = plan.output_path / "manifest.json";

    std::vector<CaseSlot> slots(n_cases);
    std::mutex mutex;
    std::condition_variable ready;
    std::atomic<std::size_t> next_case{0};

    auto worker_loop = [&] {
        while (true) {
            const std::size_t id = next_case.fetch_add(1);
            if (id >= n_cases) return;
            CaseSlot slot;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const CampaignCase& c = plan.cases[id];
                const DriveCycleTrace& trace = (*plan.traces)[c.trace_index];
                slot.result = std::make_unique<DriveCycleResult>(simulate_drive_cycle(
                    geom, fluid, vehicle, trace, c.point, plan.shift, plan.dtheta));
            } catch (...) {
                slot.error = std::current_exception();
            }
            slot.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            slot.done = true;
            {
                std::lock_guard<std::mutex> lock(mutex);
                slots[id] = std::move(slot);
            }
            ready.notify_all();
        }
    };

    const int n_threads = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(n_cases, 1)));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker_loop);

    auto join_all = [&] {
        for (auto& t : pool) {
            if (t.joinable()) t.join();
        }
    };

    auto write_manifest = [&](bool partial, std::size_t cases_written) {
        nlohmann::json manifest;
        manifest["partial"] = partial;
        manifest["cases"] = n_cases;
        manifest["cases_written"] = cases_written;
        manifest["trace_count"] = plan.traces->size();
        std::vector<std::size_t> lengths;
        for (const auto& trace : *plan.traces) lengths.push_back(trace.samples.size());
        manifest["trace_samples"] = lengths;
        if (!plan.grid_levels.empty()) manifest["grid_levels"] = plan.grid_levels;
        manifest["seed"] = plan.seed;
        manifest["dtheta"] = plan.dtheta;
        manifest["fuel_scale"] = plan.shift.fuel_scale;
        manifest["rpm_scale"] = plan.shift.rpm_scale;
        manifest["rows_written"] = summary.rows_written;
        manifest["flagged_rows"] = summary.flagged_rows;
        manifest["case_seconds_min"] = summary.case_seconds_min;
        manifest["case_seconds_max"] = summary.case_seconds_max;
        manifest["wall_seconds"] = summary.wall_seconds;
        manifest["max_newton_iterations"] = summary.max_newton_iterations;
        std::ofstream out(summary.manifest_path);
        out << manifest.dump(2) << "\n";
    };

    const auto campaign_start = std::chrono::steady_clock::now();
    std::ofstream dataset(summary.dataset_path);
    std::ofstream timing(summary.timing_path);
    dataset << dataset_header() << "\n";
    timing << "case_id,seconds\n";

    std::string buffer;
    for (std::size_t id = 0; id < n_cases; ++id) {
        CaseSlot slot;
        {
            std::unique_lock<std::mutex> lock(mutex);
            ready.wait(lock, [&] { return slots[id].done; });
            slot = std::move(slots[id]);
        }
        if (slot.error) {
            join_all();
            write_manifest(true, id);
            std::rethrow_exception(slot.error);
        }

        buffer.clear();
        append_case_rows(buffer, id, *slot.result);
        dataset << buffer;
        timing << id << ',' << csv::format_double(slot.seconds) << "\n";
        if (!dataset || !timing) {
            join_all();
            write_manifest(true, id);
            throw IoError("campaign output write failed at case " + std::to_string(id));
        }

        const std::size_t flagged = slot.result->flagged_count();
        summary.rows_written += slot.result->rows() - flagged;
        summary.flagged_rows += flagged;
        summary.max_newton_iterations =
            std::max(summary.max_newton_iterations, slot.result->max_newton_iterations);
        if (id == 0) {
            summary.case_seconds_min = summary.case_seconds_max = slot.seconds;
        } else {
            summary.case_seconds_min = std::min(summary.case_seconds_min, slot.seconds);
            summary.case_seconds_max = std::max(summary.case_seconds_max, slot.seconds);
        }
    }
    join_all();

    dataset.close();
    timing.close();
    if (dataset.fail() || timing.fail()) {
        write_manifest(true, n_cases);
        throw IoError("campaign output close failed");
    }

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - campaign_start).count();
    write_manifest(false, n_cases);
    return summary;
}

}  // namespace

CampaignSummary run_campaign(const CampaignSpec& spec, const EngineGeometry& geom,
                             const WorkingFluid& fluid, const VehicleConfig& vehicle,
                             int workers) {
    spec.validate();

    const std::size_t n_grid = spec.grid_cases();
    RunPlan plan;
    plan.traces = &spec.traces;
    plan.cases.reserve(spec.traces.size() * n_grid);
    for (std::size_t t = 0; t < spec.traces.size(); ++t) {
        for (std::size_t g = 0; g < n_grid; ++g) {
            plan.cases.push_back({t, grid_point_at(spec.grid, g)});
        }
    }
    plan.seed = spec.seed;
    plan.output_path = spec.output_path;
    plan.shift = spec.shift;
    plan.dtheta = spec.dtheta;
    for (const auto& list : spec.grid) plan.grid_levels.push_back(list.size());
    return run_plan(plan, geom, fluid, vehicle, workers);
}

CampaignSummary run_cases(const CaseListSpec& spec, const EngineGeometry& geom,
                          const WorkingFluid& fluid, const VehicleConfig& vehicle, int workers) {
    spec.validate();

    RunPlan plan;
    plan.traces = &spec.traces;
    plan.cases = spec.cases;
    plan.seed = spec.seed;
    plan.output_path = spec.output_path;
    plan.shift = spec.shift;
    plan.dtheta = spec.dtheta;
    return run_plan(plan, geom, fluid, vehicle, workers);
}

}  // namespace ottosim
