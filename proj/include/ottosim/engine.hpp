#pragma once

#include <vector>

namespace ottosim {

// Closed part of the four-stroke cycle: intake valve close to exhaust valve
// open, crank angle in degrees with 0 = firing TDC.
inline constexpr double kThetaIvc = -160.0;
inline constexpr double kThetaEvo = 140.0;

struct EngineGeometry {
    double bore = 0.086;           // m
    double stroke = 0.086;         // m
    double conrod_length = 0.145;  // m
    double compression_ratio = 10.0;
    int n_cylinders = 4;

    void validate() const;
    double displacement() const;        // all cylinders, m^3
    double clearance_volume() const;    // one cylinder, m^3
};

struct WorkingFluid {
    double gamma_unburned = 1.35;
    double gamma_burned = 1.28;
    double gas_constant = 287.0;   // J/(kg K)
    double fuel_lhv = 44.0e6;      // J/kg
    double stoich_afr = 14.7;

    void validate() const;
};

struct CombustionSpec {
    double spark_deg = -20.0;      // CAD, negative = before TDC
    double duration_deg = 60.0;    // CAD
    double wiebe_a = 6.908;
    double wiebe_m = 2.0;

    void validate() const;
};

// Per-second control and environment inputs for one cycle evaluation.
// fuel_per_cycle and intake_air_mass are whole-engine quantities per
// four-stroke cycle; the simulator divides by cylinder count internally.
struct OperatingPoint {
    double rpm = 2000.0;
    double fuel_per_cycle = 8.0e-5;   // kg/cycle
    double afr = 14.7;
    double inlet_pressure = 95000.0;  // Pa at intake valve close
    double intake_air_mass = 1.2e-3;  // kg/cycle
    double ambient_temp = 300.0;      // K
    double humidity = 0.01;           // water mass fraction of the charge
    double egr_fraction = 0.1;        // trapped residual mass fraction
    double valve_timing_deg = 16.0;   // CAD retard; sets egr in drive-cycle
    double wall_temp = 450.0;         // K

    void validate() const;
};

struct CylinderState {
    double theta = kThetaIvc;          // CAD
    double pressure = 0.0;             // Pa
    double temp_unburned = 0.0;        // K
    double temp_burned = 0.0;          // K
    double burn_fraction = 0.0;
    double cumulative_heat_loss = 0.0; // J, this cylinder
};

struct CycleOutputs {
    double exhaust_temp = 0.0;         // K, burned zone at exhaust valve open
    double exhaust_pressure = 0.0;     // Pa at exhaust valve open
    double no_ppm = 0.0;
    double co_ppm = 0.0;
    double torque = 0.0;               // N m, whole engine, cycle average
    double peak_pressure = 0.0;        // Pa
    double peak_temp = 0.0;            // K
    int max_newton_iterations = 0;     // worst equilibrium solve this cycle
};

// Slider-crank volume of one cylinder and its analytic derivative.
double cylinder_volume(const EngineGeometry& geom, double theta_deg);
double cylinder_volume_derivative(const EngineGeometry& geom, double theta_deg);  // m^3/CAD

// Wiebe burn profile: 0 before spark, 1 - exp(-a ((theta-spark)/dur)^(m+1))
// during combustion, constant after. Never renormalized, so the end value is
// 1 - exp(-a).
double burn_fraction(const CombustionSpec& spec, double theta_deg);
double burn_fraction_derivative(const CombustionSpec& spec, double theta_deg);  // 1/CAD

// One explicit RK4 step of the in-cylinder pressure equation, with zone
// temperatures recovered from the new pressure. dtheta in (0, 1] CAD.
CylinderState step_pressure(const CylinderState& state, const EngineGeometry& geom,
                            const WorkingFluid& fluid, const CombustionSpec& spec,
                            const OperatingPoint& op, double dtheta);

// Sampled state history of one cycle, used by the emissions integration.
struct CycleTrace {
    std::vector<double> theta;          // CAD, ascending
    std::vector<double> pressure;       // Pa
    std::vector<double> temp_burned;    // K
    std::vector<double> temp_unburned;  // K
    std::vector<double> burn_fraction;
    double seconds_per_deg = 0.0;
    double indicated_work = 0.0;        // J, one cylinder, incl. closure leg
    double heat_in = 0.0;               // J, one cylinder
    double heat_loss = 0.0;             // J, one cylinder
};

CycleTrace simulate_cycle_trace(const EngineGeometry& geom, const WorkingFluid& fluid,
                                const CombustionSpec& spec, const OperatingPoint& op,
                                double dtheta = 0.5);

// Full cycle evaluation: pressure integration, torque from indicated work,
// equilibrium + kinetic emissions. Unfired cycles (fuel_per_cycle = 0) run
// the motored loop with adiabatic walls and report zero emissions.
CycleOutputs simulate_engine_cycle(const EngineGeometry& geom, const WorkingFluid& fluid,
                                   const CombustionSpec& spec, const OperatingPoint& op,
                                   double dtheta = 0.5);

}  // namespace ottosim
