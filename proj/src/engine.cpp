#include "ottosim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ottosim/emissions.hpp"
#include "ottosim/errors.hpp"

namespace ottosim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

// Trapped exhaust residual is assumed to re-enter at a fixed temperature;
// EGR dilution then only heats the fresh charge.
constexpr double kResidualTemp = 900.0;  // K

// Convective heat-loss coefficient prefactor, SI units (pressure in Pa).
// Chosen so that roughly 15% of the fuel heat is lost through the walls at
// the mid-grid operating point.
constexpr double kWoschniC = 0.013;

// Specific-heat ratio of water vapor, used for the humidity correction.
constexpr double kGammaSteam = 1.33;

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid engine input: ") + what);
}

}  // namespace

void EngineGeometry::validate() const {
    require(bore > 0.0, "bore must be positive");
    require(stroke > 0.0, "stroke must be positive");
    require(conrod_length > stroke / 2.0, "conrod must exceed half the stroke");
    require(compression_ratio > 1.0, "compression ratio must exceed 1");
    require(n_cylinders >= 1, "need at least one cylinder");
}

double EngineGeometry::displacement() const {
    return n_cylinders * kPi / 4.0 * bore * bore * stroke;
}

double EngineGeometry::clearance_volume() const {
    return displacement() / n_cylinders / (compression_ratio - 1.0);
}

void WorkingFluid::validate() const {
    require(gamma_unburned > 1.0 && gamma_unburned <= 1.7, "gamma_unburned outside (1, 1.7]");
    require(gamma_burned > 1.0 && gamma_burned <= 1.7, "gamma_burned outside (1, 1.7]");
    require(gamma_burned <= gamma_unburned, "burned gas must have the lower gamma");
    require(gas_constant > 0.0, "gas constant must be positive");
    require(fuel_lhv > 0.0, "heating value must be positive");
    require(stoich_afr > 0.0, "stoichiometric AFR must be positive");
}

void CombustionSpec::validate() const {
    require(spark_deg >= -60.0 && spark_deg <= 20.0, "spark outside [-60, 20] CAD");
    require(duration_deg > 0.0 && duration_deg <= 120.0, "duration outside (0, 120] CAD");
    require(wiebe_a > 0.0, "wiebe_a must be positive");
    require(wiebe_m >= 0.0, "wiebe_m must be non-negative");
}

void OperatingPoint::validate() const {
    require(rpm > 0.0, "rpm must be positive");
    require(fuel_per_cycle >= 0.0, "fuel mass cannot be negative");
    require(afr > 0.0, "AFR must be positive");
    require(inlet_pressure > 0.0, "inlet pressure must be positive");
    require(intake_air_mass > 0.0, "intake air mass must be positive");
    require(ambient_temp > 0.0, "ambient temperature must be positive");
    require(humidity >= 0.0 && humidity <= 1.0, "humidity outside [0, 1]");
    require(egr_fraction >= 0.0 && egr_fraction <= 0.5, "EGR fraction outside [0, 0.5]");
    require(wall_temp > 0.0, "wall temperature must be positive");
}

double cylinder_volume(const EngineGeometry& geom, double theta_deg) {
    const double r = 2.0 * geom.conrod_length / geom.stroke;
    const double th = theta_deg * kDegToRad;
    const double s = std::sin(th);
    const double piston = r + 1.0 - std::cos(th) - std::sqrt(r * r - s * s);
    return geom.clearance_volume() * (1.0 + (geom.compression_ratio - 1.0) / 2.0 * piston);
}

double cylinder_volume_derivative(const EngineGeometry& geom, double theta_deg) {
    const double r = 2.0 * geom.conrod_length / geom.stroke;
    const double th = theta_deg * kDegToRad;
    const double s = std::sin(th);
    const double c = std::cos(th);
    const double dpiston = s * (1.0 + c / std::sqrt(r * r - s * s));  // per radian
    return geom.clearance_volume() * (geom.compression_ratio - 1.0) / 2.0 * dpiston * kDegToRad;
}

double burn_fraction(const CombustionSpec& spec, double theta_deg) {
    if (theta_deg <= spec.spark_deg) return 0.0;
    double z = (theta_deg - spec.spark_deg) / spec.duration_deg;
    if (z > 1.0) z = 1.0;
    return 1.0 - std::exp(-spec.wiebe_a * std::pow(z, spec.wiebe_m + 1.0));
}

double burn_fraction_derivative(const CombustionSpec& spec, double theta_deg) {
    if (theta_deg <= spec.spark_deg) return 0.0;
    const double z = (theta_deg - spec.spark_deg) / spec.duration_deg;
    if (z >= 1.0) return 0.0;
    const double zm = std::pow(z, spec.wiebe_m);
    return spec.wiebe_a * (spec.wiebe_m + 1.0) / spec.duration_deg * zm *
           std::exp(-spec.wiebe_a * zm * z);
}

namespace {

// Quantities fixed over one cycle integration.
struct CycleContext {
    double v_ivc;             // m^3
    double p_ivc;             // Pa
    double t_trapped;         // K
    double mass;              // kg trapped in one cylinder
    double gamma_u;           // humidity-corrected
    double gamma_b;
    double q_total;           // J heat release, one cylinder
    double piston_speed;      // m/s mean
    double seconds_per_deg;   // s/CAD
    bool fired;
};

CycleContext make_context(const EngineGeometry& geom, const WorkingFluid& fluid,
                          const OperatingPoint& op) {
    CycleContext ctx;
    ctx.v_ivc = cylinder_volume(geom, kThetaIvc);
    ctx.p_ivc = op.inlet_pressure;
    // residual dilution heats the trapped charge; mass-weighted mix
    ctx.t_trapped = (1.0 - op.egr_fraction) * op.ambient_temp + op.egr_fraction * kResidualTemp;
    ctx.mass = ctx.p_ivc * ctx.v_ivc / (fluid.gas_constant * ctx.t_trapped);
    ctx.gamma_u = (1.0 - op.humidity) * fluid.gamma_unburned + op.humidity * kGammaSteam;
    ctx.gamma_b = (1.0 - op.humidity) * fluid.gamma_burned + op.humidity * kGammaSteam;
    ctx.fired = op.fuel_per_cycle > 0.0;
    ctx.q_total = ctx.fired ? op.fuel_per_cycle / geom.n_cylinders * fluid.fuel_lhv : 0.0;
    ctx.piston_speed = 2.0 * geom.stroke * op.rpm / 60.0;
    ctx.seconds_per_deg = 1.0 / (6.0 * op.rpm);
    return ctx;
}

double blend_gamma(const CycleContext& ctx, double burn) {
    return ctx.gamma_u + (ctx.gamma_b - ctx.gamma_u) * burn;
}

// Unfired cycles skip combustion entirely; the burn profile must read as
// zero or the gamma blend alone would break the motored isentrope.
double effective_burn(const CombustionSpec& spec, const CycleContext& ctx, double theta) {
    return ctx.fired ? burn_fraction(spec, theta) : 0.0;
}

// Right-hand side of the pressure equation plus the heat-loss and work
// quadratures: y = (P, Q_loss, W).
struct Derivatives {
    double dp;
    double dq_loss;
    double dwork;
};

Derivatives rhs(double theta, double pressure, const EngineGeometry& geom,
                const CombustionSpec& spec, const WorkingFluid& fluid, const OperatingPoint& op,
                const CycleContext& ctx) {
    const double v = cylinder_volume(geom, theta);
    const double dv = cylinder_volume_derivative(geom, theta);
    const double gamma = blend_gamma(ctx, effective_burn(spec, ctx, theta));
    const double dq_in = ctx.q_total * burn_fraction_derivative(spec, theta);

    double dq_loss = 0.0;
    if (ctx.fired) {
        const double t_bulk = pressure * v / (ctx.mass * fluid.gas_constant);
        if (t_bulk > op.wall_temp) {  // walls only ever absorb heat
            const double h = kWoschniC * std::pow(geom.bore, -0.2) * std::pow(pressure, 0.8) *
                             std::pow(t_bulk, -0.55) * std::pow(ctx.piston_speed, 0.8);
            const double area = kPi * geom.bore * geom.bore / 2.0 + 4.0 * v / geom.bore;
            dq_loss = h * area * (t_bulk - op.wall_temp) * ctx.seconds_per_deg;
        }
    }

    Derivatives d;
    d.dp = (gamma - 1.0) / v * (dq_in - dq_loss) - gamma * pressure / v * dv;
    d.dq_loss = dq_loss;
    d.dwork = pressure * dv;
    return d;
}

struct IntegrationState {
    double pressure;
    double heat_loss;
    double work;
};

IntegrationState rk4_step(double theta, const IntegrationState& y, double dtheta,
                          const EngineGeometry& geom, const CombustionSpec& spec,
                          const WorkingFluid& fluid, const OperatingPoint& op,
                          const CycleContext& ctx) {
    const auto k1 = rhs(theta, y.pressure, geom, spec, fluid, op, ctx);
    const auto k2 = rhs(theta + dtheta / 2.0, y.pressure + dtheta / 2.0 * k1.dp, geom, spec,
                        fluid, op, ctx);
    const auto k3 = rhs(theta + dtheta / 2.0, y.pressure + dtheta / 2.0 * k2.dp, geom, spec,
                        fluid, op, ctx);
    const auto k4 = rhs(theta + dtheta, y.pressure + dtheta * k3.dp, geom, spec, fluid, op, ctx);

    IntegrationState out;
    out.pressure = y.pressure + dtheta / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    out.heat_loss =
        y.heat_loss + dtheta / 6.0 * (k1.dq_loss + 2.0 * k2.dq_loss + 2.0 * k3.dq_loss + k4.dq_loss);
    out.work = y.work + dtheta / 6.0 * (k1.dwork + 2.0 * k2.dwork + 2.0 * k3.dwork + k4.dwork);
    return out;
}

// Zone temperatures from the new pressure. The unburned zone follows the
// bulk gas until spark, then compresses isentropically; the burned zone
// fills the volume the unburned zone does not occupy.
void recover_zones(CylinderState& state, double prev_pressure, double prev_temp_unburned,
                   const EngineGeometry& geom, const CombustionSpec& spec,
                   const WorkingFluid& fluid, const CycleContext& ctx) {
    const double v = cylinder_volume(geom, state.theta);
    const double r = fluid.gas_constant;
    state.burn_fraction = effective_burn(spec, ctx, state.theta);

    if (state.theta <= spec.spark_deg || !ctx.fired) {
        state.temp_unburned = state.pressure * v / (ctx.mass * r);
        state.temp_burned = state.temp_unburned;
        return;
    }

    const double g = ctx.gamma_u;
    state.temp_unburned = prev_temp_unburned * std::pow(state.pressure / prev_pressure, (g - 1.0) / g);

    const double burned_mass = state.burn_fraction * ctx.mass;
    if (burned_mass < 1e-12 * ctx.mass) {
        state.temp_burned = state.temp_unburned;
        return;
    }
    const double v_unburned = (ctx.mass - burned_mass) * r * state.temp_unburned / state.pressure;
    const double v_burned = std::max(v - v_unburned, 0.0);
    state.temp_burned =
        std::max(state.pressure * v_burned / (burned_mass * r), state.temp_unburned);
}

void check_physical(const CylinderState& state) {
    if (!(state.pressure > 0.0))
        throw NonPhysicalState("pressure not positive", state.theta);
    if (!(state.temp_unburned > 0.0) || !(state.temp_burned > 0.0))
        throw NonPhysicalState("temperature not positive", state.theta);
}

}  // namespace

CylinderState step_pressure(const CylinderState& state, const EngineGeometry& geom,
                            const WorkingFluid& fluid, const CombustionSpec& spec,
                            const OperatingPoint& op, double dtheta) {
    if (!(dtheta > 0.0 && dtheta <= 1.0))
        throw ConfigError("step_pressure: dtheta must be in (0, 1] CAD");
    if (state.theta + dtheta > kThetaEvo + 1e-9)
        throw ConfigError("step_pressure: step leaves the closed-cycle window");
    geom.validate();
    fluid.validate();
    spec.validate();
    op.validate();

    const CycleContext ctx = make_context(geom, fluid, op);
    IntegrationState y{state.pressure, state.cumulative_heat_loss, 0.0};
    y = rk4_step(state.theta, y, dtheta, geom, spec, fluid, op, ctx);

    CylinderState out = state;
    out.theta = state.theta + dtheta;
    out.pressure = y.pressure;
    out.cumulative_heat_loss = y.heat_loss;
    recover_zones(out, state.pressure, state.temp_unburned, geom, spec, fluid, ctx);
    check_physical(out);
    return out;
}

CycleTrace simulate_cycle_trace(const EngineGeometry& geom, const WorkingFluid& fluid,
                                const CombustionSpec& spec, const OperatingPoint& op,
                                double dtheta) {
    if (!(dtheta > 0.0 && dtheta <= 1.0))
        throw ConfigError("simulate_cycle_trace: dtheta must be in (0, 1] CAD");
    geom.validate();
    fluid.validate();
    spec.validate();
    op.validate();

    const CycleContext ctx = make_context(geom, fluid, op);
    const double span = kThetaEvo - kThetaIvc;
    const auto n_steps = static_cast<std::size_t>(std::ceil(span / dtheta - 1e-9));

    CycleTrace trace;
    trace.seconds_per_deg = ctx.seconds_per_deg;
    trace.theta.reserve(n_steps + 1);
    trace.pressure.reserve(n_steps + 1);
    trace.temp_burned.reserve(n_steps + 1);
    trace.temp_unburned.reserve(n_steps + 1);
    trace.burn_fraction.reserve(n_steps + 1);

    CylinderState state;
    state.theta = kThetaIvc;
    state.pressure = ctx.p_ivc;
    state.temp_unburned = ctx.t_trapped;
    state.temp_burned = ctx.t_trapped;
    state.burn_fraction = 0.0;
    state.cumulative_heat_loss = 0.0;

    auto record = [&](const CylinderState& s) {
        trace.theta.push_back(s.theta);
        trace.pressure.push_back(s.pressure);
        trace.temp_burned.push_back(s.temp_burned);
        trace.temp_unburned.push_back(s.temp_unburned);
        trace.burn_fraction.push_back(s.burn_fraction);
    };
    record(state);

    IntegrationState y{state.pressure, 0.0, 0.0};
    for (std::size_t i = 1; i <= n_steps; ++i) {
        const double theta_next = std::min(kThetaIvc + static_cast<double>(i) * dtheta, kThetaEvo);
        const double h = theta_next - state.theta;
        y = rk4_step(state.theta, y, h, geom, spec, fluid, op, ctx);

        const double prev_pressure = state.pressure;
        const double prev_temp_unburned = state.temp_unburned;
        state.theta = theta_next;
        state.pressure = y.pressure;
        state.cumulative_heat_loss = y.heat_loss;
        recover_zones(state, prev_pressure, prev_temp_unburned, geom, spec, fluid, ctx);
        check_physical(state);
        record(state);
    }

    // Close the loop back to the IVC volume along an isentrope so a motored
    // adiabatic cycle does exactly zero net work; this stands in for the gas
    // exchange strokes.
    const double gamma_end = blend_gamma(ctx, state.burn_fraction);
    const double v_evo = cylinder_volume(geom, kThetaEvo);
    const double k = state.pressure * std::pow(v_evo, gamma_end);
    const double closure = (k * std::pow(ctx.v_ivc, 1.0 - gamma_end) -
                            k * std::pow(v_evo, 1.0 - gamma_end)) /
                           (1.0 - gamma_end);

    trace.indicated_work = y.work + closure;
    trace.heat_in = ctx.q_total * burn_fraction(spec, kThetaEvo);
    trace.heat_loss = y.heat_loss;
    return trace;
}

CycleOutputs simulate_engine_cycle(const EngineGeometry& geom, const WorkingFluid& fluid,
                                   const CombustionSpec& spec, const OperatingPoint& op,
                                   double dtheta) {
    const CycleTrace trace = simulate_cycle_trace(geom, fluid, spec, op, dtheta);

    CycleOutputs out;
    out.exhaust_temp = trace.temp_burned.back();
    out.exhaust_pressure = trace.pressure.back();
    out.torque = geom.n_cylinders * trace.indicated_work / (4.0 * kPi);
    out.peak_pressure = *std::max_element(trace.pressure.begin(), trace.pressure.end());
    out.peak_temp = *std::max_element(trace.temp_burned.begin(), trace.temp_burned.end());

    if (op.fuel_per_cycle > 0.0) {
        const EmissionsResult em =
            integrate_emissions(trace, fluid.stoich_afr / op.afr, EmissionsConfig{});
        out.no_ppm = em.no_ppm;
        out.co_ppm = em.co_ppm;
        out.max_newton_iterations = em.max_newton_iterations;
    }
    return out;
}

}  // namespace ottosim
