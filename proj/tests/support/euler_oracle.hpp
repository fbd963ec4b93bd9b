#pragma once

// Fine-step explicit-Euler integration of the in-cylinder pressure equation,
// written directly from the model definition and kept independent of the
// production RK4 stepper. Two Euler passes at h and h/2 are Richardson
// extrapolated, which cancels the leading first-order error term and leaves
// the result accurate to O(h^2); at h = 1e-4 CAD that is far below the
// tolerance used against it.

#include <cmath>

#include "ottosim/engine.hpp"

namespace oracle {

inline double euler_pass(const ottosim::EngineGeometry& geom,
                         const ottosim::WorkingFluid& fluid,
                         const ottosim::CombustionSpec& spec,
                         const ottosim::OperatingPoint& op, double theta_start,
                         double theta_end, double h) {
    constexpr double kPi = 3.14159265358979323846;
    const bool fired = op.fuel_per_cycle > 0.0;
    const double t_trapped =
        (1.0 - op.egr_fraction) * op.ambient_temp + op.egr_fraction * 900.0;
    const double mass = op.inlet_pressure * ottosim::cylinder_volume(geom, theta_start) /
                        (fluid.gas_constant * t_trapped);
    const double gamma_u = (1.0 - op.humidity) * fluid.gamma_unburned + op.humidity * 1.33;
    const double gamma_b = (1.0 - op.humidity) * fluid.gamma_burned + op.humidity * 1.33;
    const double q_total = fired ? op.fuel_per_cycle / geom.n_cylinders * fluid.fuel_lhv : 0.0;
    const double piston_speed = 2.0 * geom.stroke * op.rpm / 60.0;
    const double seconds_per_deg = 1.0 / (6.0 * op.rpm);

    const auto n_steps = static_cast<long>(std::llround((theta_end - theta_start) / h));
    double pressure = op.inlet_pressure;
    for (long i = 0; i < n_steps; ++i) {
        const double theta = theta_start + static_cast<double>(i) * h;
        const double v = ottosim::cylinder_volume(geom, theta);
        const double dv = ottosim::cylinder_volume_derivative(geom, theta);
        const double burn = fired ? ottosim::burn_fraction(spec, theta) : 0.0;
        const double gamma = gamma_u + (gamma_b - gamma_u) * burn;
        const double dq_in = q_total * ottosim::burn_fraction_derivative(spec, theta);

        double dq_loss = 0.0;
        const double t_bulk = pressure * v / (mass * fluid.gas_constant);
        if (fired && t_bulk > op.wall_temp) {
            const double coeff = 0.013 * std::pow(geom.bore, -0.2) * std::pow(pressure, 0.8) *
                                 std::pow(t_bulk, -0.55) * std::pow(piston_speed, 0.8);
            const double area = kPi * geom.bore * geom.bore / 2.0 + 4.0 * v / geom.bore;
            dq_loss = coeff * area * (t_bulk - op.wall_temp) * seconds_per_deg;
        }
        pressure += h * ((gamma - 1.0) / v * (dq_in - dq_loss) - gamma * pressure / v * dv);
    }
    return pressure;
}

inline double richardson_euler_pressure(const ottosim::EngineGeometry& geom,
                                        const ottosim::WorkingFluid& fluid,
                                        const ottosim::CombustionSpec& spec,
                                        const ottosim::OperatingPoint& op,
                                        double theta_start, double theta_end,
                                        double h) {
    const double coarse = euler_pass(geom, fluid, spec, op, theta_start, theta_end, h);
    const double fine = euler_pass(geom, fluid, spec, op, theta_start, theta_end, h / 2.0);
    return 2.0 * fine - coarse;
}

}  // namespace oracle
