#pragma once

#include <array>

#include "ottosim/engine.hpp"
#include "ottosim/thermo.hpp"

namespace ottosim {

// Fuel described as CxHy; defaults are iso-octane.
struct FuelSpec {
    double carbon = 8.0;
    double hydrogen = 18.0;
};

// Extended Zeldovich forward rates k = a * T^b * exp(-theta/T) in
// cm^3/(mol s); reverse rates follow from the equilibrium constants.
struct ZeldovichRates {
    double a1 = 1.8e14, b1 = 0.0, theta1 = 38370.0;  // O + N2 -> NO + N
    double a2 = 1.8e10, b2 = 1.0, theta2 = 4680.0;   // N + O2 -> NO + O
    double a3 = 7.1e13, b3 = 0.0, theta3 = 450.0;    // N + OH -> NO + H
};

struct EmissionsConfig {
    FuelSpec fuel{};
    ZeldovichRates rates{};
    double freeze_temp = 1740.0;  // K, CO equilibrium-freeze threshold
};

// Burned-gas composition over {CO2, H2O, N2, O2, CO, H2, OH, H, O, NO},
// indexed by SpeciesIndex.
struct SpeciesSet {
    std::array<double, kNumEquilibriumSpecies> mole_fractions{};
    int iterations = 0;  // Newton iterations spent (0 for closed forms)
};

struct EmissionState {
    double no_molefrac = 0.0;
    double co_molefrac = 0.0;
    bool frozen = false;
};

struct EmissionsResult {
    double no_ppm = 0.0;
    double co_ppm = 0.0;
    int max_newton_iterations = 0;
};

// Complete-combustion atom balance (majors only): lean burns to
// CO2/H2O/O2/N2; rich first strips O from CO2 (making CO), then from H2O
// (making H2). Used as the Newton initial guess and as the low-temperature
// fallback where equilibrium is numerically pointless.
SpeciesSet complete_combustion(double phi, const FuelSpec& fuel = {});

// Carries the previous solution across calls so trajectory sweeps start
// near the answer. One per worker; never shared.
struct EquilibriumWorkspace {
    bool warm = false;
    std::array<double, kNumEquilibriumSpecies> log_moles{};
};

// Ten-species equilibrium at fixed temperature and pressure: six
// equilibrium relations plus four element balances, solved by damped Newton
// iteration on log mole numbers. Valid for temp in [600, 4000] K, pressure
// in [1e4, 3e7] Pa, phi in (0, 2]. Throws NoConvergence after 200
// iterations.
SpeciesSet equilibrium_composition(double temp_k, double pressure_pa, double phi,
                                   const FuelSpec& fuel = {});
SpeciesSet equilibrium_composition(double temp_k, double pressure_pa, double phi,
                                   const FuelSpec& fuel, EquilibriumWorkspace& ws);

// One implicitly sub-stepped advance of the extended Zeldovich NO rate with
// O/O2/OH/H/N2 held at equilibrium. Approaches the equilibrium NO level
// monotonically and never crosses it within a step.
EmissionState zeldovich_no_step(const EmissionState& state, const SpeciesSet& eq, double temp_k,
                                double pressure_pa, double dt_s, const ZeldovichRates& rates = {});

// Walks the burned-zone trajectory of one cycle: kinetic NO along the
// cooling path, CO frozen at its equilibrium value where the burned zone
// first drops below freeze_temp. Returns ppm of exhaust.
EmissionsResult integrate_emissions(const CycleTrace& trace, double phi,
                                    const EmissionsConfig& config = {});

}  // namespace ottosim
