#include <array>
#include <cmath>
#include <string>

#include "doctest.h"
#include "gibbs_oracle.hpp"
#include "ottosim/emissions.hpp"
#include "ottosim/engine.hpp"
#include "ottosim/errors.hpp"
#include "ottosim/table.hpp"
#include "ottosim/thermo.hpp"
#include "test_util.hpp"

using namespace ottosim;

namespace {

// Atoms per molecule over the shared species order, rows C, H, O, N.
constexpr double kAtoms[4][kNumEquilibriumSpecies] = {
    {1, 0, 0, 0, 1, 0, 0, 0, 0, 0},
    {0, 2, 0, 0, 0, 2, 1, 1, 0, 0},
    {2, 1, 0, 2, 1, 0, 1, 0, 1, 1},
    {0, 0, 2, 0, 0, 0, 0, 0, 0, 1},
};

double atom_sum(const SpeciesSet& set, int element) {
    double total = 0.0;
    for (int i = 0; i < kNumEquilibriumSpecies; ++i) {
        total += kAtoms[element][i] * set.mole_fractions[static_cast<std::size_t>(i)];
    }
    return total;
}

}  // namespace

TEST_CASE("formation enthalpies and standard entropies match handbook values") {
    struct Anchor {
        const char* name;
        double dhf_kj;       // kJ/mol at 298.15 K
        double dhf_tol_kj;
        double s0;           // J/(mol K) at 298.15 K
    };
    // JANAF values; tolerances absorb the vintage of the polynomial fits.
    const Anchor anchors[] = {
        {"CO2", -393.52, 0.5, 213.79}, {"H2O", -241.83, 0.5, 188.83},
        {"N2", 0.0, 0.1, 191.61},      {"O2", 0.0, 0.1, 205.15},
        {"CO", -110.53, 0.5, 197.66},  {"H2", 0.0, 0.1, 130.68},
        {"OH", 39.0, 1.0, 183.74},     {"H", 218.0, 0.3, 114.72},
        {"O", 249.17, 0.3, 161.06},    {"NO", 90.29, 1.5, 210.76},
        {"N", 472.68, 0.3, 153.30},
    };
    const auto& table = builtin_thermo();
    REQUIRE(table.size() == std::size(anchors));
    for (std::size_t i = 0; i < table.size(); ++i) {
        CAPTURE(table[i].name);
        CHECK(table[i].name == anchors[i].name);
        const double t = 298.15;
        const double dhf = enthalpy_rt(table[i], t) * kUniversalGas * t / 1000.0;
        const double s0 = entropy_r(table[i], t) * kUniversalGas;
        CHECK(std::fabs(dhf - anchors[i].dhf_kj) < anchors[i].dhf_tol_kj);
        CHECK(std::fabs(s0 - anchors[i].s0) < 0.5);
    }
}

TEST_CASE("polynomial ranges join smoothly at the switch temperature") {
    for (const auto& s : builtin_thermo()) {
        CAPTURE(s.name);
        const double below = s.t_mid - 1e-9, above = s.t_mid + 1e-9;
        CHECK(cp_r(s, above) == doctest::Approx(cp_r(s, below)).epsilon(1e-6));
        CHECK(enthalpy_rt(s, above) == doctest::Approx(enthalpy_rt(s, below)).epsilon(1e-6));
        CHECK(entropy_r(s, above) == doctest::Approx(entropy_r(s, below)).epsilon(1e-6));
    }
}

TEST_CASE("shipped coefficient file is identical to the builtin table") {
    const ThermoTable shipped =
        load_thermo_table(std::string(OTTOSIM_REPO_DATA_DIR) + "/thermo_nasa7.csv");
    const ThermoTable& builtin = builtin_thermo();
    for (std::size_t i = 0; i < builtin.size(); ++i) {
        CAPTURE(builtin[i].name);
        CHECK(shipped[i].name == builtin[i].name);
        CHECK(shipped[i].t_low == builtin[i].t_low);
        CHECK(shipped[i].t_mid == builtin[i].t_mid);
        CHECK(shipped[i].t_high == builtin[i].t_high);
        for (std::size_t k = 0; k < 7; ++k) {
            CHECK(shipped[i].low[k] == builtin[i].low[k]);
            CHECK(shipped[i].high[k] == builtin[i].high[k]);
        }
    }
}

TEST_CASE("coefficient file loader rejects tampered inputs") {
    const std::string asset = std::string(OTTOSIM_REPO_DATA_DIR) + "/thermo_nasa7.csv";
    ottosim::testing::TempDir dir;

    csv::Table bumped = csv::read_table(asset);
    for (auto& row : bumped.rows) row[bumped.column("version")] = "2";
    csv::write_table(bumped, dir.file("bumped.csv"));
    CHECK_THROWS_AS(load_thermo_table(dir.file("bumped.csv")), VersionMismatch);

    csv::Table reordered = csv::read_table(asset);
    std::swap(reordered.rows[0], reordered.rows[1]);
    csv::write_table(reordered, dir.file("reordered.csv"));
    CHECK_THROWS_AS(load_thermo_table(dir.file("reordered.csv")), SchemaMismatch);

    csv::Table truncated = csv::read_table(asset);
    truncated.rows.pop_back();
    csv::write_table(truncated, dir.file("truncated.csv"));
    CHECK_THROWS_AS(load_thermo_table(dir.file("truncated.csv")), SchemaMismatch);

    csv::Table renamed = csv::read_table(asset);
    renamed.header[renamed.column("t_mid")] = "t_middle";
    csv::write_table(renamed, dir.file("renamed.csv"));
    CHECK_THROWS_AS(load_thermo_table(dir.file("renamed.csv")), SchemaMismatch);
}

TEST_CASE("complete combustion reproduces the closed-form atom balance") {
    SUBCASE("lean: leftover oxygen") {
        const SpeciesSet set = complete_combustion(0.8);
        const double o2 = 12.5 / 0.8;
        const double total = 8.0 + 9.0 + (o2 - 12.5) + 3.773 * o2;
        CHECK(set.mole_fractions[kCO2] == doctest::Approx(8.0 / total).epsilon(1e-12));
        CHECK(set.mole_fractions[kH2O] == doctest::Approx(9.0 / total).epsilon(1e-12));
        CHECK(set.mole_fractions[kO2] == doctest::Approx((o2 - 12.5) / total).epsilon(1e-12));
        CHECK(set.mole_fractions[kN2] == doctest::Approx(3.773 * o2 / total).epsilon(1e-12));
        CHECK(set.mole_fractions[kCO] == 0.0);
        CHECK(set.iterations == 0);
    }
    SUBCASE("rich: oxygen deficit becomes CO") {
        const SpeciesSet set = complete_combustion(1.25);
        // O supplied = 20; H2O takes 9, so 25 - co = 20 across the carbon pool
        const double total = 3.0 + 5.0 + 9.0 + 37.73;
        CHECK(set.mole_fractions[kCO] == doctest::Approx(5.0 / total).epsilon(1e-12));
        CHECK(set.mole_fractions[kCO2] == doctest::Approx(3.0 / total).epsilon(1e-12));
        CHECK(set.mole_fractions[kO2] == 0.0);
    }
    SUBCASE("very rich: hydrogen stays partly unburned") {
        const SpeciesSet set = complete_combustion(1.6);
        CHECK(set.mole_fractions[kH2] > 0.0);
        CHECK(set.mole_fractions[kCO2] == 0.0);  // all carbon ends as CO
        const double o_in = 2.0 * 12.5 / 1.6;
        const double o_out = atom_sum(set, 2) / atom_sum(set, 0) * 8.0;
        CHECK(o_out == doctest::Approx(o_in).epsilon(1e-12));
    }
}

TEST_CASE("cold equilibrium collapses to the complete-combustion majors") {
    const SpeciesSet eq = equilibrium_composition(1000.0, 2.0e6, 0.8);
    const SpeciesSet cc = complete_combustion(0.8);
    for (int i : {kCO2, kH2O, kN2, kO2}) {
        CHECK(eq.mole_fractions[static_cast<std::size_t>(i)] ==
              doctest::Approx(cc.mole_fractions[static_cast<std::size_t>(i)]).epsilon(1e-4));
    }
    for (int i : {kCO, kH2, kOH, kH, kO, kNO}) {
        CHECK(eq.mole_fractions[static_cast<std::size_t>(i)] < 1e-4);
    }
}

TEST_CASE("equilibrium conserves elements and normalizes exactly") {
    for (double temp : {1600.0, 2200.0, 2800.0}) {
        for (double phi : {0.8, 1.0, 1.2}) {
            CAPTURE(temp);
            CAPTURE(phi);
            const SpeciesSet eq = equilibrium_composition(temp, 5.0e6, phi);

            double sum = 0.0;
            for (double x : eq.mole_fractions) {
                CHECK(x >= 0.0);
                sum += x;
            }
            CHECK(std::fabs(sum - 1.0) < 1e-10);

            // Fractions hide total moles, so compare element ratios.
            const double o2 = 12.5 / phi;
            CHECK(atom_sum(eq, 0) / atom_sum(eq, 3) ==
                  doctest::Approx(8.0 / (2.0 * 3.773 * o2)).epsilon(1e-8));
            CHECK(atom_sum(eq, 1) / atom_sum(eq, 3) ==
                  doctest::Approx(18.0 / (2.0 * 3.773 * o2)).epsilon(1e-8));
            CHECK(atom_sum(eq, 2) / atom_sum(eq, 3) ==
                  doctest::Approx(2.0 * o2 / (2.0 * 3.773 * o2)).epsilon(1e-8));
        }
    }
}

TEST_CASE("equilibrium agrees with an independent Gibbs minimization") {
    struct Point {
        double temp, pressure, phi;
    };
    for (const Point& pt : {Point{2500.0, 5.0e6, 1.0}, Point{2200.0, 2.0e6, 0.9},
                            Point{2800.0, 8.0e6, 1.15}}) {
        CAPTURE(pt.temp);
        CAPTURE(pt.phi);
        const SpeciesSet eq = equilibrium_composition(pt.temp, pt.pressure, pt.phi);
        const auto reference = oracle::gibbs_equilibrium(pt.temp, pt.pressure, pt.phi);
        for (std::size_t i = 0; i < reference.size(); ++i) {
            if (reference[i] < 1e-6) continue;  // below kinetic relevance
            CHECK(std::fabs(eq.mole_fractions[i] - reference[i]) / reference[i] < 1e-3);
        }
    }
}

TEST_CASE("physically sensible trends across the flame envelope") {
    // CO grows with equivalence ratio
    const double co_lean = equilibrium_composition(2400.0, 5e6, 0.9).mole_fractions[kCO];
    const double co_rich = equilibrium_composition(2400.0, 5e6, 1.1).mole_fractions[kCO];
    CHECK(co_rich > 10.0 * co_lean);
    // NO grows with temperature
    const double no_cool = equilibrium_composition(2000.0, 5e6, 1.0).mole_fractions[kNO];
    const double no_hot = equilibrium_composition(2800.0, 5e6, 1.0).mole_fractions[kNO];
    CHECK(no_hot > no_cool);
    // dissociation grows as pressure drops (more total moles favored)
    const double oh_high_p = equilibrium_composition(2600.0, 8e6, 1.0).mole_fractions[kOH];
    const double oh_low_p = equilibrium_composition(2600.0, 1e6, 1.0).mole_fractions[kOH];
    CHECK(oh_low_p > oh_high_p);
}

TEST_CASE("warm starts converge to the cold answer in fewer iterations") {
    EquilibriumWorkspace ws;
    int warm_total = 0, cold_total = 0;
    bool warm_ever_faster = false;
    for (double temp = 2800.0; temp >= 2000.0; temp -= 50.0) {
        const SpeciesSet cold = equilibrium_composition(temp, 4e6, 1.02);
        const SpeciesSet warm = equilibrium_composition(temp, 4e6, 1.02, FuelSpec{}, ws);
        for (std::size_t i = 0; i < cold.mole_fractions.size(); ++i) {
            const double scale = std::max(cold.mole_fractions[i], 1e-12);
            CHECK(std::fabs(warm.mole_fractions[i] - cold.mole_fractions[i]) / scale < 1e-9);
        }
        warm_total += warm.iterations;
        cold_total += cold.iterations;
        if (ws.warm && warm.iterations < cold.iterations) warm_ever_faster = true;
    }
    CHECK(warm_total < cold_total);
    CHECK(warm_ever_faster);
}

TEST_CASE("equilibrium is deterministic") {
    const SpeciesSet a = equilibrium_composition(2485.5, 4.37e6, 1.037);
    const SpeciesSet b = equilibrium_composition(2485.5, 4.37e6, 1.037);
    for (std::size_t i = 0; i < a.mole_fractions.size(); ++i) {
        CHECK(a.mole_fractions[i] == b.mole_fractions[i]);
    }
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("equilibrium rejects states outside its envelope") {
    CHECK_THROWS_AS(equilibrium_composition(500.0, 5e6, 1.0), ConfigError);
    CHECK_THROWS_AS(equilibrium_composition(4500.0, 5e6, 1.0), ConfigError);
    CHECK_THROWS_AS(equilibrium_composition(2500.0, 5e3, 1.0), ConfigError);
    CHECK_THROWS_AS(equilibrium_composition(2500.0, 5e7, 1.0), ConfigError);
    CHECK_THROWS_AS(equilibrium_composition(2500.0, 5e6, 0.0), ConfigError);
    CHECK_THROWS_AS(equilibrium_composition(2500.0, 5e6, 2.5), ConfigError);
}

TEST_CASE("iteration counts stay within budget across the hot envelope") {
    int worst = 0;
    for (double phi : {0.85, 0.95, 1.0, 1.05, 1.15}) {
        for (double temp : {2000.0, 2400.0, 2800.0}) {
            for (double pressure : {2e6, 5e6, 8e6}) {
                const SpeciesSet eq = equilibrium_composition(temp, pressure, phi);
                worst = std::max(worst, eq.iterations);
            }
        }
    }
    CHECK(worst <= 50);
}

TEST_CASE("NO kinetics hold the equilibrium point and never cross it") {
    const double temp = 2600.0, pressure = 5e6;
    const SpeciesSet eq = equilibrium_composition(temp, pressure, 1.0);
    const double target = eq.mole_fractions[kNO];
    REQUIRE(target > 1e-6);

    EmissionState at_eq;
    at_eq.no_molefrac = target;
    const EmissionState held = zeldovich_no_step(at_eq, eq, temp, pressure, 1e-3);
    CHECK(std::fabs(held.no_molefrac - target) / target < 1e-12);

    EmissionState below;
    below.no_molefrac = 0.5 * target;
    double prev = below.no_molefrac;
    for (int i = 0; i < 200; ++i) {
        below = zeldovich_no_step(below, eq, temp, pressure, 5e-5);
        CHECK(below.no_molefrac > prev);
        CHECK(below.no_molefrac < target);
        prev = below.no_molefrac;
    }
    CHECK(std::fabs(below.no_molefrac - target) / target < 1e-3);  // relaxed to equilibrium

    EmissionState above;
    above.no_molefrac = 2.0 * target;
    prev = above.no_molefrac;
    for (int i = 0; i < 50; ++i) {
        above = zeldovich_no_step(above, eq, temp, pressure, 5e-5);
        CHECK(above.no_molefrac < prev);
        CHECK(above.no_molefrac > target);
        prev = above.no_molefrac;
    }
}

TEST_CASE("no nitrogen in the burned gas means no thermal NO") {
    SpeciesSet no_nitrogen{};
    no_nitrogen.mole_fractions[kCO2] = 0.2;
    no_nitrogen.mole_fractions[kH2O] = 0.2;
    no_nitrogen.mole_fractions[kO2] = 0.6;
    EmissionState state;
    state.no_molefrac = 0.0;
    const EmissionState out = zeldovich_no_step(state, no_nitrogen, 2800.0, 5e6, 1.0);
    CHECK(out.no_molefrac == 0.0);
}

TEST_CASE("NO formation rate rises steeply with temperature") {
    EmissionState cool, hot;
    const SpeciesSet eq_cool = equilibrium_composition(2200.0, 5e6, 1.0);
    const SpeciesSet eq_hot = equilibrium_composition(2700.0, 5e6, 1.0);
    cool = zeldovich_no_step(EmissionState{}, eq_cool, 2200.0, 5e6, 1e-5);
    hot = zeldovich_no_step(EmissionState{}, eq_hot, 2700.0, 5e6, 1e-5);
    CHECK(hot.no_molefrac > 10.0 * cool.no_molefrac);
}

TEST_CASE("cycle emissions integrate deterministically and converge in step size") {
    EngineGeometry geom;
    WorkingFluid fluid;
    CombustionSpec spec;
    OperatingPoint op;
    const double phi = fluid.stoich_afr / op.afr;

    const CycleTrace coarse = simulate_cycle_trace(geom, fluid, spec, op, 0.5);
    const EmissionsResult once = integrate_emissions(coarse, phi);
    const EmissionsResult twice = integrate_emissions(coarse, phi);
    CHECK(once.no_ppm == twice.no_ppm);
    CHECK(once.co_ppm == twice.co_ppm);
    CHECK(once.no_ppm > 0.0);
    CHECK(once.co_ppm > 0.0);
    CHECK(once.max_newton_iterations <= 50);

    const CycleTrace fine = simulate_cycle_trace(geom, fluid, spec, op, 0.25);
    const EmissionsResult refined = integrate_emissions(fine, phi);
    CHECK(std::fabs(refined.no_ppm - once.no_ppm) / refined.no_ppm < 5e-3);
    CHECK(std::fabs(refined.co_ppm - once.co_ppm) / refined.co_ppm < 5e-3);
}

TEST_CASE("richer mixtures freeze more CO") {
    EngineGeometry geom;
    WorkingFluid fluid;
    CombustionSpec spec;
    double prev_co = -1.0;
    for (double phi : {0.9, 1.0, 1.1}) {
        OperatingPoint op;
        op.afr = fluid.stoich_afr / phi;
        const CycleTrace trace = simulate_cycle_trace(geom, fluid, spec, op, 0.5);
        const EmissionsResult result = integrate_emissions(trace, phi);
        CHECK(result.co_ppm > prev_co);
        prev_co = result.co_ppm;
    }
}

TEST_CASE("a cycle that never burns emits nothing") {
    EngineGeometry geom;
    WorkingFluid fluid;
    CombustionSpec spec;
    OperatingPoint op;
    op.fuel_per_cycle = 0.0;
    const CycleTrace trace = simulate_cycle_trace(geom, fluid, spec, op, 0.5);
    const EmissionsResult result = integrate_emissions(trace, 1.0);
    CHECK(result.no_ppm == 0.0);
    CHECK(result.co_ppm == 0.0);
    CHECK(result.max_newton_iterations == 0);
}
