#include "ottosim/emissions.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "ottosim/errors.hpp"

namespace ottosim {

namespace {

constexpr int kNs = kNumEquilibriumSpecies;
constexpr double kAirNitrogenRatio = 3.773;  // mol N2 (incl. trace inerts) per mol O2

// Element rows: C, H, O, N by species column (solver order).
constexpr double kElements[4][kNs] = {
    // CO2 H2O N2 O2 CO H2 OH  H  O  NO
    {1, 0, 0, 0, 1, 0, 0, 0, 0, 0},  // C
    {0, 2, 0, 0, 0, 2, 1, 1, 0, 0},  // H
    {2, 1, 0, 2, 1, 0, 1, 0, 1, 1},  // O
    {0, 0, 2, 0, 0, 0, 0, 0, 0, 1},  // N
};

// Six independent formation reactions, products positive.
constexpr int kNr = 6;
constexpr double kStoich[kNr][kNs] = {
    // CO2 H2O  N2    O2   CO  H2   OH  H  O  NO
    {0, 0, 0, 0, 0, -1, 0, 2, 0, 0},          // H2 = 2 H
    {0, 0, 0, -1, 0, 0, 0, 0, 2, 0},          // O2 = 2 O
    {0, 0, 0, -0.5, 0, -0.5, 1, 0, 0, 0},     // H2/2 + O2/2 = OH
    {0, 0, -0.5, -0.5, 0, 0, 0, 0, 0, 1},     // O2/2 + N2/2 = NO
    {0, 1, 0, -0.5, 0, -1, 0, 0, 0, 0},       // H2 + O2/2 = H2O
    {1, 0, 0, -0.5, -1, 0, 0, 0, 0, 0},       // CO + O2/2 = CO2
};

using Vec = Eigen::Matrix<double, kNs, 1>;
using Mat = Eigen::Matrix<double, kNs, kNs>;

// Element totals per mole of fuel at the given equivalence ratio.
std::array<double, 4> element_totals(double phi, const FuelSpec& fuel) {
    const double o2 = (fuel.carbon + fuel.hydrogen / 4.0) / phi;
    return {fuel.carbon, fuel.hydrogen, 2.0 * o2, 2.0 * kAirNitrogenRatio * o2};
}

void check_envelope(double temp_k, double pressure_pa, double phi, const FuelSpec& fuel) {
    if (!(temp_k >= 600.0 && temp_k <= 4000.0))
        throw ConfigError("equilibrium temperature outside [600, 4000] K: " +
                          std::to_string(temp_k));
    if (!(pressure_pa >= 1.0e4 && pressure_pa <= 3.0e7))
        throw ConfigError("equilibrium pressure outside [1e4, 3e7] Pa");
    if (!(phi > 0.0 && phi <= 2.0))
        throw ConfigError("equivalence ratio outside (0, 2]");
    if (!(fuel.carbon > 0.0 && fuel.hydrogen > 0.0))
        throw ConfigError("fuel must contain carbon and hydrogen");
}

// Complete-combustion product moles per mole of fuel (not normalized).
std::array<double, kNs> complete_combustion_moles(double phi, const FuelSpec& fuel) {
    const double x = fuel.carbon;
    const double y = fuel.hydrogen;
    const double o2 = (x + y / 4.0) / phi;

    std::array<double, kNs> n{};
    n[kN2] = kAirNitrogenRatio * o2;
    if (phi <= 1.0) {
        n[kCO2] = x;
        n[kH2O] = y / 2.0;
        n[kO2] = (x + y / 4.0) * (1.0 / phi - 1.0);
    } else {
        // oxygen deficit: strip one O per CO2 -> CO first, then H2O -> H2
        const double deficit = 2.0 * (x + y / 4.0) * (1.0 - 1.0 / phi);
        if (deficit <= x) {
            n[kCO] = deficit;
            n[kCO2] = x - deficit;
            n[kH2O] = y / 2.0;
        } else {
            n[kCO] = x;
            n[kCO2] = 0.0;
            n[kH2] = deficit - x;
            n[kH2O] = y / 2.0 - (deficit - x);
            if (n[kH2O] < 0.0) throw ConfigError("mixture too rich to balance");
        }
    }
    return n;
}

struct ResidualEval {
    Vec f;
    double norm;  // max abs
};

// Residuals at log mole numbers u: four scaled element balances and six
// log-form equilibrium relations.
ResidualEval residuals(const Vec& u, const std::array<double, 4>& b, double log_p_ratio,
                       const std::array<double, kNr>& log_k) {
    const Vec n = u.array().exp().matrix();
    const double n_tot = n.sum();
    const double log_n_tot = std::log(n_tot);

    ResidualEval out;
    for (int e = 0; e < 4; ++e) {
        double acc = 0.0;
        for (int i = 0; i < kNs; ++i) acc += kElements[e][i] * n(i);
        out.f(e) = acc / b[static_cast<std::size_t>(e)] - 1.0;
    }
    for (int r = 0; r < kNr; ++r) {
        double acc = 0.0;
        double dn = 0.0;
        for (int i = 0; i < kNs; ++i) {
            if (kStoich[r][i] != 0.0) {
                acc += kStoich[r][i] * (u(i) - log_n_tot);
                dn += kStoich[r][i];
            }
        }
        out.f(4 + r) = acc + dn * log_p_ratio - log_k[static_cast<std::size_t>(r)];
    }
    out.norm = out.f.cwiseAbs().maxCoeff();
    return out;
}

SpeciesSet solve_equilibrium(double temp_k, double pressure_pa, double phi, const FuelSpec& fuel,
                             EquilibriumWorkspace& ws) {
    check_envelope(temp_k, pressure_pa, phi, fuel);
    const auto b = element_totals(phi, fuel);
    const double log_p_ratio = std::log(pressure_pa / kStandardPressure);

    // log equilibrium constants from Gibbs energies
    const ThermoTable& thermo = builtin_thermo();
    std::array<double, kNs> g;
    for (int i = 0; i < kNs; ++i)
        g[static_cast<std::size_t>(i)] = gibbs_rt(thermo[static_cast<std::size_t>(i)], temp_k);
    std::array<double, kNr> log_k;
    for (int r = 0; r < kNr; ++r) {
        double dg = 0.0;
        for (int i = 0; i < kNs; ++i) dg += kStoich[r][i] * g[static_cast<std::size_t>(i)];
        log_k[static_cast<std::size_t>(r)] = -dg;
    }

    Vec u;
    if (ws.warm) {
        for (int i = 0; i < kNs; ++i) u(i) = ws.log_moles[static_cast<std::size_t>(i)];
    } else {
        // complete combustion with floored minors
        const auto guess = complete_combustion_moles(phi, fuel);
        double n_guess = 0.0;
        for (double v : guess) n_guess += v;
        for (int i = 0; i < kNs; ++i)
            u(i) = std::log(std::max(guess[static_cast<std::size_t>(i)], 1e-10 * n_guess));
    }

    ResidualEval cur = residuals(u, b, log_p_ratio, log_k);
    constexpr double kTol = 1e-10;
    constexpr int kMaxIter = 200;

    for (int iter = 1; iter <= kMaxIter; ++iter) {
        if (cur.norm < kTol) {
            SpeciesSet out;
            const Vec n = u.array().exp().matrix();
            const double n_tot = n.sum();
            for (int i = 0; i < kNs; ++i)
                out.mole_fractions[static_cast<std::size_t>(i)] = n(i) / n_tot;
            out.iterations = iter - 1;
            for (int i = 0; i < kNs; ++i) ws.log_moles[static_cast<std::size_t>(i)] = u(i);
            ws.warm = true;
            return out;
        }

        const Vec n = u.array().exp().matrix();
        const double n_tot = n.sum();
        Mat jac;
        for (int e = 0; e < 4; ++e)
            for (int j = 0; j < kNs; ++j)
                jac(e, j) = kElements[e][j] * n(j) / b[static_cast<std::size_t>(e)];
        for (int r = 0; r < kNr; ++r) {
            double dn = 0.0;
            for (int i = 0; i < kNs; ++i) dn += kStoich[r][i];
            for (int j = 0; j < kNs; ++j)
                jac(4 + r, j) = kStoich[r][j] - dn * n(j) / n_tot;
        }

        Vec step = jac.partialPivLu().solve(-cur.f);
        const double biggest = step.cwiseAbs().maxCoeff();
        if (biggest > 5.0) step *= 5.0 / biggest;  // keep exp() well-behaved

        // halve the step while the residual grows
        double lambda = 1.0;
        ResidualEval next = residuals(u + step, b, log_p_ratio, log_k);
        while (next.norm > cur.norm && lambda > 1.0 / 1024.0) {
            lambda /= 2.0;
            next = residuals(u + lambda * step, b, log_p_ratio, log_k);
        }
        u += lambda * step;
        cur = next;
    }
    throw NoConvergence("equilibrium solve at T = " + std::to_string(temp_k) +
                        " K, phi = " + std::to_string(phi));
}

}  // namespace

SpeciesSet complete_combustion(double phi, const FuelSpec& fuel) {
    if (!(phi > 0.0 && phi <= 2.0)) throw ConfigError("equivalence ratio outside (0, 2]");
    const auto n = complete_combustion_moles(phi, fuel);
    double total = 0.0;
    for (double v : n) total += v;
    SpeciesSet out;
    for (int i = 0; i < kNs; ++i)
        out.mole_fractions[static_cast<std::size_t>(i)] = n[static_cast<std::size_t>(i)] / total;
    return out;
}

SpeciesSet equilibrium_composition(double temp_k, double pressure_pa, double phi,
                                   const FuelSpec& fuel) {
    EquilibriumWorkspace ws;
    return solve_equilibrium(temp_k, pressure_pa, phi, fuel, ws);
}

SpeciesSet equilibrium_composition(double temp_k, double pressure_pa, double phi,
                                   const FuelSpec& fuel, EquilibriumWorkspace& ws) {
    try {
        return solve_equilibrium(temp_k, pressure_pa, phi, fuel, ws);
    } catch (const NoConvergence&) {
        ws.warm = false;  // retry cold before giving up
        return solve_equilibrium(temp_k, pressure_pa, phi, fuel, ws);
    }
}

EmissionState zeldovich_no_step(const EmissionState& state, const SpeciesSet& eq, double temp_k,
                                double pressure_pa, double dt_s, const ZeldovichRates& rates) {
    if (!(dt_s > 0.0)) throw ConfigError("zeldovich step needs dt > 0");

    // mol/cm^3 to match the rate-constant units
    const double c_tot = pressure_pa / (kUniversalGas * temp_k) / 1.0e6;
    const auto& x = eq.mole_fractions;
    const double no_eq = x[kNO] * c_tot;
    if (no_eq <= 1e-30) return state;

    const ThermoTable& thermo = builtin_thermo();
    auto g = [&](int i) { return gibbs_rt(thermo[static_cast<std::size_t>(i)], temp_k); };

    const double k1f = rates.a1 * std::pow(temp_k, rates.b1) * std::exp(-rates.theta1 / temp_k);
    const double k2f = rates.a2 * std::pow(temp_k, rates.b2) * std::exp(-rates.theta2 / temp_k);
    const double k3f = rates.a3 * std::pow(temp_k, rates.b3) * std::exp(-rates.theta3 / temp_k);
    // reverse constants by detailed balance (all three have zero mole change,
    // so Kc = Kp)
    const double k2r = k2f / std::exp(-(g(kNO) + g(kO) - g(kAtomicN) - g(kO2)));
    const double k3r = k3f / std::exp(-(g(kNO) + g(kH) - g(kAtomicN) - g(kOH)));

    const double r1 = k1f * x[kO] * c_tot * x[kN2] * c_tot;
    const double r2 = k2r * no_eq * x[kO] * c_tot;
    const double r3 = k3r * no_eq * x[kH] * c_tot;
    if (r1 <= 0.0) return state;

    // one-way form: d[NO]/dt = 2 r1 (1 - a^2) / (1 + a r1/(r2+r3)), a = [NO]/[NO]e.
    // Rewritten as A(a) (1 - [NO]/[NO]e) and advanced implicitly, which is
    // unconditionally stable and approaches [NO]e without crossing it.
    double no = state.no_molefrac * c_tot;
    const double beta = r1 / std::max(r2 + r3, 1e-300);

    double remaining = dt_s;
    for (int sub = 0; sub < 64 && remaining > 0.0; ++sub) {
        const double a = no / no_eq;
        const double amp = 2.0 * r1 * (1.0 + a) / (1.0 + a * beta);
        double h = remaining;
        const double scale = amp * h / no_eq;
        if (scale > 0.5) h *= 0.5 / scale;  // refine while the state moves fast
        no = (no + amp * h) / (1.0 + amp * h / no_eq);
        remaining -= h;
    }

    EmissionState out = state;
    out.no_molefrac = std::max(no / c_tot, 0.0);
    return out;
}

EmissionsResult integrate_emissions(const CycleTrace& trace, double phi,
                                    const EmissionsConfig& config) {
    // The burned zone only becomes thermodynamically meaningful once the
    // combustion energy dominates the volume-remainder cancellation in the
    // two-zone recovery; below 1% burn the recovered temperature is noise.
    constexpr double kBurnedZoneMin = 0.01;

    EmissionsResult result;
    EmissionState state;
    EquilibriumWorkspace ws;
    bool started = false;
    double prev_theta = 0.0;
    double co_candidate = 0.0;
    bool co_frozen = false;

    const std::size_t n = trace.theta.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (trace.burn_fraction[i] < kBurnedZoneMin) continue;
        const double temp = trace.temp_burned[i];
        const double pressure = trace.pressure[i];

        SpeciesSet eq;
        if (temp < 1000.0) {
            // equilibrium is numerically pointless this cold; atom balance
            // is the documented fallback, and every kinetic rate is dead
            eq = complete_combustion(phi, config.fuel);
        } else {
            eq = equilibrium_composition(temp, pressure, phi, config.fuel, ws);
            result.max_newton_iterations = std::max(result.max_newton_iterations, eq.iterations);
        }

        if (!started) {
            started = true;  // NO starts at zero when the burned zone appears
        } else {
            const double dt = (trace.theta[i] - prev_theta) * trace.seconds_per_deg;
            if (temp >= 1000.0 && dt > 0.0)
                state = zeldovich_no_step(state, eq, temp, pressure, dt, config.rates);
        }
        prev_theta = trace.theta[i];

        if (!co_frozen) {
            co_candidate = eq.mole_fractions[kCO];
            if (temp < config.freeze_temp) co_frozen = true;  // freeze at first crossing
        }
    }

    if (!started) return result;  // no burned zone, nothing emitted
    state.co_molefrac = co_candidate;
    state.frozen = co_frozen;
    result.no_ppm = state.no_molefrac * 1e6;
    result.co_ppm = state.co_molefrac * 1e6;
    return result;
}

}  // namespace ottosim
