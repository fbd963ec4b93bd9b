#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace ottosim {

// Species tracked by the equilibrium solver, in the fixed solver order.
// Atomic nitrogen is carried as an extra thermo entry for reversing the NO
// rate constants; it is not part of the equilibrium composition vector.
enum SpeciesIndex : int {
    kCO2 = 0,
    kH2O,
    kN2,
    kO2,
    kCO,
    kH2,
    kOH,
    kH,
    kO,
    kNO,
    kAtomicN,
};

inline constexpr int kNumEquilibriumSpecies = 10;
inline constexpr int kNumThermoSpecies = 11;

inline constexpr double kUniversalGas = 8.314462618;  // J/(mol K)
inline constexpr double kStandardPressure = 101325.0;  // Pa

// Two-range 7-coefficient polynomial fit of cp/R, H/(RT), S/R.
struct Nasa7 {
    std::string name;
    double t_low = 0.0;
    double t_mid = 0.0;
    double t_high = 0.0;
    std::array<double, 7> low{};   // valid on [t_low, t_mid]
    std::array<double, 7> high{};  // valid on [t_mid, t_high]
};

using ThermoTable = std::array<Nasa7, kNumThermoSpecies>;

// Coefficients compiled into the library.
const ThermoTable& builtin_thermo();

// Same table as a versioned CSV asset; throws VersionMismatch when the file
// declares a different format version.
ThermoTable load_thermo_table(const std::filesystem::path& path);
inline constexpr int kThermoTableVersion = 1;

// Molar evaluations; temperature clamped to the fit's validity range.
double cp_r(const Nasa7& s, double temp_k);        // cp/R
double enthalpy_rt(const Nasa7& s, double temp_k); // H/(R T)
double entropy_r(const Nasa7& s, double temp_k);   // S/R
double gibbs_rt(const Nasa7& s, double temp_k);    // g/(R T) = H/(RT) - S/R

double molar_mass(int species);  // kg/mol

}  // namespace ottosim
