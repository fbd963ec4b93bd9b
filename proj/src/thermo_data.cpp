#include "ottosim/thermo.hpp"

#include <cmath>

#include "ottosim/errors.hpp"
#include "ottosim/table.hpp"

namespace ottosim {

// GRI-Mech 3.0 release values; the same numbers ship as
// data/thermo_nasa7.csv and the two copies are cross-checked in tests.
const ThermoTable& builtin_thermo() {
    static const ThermoTable table{{
        {"CO2", 200.0, 1000.0, 3500.0,
         {2.35677352e+00, 8.98459677e-03, -7.12356269e-06, 2.45919022e-09, -1.43699548e-13,
          -4.83719697e+04, 9.90105222e+00},
         {3.85746029e+00, 4.41437026e-03, -2.21481404e-06, 5.23490188e-10, -4.72084164e-14,
          -4.87591660e+04, 2.27163806e+00}},
        {"H2O", 200.0, 1000.0, 3500.0,
         {4.19864056e+00, -2.03643410e-03, 6.52040211e-06, -5.48797062e-09, 1.77197817e-12,
          -3.02937267e+04, -8.49032208e-01},
         {3.03399249e+00, 2.17691804e-03, -1.64072518e-07, -9.70419870e-11, 1.68200992e-14,
          -3.00042971e+04, 4.96677010e+00}},
        {"N2", 300.0, 1000.0, 5000.0,
         {3.29867700e+00, 1.40824040e-03, -3.96322200e-06, 5.64151500e-09, -2.44485400e-12,
          -1.02089990e+03, 3.95037200e+00},
         {2.92664000e+00, 1.48797680e-03, -5.68476000e-07, 1.00970380e-10, -6.75335100e-15,
          -9.22797700e+02, 5.98052800e+00}},
        {"O2", 200.0, 1000.0, 3500.0,
         {3.78245636e+00, -2.99673416e-03, 9.84730201e-06, -9.68129509e-09, 3.24372837e-12,
          -1.06394356e+03, 3.65767573e+00},
         {3.28253784e+00, 1.48308754e-03, -7.57966669e-07, 2.09470555e-10, -2.16717794e-14,
          -1.08845772e+03, 5.45323129e+00}},
        {"CO", 200.0, 1000.0, 3500.0,
         {3.57953347e+00, -6.10353680e-04, 1.01681433e-06, 9.07005884e-10, -9.04424499e-13,
          -1.43440860e+04, 3.50840928e+00},
         {2.71518561e+00, 2.06252743e-03, -9.98825771e-07, 2.30053008e-10, -2.03647716e-14,
          -1.41518724e+04, 7.81868772e+00}},
        {"H2", 200.0, 1000.0, 3500.0,
         {2.34433112e+00, 7.98052075e-03, -1.94781510e-05, 2.01572094e-08, -7.37611761e-12,
          -9.17935173e+02, 6.83010238e-01},
         {3.33727920e+00, -4.94024731e-05, 4.99456778e-07, -1.79566394e-10, 2.00255376e-14,
          -9.50158922e+02, -3.20502331e+00}},
        {"OH", 200.0, 1000.0, 3500.0,
         {3.99201543e+00, -2.40131752e-03, 4.61793841e-06, -3.88113333e-09, 1.36411470e-12,
          3.61508056e+03, -1.03925458e-01},
         {3.09288767e+00, 5.48429716e-04, 1.26505228e-07, -8.79461556e-11, 1.17412376e-14,
          3.85865700e+03, 4.47669610e+00}},
        {"H", 200.0, 1000.0, 3500.0,
         {2.50000000e+00, 7.05332819e-13, -1.99591964e-15, 2.30081632e-18, -9.27732332e-22,
          2.54736599e+04, -4.46682853e-01},
         {2.50000001e+00, -2.30842973e-11, 1.61561948e-14, -4.73515235e-18, 4.98197357e-22,
          2.54736599e+04, -4.46682914e-01}},
        {"O", 200.0, 1000.0, 3500.0,
         {3.16826710e+00, -3.27931884e-03, 6.64306396e-06, -6.12806624e-09, 2.11265971e-12,
          2.91222592e+04, 2.05193346e+00},
         {2.56942078e+00, -8.59741137e-05, 4.19484589e-08, -1.00177799e-11, 1.22833691e-15,
          2.92175791e+04, 4.78433864e+00}},
        {"NO", 200.0, 1000.0, 6000.0,
         {4.21847630e+00, -4.63897600e-03, 1.10410220e-05, -9.33613540e-09, 2.80357700e-12,
          9.84462300e+03, 2.28084640e+00},
         {3.26060560e+00, 1.19110430e-03, -4.29170480e-07, 6.94576690e-11, -4.03360990e-15,
          9.92097460e+03, 6.36930270e+00}},
        {"N", 200.0, 1000.0, 6000.0,
         {2.50000000e+00, 0.00000000e+00, 0.00000000e+00, 0.00000000e+00, 0.00000000e+00,
          5.61046370e+04, 4.19390870e+00},
         {2.41594290e+00, 1.74890650e-04, -1.19023690e-07, 3.02262450e-11, -2.03609820e-15,
          5.61337730e+04, 4.64960960e+00}},
    }};
    return table;
}

ThermoTable load_thermo_table(const std::filesystem::path& path) {
    const csv::Table raw = csv::read_table(path);
    const std::size_t version_col = raw.column("version");
    const std::size_t name_col = raw.column("species");
    const std::size_t tlow_col = raw.column("t_low");
    const std::size_t tmid_col = raw.column("t_mid");
    const std::size_t thigh_col = raw.column("t_high");
    std::array<std::size_t, 7> low_cols, high_cols;
    for (int k = 0; k < 7; ++k) {
        low_cols[static_cast<std::size_t>(k)] = raw.column("low_a" + std::to_string(k + 1));
        high_cols[static_cast<std::size_t>(k)] = raw.column("high_a" + std::to_string(k + 1));
    }

    if (raw.rows.size() != kNumThermoSpecies)
        throw SchemaMismatch("thermo table must list exactly " +
                             std::to_string(kNumThermoSpecies) + " species");

    ThermoTable table;
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        const auto& row = raw.rows[r];
        const int version =
            static_cast<int>(csv::parse_double(row[version_col], r + 2, version_col + 1));
        if (version != kThermoTableVersion)
            throw VersionMismatch("thermo table version " + std::to_string(version) +
                                  ", expected " + std::to_string(kThermoTableVersion));
        Nasa7& s = table[r];
        s.name = row[name_col];
        if (s.name != builtin_thermo()[r].name)
            throw SchemaMismatch("species out of order: " + s.name);
        s.t_low = csv::parse_double(row[tlow_col], r + 2, tlow_col + 1);
        s.t_mid = csv::parse_double(row[tmid_col], r + 2, tmid_col + 1);
        s.t_high = csv::parse_double(row[thigh_col], r + 2, thigh_col + 1);
        for (std::size_t k = 0; k < 7; ++k) {
            s.low[k] = csv::parse_double(row[low_cols[k]], r + 2, low_cols[k] + 1);
            s.high[k] = csv::parse_double(row[high_cols[k]], r + 2, high_cols[k] + 1);
        }
    }
    return table;
}

namespace {

const std::array<double, 7>& pick_range(const Nasa7& s, double& temp_k) {
    if (temp_k < s.t_low) temp_k = s.t_low;
    if (temp_k > s.t_high) temp_k = s.t_high;
    return temp_k <= s.t_mid ? s.low : s.high;
}

}  // namespace

double cp_r(const Nasa7& s, double temp_k) {
    double t = temp_k;
    const auto& a = pick_range(s, t);
    return a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * a[4])));
}

double enthalpy_rt(const Nasa7& s, double temp_k) {
    double t = temp_k;
    const auto& a = pick_range(s, t);
    return a[0] + t * (a[1] / 2.0 + t * (a[2] / 3.0 + t * (a[3] / 4.0 + t * a[4] / 5.0))) +
           a[5] / t;
}

double entropy_r(const Nasa7& s, double temp_k) {
    double t = temp_k;
    const auto& a = pick_range(s, t);
    return a[0] * std::log(t) + t * (a[1] + t * (a[2] / 2.0 + t * (a[3] / 3.0 + t * a[4] / 4.0))) +
           a[6];
}

double gibbs_rt(const Nasa7& s, double temp_k) {
    return enthalpy_rt(s, temp_k) - entropy_r(s, temp_k);
}

double molar_mass(int species) {
    // kg/mol, standard atomic weights
    constexpr double c = 12.011e-3, h = 1.008e-3, o = 15.999e-3, n = 14.007e-3;
    switch (species) {
        case kCO2: return c + 2 * o;
        case kH2O: return 2 * h + o;
        case kN2: return 2 * n;
        case kO2: return 2 * o;
        case kCO: return c + o;
        case kH2: return 2 * h;
        case kOH: return o + h;
        case kH: return h;
        case kO: return o;
        case kNO: return n + o;
        case kAtomicN: return n;
        default: throw ConfigError("unknown species index " + std::to_string(species));
    }
}

}  // namespace ottosim
