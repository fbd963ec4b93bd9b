#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ottosim {

// Engine integration left the model's validity envelope (P <= 0 or T <= 0).
class NonPhysicalState : public std::runtime_error {
public:
    NonPhysicalState(const std::string& what, double theta_deg)
        : std::runtime_error(what + " at theta = " + std::to_string(theta_deg) + " deg"),
          theta_deg(theta_deg) {}

    double theta_deg;
};

// Equilibrium Newton iteration failed to reach tolerance.
class NoConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scaler fitting rejected a column with zero spread.
class ConstantColumn : public std::runtime_error {
public:
    explicit ConstantColumn(const std::string& column)
        : std::runtime_error("constant column: " + column), column(column) {}

    std::string column;
};

// Column names or shapes do not match the expected schema.
class SchemaMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line(line), column(column) {}

    std::size_t line;
    std::size_t column;
};

class VersionMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroVariance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroObserved : public std::runtime_error {
public:
    explicit ZeroObserved(std::size_t index)
        : std::runtime_error("observed value is zero at index " + std::to_string(index)),
          index(index) {}

    std::size_t index;
};

class RankDeficient : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Training loss left the finite range (divergence signal).
class NonFiniteLoss : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad experiment configuration (schema violation, missing section, bad value).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be opened/read/written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ottosim
