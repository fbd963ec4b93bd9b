#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ottosim {

struct DimensionMap {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
};

// Space-filling design on the unit hypercube plus the affine map back to
// physical units.
struct DesignMatrix {
    Eigen::MatrixXd points;            // n x d, entries in [0,1)
    std::vector<DimensionMap> mapping; // d entries

    // lower + u * (upper - lower), per dimension.
    Eigen::MatrixXd rescaled() const;
};

// Latin hypercube design: per dimension the n samples occupy each stratum
// [k/n, (k+1)/n) exactly once; stratum order is an independent seeded
// permutation per dimension and the position within a stratum is uniform.
DesignMatrix latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed);

// Cartesian product of the level lists in lexicographic order (first
// dimension slowest), each level mapped to [0,1) as level_index/n_levels.
// The level values themselves only fix the per-dimension level counts and
// index order; callers that need the physical values recover the index as
// round(entry * n_levels).
DesignMatrix full_factorial(const std::vector<std::vector<double>>& levels);

// Unit-hypercube points as CSV, one column per dimension, header row of
// dimension names. Round-trip-exact cell formatting.
void write_design(const DesignMatrix& design, const std::filesystem::path& path);

}  // namespace ottosim
