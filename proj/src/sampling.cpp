#include "ottosim/sampling.hpp"

#include <numeric>

#include "ottosim/errors.hpp"
#include "ottosim/prng.hpp"
#include "ottosim/table.hpp"

namespace ottosim {

Eigen::MatrixXd DesignMatrix::rescaled() const {
    if (static_cast<std::size_t>(points.cols()) != mapping.size())
        throw ConfigError("design rescale: mapping size does not match dimension count");
    Eigen::MatrixXd out(points.rows(), points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
        const auto& m = mapping[static_cast<std::size_t>(j)];
        out.col(j) = (m.lower + (m.upper - m.lower) * points.col(j).array()).matrix();
    }
    return out;
}

namespace {

std::vector<DimensionMap> unit_mapping(std::size_t d) {
    std::vector<DimensionMap> mapping(d);
    for (std::size_t j = 0; j < d; ++j)
        mapping[j] = {"x" + std::to_string(j), 0.0, 1.0};
    return mapping;
}

}  // namespace

DesignMatrix latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n == 0 || d == 0) throw ConfigError("latin hypercube: need n >= 1 and d >= 1");

    DesignMatrix design;
    design.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    design.mapping = unit_mapping(d);

    std::uint64_t stream = seed;
    for (std::size_t j = 0; j < d; ++j) {
        Rng rng(splitmix64(stream));
        std::vector<std::size_t> strata(n);
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        rng.shuffle(strata);
        for (std::size_t i = 0; i < n; ++i) {
            double u = rng.uniform();  // in [0,1), keeps the point inside its stratum
            design.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (static_cast<double>(strata[i]) + u) / static_cast<double>(n);
        }
    }
    return design;
}

DesignMatrix full_factorial(const std::vector<std::vector<double>>& levels) {
    if (levels.empty()) throw ConfigError("full factorial: need at least one dimension");
    for (const auto& lv : levels)
        if (lv.empty()) throw ConfigError("full factorial: every dimension needs at least one level");

    const std::size_t d = levels.size();
    std::size_t n = 1;
    for (const auto& lv : levels) n *= lv.size();

    DesignMatrix design;
    design.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    design.mapping = unit_mapping(d);

    std::vector<std::size_t> index(d, 0);
    for (std::size_t row = 0; row < n; ++row) {
        for (std::size_t j = 0; j < d; ++j)
            design.points(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) =
                static_cast<double>(index[j]) / static_cast<double>(levels[j].size());
        // lexicographic: advance the last dimension fastest
        for (std::size_t j = d; j-- > 0;) {
            if (++index[j] < levels[j].size()) break;
            index[j] = 0;
        }
    }
    return design;
}

void write_design(const DesignMatrix& design, const std::filesystem::path& path) {
    csv::Table table;
    for (const auto& dim : design.mapping) table.header.push_back(dim.name);
    table.rows.resize(static_cast<std::size_t>(design.points.rows()));
    for (Eigen::Index r = 0; r < design.points.rows(); ++r) {
        auto& row = table.rows[static_cast<std::size_t>(r)];
        row.reserve(static_cast<std::size_t>(design.points.cols()));
        for (Eigen::Index c = 0; c < design.points.cols(); ++c)
            row.push_back(csv::format_double(design.points(r, c)));
    }
    csv::write_table(table, path);
}

}  // namespace ottosim
