#include <cmath>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "ottosim/dataset.hpp"
#include "ottosim/errors.hpp"
#include "ottosim/prng.hpp"
#include "test_util.hpp"

using namespace ottosim;
using ottosim::testing::TempDir;

namespace {

Dataset random_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.inputs.resize(static_cast<Eigen::Index>(n), kNumInputs);
    d.outputs.resize(static_cast<Eigen::Index>(n), kNumOutputs);
    for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.inputs.cols(); ++j)
            d.inputs(i, j) = rng.uniform(-3.0, 40.0) * (static_cast<double>(j) + 0.5);
        for (Eigen::Index j = 0; j < d.outputs.cols(); ++j)
            d.outputs(i, j) = rng.uniform(100.0, 900.0) + 17.0 * static_cast<double>(j);
    }
    d.trace_id.resize(n);
    d.t.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.trace_id[i] = static_cast<std::int64_t>(i / 7);
        d.t[i] = static_cast<double>(i % 7) + 0.25;
    }
    return d;
}

}  // namespace

TEST_CASE("min-max stage maps column endpoints to 0 and 1") {
    Dataset d = random_dataset(3, 1);
    d.inputs.col(0) << 0.0, 5.0, 10.0;
    auto params = fit_scalers(d);
    const auto& s = params.input_cols[0];
    CHECK(s.min == 0.0);
    CHECK(s.max == 10.0);
    // undo the standardization stage to look at the min-max stage alone
    Dataset z = transform(d, params);
    Eigen::ArrayXd u = z.inputs.col(0).array() * s.std + s.mean;
    CHECK(u(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(u(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(u(2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transformed columns have zero mean and unit population std") {
    Dataset d = random_dataset(257, 2);
    auto params = fit_scalers(d);
    Dataset z = transform(d, params);
    auto check_columns = [](const Eigen::MatrixXd& m) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            double mean = m.col(j).mean();
            double var = (m.col(j).array() - mean).square().mean();
            CHECK(std::fabs(mean) < 1e-12);
            CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
        }
    };
    check_columns(z.inputs);
    check_columns(z.outputs);
}

TEST_CASE("fitting twice gives identical parameters") {
    Dataset d = random_dataset(64, 3);
    auto a = fit_scalers(d);
    auto b = fit_scalers(d);
    for (std::size_t j = 0; j < kNumInputs; ++j) {
        CHECK(a.input_cols[j].min == b.input_cols[j].min);
        CHECK(a.input_cols[j].max == b.input_cols[j].max);
        CHECK(a.input_cols[j].mean == b.input_cols[j].mean);
        CHECK(a.input_cols[j].std == b.input_cols[j].std);
    }
    CHECK(a.fitted_on == 64);
}

TEST_CASE("scaler round trip is the identity to 1e-10 relative") {
    Dataset d = random_dataset(100, 4);
    auto params = fit_scalers(d);
    Dataset back = inverse_transform(transform(d, params), params);
    CHECK(((back.inputs - d.inputs).cwiseAbs().array() /
           d.inputs.cwiseAbs().array().max(1.0))
              .maxCoeff() < 1e-10);
    CHECK(((back.outputs - d.outputs).cwiseAbs().array() /
           d.outputs.cwiseAbs().array().max(1.0))
              .maxCoeff() < 1e-10);
}

TEST_CASE("rows outside the fitted range extrapolate without clamping") {
    Dataset train = random_dataset(50, 5);
    auto params = fit_scalers(train);

    Dataset probe = subset(train, 0, 1);
    probe.inputs(0, 0) = params.input_cols[0].max + 10.0;  // beyond the fitted max
    Dataset z = transform(probe, params);
    const auto& s = params.input_cols[0];
    double u = z.inputs(0, 0) * s.std + s.mean;
    CHECK(u > 1.0);  // min-max stage output leaves [0,1] rather than saturating

    Dataset back = inverse_transform(z, params);
    CHECK(back.inputs(0, 0) == doctest::Approx(s.max + 10.0).epsilon(1e-12));
}

TEST_CASE("constant columns are rejected by name") {
    Dataset d = random_dataset(10, 6);
    d.outputs.col(3).setConstant(4.5);
    CHECK_THROWS_WITH_AS(fit_scalers(d), "constant column: co_ppm", ConstantColumn);
}

TEST_CASE("datasets survive a disk round trip bit-for-bit") {
    TempDir dir;
    Dataset d = random_dataset(123, 7);
    auto path = dir.file("data.csv");
    write_csv(d, path);
    Dataset back = read_csv(path);
    CHECK((back.inputs.array() == d.inputs.array()).all());
    CHECK((back.outputs.array() == d.outputs.array()).all());
    CHECK(back.trace_id == d.trace_id);
    CHECK(back.t == d.t);
}

TEST_CASE("reader names the missing column") {
    TempDir dir;
    auto path = dir.file("short.csv");
    {
        std::ofstream out(path);
        out << "trace_id,t,ambient_temp_k\n0,0,300\n";
    }
    CHECK_THROWS_WITH_AS(read_csv(path), "missing column: humidity", SchemaMismatch);
}

TEST_CASE("reader rejects empty files and malformed cells") {
    TempDir dir;
    {
        std::ofstream out(dir.file("empty.csv"));
        out << "# only a comment\n";
    }
    CHECK_THROWS_AS(read_csv(dir.file("empty.csv")), ParseError);

    Dataset d = random_dataset(2, 8);
    auto path = dir.file("mangled.csv");
    write_csv(d, path);
    {
        std::ofstream out(path, std::ios::app);
        out << "0,1,x,4,5,6,7,8,9,10,11,12,13,14,15,16,17\n";
    }
    CHECK_THROWS_AS(read_csv(path), ParseError);
}

TEST_CASE("non-finite values never reach a dataset") {
    Dataset d = random_dataset(4, 9);
    d.outputs(2, 1) = std::numeric_limits<double>::infinity();
    TempDir dir;
    CHECK_THROWS_AS(write_csv(d, dir.file("inf.csv")), ConfigError);
}

TEST_CASE("subset keeps rows aligned") {
    Dataset d = random_dataset(30, 10);
    Dataset s = subset(d, 10, 25);
    REQUIRE(s.rows() == 15);
    CHECK(s.inputs(0, 0) == d.inputs(10, 0));
    CHECK(s.outputs(14, 4) == d.outputs(24, 4));
    CHECK(s.trace_id.front() == d.trace_id[10]);
    CHECK(s.t.back() == d.t[24]);
    CHECK_THROWS_AS(subset(d, 20, 10), ConfigError);
    CHECK_THROWS_AS(subset(d, 0, 31), ConfigError);
}
