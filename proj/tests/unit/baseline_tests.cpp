#include "ottosim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "ottosim/dataset.hpp"
#include "ottosim/errors.hpp"
#include "ottosim/prng.hpp"
#include "ottosim/surrogate.hpp"
#include "test_util.hpp"

using namespace ottosim;
using ottosim::testing::TempDir;
namespace fs = std::filesystem;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

Dataset make_dataset(Eigen::MatrixXd inputs, Eigen::MatrixXd outputs) {
    Dataset d;
    d.inputs = std::move(inputs);
    d.outputs = std::move(outputs);
    d.trace_id.assign(d.rows(), 0);
    d.t.resize(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) d.t[i] = static_cast<double>(i);
    return d;
}

// Exact linear ground truth y = x B^T + c with mild slopes.
struct LinearTruth {
    Eigen::MatrixXd beta;   // 5 x 10
    Eigen::VectorXd c;      // 5
};

LinearTruth make_truth(std::uint64_t seed) {
    Rng rng(seed);
    LinearTruth truth;
    truth.beta = 0.5 * random_matrix(rng, 5, 10);
    truth.c = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
    return truth;
}

Dataset linear_dataset(const LinearTruth& truth, std::uint64_t seed, Eigen::Index n,
                       double noise = 0.0) {
    Rng rng(seed);
    Eigen::MatrixXd x = random_matrix(rng, n, 10);
    Eigen::MatrixXd y = x * truth.beta.transpose();
    y.rowwise() += truth.c.transpose();
    if (noise > 0.0) y += noise * random_matrix(rng, n, 5);
    return make_dataset(std::move(x), std::move(y));
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

TEST_CASE("least squares recovers an exact linear map") {
    const LinearTruth truth = make_truth(7);
    const Dataset data = linear_dataset(truth, 11, 200);
    const BaselineModel model = fit_linear(data);

    CHECK(model.linear.coef.rows() == 5);
    CHECK(model.linear.coef.cols() == 10);
    CHECK((model.linear.coef - truth.beta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((model.linear.intercept - truth.c).cwiseAbs().maxCoeff() < 1e-8);

    const Eigen::MatrixXd pred = predict_scaled(model, data.inputs);
    CHECK((pred - data.outputs).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("least squares residuals are orthogonal to every input column") {
    const LinearTruth truth = make_truth(13);
    const Dataset data = linear_dataset(truth, 17, 300, 0.2);
    const BaselineModel model = fit_linear(data);

    const Eigen::MatrixXd resid = data.outputs - predict_scaled(model, data.inputs);
    const Eigen::MatrixXd cross = data.inputs.transpose() * resid;  // 10 x 5
    CHECK(cross.cwiseAbs().maxCoeff() < 1e-8);
    // the intercept column (all ones) makes residual means vanish too
    CHECK(resid.colwise().sum().cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("duplicated input columns are rejected as rank deficient") {
    const LinearTruth truth = make_truth(19);
    Dataset data = linear_dataset(truth, 23, 100);
    data.inputs.col(9) = data.inputs.col(0);
    CHECK_THROWS_AS(fit_linear(data), RankDeficient);
}

TEST_CASE("unpenalized ridge equals least squares") {
    const LinearTruth truth = make_truth(29);
    const Dataset data = linear_dataset(truth, 31, 250, 0.3);
    const BaselineModel ols = fit_linear(data);
    const BaselineModel ridge = fit_ridge(data, 0.0);
    CHECK((ridge.linear.coef - ols.linear.coef).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((ridge.linear.intercept - ols.linear.intercept).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("an extreme ridge penalty shrinks every slope away") {
    const LinearTruth truth = make_truth(37);
    const Dataset data = linear_dataset(truth, 41, 250, 0.3);
    const BaselineModel model = fit_ridge(data, 1e9);
    CHECK(model.linear.coef.cwiseAbs().maxCoeff() < 1e-3);
    // prediction collapses to the per-output mean, which the intercept carries
    CHECK((model.linear.intercept.transpose() - data.outputs.colwise().mean())
              .cwiseAbs()
              .maxCoeff() < 1e-3);
}

TEST_CASE("slope norms shrink monotonically with the ridge penalty") {
    const LinearTruth truth = make_truth(43);
    const Dataset data = linear_dataset(truth, 47, 250, 0.3);
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {0.1, 1.0, 10.0}) {
        const double norm = fit_ridge(data, lambda).linear.coef.norm();
        CHECK(norm <= previous);
        previous = norm;
    }
    CHECK_THROWS_AS(fit_ridge(data, -1.0), ConfigError);
}

TEST_CASE("a single neighbor reproduces training points exactly") {
    Rng rng(53);
    const Dataset data = make_dataset(random_matrix(rng, 60, 10), random_matrix(rng, 60, 5));
    const BaselineModel model = fit_knn(data, 1);
    const Eigen::MatrixXd pred = predict_scaled(model, data.inputs);
    CHECK(same_bits(pred, data.outputs));
}

TEST_CASE("neighbor predictions stay inside the training output range") {
    Rng rng(59);
    const Dataset data = make_dataset(random_matrix(rng, 80, 10), random_matrix(rng, 80, 5));
    const BaselineModel model = fit_knn(data);
    CHECK(model.knn.k == 5);

    const Eigen::MatrixXd queries = 2.0 * random_matrix(rng, 50, 10);
    const Eigen::MatrixXd pred = predict_scaled(model, queries);
    for (Eigen::Index c = 0; c < 5; ++c) {
        CHECK(pred.col(c).minCoeff() >= data.outputs.col(c).minCoeff());
        CHECK(pred.col(c).maxCoeff() <= data.outputs.col(c).maxCoeff());
    }
}

TEST_CASE("neighbor search agrees with an exhaustive sort oracle") {
    Rng rng(61);
    const Dataset data = make_dataset(random_matrix(rng, 400, 10), random_matrix(rng, 400, 5));
    const int k = 5;
    const BaselineModel model = fit_knn(data, k);

    const Eigen::MatrixXd queries = random_matrix(rng, 1000, 10);
    const Eigen::MatrixXd pred = predict_scaled(model, queries);

    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        std::vector<std::pair<double, Eigen::Index>> dist;
        for (Eigen::Index i = 0; i < data.inputs.rows(); ++i)
            dist.emplace_back((data.inputs.row(i) - queries.row(q)).squaredNorm(), i);
        std::sort(dist.begin(), dist.end());
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(5);
        for (int j = 0; j < k; ++j) mean += data.outputs.row(dist[static_cast<std::size_t>(j)].second);
        mean /= static_cast<double>(k);
        CHECK((pred.row(q).array() == mean.array()).all());
    }
}

TEST_CASE("neighbor counts are validated") {
    Rng rng(67);
    const Dataset data = make_dataset(random_matrix(rng, 10, 10), random_matrix(rng, 10, 5));
    CHECK_THROWS_AS(fit_knn(data, 0), ConfigError);
    CHECK_THROWS_AS(fit_knn(data, 11), ConfigError);
    CHECK_THROWS_AS(fit_knn(Dataset{make_dataset(Eigen::MatrixXd(0, 10), Eigen::MatrixXd(0, 5))}),
                    ConfigError);
}

TEST_CASE("an unrestricted tree memorizes distinct training rows") {
    Rng rng(71);
    const Dataset data = make_dataset(random_matrix(rng, 64, 10), random_matrix(rng, 64, 5));
    const BaselineModel model = fit_tree(data);
    CHECK(model.tree.trees.size() == 5);
    const Eigen::MatrixXd pred = predict_scaled(model, data.inputs);
    CHECK(same_bits(pred, data.outputs));
}

TEST_CASE("a depth-zero tree predicts the training mean everywhere") {
    Rng rng(73);
    const Dataset data = make_dataset(random_matrix(rng, 50, 10), random_matrix(rng, 50, 5));
    const BaselineModel model = fit_tree(data, 0);
    for (const TreeNodes& t : model.tree.trees) CHECK(t.size() == 1);

    const Eigen::MatrixXd queries = random_matrix(rng, 20, 10);
    const Eigen::MatrixXd pred = predict_scaled(model, queries);
    const Eigen::RowVectorXd mean = data.outputs.colwise().mean();
    for (Eigen::Index q = 0; q < pred.rows(); ++q)
        CHECK((pred.row(q) - mean).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("the first split of a step function lands on the midpoint") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(8, 10, 0.5);
    Eigen::VectorXd feature(8);
    feature << -2.0, -1.5, -1.0, -0.25, 0.75, 1.0, 1.5, 2.0;
    x.col(3) = feature;
    Eigen::MatrixXd y(8, 5);
    for (Eigen::Index r = 0; r < 8; ++r)
        y.row(r).setConstant(feature(r) < 0.0 ? -1.0 : 1.0);

    const BaselineModel model = fit_tree(make_dataset(std::move(x), std::move(y)));
    for (const TreeNodes& t : model.tree.trees) {
        CHECK(t.feature[0] == 3);
        CHECK(t.threshold[0] == (-0.25 + 0.75) / 2.0);
    }
}

TEST_CASE("adjacent-double feature values cannot wedge the tree builder") {
    // midpoint of (a, b) rounds to even: up onto b here, so the "x <= t"
    // rule cannot realize the split and the pair must be treated as equal
    const double a = std::nextafter(1.0, 2.0);
    const double b = std::nextafter(a, 2.0);
    REQUIRE((a + b) / 2.0 == b);

    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(4, 10, 0.5);
    x.col(0) << a, a, b, b;
    Eigen::MatrixXd y(4, 5);
    y << Eigen::RowVectorXd::Zero(5).replicate(2, 1), Eigen::RowVectorXd::Ones(5).replicate(2, 1);
    const BaselineModel model = fit_tree(make_dataset(std::move(x), std::move(y)));
    for (const TreeNodes& t : model.tree.trees) {
        CHECK(t.size() == 1);  // unsplittable: stays a leaf instead of looping
        CHECK(t.value[0] == 0.5);
    }

    // the mirrored pair rounds down onto the left value, which still
    // separates; that split must be taken, not rejected
    Eigen::MatrixXd x2 = Eigen::MatrixXd::Constant(4, 10, 0.5);
    x2.col(0) << 1.0, 1.0, a, a;
    REQUIRE((1.0 + a) / 2.0 == 1.0);
    Eigen::MatrixXd y2(4, 5);
    y2 << Eigen::RowVectorXd::Zero(5).replicate(2, 1), Eigen::RowVectorXd::Ones(5).replicate(2, 1);
    const BaselineModel split_model = fit_tree(make_dataset(std::move(x2), std::move(y2)));
    for (const TreeNodes& t : split_model.tree.trees) {
        CHECK(t.size() == 3);
        CHECK(t.threshold[0] == 1.0);
    }
}

TEST_CASE("the root split matches an exhaustive candidate scan") {
    Rng rng(79);
    Eigen::MatrixXd x = random_matrix(rng, 40, 10);
    Eigen::MatrixXd y = random_matrix(rng, 40, 5);
    y.col(0) = (x.col(2).array() > 0.3).cast<double>() + 0.1 * y.col(0).array();
    const Dataset data = make_dataset(std::move(x), std::move(y));
    const BaselineModel model = fit_tree(data);

    // oracle: evaluate every (feature, midpoint) candidate directly from the
    // definition of the split cost, with the same tie-break order
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    const Eigen::VectorXd target = data.outputs.col(0);
    const double parent_mean = target.mean();
    const double parent_sse = (target.array() - parent_mean).square().sum();
    for (int f = 0; f < 10; ++f) {
        std::vector<double> values(static_cast<std::size_t>(data.inputs.rows()));
        for (Eigen::Index i = 0; i < data.inputs.rows(); ++i)
            values[static_cast<std::size_t>(i)] = data.inputs(i, f);
        std::sort(values.begin(), values.end());
        for (std::size_t p = 1; p < values.size(); ++p) {
            if (!(values[p - 1] < values[p])) continue;
            const double threshold = (values[p - 1] + values[p]) / 2.0;
            std::vector<double> lo, hi;
            for (Eigen::Index i = 0; i < data.inputs.rows(); ++i)
                (data.inputs(i, f) <= threshold ? lo : hi).push_back(target(i));
            auto sse = [](const std::vector<double>& side) {
                double mean = 0.0;
                for (double v : side) mean += v;
                mean /= static_cast<double>(side.size());
                double out = 0.0;
                for (double v : side) out += (v - mean) * (v - mean);
                return out;
            };
            const double gain = parent_sse - sse(lo) - sse(hi);
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = f;
                best_threshold = threshold;
            }
        }
    }
    CHECK(model.tree.trees[0].feature[0] == best_feature);
    CHECK(model.tree.trees[0].threshold[0] == doctest::Approx(best_threshold).epsilon(1e-12));
}

TEST_CASE("equal-gain splits break toward the lowest feature index") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(4, 10, 1.0);
    Eigen::VectorXd ramp(4);
    ramp << 0.0, 1.0, 2.0, 3.0;
    x.col(0) = ramp;
    x.col(5) = ramp;  // identical information, higher index
    Eigen::MatrixXd y(4, 5);
    y.col(0) << 0.0, 0.0, 5.0, 5.0;
    for (Eigen::Index c = 1; c < 5; ++c) y.col(c) = y.col(0);

    const BaselineModel model = fit_tree(make_dataset(std::move(x), std::move(y)));
    CHECK(model.tree.trees[0].feature[0] == 0);
    CHECK(model.tree.trees[0].threshold[0] == 1.5);
}

TEST_CASE("leaf-size floors stop splitting") {
    Rng rng(83);
    const Dataset data = make_dataset(random_matrix(rng, 3, 10), random_matrix(rng, 3, 5));
    const BaselineModel model = fit_tree(data, -1, 2);
    for (const TreeNodes& t : model.tree.trees) CHECK(t.size() == 1);
    CHECK_THROWS_AS(fit_tree(data, -1, 0), ConfigError);
}

TEST_CASE("every baseline kind survives a save and load round trip") {
    TempDir dir;
    Rng rng(89);
    Eigen::MatrixXd raw_x(40, 10);
    Eigen::MatrixXd raw_y(40, 5);
    for (Eigen::Index i = 0; i < 40; ++i) {
        for (Eigen::Index j = 0; j < 10; ++j)
            raw_x(i, j) = rng.uniform(5.0 * static_cast<double>(j), 5.0 * static_cast<double>(j) + 2.0);
        for (Eigen::Index j = 0; j < 5; ++j) raw_y(i, j) = rng.uniform(-1.0, 4.0);
    }
    Dataset raw = make_dataset(std::move(raw_x), std::move(raw_y));
    const ScalerParams scalers = fit_scalers(raw);
    const Dataset scaled = transform(raw, scalers);
    const Eigen::MatrixXd probe = raw.inputs.topRows(7);

    auto roundtrip = [&](BaselineModel model, const std::string& tag) {
        model.scalers = scalers;
        const fs::path path = dir.path() / (tag + ".json");
        save_baseline(model, path);

        std::ifstream in(path);
        nlohmann::json doc;
        in >> doc;
        CHECK(doc.at("kind").get<std::string>() == tag);

        const BaselineModel loaded = load_baseline(path);
        CHECK(kind_tag(loaded.kind) == tag);
        CHECK(same_bits(predict(loaded, probe), predict(model, probe)));
    };

    roundtrip(fit_linear(scaled), "lm");
    roundtrip(fit_ridge(scaled), "rg");
    roundtrip(fit_knn(scaled), "knn");
    roundtrip(fit_tree(scaled), "dt");

    const BaselineModel ridge = load_baseline(dir.path() / "rg.json");
    CHECK(ridge.linear.lambda == 1.0);
}

TEST_CASE("network and baseline files do not load through the wrong door") {
    TempDir dir;
    Rng rng(97);
    const Dataset data = make_dataset(random_matrix(rng, 30, 10), random_matrix(rng, 30, 5));

    const fs::path lm_path = dir.path() / "lm.json";
    save_baseline(fit_linear(data), lm_path);
    CHECK_THROWS_AS(load_model(lm_path), SchemaMismatch);

    const fs::path dnn_path = dir.path() / "dnn.json";
    save_model(init_model(MlpSpec{}, 1), dnn_path);
    CHECK_THROWS_AS(load_baseline(dnn_path), SchemaMismatch);

    CHECK_THROWS_AS(load_baseline(dir.path() / "absent.json"), IoError);
}

TEST_CASE("method tags map to kinds and back") {
    for (BaselineKind kind : {BaselineKind::kLinear, BaselineKind::kRidge, BaselineKind::kKnn,
                              BaselineKind::kTree})
        CHECK(kind_from_tag(kind_tag(kind)) == kind);
    CHECK_THROWS_AS(kind_from_tag("svm"), ConfigError);
}
