#include "ottosim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "model_io.hpp"
#include "ottosim/errors.hpp"

namespace ottosim {

std::string kind_tag(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::kLinear: return "lm";
        case BaselineKind::kRidge: return "rg";
        case BaselineKind::kKnn: return "knn";
        case BaselineKind::kTree: return "dt";
    }
    throw ConfigError("unknown baseline kind");
}

BaselineKind kind_from_tag(const std::string& tag) {
    if (tag == "lm") return BaselineKind::kLinear;
    if (tag == "rg") return BaselineKind::kRidge;
    if (tag == "knn") return BaselineKind::kKnn;
    if (tag == "dt") return BaselineKind::kTree;
    throw ConfigError("unknown baseline method: " + tag);
}

namespace {

void require_rows(const Dataset& scaled) {
    scaled.validate();
    if (scaled.rows() == 0) throw ConfigError("cannot fit on an empty dataset");
}

}  // namespace

BaselineModel fit_linear(const Dataset& scaled) {
    require_rows(scaled);
    const Eigen::Index n = scaled.inputs.rows();
    const auto p = static_cast<Eigen::Index>(kNumInputs);
    Eigen::MatrixXd design(n, p + 1);
    design.leftCols(p) = scaled.inputs;
    design.col(p).setOnes();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < p + 1)
        throw RankDeficient("inputs do not determine a unique least-squares fit");
    const Eigen::MatrixXd sol = qr.solve(scaled.outputs);  // (10+1) x 5

    BaselineModel model;
    model.kind = BaselineKind::kLinear;
    model.linear.coef = sol.topRows(p).transpose();
    model.linear.intercept = sol.row(p).transpose();
    return model;
}

BaselineModel fit_ridge(const Dataset& scaled, double lambda) {
    require_rows(scaled);
    if (!(lambda >= 0.0)) throw ConfigError("ridge penalty must be non-negative");
    const Eigen::Index n = scaled.inputs.rows();
    const auto p = static_cast<Eigen::Index>(kNumInputs);

    // center both sides so the penalty never touches the intercept
    const Eigen::RowVectorXd x_mean = scaled.inputs.colwise().mean();
    const Eigen::RowVectorXd y_mean = scaled.outputs.colwise().mean();

    // least squares on [Xc; sqrt(lambda) I] stays stable down to lambda = 0
    Eigen::MatrixXd aug(n + p, p);
    aug.topRows(n) = scaled.inputs.rowwise() - x_mean;
    aug.bottomRows(p) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + p, static_cast<Eigen::Index>(kNumOutputs));
    rhs.topRows(n) = scaled.outputs.rowwise() - y_mean;

    const Eigen::MatrixXd sol = aug.colPivHouseholderQr().solve(rhs);  // 10 x 5

    BaselineModel model;
    model.kind = BaselineKind::kRidge;
    model.linear.lambda = lambda;
    model.linear.coef = sol.transpose();
    model.linear.intercept = y_mean.transpose() - model.linear.coef * x_mean.transpose();
    return model;
}

BaselineModel fit_knn(const Dataset& scaled, int k) {
    require_rows(scaled);
    if (k < 1) throw ConfigError("neighbor count must be at least 1");
    if (static_cast<std::size_t>(k) > scaled.rows())
        throw ConfigError("neighbor count exceeds the training rows");
    BaselineModel model;
    model.kind = BaselineKind::kKnn;
    model.knn.k = k;
    model.knn.inputs = scaled.inputs;
    model.knn.outputs = scaled.outputs;
    return model;
}

namespace {

std::size_t add_node(TreeNodes& nodes) {
    nodes.feature.push_back(-1);
    nodes.threshold.push_back(0.0);
    nodes.value.push_back(0.0);
    nodes.left.push_back(-1);
    nodes.right.push_back(-1);
    return nodes.size() - 1;
}

TreeNodes build_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int max_depth,
                     int min_leaf) {
    const Eigen::Index n = x.rows();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});

    TreeNodes nodes;
    struct Work {
        std::size_t node;
        Eigen::Index begin;
        Eigen::Index end;
        int depth;
    };
    std::vector<Work> stack;
    add_node(nodes);
    stack.push_back({0, 0, n, 0});

    // value-then-row-index ordering keeps every sort, and therefore every
    // candidate scan, fully deterministic even with duplicated values
    const auto by_feature = [&x](int f) {
        return [&x, f](Eigen::Index a, Eigen::Index b) {
            const double xa = x(a, f);
            const double xb = x(b, f);
            return xa < xb || (xa == xb && a < b);
        };
    };

    while (!stack.empty()) {
        const Work w = stack.back();
        stack.pop_back();
        const Eigen::Index m = w.end - w.begin;
        const double count = static_cast<double>(m);

        double sum = 0.0, sum_sq = 0.0;
        for (Eigen::Index i = w.begin; i < w.end; ++i) {
            const double v = y(idx[static_cast<std::size_t>(i)]);
            sum += v;
            sum_sq += v * v;
        }
        nodes.value[w.node] = sum / count;
        const double parent_sse = sum_sq - sum * sum / count;

        const bool depth_capped = max_depth >= 0 && w.depth >= max_depth;
        if (depth_capped || m < 2 * static_cast<Eigen::Index>(min_leaf)) continue;

        // candidates swept feature-ascending, threshold-ascending, accepted
        // only on a strict improvement: equal-gain ties resolve to the
        // lowest feature and the smallest threshold
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
            std::sort(idx.begin() + w.begin, idx.begin() + w.end, by_feature(f));
            double left_sum = 0.0, left_sq = 0.0;
            for (Eigen::Index pos = 1; pos < m; ++pos) {
                const Eigen::Index prev = idx[static_cast<std::size_t>(w.begin + pos - 1)];
                const Eigen::Index next = idx[static_cast<std::size_t>(w.begin + pos)];
                const double v = y(prev);
                left_sum += v;
                left_sq += v * v;
                if (!(x(prev, f) < x(next, f))) continue;  // no boundary between equals
                if (pos < min_leaf || m - pos < min_leaf) continue;
                // Adjacent doubles can round the midpoint up onto the right
                // value; the "x <= threshold" rule could not realize the
                // scored partition then, so the pair is unsplittable.
                const double threshold = (x(prev, f) + x(next, f)) / 2.0;
                if (!(x(prev, f) <= threshold && threshold < x(next, f))) continue;
                const double lc = static_cast<double>(pos);
                const double rc = count - lc;
                const double right_sum = sum - left_sum;
                const double right_sq = sum_sq - left_sq;
                const double child_sse = (left_sq - left_sum * left_sum / lc) +
                                         (right_sq - right_sum * right_sum / rc);
                const double gain = parent_sse - child_sse;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = threshold;
                }
            }
        }
        if (best_feature < 0) continue;  // nothing reduces variance; stays a leaf

        // restore the chosen feature's order; the boundary is then contiguous
        std::sort(idx.begin() + w.begin, idx.begin() + w.end, by_feature(best_feature));
        Eigen::Index split = w.begin;
        while (split < w.end &&
               x(idx[static_cast<std::size_t>(split)], best_feature) <= best_threshold)
            ++split;

        const std::size_t left = add_node(nodes);
        const std::size_t right = add_node(nodes);
        nodes.feature[w.node] = best_feature;
        nodes.threshold[w.node] = best_threshold;
        nodes.left[w.node] = static_cast<int>(left);
        nodes.right[w.node] = static_cast<int>(right);
        stack.push_back({left, w.begin, split, w.depth + 1});
        stack.push_back({right, split, w.end, w.depth + 1});
    }
    return nodes;
}

double tree_eval(const TreeNodes& nodes, const Eigen::RowVectorXd& x) {
    int i = 0;
    while (nodes.feature[static_cast<std::size_t>(i)] >= 0) {
        const auto u = static_cast<std::size_t>(i);
        i = x(nodes.feature[u]) <= nodes.threshold[u] ? nodes.left[u] : nodes.right[u];
    }
    return nodes.value[static_cast<std::size_t>(i)];
}

}  // namespace

BaselineModel fit_tree(const Dataset& scaled, int max_depth, int min_leaf) {
    require_rows(scaled);
    if (min_leaf < 1) throw ConfigError("leaves need at least one row");
    BaselineModel model;
    model.kind = BaselineKind::kTree;
    model.tree.max_depth = max_depth;
    model.tree.min_leaf = min_leaf;
    model.tree.trees.reserve(kNumOutputs);
    for (std::size_t o = 0; o < kNumOutputs; ++o)
        model.tree.trees.push_back(build_tree(scaled.inputs,
                                              scaled.outputs.col(static_cast<Eigen::Index>(o)),
                                              max_depth, min_leaf));
    return model;
}

Eigen::MatrixXd predict_scaled(const BaselineModel& model, const Eigen::MatrixXd& scaled_inputs) {
    if (scaled_inputs.cols() != static_cast<Eigen::Index>(kNumInputs))
        throw ConfigError("prediction input width mismatch");
    const Eigen::Index n = scaled_inputs.rows();
    const auto n_out = static_cast<Eigen::Index>(kNumOutputs);

    switch (model.kind) {
        case BaselineKind::kLinear:
        case BaselineKind::kRidge: {
            Eigen::MatrixXd out = scaled_inputs * model.linear.coef.transpose();
            out.rowwise() += model.linear.intercept.transpose();
            return out;
        }
        case BaselineKind::kKnn: {
            const Eigen::Index rows = model.knn.inputs.rows();
            const auto k = static_cast<std::size_t>(model.knn.k);
            Eigen::MatrixXd out(n, n_out);
            std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(rows));
            for (Eigen::Index q = 0; q < n; ++q) {
                for (Eigen::Index i = 0; i < rows; ++i)
                    dist[static_cast<std::size_t>(i)] = {
                        (model.knn.inputs.row(i) - scaled_inputs.row(q)).squaredNorm(), i};
                // pair ordering breaks distance ties toward the lower row index
                std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                                  dist.end());
                Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(n_out);
                for (std::size_t j = 0; j < k; ++j)
                    mean += model.knn.outputs.row(dist[j].second);
                out.row(q) = mean / static_cast<double>(k);
            }
            return out;
        }
        case BaselineKind::kTree: {
            Eigen::MatrixXd out(n, n_out);
            for (Eigen::Index q = 0; q < n; ++q)
                for (Eigen::Index o = 0; o < n_out; ++o)
                    out(q, o) = tree_eval(model.tree.trees[static_cast<std::size_t>(o)],
                                          scaled_inputs.row(q));
            return out;
        }
    }
    throw ConfigError("unknown baseline kind");
}

Eigen::MatrixXd predict(const BaselineModel& model, const Eigen::MatrixXd& raw_inputs) {
    const Eigen::MatrixXd scaled = transform_inputs(raw_inputs, model.scalers);
    return inverse_transform_outputs(predict_scaled(model, scaled), model.scalers);
}

void save_baseline(const BaselineModel& model, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["format"] = model_io::kFormat;
    doc["version"] = model_io::kVersion;
    doc["kind"] = kind_tag(model.kind);
    doc["scalers"] = model_io::scalers_to_json(model.scalers);

    switch (model.kind) {
        case BaselineKind::kRidge:
            doc["lambda"] = model.linear.lambda;
            [[fallthrough]];
        case BaselineKind::kLinear:
            doc["coef"] = model_io::matrix_to_json(model.linear.coef);
            doc["intercept"] = model_io::vector_to_json(model.linear.intercept);
            break;
        case BaselineKind::kKnn:
            doc["k"] = model.knn.k;
            doc["inputs"] = model_io::matrix_to_json(model.knn.inputs);
            doc["outputs"] = model_io::matrix_to_json(model.knn.outputs);
            break;
        case BaselineKind::kTree: {
            doc["max_depth"] = model.tree.max_depth;
            doc["min_leaf"] = model.tree.min_leaf;
            nlohmann::json trees = nlohmann::json::array();
            for (const TreeNodes& t : model.tree.trees)
                trees.push_back({{"feature", t.feature},
                                 {"threshold", t.threshold},
                                 {"value", t.value},
                                 {"left", t.left},
                                 {"right", t.right}});
            doc["trees"] = std::move(trees);
            break;
        }
    }
    model_io::save_document(doc, path);
}

namespace {

void check_linear_shape(const LinearParams& linear) {
    if (linear.coef.rows() != static_cast<Eigen::Index>(kNumOutputs) ||
        linear.coef.cols() != static_cast<Eigen::Index>(kNumInputs) ||
        linear.intercept.size() != static_cast<Eigen::Index>(kNumOutputs))
        throw SchemaMismatch("linear coefficient shapes are wrong");
}

}  // namespace

BaselineModel load_baseline(const std::filesystem::path& path) {
    const nlohmann::json doc = model_io::load_document(path);
    try {
        const std::string tag = doc.at("kind").get<std::string>();
        if (tag == "dnn")
            throw SchemaMismatch("model file holds a network, not a baseline: " + path.string());
        BaselineModel model;
        try {
            model.kind = kind_from_tag(tag);
        } catch (const ConfigError&) {
            throw SchemaMismatch("unknown model kind '" + tag + "' in " + path.string());
        }
        model.scalers = model_io::scalers_from_json(doc.at("scalers"));

        switch (model.kind) {
            case BaselineKind::kRidge:
                model.linear.lambda = doc.at("lambda").get<double>();
                [[fallthrough]];
            case BaselineKind::kLinear:
                model.linear.coef = model_io::matrix_from_json(doc.at("coef"));
                model.linear.intercept = model_io::vector_from_json(doc.at("intercept"));
                check_linear_shape(model.linear);
                break;
            case BaselineKind::kKnn:
                model.knn.k = doc.at("k").get<int>();
                model.knn.inputs = model_io::matrix_from_json(doc.at("inputs"));
                model.knn.outputs = model_io::matrix_from_json(doc.at("outputs"));
                if (model.knn.inputs.cols() != static_cast<Eigen::Index>(kNumInputs) ||
                    model.knn.outputs.cols() != static_cast<Eigen::Index>(kNumOutputs) ||
                    model.knn.inputs.rows() != model.knn.outputs.rows() || model.knn.k < 1 ||
                    model.knn.inputs.rows() < model.knn.k)
                    throw SchemaMismatch("neighbor table shapes are wrong");
                break;
            case BaselineKind::kTree: {
                model.tree.max_depth = doc.at("max_depth").get<int>();
                model.tree.min_leaf = doc.at("min_leaf").get<int>();
                for (const auto& t : doc.at("trees")) {
                    TreeNodes nodes;
                    nodes.feature = t.at("feature").get<std::vector<int>>();
                    nodes.threshold = t.at("threshold").get<std::vector<double>>();
                    nodes.value = t.at("value").get<std::vector<double>>();
                    nodes.left = t.at("left").get<std::vector<int>>();
                    nodes.right = t.at("right").get<std::vector<int>>();
                    const std::size_t size = nodes.size();
                    if (size == 0 || nodes.threshold.size() != size ||
                        nodes.value.size() != size || nodes.left.size() != size ||
                        nodes.right.size() != size)
                        throw SchemaMismatch("tree arrays disagree in length");
                    for (std::size_t i = 0; i < size; ++i) {
                        const bool leaf = nodes.feature[i] < 0;
                        const bool feature_ok =
                            leaf || nodes.feature[i] < static_cast<int>(kNumInputs);
                        const bool child_ok =
                            leaf || (nodes.left[i] >= 0 &&
                                     nodes.left[i] < static_cast<int>(size) &&
                                     nodes.right[i] >= 0 &&
                                     nodes.right[i] < static_cast<int>(size));
                        if (!feature_ok || !child_ok)
                            throw SchemaMismatch("tree node references are out of range");
                    }
                    model.tree.trees.push_back(std::move(nodes));
                }
                if (model.tree.trees.size() != kNumOutputs)
                    throw SchemaMismatch("expected one tree per output");
                break;
            }
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(std::string("model file schema: ") + e.what());
    }
}

}  // namespace ottosim
