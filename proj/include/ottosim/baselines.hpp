#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ottosim/dataset.hpp"

namespace ottosim {

// Classical reference regressors trained on the same scaled pipeline as the
// network, one sub-model per output column. Fits are deterministic and
// predictions pure, so a fitted model can be shared across threads.

enum class BaselineKind { kLinear, kRidge, kKnn, kTree };

// Short tags used in model files and as CLI method names.
std::string kind_tag(BaselineKind kind);
BaselineKind kind_from_tag(const std::string& tag);

struct LinearParams {
    Eigen::MatrixXd coef;       // 5 x 10, one row of slopes per output
    Eigen::VectorXd intercept;  // 5
    double lambda = 0.0;        // ridge penalty; 0 means plain least squares
};

struct KnnParams {
    int k = 5;
    Eigen::MatrixXd inputs;   // retained scaled training inputs, n x 10
    Eigen::MatrixXd outputs;  // n x 5
};

// Flat node arena for one regression tree. Node i is a leaf when
// feature[i] < 0; otherwise queries with x[feature] <= threshold descend to
// left[i] and the rest to right[i]. value holds the node's training mean.
struct TreeNodes {
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<double> value;
    std::vector<int> left;
    std::vector<int> right;

    std::size_t size() const { return feature.size(); }
};

struct TreeParams {
    int max_depth = -1;  // negative means unlimited
    int min_leaf = 1;
    std::vector<TreeNodes> trees;  // one per output
};

struct BaselineModel {
    BaselineKind kind = BaselineKind::kLinear;
    LinearParams linear;
    KnnParams knn;
    TreeParams tree;
    ScalerParams scalers;  // attached by the caller, as with the network
};

// Ordinary least squares per output through an orthogonal factorization of
// the intercept-augmented design matrix. Throws RankDeficient when the
// inputs do not span a unique solution.
BaselineModel fit_linear(const Dataset& scaled);

// Penalized least squares with the intercept left unpenalized (inputs and
// outputs are centered, the slopes shrunk, the intercept recovered from the
// means). lambda = 0 reproduces fit_linear on full-rank data.
BaselineModel fit_ridge(const Dataset& scaled, double lambda = 1.0);

// Mean of the k nearest training rows by Euclidean distance on scaled
// inputs; distance ties break toward the lower training row index.
BaselineModel fit_knn(const Dataset& scaled, int k = 5);

// Variance-reduction regression tree with axis-aligned midpoint splits.
// Equal-gain candidates resolve to the lowest feature index, then the
// smallest threshold.
BaselineModel fit_tree(const Dataset& scaled, int max_depth = -1, int min_leaf = 1);

Eigen::MatrixXd predict_scaled(const BaselineModel& model, const Eigen::MatrixXd& scaled_inputs);

// Raw-unit convenience path: scale inputs, predict, unscale outputs.
Eigen::MatrixXd predict(const BaselineModel& model, const Eigen::MatrixXd& raw_inputs);

// Same versioned JSON convention as the network serializer, kind-tagged.
void save_baseline(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_baseline(const std::filesystem::path& path);

}  // namespace ottosim
