#include "ottosim/surrogate.hpp"

#include <cmath>
#include <numeric>

#include "json.hpp"
#include "model_io.hpp"
#include "ottosim/errors.hpp"
#include "ottosim/prng.hpp"

namespace ottosim {

void MlpSpec::validate() const {
    if (layer_sizes.size() < 3) throw ConfigError("network needs input, hidden, output layers");
    for (int size : layer_sizes) {
        if (size < 1) throw ConfigError("layer sizes must be positive");
    }
}

FreezeMask FreezeMask::first_n(std::size_t n, std::size_t n_hidden) {
    if (n > n_hidden) throw ConfigError("cannot freeze more hidden layers than exist");
    FreezeMask mask;
    mask.frozen.assign(n_hidden, 0);
    for (std::size_t i = 0; i < n; ++i) mask.frozen[i] = 1;
    return mask;
}

void MlpModel::validate() const {
    spec.validate();
    const std::size_t n_layers = spec.layer_sizes.size();
    if (weights.size() != n_layers - 1 || biases.size() != n_layers - 1)
        throw ConfigError("weight count does not match architecture");
    for (std::size_t l = 0; l + 1 < n_layers; ++l) {
        if (weights[l].rows() != spec.layer_sizes[l + 1] ||
            weights[l].cols() != spec.layer_sizes[l] ||
            biases[l].size() != spec.layer_sizes[l + 1])
            throw ConfigError("weight shape mismatch at layer " + std::to_string(l));
        if (!weights[l].allFinite() || !biases[l].allFinite())
            throw ConfigError("non-finite weights at layer " + std::to_string(l));
    }
}

void TrainConfig::validate(std::size_t n_hidden) const {
    if (epochs < 0) throw ConfigError("epochs must be non-negative");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!freeze.frozen.empty()) {
        if (freeze.frozen.size() != n_hidden)
            throw ConfigError("freeze mask must cover every hidden layer");
        bool any_trainable = false;
        for (std::uint8_t f : freeze.frozen) any_trainable = any_trainable || f == 0;
        if (!any_trainable)
            throw ConfigError("freeze mask leaves no trainable hidden layer");
    }
}

MlpModel init_model(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    MlpModel model;
    model.spec = spec;
    const std::size_t n = spec.layer_sizes.size();
    model.weights.reserve(n - 1);
    model.biases.reserve(n - 1);
    for (std::size_t l = 0; l + 1 < n; ++l) {
        const int fan_in = spec.layer_sizes[l];
        const int fan_out = spec.layer_sizes[l + 1];
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = stddev * rng.normal();
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return model;
}

namespace {

// Activations per layer for one batch; index 0 is the input itself.
struct ForwardTrace {
    std::vector<Eigen::MatrixXd> activations;
};

ForwardTrace forward_trace(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    const std::size_t n_weights = model.weights.size();
    ForwardTrace trace;
    trace.activations.reserve(n_weights + 1);
    trace.activations.push_back(inputs);
    for (std::size_t l = 0; l < n_weights; ++l) {
        const Eigen::MatrixXd& a = trace.activations.back();
        const Eigen::MatrixXd& w = model.weights[l];
        const Eigen::VectorXd& b = model.biases[l];
        const bool hidden = l + 1 < n_weights;
        Eigen::MatrixXd z(a.rows(), w.rows());
        // explicit dot products in fixed index order: library matrix kernels
        // switch accumulation strategy with batch shape, which would break
        // the bit-for-bit single-row vs batched contract
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) {
                double acc = b(i);
                for (Eigen::Index j = 0; j < w.cols(); ++j) acc += w(i, j) * a(r, j);
                z(r, i) = hidden ? std::max(acc, 0.0) : acc;  // rectifier on hidden layers
            }
        }
        trace.activations.push_back(std::move(z));
    }
    return trace;
}

}  // namespace

Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    if (inputs.cols() != model.spec.layer_sizes.front())
        throw ConfigError("forward: input width does not match network");
    return forward_trace(model, inputs).activations.back();
}

Gradients gradients(const MlpModel& model, const Eigen::MatrixXd& inputs,
                    const Eigen::MatrixXd& targets, const FreezeMask& freeze) {
    if (inputs.rows() != targets.rows()) throw ConfigError("gradients: batch rows disagree");
    if (targets.cols() != model.spec.layer_sizes.back())
        throw ConfigError("gradients: target width does not match network");

    const auto trace = forward_trace(model, inputs);
    const std::size_t n_weights = model.weights.size();
    const double denom =
        static_cast<double>(inputs.rows()) * static_cast<double>(targets.cols());

    Gradients g;
    g.d_weights.resize(n_weights);
    g.d_biases.resize(n_weights);

    const Eigen::MatrixXd residual = trace.activations.back() - targets;
    g.loss = residual.squaredNorm() / denom;

    // delta holds dLoss/dZ for the layer being processed, batch-rows layout
    Eigen::MatrixXd delta = (2.0 / denom) * residual;
    for (std::size_t l = n_weights; l-- > 0;) {
        const bool frozen = l < n_weights - 1 && freeze.layer_frozen(l);
        if (frozen) {
            g.d_weights[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(),
                                                   model.weights[l].cols());
            g.d_biases[l] = Eigen::VectorXd::Zero(model.biases[l].size());
        } else {
            g.d_weights[l] = delta.transpose() * trace.activations[l];
            g.d_biases[l] = delta.colwise().sum().transpose();
        }
        if (l > 0) {
            delta = delta * model.weights[l];
            // rectifier gate of the producing layer
            delta.array() *= (trace.activations[l].array() > 0.0).cast<double>();
        }
    }
    return g;
}

TrainResult train(const MlpModel& model, const Dataset& scaled_train, const TrainConfig& config) {
    model.validate();
    config.validate(model.spec.n_hidden());
    scaled_train.validate();
    if (scaled_train.inputs.cols() != model.spec.layer_sizes.front() ||
        scaled_train.outputs.cols() != model.spec.layer_sizes.back())
        throw ConfigError("train: dataset shape does not match network");

    TrainResult result;
    result.model = model;
    if (config.epochs == 0) return result;
    if (scaled_train.rows() == 0) throw ConfigError("train: empty dataset");

    const std::size_t n_weights = result.model.weights.size();
    std::vector<Eigen::MatrixXd> m_w(n_weights), v_w(n_weights);
    std::vector<Eigen::VectorXd> m_b(n_weights), v_b(n_weights);
    for (std::size_t l = 0; l < n_weights; ++l) {
        m_w[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
        v_w[l] = m_w[l];
        m_b[l] = Eigen::VectorXd::Zero(model.biases[l].size());
        v_b[l] = m_b[l];
    }

    const std::size_t n = scaled_train.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.shuffle_seed);

    long step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_sq_sum = 0.0;

        for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t size =
                std::min(static_cast<std::size_t>(config.batch_size), n - begin);
            Eigen::MatrixXd bx(size, scaled_train.inputs.cols());
            Eigen::MatrixXd by(size, scaled_train.outputs.cols());
            for (std::size_t r = 0; r < size; ++r) {
                const auto src = static_cast<Eigen::Index>(order[begin + r]);
                bx.row(static_cast<Eigen::Index>(r)) = scaled_train.inputs.row(src);
                by.row(static_cast<Eigen::Index>(r)) = scaled_train.outputs.row(src);
            }

            const Gradients g = gradients(result.model, bx, by, config.freeze);
            if (!std::isfinite(g.loss)) throw NonFiniteLoss("training loss diverged");
            epoch_sq_sum += g.loss * static_cast<double>(size);

            ++step;
            const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < n_weights; ++l) {
                if (l < n_weights - 1 && config.freeze.layer_frozen(l)) continue;
                m_w[l] = config.beta1 * m_w[l] + (1.0 - config.beta1) * g.d_weights[l];
                v_w[l] = config.beta2 * v_w[l].array().matrix() +
                         (1.0 - config.beta2) * g.d_weights[l].array().square().matrix();
                result.model.weights[l].array() -=
                    config.learning_rate * (m_w[l].array() / bc1) /
                    ((v_w[l].array() / bc2).sqrt() + config.epsilon);

                m_b[l] = config.beta1 * m_b[l] + (1.0 - config.beta1) * g.d_biases[l];
                v_b[l] = config.beta2 * v_b[l].array().matrix() +
                         (1.0 - config.beta2) * g.d_biases[l].array().square().matrix();
                result.model.biases[l].array() -=
                    config.learning_rate * (m_b[l].array() / bc1) /
                    ((v_b[l].array() / bc2).sqrt() + config.epsilon);
            }
        }
        result.loss_history.push_back(epoch_sq_sum / static_cast<double>(n));
    }
    return result;
}

TrainResult transfer_train(const MlpModel& model, const Dataset& scaled_new,
                           const TrainConfig& config) {
    TrainConfig adapted = config;
    adapted.freeze = FreezeMask::first_n(3, model.spec.n_hidden());
    return train(model, scaled_new, adapted);
}

Eigen::MatrixXd predict(const MlpModel& model, const Eigen::MatrixXd& raw_inputs) {
    const Eigen::MatrixXd scaled = transform_inputs(raw_inputs, model.scalers);
    return inverse_transform_outputs(forward(model, scaled), model.scalers);
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    model.validate();
    nlohmann::json doc;
    doc["format"] = model_io::kFormat;
    doc["version"] = model_io::kVersion;
    doc["kind"] = "dnn";
    doc["layer_sizes"] = model.spec.layer_sizes;

    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json biases = nlohmann::json::array();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        weights.push_back(model_io::matrix_to_json(model.weights[l]));
        biases.push_back(model_io::vector_to_json(model.biases[l]));
    }
    doc["weights"] = std::move(weights);
    doc["biases"] = std::move(biases);
    doc["scalers"] = model_io::scalers_to_json(model.scalers);
    model_io::save_document(doc, path);
}

MlpModel load_model(const std::filesystem::path& path) {
    const nlohmann::json doc = model_io::load_document(path);
    try {
        if (doc.at("kind").get<std::string>() != "dnn")
            throw SchemaMismatch("model kind is not dnn: " + path.string());

        MlpModel model;
        model.spec.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
        const auto& weights = doc.at("weights");
        const auto& biases = doc.at("biases");
        for (std::size_t l = 0; l + 1 < model.spec.layer_sizes.size(); ++l) {
            model.weights.push_back(model_io::matrix_from_json(weights.at(l)));
            model.biases.push_back(model_io::vector_from_json(biases.at(l)));
        }
        model.scalers = model_io::scalers_from_json(doc.at("scalers"));
        model.validate();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(std::string("model file schema: ") + e.what());
    }
}

}  // namespace ottosim
