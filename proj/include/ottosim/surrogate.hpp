#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ottosim/dataset.hpp"

namespace ottosim {

// Feed-forward architecture: rectifier hidden layers, linear output.
struct MlpSpec {
    std::vector<int> layer_sizes{10, 16, 16, 16, 16, 16, 16, 5};

    std::size_t n_hidden() const { return layer_sizes.size() - 2; }
    void validate() const;
};

// Per-hidden-layer freeze flags, HiddenLayer0 being the weights feeding the
// first hidden layer. Empty means everything trains; the output layer is
// never maskable. At least one hidden layer must stay trainable.
struct FreezeMask {
    std::vector<std::uint8_t> frozen;

    bool layer_frozen(std::size_t hidden_index) const {
        return hidden_index < frozen.size() && frozen[hidden_index] != 0;
    }
    static FreezeMask first_n(std::size_t n, std::size_t n_hidden);
};

struct MlpModel {
    MlpSpec spec;
    std::vector<Eigen::MatrixXd> weights;  // W[l]: sizes[l+1] x sizes[l]
    std::vector<Eigen::VectorXd> biases;   // b[l]: sizes[l+1]
    ScalerParams scalers;                  // input and output pipelines

    void validate() const;
};

struct TrainConfig {
    int epochs = 50;
    int batch_size = 16;
    double learning_rate = 1e-3;  // Adam
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t shuffle_seed = 0;
    FreezeMask freeze;

    void validate(std::size_t n_hidden) const;
};

// He fan-in initialization, zero biases, deterministic per seed. Scalers
// are left default; callers attach fitted ones before prediction.
MlpModel init_model(const MlpSpec& spec, std::uint64_t seed);

// Batched forward pass on scaler-space inputs (n x 10) -> scaled outputs
// (n x 5). Pure; safe to call concurrently on shared weights.
Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& inputs);

struct Gradients {
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_biases;
    double loss = 0.0;  // MSE averaged over batch rows and output units
};

// Exact reverse-mode gradients of the batch MSE. Frozen layers report
// exactly zero gradient.
Gradients gradients(const MlpModel& model, const Eigen::MatrixXd& inputs,
                    const Eigen::MatrixXd& targets, const FreezeMask& freeze = {});

struct TrainResult {
    MlpModel model;
    std::vector<double> loss_history;  // one sample-weighted mean per epoch
};

// Shuffled mini-batch Adam on scaled data. epochs = 0 is a no-op that
// returns the model unchanged. Throws NonFiniteLoss on divergence.
TrainResult train(const MlpModel& model, const Dataset& scaled_train, const TrainConfig& config);

// Adaptation to a shifted regime: same optimizer, but the first three
// hidden layers are always frozen regardless of config.freeze. The new data
// must be scaled with the model's original scalers.
TrainResult transfer_train(const MlpModel& model, const Dataset& scaled_new,
                           const TrainConfig& config);

// Raw-unit convenience path: scale inputs, forward, unscale outputs.
Eigen::MatrixXd predict(const MlpModel& model, const Eigen::MatrixXd& raw_inputs);

// Versioned JSON document holding spec, weights, and both scaler stages.
// load(save(m)) reproduces forward outputs bit-for-bit.
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace ottosim
