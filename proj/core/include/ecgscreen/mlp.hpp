#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecgscreen/preprocess.hpp"

namespace ecgscreen {

enum class HiddenActivation { ReLU };
enum class OutputActivation { Sigmoid };

/// Fully-connected network. weights[l] has shape (layer_sizes[l+1] x
/// layer_sizes[l]); hidden layers are ReLU, the output layer sigmoid.
struct MlpModel {
    std::vector<std::size_t> layer_sizes;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    HiddenActivation hidden_activation = HiddenActivation::ReLU;
    OutputActivation output_activation = OutputActivation::Sigmoid;

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
    std::size_t parameter_count() const;
};

struct TrainConfig {
    int epochs = 50;
    double lr0 = 1e-3;
    double decay_rate = 0.95;   // lr multiplier per epoch, in (0,1]
    int batch_size = 32;
    int patience = 10;          // tolerated non-improving epochs before halting
    std::uint64_t seed = 0;
    double min_delta = 1e-4;    // required val-loss improvement
    std::vector<std::size_t> hidden_sizes = {256, 64};
    bool multi_label = false;   // 2 outputs (RVH, RAE) instead of 1
};

struct EpochStats {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    double lr = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = 0; // 1-based epoch whose parameters were restored
};

/// Glorot-uniform weights in +/- sqrt(6/(fan_in+fan_out)), zero biases,
/// deterministic per seed.
MlpModel init_model(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

/// Layer activations kept for backpropagation. activations[0] is the input
/// batch; activations.back() the output probabilities.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> activations;
    std::vector<Eigen::MatrixXd> pre_activations;
};

/// Batched forward pass; rows are examples. Fills `cache` when given.
Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& inputs,
                        ForwardCache* cache = nullptr);

/// Single-input convenience wrapper.
std::vector<double> forward(const MlpModel& model, std::span<const double> input);

/// Mean binary cross-entropy over all (example, output) cells, with
/// probabilities clamped to [1e-7, 1-1e-7].
double bce_loss(const Eigen::MatrixXd& probabilities, const Eigen::MatrixXd& targets);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Gradient of bce_loss w.r.t. every parameter, from a forward cache built
/// on the same batch.
Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Eigen::MatrixXd& targets);

/// lr0 * decay^epoch (epoch 0-based).
double lr_schedule(int epoch, const TrainConfig& config);

/// Early-stopping rule: an epoch improves when val_loss < best - min_delta;
/// training halts once the non-improving streak exceeds `patience`.
class EarlyStopper {
public:
    EarlyStopper(double min_delta, int patience)
        : min_delta_(min_delta), patience_(patience) {}

    /// Feed one epoch's validation loss; returns true if it improved.
    bool observe(double val_loss);
    bool should_stop() const { return streak_ > patience_; }
    int best_epoch() const { return best_epoch_; } // 1-based
    double best_loss() const { return best_loss_; }

private:
    double min_delta_;
    int patience_;
    double best_loss_ = std::numeric_limits<double>::infinity();
    int best_epoch_ = 0;
    int streak_ = 0;
    int seen_ = 0;
};

struct TrainResult {
    MlpModel model;
    TrainHistory history;
};

/// Mini-batch gradient descent with exponential learning-rate decay and
/// early stopping. Deterministic per (data, config, seed); the returned
/// model carries the parameters of the best-validation-loss epoch.
/// Throws DivergenceError (with the epoch) if a loss goes non-finite.
TrainResult train(std::span<const LabeledExample* const> train_set,
                  std::span<const LabeledExample* const> val_set,
                  const TrainConfig& config);
TrainResult train(std::span<const LabeledExample> train_set,
                  std::span<const LabeledExample> val_set,
                  const TrainConfig& config);

struct Screening {
    double probability = 0.0;       // screening probability (max over outputs)
    bool positive = false;          // probability strictly above 0.5
    std::vector<double> per_output; // one probability per output unit
};

Screening predict(const MlpModel& model, std::span<const double> input);

/// Model file: the network plus the preprocessing context needed to screen
/// a raw record (normalization stats, sampling rate, sample count).
struct ModelBundle {
    MlpModel model;
    NormStats stats;
    double sampling_rate = 0.0;
    std::uint32_t samples_per_lead = 0;
    bool include_demographics = false;
};

inline constexpr std::uint16_t kModelVersion = 1;

/// Versioned little-endian binary with trailing checksum; layout in
/// docs/formats.md.
void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

/// Per-epoch comma-separated table: epoch,train_loss,train_acc,val_loss,
/// val_acc,lr. Doubles are printed with max_digits10 so reruns are
/// byte-identical.
std::string history_to_csv(const TrainHistory& history);

} // namespace ecgscreen
