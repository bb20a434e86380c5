#include "ecgscreen/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ecgscreen/errors.hpp"
#include "internal/binio.hpp"
#include "internal/fsio.hpp"

namespace ecgscreen {

namespace {

constexpr double kProbEps = 1e-7;

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return ((-z.array()).exp() + 1.0).inverse().matrix();
}

// Builds the target matrix for a batch: one column (the screening label) or
// two (per-condition sub-labels).
Eigen::MatrixXd targets_for(std::span<const LabeledExample* const> batch, std::size_t outputs) {
    Eigen::MatrixXd y(batch.size(), outputs);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (outputs == 1) {
            y(i, 0) = batch[i]->label;
        } else {
            y(i, 0) = batch[i]->rvh ? 1.0 : 0.0;
            y(i, 1) = batch[i]->rae ? 1.0 : 0.0;
        }
    }
    return y;
}

Eigen::MatrixXd inputs_for(std::span<const LabeledExample* const> batch, std::size_t input_size) {
    Eigen::MatrixXd x(batch.size(), input_size);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i]->input.size() != input_size)
            throw ShapeError("example " + batch[i]->record_id + " has input length " +
                             std::to_string(batch[i]->input.size()) + ", expected " +
                             std::to_string(input_size));
        x.row(i) = Eigen::Map<const Eigen::VectorXd>(batch[i]->input.data(),
                                                     static_cast<Eigen::Index>(input_size));
    }
    return x;
}

// Fraction of correct hard labels at the 0.5 threshold (strictly greater
// counts as positive), averaged over every output unit.
double hard_accuracy(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& targets) {
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        for (Eigen::Index j = 0; j < probs.cols(); ++j)
            if ((probs(i, j) > 0.5) == (targets(i, j) > 0.5)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(probs.size());
}

} // namespace

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        n += layer_sizes[l + 1] * layer_sizes[l] + layer_sizes[l + 1];
    return n;
}

MlpModel init_model(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw ConfigError("init_model: need at least 2 layers");
    for (std::size_t s : layer_sizes)
        if (s == 0) throw ConfigError("init_model: zero-width layer");

    MlpModel model;
    model.layer_sizes = layer_sizes;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const auto fan_in = static_cast<double>(layer_sizes[l]);
        const auto fan_out = static_cast<double>(layer_sizes[l + 1]);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Eigen::MatrixXd w(layer_sizes[l + 1], layer_sizes[l]);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(layer_sizes[l + 1]));
    }
    return model;
}

Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& inputs,
                        ForwardCache* cache) {
    if (inputs.cols() != static_cast<Eigen::Index>(model.input_size()))
        throw ShapeError("forward: input length " + std::to_string(inputs.cols()) +
                         ", model expects " + std::to_string(model.input_size()));

    if (cache) {
        cache->activations.clear();
        cache->pre_activations.clear();
        cache->activations.push_back(inputs);
    }

    Eigen::MatrixXd a = inputs;
    const std::size_t n_layers = model.weights.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::MatrixXd z = a * model.weights[l].transpose();
        z.rowwise() += model.biases[l].transpose();
        if (l + 1 < n_layers) {
            a = z.cwiseMax(0.0); // ReLU
        } else {
            a = sigmoid(z);
        }
        if (cache) {
            cache->pre_activations.push_back(std::move(z));
            cache->activations.push_back(a);
        }
    }
    return a;
}

std::vector<double> forward(const MlpModel& model, std::span<const double> input) {
    Eigen::MatrixXd x(1, input.size());
    for (std::size_t i = 0; i < input.size(); ++i) x(0, i) = input[i];
    Eigen::MatrixXd p = forward(model, x);
    return std::vector<double>(p.data(), p.data() + p.size());
}

double bce_loss(const Eigen::MatrixXd& probabilities, const Eigen::MatrixXd& targets) {
    if (probabilities.rows() != targets.rows() || probabilities.cols() != targets.cols())
        throw ShapeError("bce_loss: probability/target shape mismatch");
    const auto p = probabilities.array().min(1.0 - kProbEps).max(kProbEps);
    const auto y = targets.array();
    return -(y * p.log() + (1.0 - y) * (1.0 - p).log()).mean();
}

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Eigen::MatrixXd& targets) {
    const std::size_t n_layers = model.weights.size();
    if (cache.activations.size() != n_layers + 1 || cache.pre_activations.size() != n_layers)
        throw ShapeError("backward: cache does not match model depth");
    const Eigen::MatrixXd& probs = cache.activations.back();
    if (probs.rows() != targets.rows() || probs.cols() != targets.cols())
        throw ShapeError("backward: target shape does not match cached batch");

    Gradients grads;
    grads.weights.resize(n_layers);
    grads.biases.resize(n_layers);

    // Sigmoid + clamped BCE with mean reduction: dL/dz = (p - y) / cells.
    const double cells = static_cast<double>(probs.size());
    Eigen::MatrixXd delta = (probs - targets) / cells;

    for (std::size_t l = n_layers; l-- > 0;) {
        grads.weights[l] = delta.transpose() * cache.activations[l];
        grads.biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            delta = (delta * model.weights[l]).eval();
            delta = delta.cwiseProduct(
                (cache.pre_activations[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return grads;
}

double lr_schedule(int epoch, const TrainConfig& config) {
    if (epoch < 0) throw ConfigError("lr_schedule: negative epoch");
    return config.lr0 * std::pow(config.decay_rate, epoch);
}

bool EarlyStopper::observe(double val_loss) {
    ++seen_;
    if (val_loss < best_loss_ - min_delta_) {
        best_loss_ = val_loss;
        best_epoch_ = seen_;
        streak_ = 0;
        return true;
    }
    ++streak_;
    return false;
}

TrainResult train(std::span<const LabeledExample* const> train_set,
                  std::span<const LabeledExample* const> val_set,
                  const TrainConfig& config) {
    if (train_set.empty() || val_set.empty())
        throw EmptyDataset("train: empty training or validation set");
    if (config.epochs < 1 || config.lr0 <= 0.0 || config.batch_size < 1)
        throw ConfigError("train: epochs >= 1, lr0 > 0, batch_size >= 1 required");
    if (!(config.decay_rate > 0.0 && config.decay_rate <= 1.0))
        throw ConfigError("train: decay_rate must be in (0,1]");

    const std::size_t input_size = train_set.front()->input.size();
    const std::size_t outputs = config.multi_label ? 2 : 1;
    std::vector<std::size_t> sizes;
    sizes.push_back(input_size);
    sizes.insert(sizes.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
    sizes.push_back(outputs);

    MlpModel model = init_model(sizes, config.seed);
    const Eigen::MatrixXd x_train = inputs_for(train_set, input_size);
    const Eigen::MatrixXd y_train = targets_for(train_set, outputs);
    const Eigen::MatrixXd x_val = inputs_for(val_set, input_size);
    const Eigen::MatrixXd y_val = targets_for(val_set, outputs);

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    EarlyStopper stopper(config.min_delta, config.patience);
    MlpModel best = model;
    TrainResult result;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, config);
        std::shuffle(order.begin(), order.end(), rng);

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<const LabeledExample*> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);

            ForwardCache cache;
            forward(model, inputs_for(batch, input_size), &cache);
            Gradients grads = backward(model, cache, targets_for(batch, outputs));
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                model.weights[l] -= lr * grads.weights[l];
                model.biases[l] -= lr * grads.biases[l];
            }
        }

        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.lr = lr;
        Eigen::MatrixXd p_train = forward(model, x_train);
        Eigen::MatrixXd p_val = forward(model, x_val);
        stats.train_loss = bce_loss(p_train, y_train);
        stats.train_acc = hard_accuracy(p_train, y_train);
        stats.val_loss = bce_loss(p_val, y_val);
        stats.val_acc = hard_accuracy(p_val, y_val);
        if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.val_loss))
            throw DivergenceError(stats.epoch, "non-finite loss");
        result.history.epochs.push_back(stats);

        if (stopper.observe(stats.val_loss)) best = model;
        if (stopper.should_stop()) break;
    }

    result.history.best_epoch = stopper.best_epoch();
    result.model = std::move(best);
    return result;
}

TrainResult train(std::span<const LabeledExample> train_set,
                  std::span<const LabeledExample> val_set,
                  const TrainConfig& config) {
    std::vector<const LabeledExample*> train_ptrs, val_ptrs;
    train_ptrs.reserve(train_set.size());
    val_ptrs.reserve(val_set.size());
    for (const auto& ex : train_set) train_ptrs.push_back(&ex);
    for (const auto& ex : val_set) val_ptrs.push_back(&ex);
    return train(train_ptrs, val_ptrs, config);
}

Screening predict(const MlpModel& model, std::span<const double> input) {
    Screening result;
    result.per_output = forward(model, input);
    result.probability = *std::max_element(result.per_output.begin(), result.per_output.end());
    result.positive = result.probability > 0.5;
    return result;
}

namespace {

constexpr char kModelMagic[4] = {'E', 'C', 'G', 'M'};

} // namespace

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
    const MlpModel& model = bundle.model;
    std::vector<std::uint8_t> bytes;
    bytes.insert(bytes.end(), kModelMagic, kModelMagic + 4);
    binio::put_u16(bytes, kModelVersion);
    bytes.push_back(0); // hidden activation: ReLU
    bytes.push_back(0); // output activation: sigmoid
    binio::put_f64(bytes, bundle.sampling_rate);
    binio::put_u32(bytes, bundle.samples_per_lead);
    bytes.push_back(bundle.include_demographics ? 1 : 0);
    for (double m : bundle.stats.mean) binio::put_f64(bytes, m);
    for (double s : bundle.stats.stddev) binio::put_f64(bytes, s);

    binio::put_u32(bytes, static_cast<std::uint32_t>(model.layer_sizes.size()));
    for (std::size_t s : model.layer_sizes) binio::put_u32(bytes, static_cast<std::uint32_t>(s));
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const Eigen::MatrixXd& w = model.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) binio::put_f64(bytes, w(r, c));
        for (Eigen::Index r = 0; r < model.biases[l].size(); ++r)
            binio::put_f64(bytes, model.biases[l](r));
    }

    binio::put_u64(bytes, binio::fnv1a64(bytes));
    fsio::write_file_atomic(path, bytes);
}

ModelBundle load_model(const std::filesystem::path& path) {
    auto bytes = fsio::read_file(path);
    if (bytes.size() < 4 + 2 + 8) throw CorruptCache(path.string() + ": file too small");
    if (!std::equal(kModelMagic, kModelMagic + 4, bytes.begin()))
        throw CorruptCache(path.string() + ": bad magic");
    std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
    if (version != kModelVersion)
        throw VersionError(path.string() + ": model version " + std::to_string(version) +
                           ", supported " + std::to_string(kModelVersion));

    std::span<const std::uint8_t> body(bytes.data(), bytes.size() - 8);
    binio::Reader tail(std::span<const std::uint8_t>(bytes.data() + bytes.size() - 8, 8),
                       path.string() + ": truncated checksum");
    if (tail.u64() != binio::fnv1a64(body))
        throw CorruptCache(path.string() + ": checksum mismatch");

    binio::Reader reader(body, path.string() + ": truncated payload");
    reader.u32();
    reader.u16();
    ModelBundle bundle;
    if (reader.u8() != 0) throw VersionError(path.string() + ": unknown hidden activation");
    if (reader.u8() != 0) throw VersionError(path.string() + ": unknown output activation");
    bundle.sampling_rate = reader.f64();
    bundle.samples_per_lead = reader.u32();
    bundle.include_demographics = reader.u8() != 0;
    for (int l = 0; l < kNumLeads; ++l) bundle.stats.mean[l] = reader.f64();
    for (int l = 0; l < kNumLeads; ++l) bundle.stats.stddev[l] = reader.f64();

    std::uint32_t n_layers = reader.u32();
    if (n_layers < 2) throw CorruptCache(path.string() + ": fewer than 2 layers");
    bundle.model.layer_sizes.resize(n_layers);
    for (auto& s : bundle.model.layer_sizes) s = reader.u32();
    for (std::size_t l = 0; l + 1 < n_layers; ++l) {
        Eigen::MatrixXd w(bundle.model.layer_sizes[l + 1], bundle.model.layer_sizes[l]);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = reader.f64();
        Eigen::VectorXd b(bundle.model.layer_sizes[l + 1]);
        for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = reader.f64();
        bundle.model.weights.push_back(std::move(w));
        bundle.model.biases.push_back(std::move(b));
    }
    if (reader.remaining() != 0)
        throw CorruptCache(path.string() + ": trailing bytes in payload");
    return bundle;
}

std::string history_to_csv(const TrainHistory& history) {
    std::ostringstream out;
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "epoch,train_loss,train_acc,val_loss,val_acc,lr\n";
    for (const auto& e : history.epochs) {
        out << e.epoch << ',' << e.train_loss << ',' << e.train_acc << ',' << e.val_loss << ','
            << e.val_acc << ',' << e.lr << '\n';
    }
    return out.str();
}

} // namespace ecgscreen
