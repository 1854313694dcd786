#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hummit/dataset.hpp"

namespace hummit::net {

enum class Kind { fcn, mlp };
enum class Mode { train, infer };

struct ConvBlockSpec {
    int filters = 0;
    int kernel = 0;
};

/// Architecture descriptor. Conv blocks keep the series length, so changing
/// input_len changes no parameter shape on the fcn path.
struct ArchSpec {
    Kind kind = Kind::fcn;
    std::vector<ConvBlockSpec> blocks; // fcn
    std::vector<int> hidden;           // mlp
    int n_classes = 0;
    int input_len = 0;

    /// Canonical retrieval network: three conv blocks of 128, 256 and 128
    /// filters with kernel lengths 8, 5 and 3, each followed by batch norm
    /// and ReLU, then GAP and a softmax head.
    static ArchSpec make_fcn(int n_classes, int input_len);
    /// Baseline: four fully connected hidden layers of 300 ReLU units and a
    /// softmax output layer.
    static ArchSpec make_mlp(int n_classes, int input_len);
};

/// Weights, biases and batch-norm state. T is float in production; the
/// double instantiation exists for finite-difference gradient checks.
template <class T>
struct Model {
    struct Conv {
        int in_c = 0, out_c = 0, kernel = 0;
        std::vector<T> w; // [out_c][in_c][kernel]
        std::vector<T> b;
    };
    struct BatchNorm {
        int channels = 0;
        std::vector<T> gamma, beta, run_mean, run_var;
    };
    struct Affine {
        int in_dim = 0, out_dim = 0;
        std::vector<T> w; // [out_dim][in_dim]
        std::vector<T> b;
    };

    ArchSpec arch;
    std::vector<Conv> convs;
    std::vector<BatchNorm> bns;
    std::vector<Affine> fcs;

    std::size_t parameter_count() const;
    /// Learnable tensors in declaration order (the checkpoint blob order).
    std::vector<std::vector<T>*> parameter_tensors();
    std::vector<const std::vector<T>*> parameter_tensors() const;
};

/// Scratch buffers reused across forward/backward calls.
template <class T>
struct Workspace {
    int batch = 0;
    std::vector<std::vector<T>> conv_in;  // per block: input series
    std::vector<std::vector<T>> xhat;     // per block: normalized series
    std::vector<std::vector<T>> post_bn;  // per block: pre-ReLU series
    std::vector<std::vector<T>> act;      // per block/layer: post-ReLU
    std::vector<std::vector<T>> pre;      // mlp per layer: pre-ReLU
    std::vector<T> mean, var;             // per-block batch stats, flattened
    std::vector<T> gap_out;
    std::vector<T> logits;
    std::vector<T> probs; // [batch][n_classes]
};

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.9;

template <class T>
Model<T> init_model(const ArchSpec& arch, std::uint64_t seed);

template <class T>
Model<T> zeros_like(const Model<T>& m);

/// One batch-norm stage on its own, matching the layer inside forward().
/// Train mode normalizes with batch statistics and folds them into the
/// running stats (momentum 0.9); infer mode uses the running stats. Errors
/// with DegenerateBatch for train mode on a single-sample batch.
template <class T>
std::vector<T> batchnorm_forward(const T* x, int batch, int channels, int len,
                                 typename Model<T>::BatchNorm& bn, Mode mode,
                                 bool update_running = true);

/// Full forward pass; probability rows land in ws.probs. In train mode
/// update_running controls the running-stat side effect (gradient checks
/// need the pure evaluation).
template <class T>
void forward(Model<T>& model, const T* x, int batch, Mode mode, bool update_running,
             Workspace<T>& ws);

/// Analytic gradients of the mean cross-entropy at the given batch; returns
/// the loss. Gradients are written into `grads`, which must share the
/// model's shapes (zeros_like).
template <class T>
T compute_gradients(Model<T>& model, const T* x, int batch, const std::uint32_t* labels,
                    bool update_running, Workspace<T>& ws, Model<T>& grads);

struct TrainConfig {
    double initial_lr = 0.005;
    int constant_epochs = 30; // lr untouched through this epoch
    double decay_factor = 0.7;
    int plateau_patience = 5;
    double plateau_delta = 0.1; // accuracy points (percent)
    int batch_size = 64;
    int max_epochs = 200;
    std::uint64_t seed = 0;
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    Model<float> model; // parameters of the best-validation epoch
    std::vector<EpochStats> history;
    int best_epoch = 0;
};

/// Mini-batch SGD with the fixed schedule: lr stays at initial_lr through
/// constant_epochs, then multiplies by decay_factor every epoch; training
/// stops once validation accuracy has improved by less than plateau_delta
/// points for plateau_patience consecutive epochs, or at max_epochs.
/// Deterministic given the seed.
TrainResult train(const dataset::LabeledDataset& ds, const ArchSpec& arch, const TrainConfig& cfg);

/// Frame-level top-1 accuracy (argmax ties resolve to the lower index).
double evaluate_accuracy(Model<float>& model, const std::vector<const dataset::QueryFrame*>& frames,
                         int batch_size = 256);

struct RankedSong {
    std::string song_id;
    double score = 0.0;
};

/// Averages the per-frame probability rows of one query and ranks classes by
/// descending mean probability (ties by class index).
std::vector<RankedSong> predict_song(Model<float>& model,
                                     const std::vector<std::vector<float>>& frames,
                                     const std::vector<std::string>& class_names);

/// Side data a saved model needs to serve queries end to end.
struct ModelMeta {
    std::vector<std::string> class_names;
    double frame_rate = 100.0;
    double window_s = 5.0;
    double hop_s = 2.0;
};

void save_model(const std::filesystem::path& path, const Model<float>& model, const ModelMeta& meta);
std::pair<Model<float>, ModelMeta> load_model(const std::filesystem::path& path);

} // namespace hummit::net
