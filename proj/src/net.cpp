#include "hummit/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "hummit/binio.hpp"
#include "hummit/error.hpp"
#include "hummit/kernels.hpp"
#include "hummit/rng.hpp"

namespace hummit::net {

using json = nlohmann::json;

ArchSpec ArchSpec::make_fcn(int n_classes, int input_len) {
    ArchSpec a;
    a.kind = Kind::fcn;
    a.blocks = {{128, 8}, {256, 5}, {128, 3}};
    a.n_classes = n_classes;
    a.input_len = input_len;
    return a;
}

ArchSpec ArchSpec::make_mlp(int n_classes, int input_len) {
    ArchSpec a;
    a.kind = Kind::mlp;
    a.hidden = {300, 300, 300, 300};
    a.n_classes = n_classes;
    a.input_len = input_len;
    return a;
}

namespace {

// Offset of block i's channels in the flattened per-block stat buffers.
template <class T>
std::size_t channel_offset(const Model<T>& model, std::size_t block) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < block; ++i) off += static_cast<std::size_t>(model.convs[i].out_c);
    return off;
}

void validate_arch(const ArchSpec& arch) {
    if (arch.n_classes < 2) raise("InvalidConfig", "need at least 2 classes");
    if (arch.input_len < 1) raise("InvalidConfig", "input_len must be positive");
    if (arch.kind == Kind::fcn) {
        if (arch.blocks.empty()) raise("InvalidConfig", "fcn needs at least one conv block");
        for (const auto& b : arch.blocks)
            if (b.filters < 1 || b.kernel < 1) raise("InvalidConfig", "bad conv block spec");
    } else {
        if (arch.hidden.empty()) raise("InvalidConfig", "mlp needs at least one hidden layer");
        for (int h : arch.hidden)
            if (h < 1) raise("InvalidConfig", "bad hidden layer width");
    }
}

} // namespace

template <class T>
std::size_t Model<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto* t : parameter_tensors()) n += t->size();
    return n;
}

template <class T>
std::vector<std::vector<T>*> Model<T>::parameter_tensors() {
    std::vector<std::vector<T>*> out;
    if (arch.kind == Kind::fcn) {
        for (std::size_t i = 0; i < convs.size(); ++i) {
            out.push_back(&convs[i].w);
            out.push_back(&convs[i].b);
            out.push_back(&bns[i].gamma);
            out.push_back(&bns[i].beta);
        }
    }
    for (auto& fc : fcs) {
        out.push_back(&fc.w);
        out.push_back(&fc.b);
    }
    return out;
}

template <class T>
std::vector<const std::vector<T>*> Model<T>::parameter_tensors() const {
    auto mut = const_cast<Model<T>*>(this)->parameter_tensors();
    return {mut.begin(), mut.end()};
}

template <class T>
Model<T> init_model(const ArchSpec& arch, std::uint64_t seed) {
    validate_arch(arch);
    Model<T> m;
    m.arch = arch;
    Rng rng = Rng(seed).fork(2); // stream 2: weight init

    // Uniform in +-sqrt(6/(fan_in+fan_out)), biases zero, gamma 1, beta 0.
    auto fill_uniform = [&rng](std::vector<T>& w, double fan_in, double fan_out) {
        double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (auto& v : w) v = static_cast<T>(rng.uniform(-a, a));
    };

    if (arch.kind == Kind::fcn) {
        int in_c = 1;
        for (const auto& spec : arch.blocks) {
            typename Model<T>::Conv conv;
            conv.in_c = in_c;
            conv.out_c = spec.filters;
            conv.kernel = spec.kernel;
            conv.w.resize(static_cast<std::size_t>(conv.out_c) * conv.in_c * conv.kernel);
            conv.b.assign(conv.out_c, T(0));
            fill_uniform(conv.w, static_cast<double>(conv.in_c) * conv.kernel,
                         static_cast<double>(conv.out_c) * conv.kernel);
            m.convs.push_back(std::move(conv));

            typename Model<T>::BatchNorm bn;
            bn.channels = spec.filters;
            bn.gamma.assign(bn.channels, T(1));
            bn.beta.assign(bn.channels, T(0));
            bn.run_mean.assign(bn.channels, T(0));
            bn.run_var.assign(bn.channels, T(1));
            m.bns.push_back(std::move(bn));
            in_c = spec.filters;
        }
        typename Model<T>::Affine head;
        head.in_dim = in_c;
        head.out_dim = arch.n_classes;
        head.w.resize(static_cast<std::size_t>(head.out_dim) * head.in_dim);
        head.b.assign(head.out_dim, T(0));
        fill_uniform(head.w, head.in_dim, head.out_dim);
        m.fcs.push_back(std::move(head));
    } else {
        int in_dim = arch.input_len;
        for (int width : arch.hidden) {
            typename Model<T>::Affine fc;
            fc.in_dim = in_dim;
            fc.out_dim = width;
            fc.w.resize(static_cast<std::size_t>(width) * in_dim);
            fc.b.assign(width, T(0));
            fill_uniform(fc.w, in_dim, width);
            m.fcs.push_back(std::move(fc));
            in_dim = width;
        }
        typename Model<T>::Affine head;
        head.in_dim = in_dim;
        head.out_dim = arch.n_classes;
        head.w.resize(static_cast<std::size_t>(head.out_dim) * head.in_dim);
        head.b.assign(head.out_dim, T(0));
        fill_uniform(head.w, head.in_dim, head.out_dim);
        m.fcs.push_back(std::move(head));
    }
    return m;
}

template <class T>
Model<T> zeros_like(const Model<T>& m) {
    Model<T> z = m;
    for (auto* t : z.parameter_tensors()) std::fill(t->begin(), t->end(), T(0));
    for (auto& bn : z.bns) {
        std::fill(bn.run_mean.begin(), bn.run_mean.end(), T(0));
        std::fill(bn.run_var.begin(), bn.run_var.end(), T(0));
    }
    return z;
}

template <class T>
std::vector<T> batchnorm_forward(const T* x, int batch, int channels, int len,
                                 typename Model<T>::BatchNorm& bn, Mode mode, bool update_running) {
    if (mode == Mode::train && batch < 2)
        raise("DegenerateBatch", "train-mode batch norm needs batch size >= 2");
    std::vector<T> y(static_cast<std::size_t>(batch) * channels * len);
    const T eps = static_cast<T>(kBnEps);
    if (mode == Mode::train) {
        std::vector<T> mean(channels), var(channels);
        kernels::batch_stats(x, batch, channels, len, mean.data(), var.data());
        if (update_running) {
            const T mom = static_cast<T>(kBnMomentum);
            for (int c = 0; c < channels; ++c) {
                bn.run_mean[c] = mom * bn.run_mean[c] + (T(1) - mom) * mean[c];
                bn.run_var[c] = mom * bn.run_var[c] + (T(1) - mom) * var[c];
            }
        }
        kernels::batchnorm_apply(x, batch, channels, len, mean.data(), var.data(), bn.gamma.data(),
                                 bn.beta.data(), eps, y.data(), static_cast<T*>(nullptr));
    } else {
        kernels::batchnorm_apply(x, batch, channels, len, bn.run_mean.data(), bn.run_var.data(),
                                 bn.gamma.data(), bn.beta.data(), eps, y.data(),
                                 static_cast<T*>(nullptr));
    }
    return y;
}

template <class T>
void forward(Model<T>& model, const T* x, int batch, Mode mode, bool update_running,
             Workspace<T>& ws) {
    const ArchSpec& arch = model.arch;
    const int L = arch.input_len;
    const int n_classes = arch.n_classes;
    ws.batch = batch;
    const T eps = static_cast<T>(kBnEps);

    if (arch.kind == Kind::fcn) {
        if (mode == Mode::train && batch < 2)
            raise("DegenerateBatch", "train-mode batch norm needs batch size >= 2");
        const std::size_t n_blocks = model.convs.size();
        ws.conv_in.resize(n_blocks);
        ws.xhat.resize(n_blocks);
        ws.post_bn.resize(n_blocks);
        ws.act.resize(n_blocks);
        ws.mean.resize(0);
        ws.var.resize(0);

        const T* cur = x;
        int cur_c = 1;
        for (std::size_t i = 0; i < n_blocks; ++i) {
            auto& conv = model.convs[i];
            auto& bn = model.bns[i];
            const std::size_t out_sz = static_cast<std::size_t>(batch) * conv.out_c * L;

            ws.conv_in[i].assign(cur, cur + static_cast<std::size_t>(batch) * cur_c * L);
            std::vector<T> conv_out(out_sz);
            kernels::conv1d_forward(cur, batch, cur_c, L, conv.w.data(), conv.b.data(), conv.out_c,
                                    conv.kernel, conv_out.data());

            ws.xhat[i].resize(out_sz);
            ws.post_bn[i].resize(out_sz);
            std::vector<T> mean(conv.out_c), var(conv.out_c);
            if (mode == Mode::train) {
                kernels::batch_stats(conv_out.data(), batch, conv.out_c, L, mean.data(), var.data());
                if (update_running) {
                    const T mom = static_cast<T>(kBnMomentum);
                    for (int c = 0; c < conv.out_c; ++c) {
                        bn.run_mean[c] = mom * bn.run_mean[c] + (T(1) - mom) * mean[c];
                        bn.run_var[c] = mom * bn.run_var[c] + (T(1) - mom) * var[c];
                    }
                }
            } else {
                mean.assign(bn.run_mean.begin(), bn.run_mean.end());
                var.assign(bn.run_var.begin(), bn.run_var.end());
            }
            ws.mean.insert(ws.mean.end(), mean.begin(), mean.end());
            ws.var.insert(ws.var.end(), var.begin(), var.end());
            kernels::batchnorm_apply(conv_out.data(), batch, conv.out_c, L, mean.data(), var.data(),
                                     bn.gamma.data(), bn.beta.data(), eps, ws.post_bn[i].data(),
                                     ws.xhat[i].data());

            ws.act[i] = ws.post_bn[i];
            kernels::relu_forward(ws.act[i].data(), ws.act[i].size());
            cur = ws.act[i].data();
            cur_c = conv.out_c;
        }

        ws.gap_out.resize(static_cast<std::size_t>(batch) * cur_c);
        kernels::gap_forward(cur, batch, cur_c, L, ws.gap_out.data());

        auto& head = model.fcs[0];
        ws.logits.resize(static_cast<std::size_t>(batch) * n_classes);
        kernels::affine_forward(ws.gap_out.data(), batch, head.in_dim, head.w.data(), head.b.data(),
                                head.out_dim, ws.logits.data());
    } else {
        const std::size_t n_hidden = model.fcs.size() - 1;
        ws.pre.resize(n_hidden);
        ws.act.resize(n_hidden);
        const T* cur = x;
        int cur_dim = L;
        for (std::size_t i = 0; i < n_hidden; ++i) {
            auto& fc = model.fcs[i];
            ws.pre[i].resize(static_cast<std::size_t>(batch) * fc.out_dim);
            kernels::affine_forward(cur, batch, cur_dim, fc.w.data(), fc.b.data(), fc.out_dim,
                                    ws.pre[i].data());
            ws.act[i] = ws.pre[i];
            kernels::relu_forward(ws.act[i].data(), ws.act[i].size());
            cur = ws.act[i].data();
            cur_dim = fc.out_dim;
        }
        auto& head = model.fcs.back();
        ws.logits.resize(static_cast<std::size_t>(batch) * n_classes);
        kernels::affine_forward(cur, batch, cur_dim, head.w.data(), head.b.data(), head.out_dim,
                                ws.logits.data());
    }

    ws.probs.resize(static_cast<std::size_t>(batch) * n_classes);
    kernels::softmax_cross_entropy(ws.logits.data(), batch, n_classes,
                                   static_cast<const std::uint32_t*>(nullptr), ws.probs.data(),
                                   static_cast<T*>(nullptr));
}

template <class T>
T compute_gradients(Model<T>& model, const T* x, int batch, const std::uint32_t* labels,
                    bool update_running, Workspace<T>& ws, Model<T>& grads) {
    if (batch < 1) raise("ShapeMismatch", "empty batch");
    const ArchSpec& arch = model.arch;
    const int L = arch.input_len;
    const int n_classes = arch.n_classes;

    forward(model, x, batch, Mode::train, update_running, ws);

    std::vector<T> dlogits(static_cast<std::size_t>(batch) * n_classes);
    T loss = kernels::softmax_cross_entropy(ws.logits.data(), batch, n_classes, labels,
                                            ws.probs.data(), dlogits.data());

    if (arch.kind == Kind::fcn) {
        auto& head = model.fcs[0];
        auto& ghead = grads.fcs[0];
        std::vector<T> d_gap(static_cast<std::size_t>(batch) * head.in_dim);
        kernels::affine_backward(ws.gap_out.data(), head.w.data(), dlogits.data(), batch, head.in_dim,
                                 head.out_dim, d_gap.data(), ghead.w.data(), ghead.b.data());

        const std::size_t n_blocks = model.convs.size();
        const int last_c = model.convs[n_blocks - 1].out_c;
        std::vector<T> d_act(static_cast<std::size_t>(batch) * last_c * L);
        kernels::gap_backward(d_gap.data(), batch, last_c, L, d_act.data());

        const T eps = static_cast<T>(kBnEps);
        for (std::size_t i = n_blocks; i-- > 0;) {
            auto& conv = model.convs[i];
            auto& bn = model.bns[i];
            auto& gconv = grads.convs[i];
            auto& gbn = grads.bns[i];
            const std::size_t out_sz = static_cast<std::size_t>(batch) * conv.out_c * L;

            std::vector<T> d_post(out_sz);
            kernels::relu_backward(ws.post_bn[i].data(), d_act.data(), out_sz, d_post.data());

            std::vector<T> d_conv(out_sz);
            kernels::batchnorm_backward(ws.xhat[i].data(), d_post.data(), batch, conv.out_c, L,
                                        ws.var.data() + channel_offset(model, i), bn.gamma.data(),
                                        eps, d_conv.data(), gbn.gamma.data(), gbn.beta.data());

            kernels::conv1d_backward_params(ws.conv_in[i].data(), d_conv.data(), batch, conv.in_c,
                                            conv.out_c, L, conv.kernel, gconv.w.data(),
                                            gconv.b.data());
            if (i > 0) {
                d_act.assign(static_cast<std::size_t>(batch) * conv.in_c * L, T(0));
                kernels::conv1d_backward_input(d_conv.data(), batch, conv.out_c, L, conv.w.data(),
                                               conv.in_c, conv.kernel, d_act.data());
            }
        }
    } else {
        std::vector<T> d_out = dlogits;
        for (std::size_t i = model.fcs.size(); i-- > 0;) {
            auto& fc = model.fcs[i];
            auto& gfc = grads.fcs[i];
            const T* layer_in = i == 0 ? x : ws.act[i - 1].data();
            std::vector<T> d_in(static_cast<std::size_t>(batch) * fc.in_dim);
            kernels::affine_backward(layer_in, fc.w.data(), d_out.data(), batch, fc.in_dim,
                                     fc.out_dim, d_in.data(), gfc.w.data(), gfc.b.data());
            if (i > 0) {
                d_out.resize(d_in.size());
                kernels::relu_backward(ws.pre[i - 1].data(), d_in.data(), d_in.size(), d_out.data());
            }
        }
    }
    return loss;
}

namespace {

// Gathers frame values into a contiguous [batch][len] buffer.
void fill_batch(const std::vector<const dataset::QueryFrame*>& frames,
                const std::vector<std::size_t>& order, std::size_t first, std::size_t count,
                std::vector<float>& values, std::vector<std::uint32_t>& labels) {
    const std::size_t len = frames[order[first]]->values.size();
    values.resize(count * len);
    labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& f = *frames[order[first + i]];
        if (f.values.size() != len) raise("ShapeMismatch", "frames of unequal length in one batch");
        std::copy(f.values.begin(), f.values.end(), values.begin() + static_cast<std::ptrdiff_t>(i * len));
        labels[i] = f.label;
    }
}

int argmax_row(const float* row, int n) {
    int best = 0;
    for (int c = 1; c < n; ++c)
        if (row[c] > row[best]) best = c;
    return best;
}

} // namespace

double evaluate_accuracy(Model<float>& model, const std::vector<const dataset::QueryFrame*>& frames,
                         int batch_size) {
    if (frames.empty()) raise("EmptySplit", "no frames to evaluate");
    std::vector<std::size_t> order(frames.size());
    std::iota(order.begin(), order.end(), 0);
    Workspace<float> ws;
    std::vector<float> values;
    std::vector<std::uint32_t> labels;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < frames.size(); start += batch_size) {
        const std::size_t count = std::min<std::size_t>(batch_size, frames.size() - start);
        fill_batch(frames, order, start, count, values, labels);
        forward(model, values.data(), static_cast<int>(count), Mode::infer, false, ws);
        for (std::size_t i = 0; i < count; ++i) {
            const float* row = ws.probs.data() + i * model.arch.n_classes;
            if (argmax_row(row, model.arch.n_classes) == static_cast<int>(labels[i])) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(frames.size());
}

TrainResult train(const dataset::LabeledDataset& ds, const ArchSpec& arch, const TrainConfig& cfg) {
    if (cfg.batch_size < 1 || !(cfg.decay_factor > 0.0 && cfg.decay_factor < 1.0))
        raise("InvalidConfig", "bad train config");
    std::vector<const dataset::QueryFrame*> train_frames, val_frames;
    for (const auto& f : ds.frames) {
        if (f.split == dataset::Split::train)
            train_frames.push_back(&f);
        else
            val_frames.push_back(&f);
    }
    if (train_frames.empty() || val_frames.empty())
        raise("EmptySplit", "dataset needs both train and validation frames");
    if (static_cast<int>(ds.frame_len) != arch.input_len)
        raise("ShapeMismatch", "dataset frame length differs from arch input_len");

    TrainResult result;
    Model<float> model = init_model<float>(arch, cfg.seed);
    Model<float> grads = zeros_like(model);
    Workspace<float> ws;
    Rng shuffle_rng = Rng(cfg.seed).fork(3); // stream 3: batch order

    std::vector<std::size_t> order(train_frames.size());
    std::iota(order.begin(), order.end(), 0);

    double lr = cfg.initial_lr;
    double best_acc = -1.0;
    int stale_epochs = 0;
    std::vector<float> values;
    std::vector<std::uint32_t> labels;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        if (epoch > cfg.constant_epochs) lr *= cfg.decay_factor;
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t count = std::min<std::size_t>(cfg.batch_size, order.size() - start);
            if (count < 2) break; // a single-sample tail cannot feed train-mode batch norm
            fill_batch(train_frames, order, start, count, values, labels);
            for (auto* g : grads.parameter_tensors()) std::fill(g->begin(), g->end(), 0.0f);
            loss_sum += compute_gradients(model, values.data(), static_cast<int>(count),
                                          labels.data(), true, ws, grads);
            ++n_batches;
            auto params = model.parameter_tensors();
            auto gtensors = grads.parameter_tensors();
            const auto flr = static_cast<float>(lr);
            for (std::size_t t = 0; t < params.size(); ++t) {
                float* p = params[t]->data();
                const float* g = gtensors[t]->data();
                const std::size_t n = params[t]->size();
#pragma omp parallel for schedule(static) if (n > 1u << 14)
                for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j)
                    p[j] -= flr * g[j];
            }
        }
        if (n_batches == 0) raise("EmptySplit", "training set smaller than two samples");

        double val_acc = evaluate_accuracy(model, val_frames);
        result.history.push_back({epoch, lr, loss_sum / static_cast<double>(n_batches), val_acc});

        if (val_acc > best_acc) {
            if ((val_acc - std::max(best_acc, 0.0)) * 100.0 < cfg.plateau_delta)
                ++stale_epochs;
            else
                stale_epochs = 0;
            best_acc = val_acc;
            result.model = model;
            result.best_epoch = epoch;
        } else {
            ++stale_epochs;
        }
        if (stale_epochs >= cfg.plateau_patience) break;
    }
    if (result.best_epoch == 0) {
        result.model = model;
        result.best_epoch = static_cast<int>(result.history.size());
    }
    return result;
}

std::vector<RankedSong> predict_song(Model<float>& model,
                                     const std::vector<std::vector<float>>& frames,
                                     const std::vector<std::string>& class_names) {
    if (frames.empty()) raise("NoFrames", "query produced no frames");
    const int n_classes = model.arch.n_classes;
    if (static_cast<int>(class_names.size()) != n_classes)
        raise("ShapeMismatch", "class name table does not match the model");
    std::vector<double> mean_prob(n_classes, 0.0);
    Workspace<float> ws;
    std::vector<float> values(frames.size() * model.arch.input_len);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (static_cast<int>(frames[i].size()) != model.arch.input_len)
            raise("ShapeMismatch", "frame length differs from model input_len");
        std::copy(frames[i].begin(), frames[i].end(),
                  values.begin() + static_cast<std::ptrdiff_t>(i * model.arch.input_len));
    }
    forward(model, values.data(), static_cast<int>(frames.size()), Mode::infer, false, ws);
    for (std::size_t i = 0; i < frames.size(); ++i)
        for (int c = 0; c < n_classes; ++c)
            mean_prob[c] += ws.probs[i * n_classes + c];
    for (auto& p : mean_prob) p /= static_cast<double>(frames.size());

    std::vector<int> idx(n_classes);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return mean_prob[a] > mean_prob[b]; });
    std::vector<RankedSong> out;
    out.reserve(n_classes);
    for (int c : idx) out.push_back({class_names[c], mean_prob[c]});
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint format: magic HUMNN1, u32 json length, arch JSON, parameter
// blobs (little-endian float32, declaration order), batch-norm running
// stats, trailing CRC32 of everything before it.
// ---------------------------------------------------------------------------

void save_model(const std::filesystem::path& path, const Model<float>& model, const ModelMeta& meta) {
    json arch;
    arch["kind"] = model.arch.kind == Kind::fcn ? "fcn" : "mlp";
    arch["n_classes"] = model.arch.n_classes;
    arch["input_len"] = model.arch.input_len;
    if (model.arch.kind == Kind::fcn) {
        json blocks = json::array();
        for (const auto& b : model.arch.blocks) blocks.push_back({b.filters, b.kernel});
        arch["blocks"] = blocks;
    } else {
        arch["hidden"] = model.arch.hidden;
    }
    arch["class_names"] = meta.class_names;
    arch["frame_rate"] = meta.frame_rate;
    arch["window_s"] = meta.window_s;
    arch["hop_s"] = meta.hop_s;
    const std::string arch_json = arch.dump();

    binio::Writer w;
    w.bytes("HUMNN1", 6);
    w.str(arch_json);
    for (const auto* t : model.parameter_tensors())
        for (float v : *t) w.f32(v);
    for (const auto& bn : model.bns) {
        for (float v : bn.run_mean) w.f32(v);
        for (float v : bn.run_var) w.f32(v);
    }
    w.u32(binio::crc32(w.data().data(), w.data().size()));
    binio::write_file_atomic(path, w.data());
}

std::pair<Model<float>, ModelMeta> load_model(const std::filesystem::path& path) {
    auto bytes = binio::read_file(path);
    if (bytes.size() < 10) raise("MalformedCheckpoint", path.string() + " is too small");
    binio::Reader r(bytes);
    try {
        char magic[6];
        r.bytes(magic, 6);
        if (std::string_view(magic, 6) != "HUMNN1")
            raise("MalformedCheckpoint", "bad magic in " + path.string());
        const std::uint32_t stored_crc =
            binio::Reader(bytes.data() + bytes.size() - 4, 4).u32();
        if (binio::crc32(bytes.data(), bytes.size() - 4) != stored_crc)
            raise("MalformedCheckpoint", "checksum mismatch in " + path.string());

        json arch_json = json::parse(r.str(), nullptr, false);
        if (arch_json.is_discarded()) raise("MalformedCheckpoint", "bad arch JSON");

        ArchSpec arch;
        const std::string kind = arch_json.at("kind").get<std::string>();
        if (kind == "fcn") {
            arch.kind = Kind::fcn;
            for (const auto& b : arch_json.at("blocks"))
                arch.blocks.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
        } else if (kind == "mlp") {
            arch.kind = Kind::mlp;
            arch.hidden = arch_json.at("hidden").get<std::vector<int>>();
        } else {
            raise("MalformedCheckpoint", "unknown arch kind " + kind);
        }
        arch.n_classes = arch_json.at("n_classes").get<int>();
        arch.input_len = arch_json.at("input_len").get<int>();

        ModelMeta meta;
        if (arch_json.contains("class_names"))
            meta.class_names = arch_json["class_names"].get<std::vector<std::string>>();
        meta.frame_rate = arch_json.value("frame_rate", 100.0);
        meta.window_s = arch_json.value("window_s", 5.0);
        meta.hop_s = arch_json.value("hop_s", 2.0);

        Model<float> model = init_model<float>(arch, 0);
        for (auto* t : model.parameter_tensors())
            for (float& v : *t) v = r.f32();
        for (auto& bn : model.bns) {
            for (float& v : bn.run_mean) v = r.f32();
            for (float& v : bn.run_var) v = r.f32();
        }
        if (r.remaining() != 4)
            raise("MalformedCheckpoint", "parameter blob size mismatch in " + path.string());
        return {std::move(model), std::move(meta)};
    } catch (const Error& e) {
        if (e.kind() == "Truncated") raise("MalformedCheckpoint", path.string() + " is truncated");
        throw;
    } catch (const json::exception& e) {
        raise("MalformedCheckpoint", std::string("arch JSON: ") + e.what());
    }
}

// float for production, double for finite-difference gradient checks
template struct Model<float>;
template struct Model<double>;
template Model<float> init_model<float>(const ArchSpec&, std::uint64_t);
template Model<double> init_model<double>(const ArchSpec&, std::uint64_t);
template Model<float> zeros_like<float>(const Model<float>&);
template Model<double> zeros_like<double>(const Model<double>&);
template std::vector<float> batchnorm_forward<float>(const float*, int, int, int,
                                                     Model<float>::BatchNorm&, Mode, bool);
template std::vector<double> batchnorm_forward<double>(const double*, int, int, int,
                                                       Model<double>::BatchNorm&, Mode, bool);
template void forward<float>(Model<float>&, const float*, int, Mode, bool, Workspace<float>&);
template void forward<double>(Model<double>&, const double*, int, Mode, bool, Workspace<double>&);
template float compute_gradients<float>(Model<float>&, const float*, int, const std::uint32_t*, bool,
                                        Workspace<float>&, Model<float>&);
template double compute_gradients<double>(Model<double>&, const double*, int, const std::uint32_t*,
                                          bool, Workspace<double>&, Model<double>&);

} // namespace hummit::net
