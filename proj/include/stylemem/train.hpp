#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stylemem/adam.hpp"
#include "stylemem/dataset.hpp"
#include "stylemem/model.hpp"

namespace stylemem {

enum class Precision { f32, f64 };

inline const char* precision_name(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

struct TrainConfig {
    double alpha = 0.05;
    double learning_rate = 1e-5;
    std::size_t epochs = 250;
    std::size_t batch_size = 100;
    double sigma = 0.1;
    std::uint64_t seed = 1;
    Precision precision = Precision::f32;

    void validate() const {
        if (alpha < 0.0) fail(ErrorCode::bad_argument, "config: alpha must be >= 0");
        if (learning_rate <= 0.0) fail(ErrorCode::bad_argument, "config: learning rate must be > 0");
        if (epochs < 1) fail(ErrorCode::bad_argument, "config: epochs must be >= 1");
        if (batch_size < 1) fail(ErrorCode::bad_argument, "config: batch size must be >= 1");
        if (sigma < 0.0) fail(ErrorCode::bad_argument, "config: sigma must be >= 0");
    }

    // Long-run settings: lr 1e-5 for 250 epochs.
    static TrainConfig paper_preset() { return TrainConfig{}; }

    // Desk-scale settings: lr 1e-3 for 10 epochs, same alpha/sigma/batch.
    static TrainConfig desk_preset() {
        TrainConfig c;
        c.learning_rate = 1e-3;
        c.epochs = 10;
        return c;
    }
};

struct StepMetrics {
    double loss_class = 0.0;
    double loss_recon = 0.0;
    double loss_joint = 0.0;
    double accuracy = 0.0;
};

// Diagnostic switches for the gradient-flow contracts; normal training uses
// the defaults.
struct GradFlags {
    bool include_classifier_loss = true;
    bool detach_code = false;  // stop gradients from the decoder into (y, m)
};

// Scratch buffers for one backward pass, reused across steps.
template <typename T>
struct JointWorkspace {
    Tensor<T> d_recon, d_deconv1, d_flat, d_fc1, d_fc2, d_fc2_style, d_code, d_logits, d_style_pre;
    Tensor<T> d_conv2, d_conv1;
    Tensor<T> deconv2_cols, deconv1_cols;

    void resize(const ArchConfig& a, std::size_t b) {
        if (d_recon.size() == b * a.pixels()) return;
        d_recon = Tensor<T>({b, a.pixels()});
        d_deconv1 = Tensor<T>({b, a.conv1_filters * a.conv1_pixels()});
        d_flat = Tensor<T>({b, a.flat_units()});
        d_fc1 = Tensor<T>({b, a.fc1_units});
        d_fc2 = Tensor<T>({b, a.fc2_units});
        d_fc2_style = Tensor<T>({b, a.fc2_units});
        d_code = Tensor<T>({b, a.code_units()});
        d_logits = Tensor<T>({b, a.num_classes});
        d_style_pre = Tensor<T>({b, a.style_units});
        d_conv2 = Tensor<T>({b, a.flat_units()});
        d_conv1 = Tensor<T>({b, a.conv1_filters * a.conv1_pixels()});
        deconv2_cols = Tensor<T>({b, a.conv1_pixels(), 25});
        deconv1_cols = Tensor<T>({b, a.conv2_pixels(), a.conv1_filters * 25});
    }
};

namespace detail {
template <typename T>
double l2_norm(const Tensor<T>& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += static_cast<double>(t[i]) * static_cast<double>(t[i]);
    return std::sqrt(s);
}
}  // namespace detail

// Batch-mean losses and metrics from a completed forward pass; reductions run
// in ascending sample order.
template <typename T>
StepMetrics batch_metrics(const BatchCache<T>& cache, const Tensor<T>& clean, const std::vector<int>& labels,
                          double alpha) {
    const std::size_t b = cache.batch;
    const std::size_t classes = cache.probs.size() / b;
    const std::size_t pixels = cache.recon.size() / b;
    StepMetrics m;
    std::size_t correct = 0;
    for (std::size_t s = 0; s < b; ++s) {
        const T* logits = cache.logits.data() + s * classes;
        const T* probs = cache.probs.data() + s * classes;
        const T* recon = cache.recon.data() + s * pixels;
        const T* x = clean.data() + s * pixels;
        m.loss_class += static_cast<double>(
            cross_entropy_from_logits(logits, classes, static_cast<std::size_t>(labels[s])));
        double lr_s = 0.0;
        for (std::size_t i = 0; i < pixels; ++i) {
            double d = static_cast<double>(recon[i]) - static_cast<double>(x[i]);
            lr_s += d * d;
        }
        m.loss_recon += lr_s;
        std::size_t best = 0;
        for (std::size_t jj = 1; jj < classes; ++jj)
            if (probs[jj] > probs[best]) best = jj;
        correct += (static_cast<int>(best) == labels[s]);
    }
    m.loss_class /= static_cast<double>(b);
    m.loss_recon /= static_cast<double>(b);
    m.loss_joint = m.loss_class + alpha * m.loss_recon;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(b);
    return m;
}

// Gradients of the batch-mean joint loss  mean_b[L_y + alpha*L_r]  with
// respect to every parameter. The decoder receives the softmax y and the
// sigmoid m; gradients flow back through both into the encoder unless
// flags.detach_code cuts them. Returns the (pre-update) metrics.
template <typename T>
StepMetrics joint_backward(const ModelParams<T>& p, const BatchCache<T>& cache, const Tensor<T>& clean,
                           const std::vector<int>& labels, double alpha, const GradFlags& flags,
                           ModelParams<T>& grads, JointWorkspace<T>& ws) {
    const ArchConfig& a = p.arch;
    const std::size_t b = cache.batch;
    if (labels.size() != b) fail(ErrorCode::bad_argument, "joint_backward: label count != batch size");
    require_same_shape(clean, cache.recon, "joint_backward: clean target");
    ws.resize(a, b);

    StepMetrics metrics = batch_metrics(cache, clean, labels, alpha);
    if (!std::isfinite(metrics.loss_joint)) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "training diverged: non-finite joint loss (|logits|=%.3g |style_pre|=%.3g |recon_pre|=%.3g)",
                      detail::l2_norm(cache.logits), detail::l2_norm(cache.style_pre),
                      detail::l2_norm(cache.recon_pre));
        fail(ErrorCode::training_diverged, buf);
    }

    const T inv_b = T(1) / static_cast<T>(b);
    const T alpha_t = static_cast<T>(alpha);

    // d recon_pre = alpha*2*(recon-clean)/B through the output sigmoid
    {
        const T* r = cache.recon.data();
        const T* x = clean.data();
        T* d = ws.d_recon.data();
        for (std::size_t i = 0; i < ws.d_recon.size(); ++i) {
            T g = alpha_t * T(2) * (r[i] - x[i]) * inv_b;
            d[i] = g * r[i] * (T(1) - r[i]);
        }
    }

    deconv_backward_batch(ws.d_recon.data(), cache.deconv1_act.data(), b, a.conv1_side(), a.conv1_side(),
                          a.deconv2_spec(), p.deconv2_w.data(), ws.deconv2_cols.data(), ws.d_deconv1.data(),
                          grads.deconv2_w.data(), grads.deconv2_b.data());
    relu_backward_span(cache.deconv1_pre.data(), ws.d_deconv1.data(), ws.d_deconv1.data(),
                       ws.d_deconv1.size());

    deconv_backward_batch(ws.d_deconv1.data(), cache.dfc3_act.data(), b, a.conv2_side(), a.conv2_side(),
                          a.deconv1_spec(), p.deconv1_w.data(), ws.deconv1_cols.data(), ws.d_flat.data(),
                          grads.deconv1_w.data(), grads.deconv1_b.data());
    relu_backward_span(cache.dfc3_pre.data(), ws.d_flat.data(), ws.d_flat.data(), ws.d_flat.size());

    dense_backward_batch(ws.d_flat.data(), cache.dfc2_act.data(), p.dfc3_w.data(), ws.d_fc1.data(),
                         grads.dfc3_w.data(), grads.dfc3_b.data(), b, a.fc1_units, a.flat_units());
    relu_backward_span(cache.dfc2_pre.data(), ws.d_fc1.data(), ws.d_fc1.data(), ws.d_fc1.size());

    dense_backward_batch(ws.d_fc1.data(), cache.dfc1_act.data(), p.dfc2_w.data(), ws.d_fc2.data(),
                         grads.dfc2_w.data(), grads.dfc2_b.data(), b, a.fc2_units, a.fc1_units);
    relu_backward_span(cache.dfc1_pre.data(), ws.d_fc2.data(), ws.d_fc2.data(), ws.d_fc2.size());

    dense_backward_batch(ws.d_fc2.data(), cache.code.data(), p.dfc1_w.data(), ws.d_code.data(),
                         grads.dfc1_w.data(), grads.dfc1_b.data(), b, a.code_units(), a.fc2_units);

    if (flags.detach_code) ws.d_code.fill(T(0));

    // class logits: fused cross-entropy term plus the softmax-jacobian path
    // from the decoder's use of y
    {
        T* dz = ws.d_logits.data();
        const T* probs = cache.probs.data();
        for (std::size_t s = 0; s < b; ++s) {
            const T* prow = probs + s * a.num_classes;
            T* drow = dz + s * a.num_classes;
            for (std::size_t j = 0; j < a.num_classes; ++j)
                drow[j] = flags.include_classifier_loss
                              ? (prow[j] - (static_cast<int>(j) == labels[s] ? T(1) : T(0))) * inv_b
                              : T(0);
        }
        // decoder grad wrt y sits in the first num_classes columns of d_code
        Tensor<T> d_y({b, a.num_classes});
        for (std::size_t s = 0; s < b; ++s)
            std::copy(ws.d_code.data() + s * a.code_units(),
                      ws.d_code.data() + s * a.code_units() + a.num_classes, d_y.data() + s * a.num_classes);
        softmax_backward_rows(cache.probs.data(), d_y.data(), ws.d_logits.data(), b, a.num_classes);
    }

    // style path: decoder grad wrt m through the sigmoid
    for (std::size_t s = 0; s < b; ++s) {
        const T* drow = ws.d_code.data() + s * a.code_units() + a.num_classes;
        const T* mrow = cache.style.data() + s * a.style_units;
        T* out = ws.d_style_pre.data() + s * a.style_units;
        for (std::size_t j = 0; j < a.style_units; ++j) out[j] = drow[j] * mrow[j] * (T(1) - mrow[j]);
    }

    dense_backward_batch(ws.d_logits.data(), cache.fc2_act.data(), p.class_w.data(), ws.d_fc2.data(),
                         grads.class_w.data(), grads.class_b.data(), b, a.fc2_units, a.num_classes);
    dense_backward_batch(ws.d_style_pre.data(), cache.fc2_act.data(), p.style_w.data(),
                         ws.d_fc2_style.data(), grads.style_w.data(), grads.style_b.data(), b, a.fc2_units,
                         a.style_units);
    for (std::size_t i = 0; i < ws.d_fc2.size(); ++i) ws.d_fc2[i] += ws.d_fc2_style[i];

    relu_backward_span(cache.fc2_pre.data(), ws.d_fc2.data(), ws.d_fc2.data(), ws.d_fc2.size());
    dense_backward_batch(ws.d_fc2.data(), cache.fc1_act.data(), p.fc2_w.data(), ws.d_fc1.data(),
                         grads.fc2_w.data(), grads.fc2_b.data(), b, a.fc1_units, a.fc2_units);

    relu_backward_span(cache.fc1_pre.data(), ws.d_fc1.data(), ws.d_fc1.data(), ws.d_fc1.size());
    dense_backward_batch(ws.d_fc1.data(), cache.conv2_act.data(), p.fc1_w.data(), ws.d_conv2.data(),
                         grads.fc1_w.data(), grads.fc1_b.data(), b, a.flat_units(), a.fc1_units);

    relu_backward_span(cache.conv2_pre.data(), ws.d_conv2.data(), ws.d_conv2.data(), ws.d_conv2.size());
    conv_backward_batch(ws.d_conv2.data(), cache.conv2_cols.data(), b, a.conv1_side(), a.conv1_side(),
                        a.conv2_spec(), p.conv2_w.data(), ws.d_conv1.data(), grads.conv2_w.data(),
                        grads.conv2_b.data());

    relu_backward_span(cache.conv1_pre.data(), ws.d_conv1.data(), ws.d_conv1.data(), ws.d_conv1.size());
    conv_backward_batch(ws.d_conv1.data(), cache.conv1_cols.data(), b, a.input_side, a.input_side,
                        a.conv1_spec(), p.conv1_w.data(), static_cast<T*>(nullptr), grads.conv1_w.data(),
                        grads.conv1_b.data());

    return metrics;
}

// Adam over the whole parameter set, one AdamState per tensor.
template <typename T>
struct Optimizer {
    std::vector<AdamState<T>> states;

    Optimizer() = default;
    Optimizer(const ModelParams<T>& params, double learning_rate) { reset(params, learning_rate); }

    void reset(const ModelParams<T>& params, double learning_rate) {
        states.clear();
        visit_params(params, [&](const char*, const Tensor<T>& t) {
            states.emplace_back(t.shape(), learning_rate);
        });
    }

    void step(ModelParams<T>& params, const ModelParams<T>& grads) {
        std::vector<Tensor<T>*> ps;
        std::vector<const Tensor<T>*> gs;
        visit_params(params, [&](const char*, Tensor<T>& t) { ps.push_back(&t); });
        visit_params(grads, [&](const char*, const Tensor<T>& t) { gs.push_back(&t); });
        for (std::size_t i = 0; i < ps.size(); ++i) adam_step(*ps[i], *gs[i], states[i]);
    }
};

struct EpochMetrics {
    std::uint64_t epoch = 0;  // zero-based index of the epoch just finished
    double loss_class = 0.0;
    double loss_recon = 0.0;
    double loss_joint = 0.0;
    double train_accuracy = 0.0;
};

// Owns the parameters, optimizer state, and the functional RNG derivation.
// Replaying (seed, epoch) always reproduces the same shuffle and noise, which
// is what makes checkpoint resume bit-exact.
template <typename T>
class Trainer {
public:
    Trainer(const ArchConfig& arch, const TrainConfig& cfg)
        : cfg_(cfg), params_(init_params<T>(arch, cfg.seed)), opt_(params_, cfg.learning_rate),
          grads_(arch) {
        cfg_.validate();
    }

    // resume from checkpointed state
    Trainer(ModelParams<T> params, Optimizer<T> opt, const TrainConfig& cfg, std::uint64_t epochs_done)
        : cfg_(cfg), params_(std::move(params)), opt_(std::move(opt)), epochs_done_(epochs_done),
          grads_(params_.arch) {
        cfg_.validate();
    }

    const ModelParams<T>& params() const { return params_; }
    ModelParams<T>& params() { return params_; }
    Optimizer<T>& optimizer() { return opt_; }
    const Optimizer<T>& optimizer() const { return opt_; }
    const TrainConfig& config() const { return cfg_; }
    std::uint64_t epochs_completed() const { return epochs_done_; }

    // One Adam update on a batch of clean rows; noise is drawn from `noise`
    // and fed to the encoder while the clean rows stay the target.
    StepMetrics train_step(const Tensor<T>& clean_rows, const std::vector<int>& labels,
                           GaussianStream& noise) {
        const std::size_t b = clean_rows.extent(0);
        if (b == 0) fail(ErrorCode::bad_argument, "train_step: empty batch");
        if (noisy_.shape() != clean_rows.shape()) noisy_ = Tensor<T>(clean_rows.shape());
        inject_noise_span(clean_rows.data(), noisy_.data(), clean_rows.size(), cfg_.sigma, noise);
        model_forward(params_, noisy_, cache_);
        StepMetrics m = joint_backward(params_, cache_, clean_rows, labels, cfg_.alpha, GradFlags{}, grads_,
                                       ws_);
        opt_.step(params_, grads_);
        return m;
    }

    EpochMetrics run_epoch(const Dataset<T>& train) {
        const std::uint64_t epoch = epochs_done_;
        BatchIterator batches(train.size(), cfg_.batch_size, cfg_.seed, epoch);
        GaussianStream noise(mix_seed({cfg_.seed, epoch, rng_stream::noise}));

        EpochMetrics em;
        em.epoch = epoch;
        double samples = 0.0;
        const std::size_t pixels = train.image_pixels();
        for (std::size_t bi = 0; bi < batches.batch_count(); ++bi) {
            auto idx = batches.batch(bi);
            Tensor<T> clean({idx.size(), pixels});
            std::vector<int> labels(idx.size());
            for (std::size_t s = 0; s < idx.size(); ++s) {
                std::copy(train.image(idx[s]), train.image(idx[s]) + pixels, clean.data() + s * pixels);
                labels[s] = train.labels[idx[s]];
            }
            StepMetrics m = train_step(clean, labels, noise);
            double w = static_cast<double>(idx.size());
            em.loss_class += m.loss_class * w;
            em.loss_recon += m.loss_recon * w;
            em.loss_joint += m.loss_joint * w;
            em.train_accuracy += m.accuracy * w;
            samples += w;
        }
        em.loss_class /= samples;
        em.loss_recon /= samples;
        em.loss_joint /= samples;
        em.train_accuracy /= samples;
        epochs_done_ += 1;
        return em;
    }

private:
    TrainConfig cfg_;
    ModelParams<T> params_;
    Optimizer<T> opt_;
    std::uint64_t epochs_done_ = 0;

    BatchCache<T> cache_;
    JointWorkspace<T> ws_;
    ModelParams<T> grads_;
    Tensor<T> noisy_;
};

}  // namespace stylemem
