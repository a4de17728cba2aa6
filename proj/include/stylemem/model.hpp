#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stylemem/activations.hpp"
#include "stylemem/conv.hpp"
#include "stylemem/dense.hpp"
#include "stylemem/loss.hpp"
#include "stylemem/rng.hpp"
#include "stylemem/tensor.hpp"

namespace stylemem {

// Network dimensions. The default is the 28x28 classifier-autoencoder: two
// 5x5 stride-2 conv layers of 32 and 64 filters, fully connected layers of
// 256 and 128 ReLU units, a softmax class vector plus a 16-unit logistic
// style memory, and an untied mirror decoder. Everything is parametric so a
// reduced variant can drive the double-precision gradient checks.
struct ArchConfig {
    std::size_t input_side = 28;
    std::size_t conv1_filters = 32;
    std::size_t conv2_filters = 64;
    std::size_t fc1_units = 256;
    std::size_t fc2_units = 128;
    std::size_t style_units = 16;
    std::size_t num_classes = 10;

    std::size_t conv1_side() const { return ConvSpec::out_extent(input_side); }
    std::size_t conv2_side() const { return ConvSpec::out_extent(conv1_side()); }
    std::size_t conv1_pixels() const { return conv1_side() * conv1_side(); }
    std::size_t conv2_pixels() const { return conv2_side() * conv2_side(); }
    std::size_t flat_units() const { return conv2_filters * conv2_pixels(); }
    std::size_t code_units() const { return num_classes + style_units; }
    std::size_t pixels() const { return input_side * input_side; }

    ConvSpec conv1_spec() const { return {1, conv1_filters}; }
    ConvSpec conv2_spec() const { return {conv1_filters, conv2_filters}; }
    ConvSpec deconv1_spec() const { return {conv2_filters, conv1_filters}; }
    ConvSpec deconv2_spec() const { return {conv1_filters, 1}; }

    static ArchConfig standard(std::size_t classes) {
        ArchConfig a;
        a.num_classes = classes;
        return a;
    }

    // Small 8x8 variant; cheap enough for exhaustive finite differences.
    static ArchConfig reduced(std::size_t classes) {
        ArchConfig a;
        a.input_side = 8;
        a.conv1_filters = 4;
        a.conv2_filters = 6;
        a.fc1_units = 20;
        a.fc2_units = 12;
        a.style_units = 4;
        a.num_classes = classes;
        return a;
    }

    bool operator==(const ArchConfig&) const = default;
};

// All connection weights of encoder and decoder. Encoder and decoder tensors
// are distinct storage; nothing is tied.
template <typename T>
struct ModelParams {
    ArchConfig arch;

    Tensor<T> conv1_w, conv1_b;
    Tensor<T> conv2_w, conv2_b;
    Tensor<T> fc1_w, fc1_b;
    Tensor<T> fc2_w, fc2_b;
    Tensor<T> class_w, class_b;
    Tensor<T> style_w, style_b;

    Tensor<T> dfc1_w, dfc1_b;
    Tensor<T> dfc2_w, dfc2_b;
    Tensor<T> dfc3_w, dfc3_b;
    Tensor<T> deconv1_w, deconv1_b;
    Tensor<T> deconv2_w, deconv2_b;

    ModelParams() = default;

    explicit ModelParams(const ArchConfig& a)
        : arch(a),
          conv1_w(a.conv1_spec().weight_shape()),
          conv1_b({a.conv1_filters}),
          conv2_w(a.conv2_spec().weight_shape()),
          conv2_b({a.conv2_filters}),
          fc1_w({a.flat_units(), a.fc1_units}),
          fc1_b({a.fc1_units}),
          fc2_w({a.fc1_units, a.fc2_units}),
          fc2_b({a.fc2_units}),
          class_w({a.fc2_units, a.num_classes}),
          class_b({a.num_classes}),
          style_w({a.fc2_units, a.style_units}),
          style_b({a.style_units}),
          dfc1_w({a.code_units(), a.fc2_units}),
          dfc1_b({a.fc2_units}),
          dfc2_w({a.fc2_units, a.fc1_units}),
          dfc2_b({a.fc1_units}),
          dfc3_w({a.fc1_units, a.flat_units()}),
          dfc3_b({a.flat_units()}),
          deconv1_w({a.conv2_filters, a.conv1_filters, ConvSpec::kernel, ConvSpec::kernel}),
          deconv1_b({a.conv1_filters}),
          deconv2_w({a.conv1_filters, 1, ConvSpec::kernel, ConvSpec::kernel}),
          deconv2_b({1}) {}
};

// Fixed traversal order; checkpoints, the optimizer, and the gradient checks
// all rely on it.
template <typename T, typename Fn>
void visit_params(ModelParams<T>& p, Fn&& fn) {
    fn("conv1.w", p.conv1_w);
    fn("conv1.b", p.conv1_b);
    fn("conv2.w", p.conv2_w);
    fn("conv2.b", p.conv2_b);
    fn("fc1.w", p.fc1_w);
    fn("fc1.b", p.fc1_b);
    fn("fc2.w", p.fc2_w);
    fn("fc2.b", p.fc2_b);
    fn("class.w", p.class_w);
    fn("class.b", p.class_b);
    fn("style.w", p.style_w);
    fn("style.b", p.style_b);
    fn("dfc1.w", p.dfc1_w);
    fn("dfc1.b", p.dfc1_b);
    fn("dfc2.w", p.dfc2_w);
    fn("dfc2.b", p.dfc2_b);
    fn("dfc3.w", p.dfc3_w);
    fn("dfc3.b", p.dfc3_b);
    fn("deconv1.w", p.deconv1_w);
    fn("deconv1.b", p.deconv1_b);
    fn("deconv2.w", p.deconv2_w);
    fn("deconv2.b", p.deconv2_b);
}

template <typename T, typename Fn>
void visit_params(const ModelParams<T>& p, Fn&& fn) {
    visit_params(const_cast<ModelParams<T>&>(p), [&fn](const char* name, Tensor<T>& t) {
        fn(name, static_cast<const Tensor<T>&>(t));
    });
}

namespace detail {
template <typename T>
inline std::size_t dense_fan_in(const Tensor<T>& w) {
    // conv/deconv weights are rank-4 with the receptive field in the last two
    // axes; dense weights are [in x out]
    if (w.rank() == 4) return w.extent(1) * w.extent(2) * w.extent(3);
    return w.extent(0);
}
}  // namespace detail

// Zero-mean normal weights scaled by sqrt(2/fan_in); biases zero.
template <typename T>
ModelParams<T> init_params(const ArchConfig& arch, std::uint64_t seed) {
    ModelParams<T> p(arch);
    GaussianStream gauss(mix_seed({seed, rng_stream::weight_init}));
    visit_params(p, [&](const char* name, Tensor<T>& t) {
        std::string n(name);
        if (n.size() > 2 && n.substr(n.size() - 2) == ".b") {
            t.fill(T(0));
            return;
        }
        double scale = std::sqrt(2.0 / static_cast<double>(detail::dense_fan_in(t)));
        for (auto& v : t) v = static_cast<T>(scale * gauss.next());
    });
    return p;
}

// The pair produced by the encoder: a softmax class vector and a logistic
// style memory.
template <typename T>
struct LatentCode {
    Tensor<T> class_probs;  // length num_classes, sums to 1
    Tensor<T> style;        // length style_units, entries in (0,1)
};

// Every intermediate representation of one batch, kept for the backward pass.
// Matrices are row-per-sample; conv blocks are flattened [C*H*W] per row.
template <typename T>
struct BatchCache {
    std::size_t batch = 0;

    Tensor<T> input;                  // [B, pixels] as fed to the encoder
    Tensor<T> conv1_cols;             // [B, hw1, 1*25]
    Tensor<T> conv1_pre, conv1_act;   // [B, c1*hw1]
    Tensor<T> conv2_cols;             // [B, hw2, c1*25]
    Tensor<T> conv2_pre, conv2_act;   // [B, c2*hw2] == [B, flat]
    Tensor<T> fc1_pre, fc1_act;       // [B, fc1]
    Tensor<T> fc2_pre, fc2_act;       // [B, fc2]
    Tensor<T> logits, probs;          // [B, classes]
    Tensor<T> style_pre, style;       // [B, style]

    Tensor<T> code;                   // [B, classes+style]
    Tensor<T> dfc1_pre, dfc1_act;     // [B, fc2]
    Tensor<T> dfc2_pre, dfc2_act;     // [B, fc1]
    Tensor<T> dfc3_pre, dfc3_act;     // [B, flat]
    Tensor<T> deconv1_pre, deconv1_act;  // [B, c1*hw1]
    Tensor<T> recon_pre, recon;       // [B, pixels]

    void resize(const ArchConfig& a, std::size_t b) {
        if (batch == b && input.size() == b * a.pixels() && probs.size() == b * a.num_classes &&
            style.size() == b * a.style_units && fc1_pre.size() == b * a.fc1_units)
            return;
        batch = b;
        const std::size_t hw1 = a.conv1_pixels(), hw2 = a.conv2_pixels();
        input = Tensor<T>({b, a.pixels()});
        conv1_cols = Tensor<T>({b, hw1, 25});
        conv1_pre = Tensor<T>({b, a.conv1_filters * hw1});
        conv1_act = Tensor<T>({b, a.conv1_filters * hw1});
        conv2_cols = Tensor<T>({b, hw2, a.conv1_filters * 25});
        conv2_pre = Tensor<T>({b, a.flat_units()});
        conv2_act = Tensor<T>({b, a.flat_units()});
        fc1_pre = Tensor<T>({b, a.fc1_units});
        fc1_act = Tensor<T>({b, a.fc1_units});
        fc2_pre = Tensor<T>({b, a.fc2_units});
        fc2_act = Tensor<T>({b, a.fc2_units});
        logits = Tensor<T>({b, a.num_classes});
        probs = Tensor<T>({b, a.num_classes});
        style_pre = Tensor<T>({b, a.style_units});
        style = Tensor<T>({b, a.style_units});
        code = Tensor<T>({b, a.code_units()});
        dfc1_pre = Tensor<T>({b, a.fc2_units});
        dfc1_act = Tensor<T>({b, a.fc2_units});
        dfc2_pre = Tensor<T>({b, a.fc1_units});
        dfc2_act = Tensor<T>({b, a.fc1_units});
        dfc3_pre = Tensor<T>({b, a.flat_units()});
        dfc3_act = Tensor<T>({b, a.flat_units()});
        deconv1_pre = Tensor<T>({b, a.conv1_filters * hw1});
        deconv1_act = Tensor<T>({b, a.conv1_filters * hw1});
        recon_pre = Tensor<T>({b, a.pixels()});
        recon = Tensor<T>({b, a.pixels()});
    }
};

// Encoder: x -> (class logits/probs, style memory), caching everything.
// `x` holds one sample per row, pixels flattened.
template <typename T>
void encoder_forward(const ModelParams<T>& p, const Tensor<T>& x, BatchCache<T>& c) {
    const ArchConfig& a = p.arch;
    const std::size_t b = x.extent(0);
    if (x.size() != b * a.pixels())
        fail(ErrorCode::shape_mismatch, "encoder_forward: input row length " +
                                            std::to_string(x.size() / std::max<std::size_t>(b, 1)) +
                                            " does not match " + std::to_string(a.pixels()) + " pixels");
    c.resize(a, b);
    std::copy(x.begin(), x.end(), c.input.begin());

    conv_forward_batch(c.input.data(), b, a.input_side, a.input_side, a.conv1_spec(), p.conv1_w.data(),
                       p.conv1_b.data(), c.conv1_cols.data(), c.conv1_pre.data());
    std::copy(c.conv1_pre.begin(), c.conv1_pre.end(), c.conv1_act.begin());
    relu_inplace(c.conv1_act.data(), c.conv1_act.size());

    conv_forward_batch(c.conv1_act.data(), b, a.conv1_side(), a.conv1_side(), a.conv2_spec(),
                       p.conv2_w.data(), p.conv2_b.data(), c.conv2_cols.data(), c.conv2_pre.data());
    std::copy(c.conv2_pre.begin(), c.conv2_pre.end(), c.conv2_act.begin());
    relu_inplace(c.conv2_act.data(), c.conv2_act.size());

    dense_forward_batch(c.conv2_act.data(), p.fc1_w.data(), p.fc1_b.data(), c.fc1_pre.data(), b,
                        a.flat_units(), a.fc1_units);
    std::copy(c.fc1_pre.begin(), c.fc1_pre.end(), c.fc1_act.begin());
    relu_inplace(c.fc1_act.data(), c.fc1_act.size());

    dense_forward_batch(c.fc1_act.data(), p.fc2_w.data(), p.fc2_b.data(), c.fc2_pre.data(), b, a.fc1_units,
                        a.fc2_units);
    std::copy(c.fc2_pre.begin(), c.fc2_pre.end(), c.fc2_act.begin());
    relu_inplace(c.fc2_act.data(), c.fc2_act.size());

    dense_forward_batch(c.fc2_act.data(), p.class_w.data(), p.class_b.data(), c.logits.data(), b,
                        a.fc2_units, a.num_classes);
    softmax_rows(c.logits.data(), c.probs.data(), b, a.num_classes);

    dense_forward_batch(c.fc2_act.data(), p.style_w.data(), p.style_b.data(), c.style_pre.data(), b,
                        a.fc2_units, a.style_units);
    std::copy(c.style_pre.begin(), c.style_pre.end(), c.style.begin());
    sigmoid_inplace(c.style.data(), c.style.size());
}

// Decoder: code rows [y || m] -> reconstruction rows, caching everything.
// The code need not come from the encoder (one-hot correction, interpolation).
template <typename T>
void decoder_forward(const ModelParams<T>& p, const Tensor<T>& code, BatchCache<T>& c) {
    const ArchConfig& a = p.arch;
    const std::size_t b = c.batch;
    if (code.size() != b * a.code_units())
        fail(ErrorCode::shape_mismatch,
             "decoder_forward: code length " + std::to_string(code.size() / std::max<std::size_t>(b, 1)) +
                 " does not match " + std::to_string(a.code_units()) + " (classes + style units)");
    std::copy(code.begin(), code.end(), c.code.begin());

    dense_forward_batch(c.code.data(), p.dfc1_w.data(), p.dfc1_b.data(), c.dfc1_pre.data(), b,
                        a.code_units(), a.fc2_units);
    std::copy(c.dfc1_pre.begin(), c.dfc1_pre.end(), c.dfc1_act.begin());
    relu_inplace(c.dfc1_act.data(), c.dfc1_act.size());

    dense_forward_batch(c.dfc1_act.data(), p.dfc2_w.data(), p.dfc2_b.data(), c.dfc2_pre.data(), b,
                        a.fc2_units, a.fc1_units);
    std::copy(c.dfc2_pre.begin(), c.dfc2_pre.end(), c.dfc2_act.begin());
    relu_inplace(c.dfc2_act.data(), c.dfc2_act.size());

    dense_forward_batch(c.dfc2_act.data(), p.dfc3_w.data(), p.dfc3_b.data(), c.dfc3_pre.data(), b,
                        a.fc1_units, a.flat_units());
    std::copy(c.dfc3_pre.begin(), c.dfc3_pre.end(), c.dfc3_act.begin());
    relu_inplace(c.dfc3_act.data(), c.dfc3_act.size());

    deconv_forward_batch(c.dfc3_act.data(), b, a.conv2_side(), a.conv2_side(), a.deconv1_spec(),
                         p.deconv1_w.data(), p.deconv1_b.data(), c.deconv1_pre.data());
    std::copy(c.deconv1_pre.begin(), c.deconv1_pre.end(), c.deconv1_act.begin());
    relu_inplace(c.deconv1_act.data(), c.deconv1_act.size());

    deconv_forward_batch(c.deconv1_act.data(), b, a.conv1_side(), a.conv1_side(), a.deconv2_spec(),
                         p.deconv2_w.data(), p.deconv2_b.data(), c.recon_pre.data());
    std::copy(c.recon_pre.begin(), c.recon_pre.end(), c.recon.begin());
    sigmoid_inplace(c.recon.data(), c.recon.size());
}

// Full autoencoding pass: encoder, concatenate [y || m], decoder.
template <typename T>
void model_forward(const ModelParams<T>& p, const Tensor<T>& x, BatchCache<T>& c) {
    encoder_forward(p, x, c);
    const ArchConfig& a = p.arch;
    Tensor<T> code({c.batch, a.code_units()});
    for (std::size_t b = 0; b < c.batch; ++b) {
        T* row = code.data() + b * a.code_units();
        const T* y = c.probs.data() + b * a.num_classes;
        const T* m = c.style.data() + b * a.style_units;
        std::copy(y, y + a.num_classes, row);
        std::copy(m, m + a.style_units, row + a.num_classes);
    }
    decoder_forward(p, code, c);
}

// ---- public single-sample surface ----

template <typename T>
struct EncodeResult {
    LatentCode<T> code;
    BatchCache<T> activations;  // every hidden representation, reusable for backward
};

template <typename T>
EncodeResult<T> encode(const ModelParams<T>& p, const Tensor<T>& x) {
    const ArchConfig& a = p.arch;
    if (x.size() != a.pixels())
        fail(ErrorCode::shape_mismatch, "encode: expected a " + std::to_string(a.input_side) + "x" +
                                            std::to_string(a.input_side) + " image, got " +
                                            shape_to_string(x.shape()));
    Tensor<T> row({1, a.pixels()});
    std::copy(x.begin(), x.end(), row.begin());
    EncodeResult<T> r;
    encoder_forward(p, row, r.activations);
    r.code.class_probs = Tensor<T>({a.num_classes});
    r.code.style = Tensor<T>({a.style_units});
    std::copy(r.activations.probs.begin(), r.activations.probs.end(), r.code.class_probs.begin());
    std::copy(r.activations.style.begin(), r.activations.style.end(), r.code.style.begin());
    return r;
}

template <typename T>
Tensor<T> decode(const ModelParams<T>& p, const LatentCode<T>& code) {
    const ArchConfig& a = p.arch;
    if (code.class_probs.size() != a.num_classes)
        fail(ErrorCode::shape_mismatch, "decode: class vector length " + std::to_string(code.class_probs.size()) +
                                            ", model expects " + std::to_string(a.num_classes));
    if (code.style.size() != a.style_units)
        fail(ErrorCode::shape_mismatch, "decode: style length " + std::to_string(code.style.size()) +
                                            ", model expects " + std::to_string(a.style_units));
    Tensor<T> joined({1, a.code_units()});
    std::copy(code.class_probs.begin(), code.class_probs.end(), joined.begin());
    std::copy(code.style.begin(), code.style.end(), joined.begin() + a.num_classes);
    BatchCache<T> c;
    c.resize(a, 1);
    decoder_forward(p, joined, c);
    Tensor<T> out({1, a.input_side, a.input_side});
    std::copy(c.recon.begin(), c.recon.end(), out.begin());
    return out;
}

template <typename T>
Tensor<T> one_hot(std::size_t label, std::size_t classes) {
    if (label >= classes)
        fail(ErrorCode::bad_argument,
             "one_hot: label " + std::to_string(label) + " outside " + std::to_string(classes) + " classes");
    Tensor<T> t({classes});
    t[label] = T(1);
    return t;
}

}  // namespace stylemem
