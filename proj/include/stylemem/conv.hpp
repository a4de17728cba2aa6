#pragma once

#include <cstddef>
#include <vector>

#include "stylemem/gemm.hpp"
#include "stylemem/parallel.hpp"
#include "stylemem/tensor.hpp"

namespace stylemem {

// Strided 5x5 convolution geometry. Kernel and stride are fixed; padding is
// fully determined by the ceil(in/2) output rule, with the extra pixel on the
// trailing edge when the total is odd.
struct ConvSpec {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    static constexpr std::size_t kernel = 5;
    static constexpr std::size_t stride = 2;

    static std::size_t out_extent(std::size_t in) { return (in + 1) / 2; }

    static std::size_t pad_before(std::size_t in) {
        std::size_t need = (out_extent(in) - 1) * stride + kernel;
        return (need > in ? need - in : 0) / 2;
    }

    Shape weight_shape() const { return {out_channels, in_channels, kernel, kernel}; }
    std::size_t patch_size() const { return in_channels * kernel * kernel; }
};

namespace detail {

// Lowered patch matrix: col[(oy*w_out+ox), ci*25 + p*5 + q] = padded input at
// (ci, oy*2 - padT + p, ox*2 - padL + q). col2im_add is the exact transpose
// scatter, so conv/deconv adjointness holds by construction. Fully interior
// patches skip the per-pixel bounds checks.
template <typename T>
void im2col(const T* x, std::size_t c_in, std::size_t h, std::size_t w, T* col) {
    const std::size_t h_out = ConvSpec::out_extent(h), w_out = ConvSpec::out_extent(w);
    const std::ptrdiff_t pad_t = static_cast<std::ptrdiff_t>(ConvSpec::pad_before(h));
    const std::ptrdiff_t pad_l = static_cast<std::ptrdiff_t>(ConvSpec::pad_before(w));
    const std::size_t k = ConvSpec::kernel, s = ConvSpec::stride;
    T* dst = col;
    for (std::size_t oy = 0; oy < h_out; ++oy) {
        const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * s) - pad_t;
        const bool y_inside = y0 >= 0 && y0 + static_cast<std::ptrdiff_t>(k) <= static_cast<std::ptrdiff_t>(h);
        for (std::size_t ox = 0; ox < w_out; ++ox) {
            const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * s) - pad_l;
            if (y_inside && x0 >= 0 && x0 + static_cast<std::ptrdiff_t>(k) <= static_cast<std::ptrdiff_t>(w)) {
                const T* base = x + static_cast<std::size_t>(y0) * w + static_cast<std::size_t>(x0);
                for (std::size_t ci = 0; ci < c_in; ++ci) {
                    const T* plane = base + ci * h * w;
                    for (std::size_t p = 0; p < k; ++p) {
                        std::memcpy(dst, plane + p * w, k * sizeof(T));
                        dst += k;
                    }
                }
                continue;
            }
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                const T* plane = x + ci * h * w;
                for (std::size_t p = 0; p < k; ++p) {
                    std::ptrdiff_t iy = y0 + static_cast<std::ptrdiff_t>(p);
                    for (std::size_t q = 0; q < k; ++q) {
                        std::ptrdiff_t ix = x0 + static_cast<std::ptrdiff_t>(q);
                        bool inside = iy >= 0 && iy < static_cast<std::ptrdiff_t>(h) && ix >= 0 &&
                                      ix < static_cast<std::ptrdiff_t>(w);
                        *dst++ = inside ? plane[static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix)] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* col, std::size_t c_in, std::size_t h, std::size_t w, T* x) {
    const std::size_t h_out = ConvSpec::out_extent(h), w_out = ConvSpec::out_extent(w);
    const std::ptrdiff_t pad_t = static_cast<std::ptrdiff_t>(ConvSpec::pad_before(h));
    const std::ptrdiff_t pad_l = static_cast<std::ptrdiff_t>(ConvSpec::pad_before(w));
    const std::size_t k = ConvSpec::kernel, s = ConvSpec::stride;
    const T* src = col;
    for (std::size_t oy = 0; oy < h_out; ++oy) {
        const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * s) - pad_t;
        const bool y_inside = y0 >= 0 && y0 + static_cast<std::ptrdiff_t>(k) <= static_cast<std::ptrdiff_t>(h);
        for (std::size_t ox = 0; ox < w_out; ++ox) {
            const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * s) - pad_l;
            if (y_inside && x0 >= 0 && x0 + static_cast<std::ptrdiff_t>(k) <= static_cast<std::ptrdiff_t>(w)) {
                T* base = x + static_cast<std::size_t>(y0) * w + static_cast<std::size_t>(x0);
                for (std::size_t ci = 0; ci < c_in; ++ci) {
                    T* plane = base + ci * h * w;
                    for (std::size_t p = 0; p < k; ++p) {
                        T* row = plane + p * w;
                        for (std::size_t q = 0; q < k; ++q) row[q] += src[q];
                        src += k;
                    }
                }
                continue;
            }
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                T* plane = x + ci * h * w;
                for (std::size_t p = 0; p < k; ++p) {
                    std::ptrdiff_t iy = y0 + static_cast<std::ptrdiff_t>(p);
                    for (std::size_t q = 0; q < k; ++q, ++src) {
                        std::ptrdiff_t ix = x0 + static_cast<std::ptrdiff_t>(q);
                        if (iy >= 0 && iy < static_cast<std::ptrdiff_t>(h) && ix >= 0 &&
                            ix < static_cast<std::ptrdiff_t>(w))
                            plane[static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix)] += *src;
                    }
                }
            }
        }
    }
}

}  // namespace detail

template <typename T>
struct ConvGrads {
    Tensor<T> input;
    Tensor<T> weights;
    Tensor<T> bias;
};

namespace detail {

template <typename T>
void check_conv_args(const Tensor<T>& input, const ConvSpec& spec, const Tensor<T>& weights,
                     const Tensor<T>* bias, const Shape& want_weights, std::size_t bias_len,
                     std::size_t input_channels, const char* op) {
    if (input.rank() != 3)
        fail(ErrorCode::shape_mismatch,
             std::string(op) + ": input must be rank-3 [channels,height,width], got " + shape_to_string(input.shape()));
    if (input.extent(0) != input_channels)
        fail(ErrorCode::shape_mismatch, std::string(op) + ": input has " + std::to_string(input.extent(0)) +
                                            " channels, spec expects " + std::to_string(input_channels));
    if (weights.shape() != want_weights)
        fail(ErrorCode::shape_mismatch, std::string(op) + ": weight shape " + shape_to_string(weights.shape()) +
                                            " does not match spec " + shape_to_string(want_weights));
    if (bias && bias->shape() != Shape{bias_len})
        fail(ErrorCode::shape_mismatch, std::string(op) + ": bias length " + std::to_string(bias->size()) +
                                            ", expected " + std::to_string(bias_len));
    (void)spec;
}

}  // namespace detail

// Forward 5x5 stride-2 convolution of one sample: [C_in,H,W] -> [C_out,ceil(H/2),ceil(W/2)].
// Weight layout [C_out, C_in, 5, 5], one bias per output channel.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvSpec& spec, const Tensor<T>& weights,
                         const Tensor<T>& bias) {
    detail::check_conv_args(input, spec, weights, &bias, spec.weight_shape(), spec.out_channels,
                            spec.in_channels, "conv2d_forward");
    const std::size_t h = input.extent(1), w = input.extent(2);
    const std::size_t h_out = ConvSpec::out_extent(h), w_out = ConvSpec::out_extent(w);
    const std::size_t hw = h_out * w_out, ck = spec.patch_size();

    Tensor<T> col({hw, ck});
    detail::im2col(input.data(), spec.in_channels, h, w, col.data());
    Tensor<T> out({spec.out_channels, h_out, w_out});
    matmul_nt(weights.data(), col.data(), out.data(), spec.out_channels, ck, hw);
    for (std::size_t o = 0; o < spec.out_channels; ++o) {
        T b = bias[o];
        T* row = out.data() + o * hw;
        for (std::size_t i = 0; i < hw; ++i) row[i] += b;
    }
    return out;
}

// Gradients of any scalar loss through conv2d_forward, given the upstream
// grad_out and the input cached from the forward pass.
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input,
                             const ConvSpec& spec, const Tensor<T>& weights) {
    detail::check_conv_args(cached_input, spec, weights, static_cast<const Tensor<T>*>(nullptr),
                            spec.weight_shape(), spec.out_channels, spec.in_channels, "conv2d_backward");
    const std::size_t h = cached_input.extent(1), w = cached_input.extent(2);
    const std::size_t h_out = ConvSpec::out_extent(h), w_out = ConvSpec::out_extent(w);
    require_shape(grad_out, {spec.out_channels, h_out, w_out}, "conv2d_backward: grad_out");
    const std::size_t hw = h_out * w_out, ck = spec.patch_size();

    Tensor<T> col({hw, ck});
    detail::im2col(cached_input.data(), spec.in_channels, h, w, col.data());

    ConvGrads<T> g{Tensor<T>({spec.in_channels, h, w}), Tensor<T>(spec.weight_shape()),
                   Tensor<T>({spec.out_channels})};

    // grad wrt input: scatter W^T grad_out back through the patch map
    Tensor<T> grad_col({hw, ck});
    matmul_tn(grad_out.data(), weights.data(), grad_col.data(), spec.out_channels, hw, ck);
    detail::col2im_add(grad_col.data(), spec.in_channels, h, w, g.input.data());

    matmul_nn(grad_out.data(), col.data(), g.weights.data(), spec.out_channels, hw, ck);

    for (std::size_t o = 0; o < spec.out_channels; ++o) {
        T sum = T(0);
        const T* row = grad_out.data() + o * hw;
        for (std::size_t i = 0; i < hw; ++i) sum += row[i];
        g.bias[o] = sum;
    }
    return g;
}

// Transposed convolution of one sample: [C_in,h,w] -> [C_out,2h,2w]. It is the
// exact adjoint of conv2d_forward over the doubled extents; weight layout
// [C_in, C_out, 5, 5] therefore coincides with the mirror conv's layout.
template <typename T>
Tensor<T> deconv2d_forward(const Tensor<T>& input, const ConvSpec& spec, const Tensor<T>& weights,
                           const Tensor<T>& bias) {
    detail::check_conv_args(input, spec, weights, &bias,
                            Shape{spec.in_channels, spec.out_channels, ConvSpec::kernel, ConvSpec::kernel},
                            spec.out_channels, spec.in_channels, "deconv2d_forward");
    const std::size_t h_small = input.extent(1), w_small = input.extent(2);
    const std::size_t h_big = 2 * h_small, w_big = 2 * w_small;
    const std::size_t hw = h_small * w_small;
    const std::size_t ck = spec.out_channels * ConvSpec::kernel * ConvSpec::kernel;

    Tensor<T> grad_col({hw, ck});
    matmul_tn(input.data(), weights.data(), grad_col.data(), spec.in_channels, hw, ck);
    Tensor<T> out({spec.out_channels, h_big, w_big});
    detail::col2im_add(grad_col.data(), spec.out_channels, h_big, w_big, out.data());
    for (std::size_t o = 0; o < spec.out_channels; ++o) {
        T b = bias[o];
        T* plane = out.data() + o * h_big * w_big;
        for (std::size_t i = 0; i < h_big * w_big; ++i) plane[i] += b;
    }
    return out;
}

// ---- Batched forms over [B, C*H*W] rows, used by the training loop. ----
// Parallelism is across samples (or output rows for the weight reduction);
// per-element summation order never depends on the thread count.

template <typename T>
void conv_forward_batch(const T* x, std::size_t batch, std::size_t h, std::size_t w, const ConvSpec& spec,
                        const T* weights, const T* bias, T* cols, T* y) {
    const std::size_t h_out = ConvSpec::out_extent(h), w_out = ConvSpec::out_extent(w);
    const std::size_t hw = h_out * w_out, ck = spec.patch_size();
    const std::size_t in_stride = spec.in_channels * h * w, out_stride = spec.out_channels * hw;
    parallel_for(0, batch, [=](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            T* col = cols + b * hw * ck;
            detail::im2col(x + b * in_stride, spec.in_channels, h, w, col);
            T* out = y + b * out_stride;
            matmul_nt(weights, col, out, spec.out_channels, ck, hw);
            for (std::size_t o = 0; o < spec.out_channels; ++o) {
                T bv = bias[o];
                T* row = out + o * hw;
                for (std::size_t i = 0; i < hw; ++i) row[i] += bv;
            }
        }
    });
}

// grad_x may be null when the input gradient is not needed (first layer).
// Weight/bias gradients are reduced over samples in ascending order.
template <typename T>
void conv_backward_batch(const T* grad_y, const T* cols, std::size_t batch, std::size_t h, std::size_t w,
                         const ConvSpec& spec, const T* weights, T* grad_x, T* grad_w, T* grad_b) {
    const std::size_t h_out = ConvSpec::out_extent(h), w_out = ConvSpec::out_extent(w);
    const std::size_t hw = h_out * w_out, ck = spec.patch_size();
    const std::size_t in_stride = spec.in_channels * h * w, out_stride = spec.out_channels * hw;

    if (grad_x) {
        parallel_for(0, batch, [=](std::size_t b0, std::size_t b1) {
            std::vector<T> grad_col(hw * ck);
            for (std::size_t b = b0; b < b1; ++b) {
                matmul_tn(grad_y + b * out_stride, weights, grad_col.data(), spec.out_channels, hw, ck);
                T* gx = grad_x + b * in_stride;
                for (std::size_t i = 0; i < in_stride; ++i) gx[i] = T(0);
                detail::col2im_add(grad_col.data(), spec.in_channels, h, w, gx);
            }
        });
    }

    parallel_for(0, spec.out_channels, [=](std::size_t o0, std::size_t o1) {
        for (std::size_t o = o0; o < o1; ++o) {
            T* wrow = grad_w + o * ck;
            for (std::size_t i = 0; i < ck; ++i) wrow[i] = T(0);
            T bsum = T(0);
            for (std::size_t b = 0; b < batch; ++b) {
                const T* grow = grad_y + b * out_stride + o * hw;
                const T* col = cols + b * hw * ck;
                for (std::size_t r = 0; r < hw; ++r) {
                    T g = grow[r];
                    bsum += g;
                    const T* crow = col + r * ck;
                    for (std::size_t i = 0; i < ck; ++i) wrow[i] += g * crow[i];
                }
            }
            grad_b[o] = bsum;
        }
    });
}

template <typename T>
void deconv_forward_batch(const T* u, std::size_t batch, std::size_t h_small, std::size_t w_small,
                          const ConvSpec& spec, const T* weights, const T* bias, T* y) {
    const std::size_t h_big = 2 * h_small, w_big = 2 * w_small;
    const std::size_t hw = h_small * w_small;
    const std::size_t ck = spec.out_channels * ConvSpec::kernel * ConvSpec::kernel;
    const std::size_t in_stride = spec.in_channels * hw, out_stride = spec.out_channels * h_big * w_big;
    parallel_for(0, batch, [=](std::size_t b0, std::size_t b1) {
        std::vector<T> grad_col(hw * ck);
        for (std::size_t b = b0; b < b1; ++b) {
            matmul_tn(u + b * in_stride, weights, grad_col.data(), spec.in_channels, hw, ck);
            T* out = y + b * out_stride;
            for (std::size_t i = 0; i < out_stride; ++i) out[i] = T(0);
            detail::col2im_add(grad_col.data(), spec.out_channels, h_big, w_big, out);
            for (std::size_t o = 0; o < spec.out_channels; ++o) {
                T bv = bias[o];
                T* plane = out + o * h_big * w_big;
                for (std::size_t i = 0; i < h_big * w_big; ++i) plane[i] += bv;
            }
        }
    });
}

// scratch_cols must hold batch * hw_small * (C_out*25) entries.
template <typename T>
void deconv_backward_batch(const T* grad_y, const T* u, std::size_t batch, std::size_t h_small,
                           std::size_t w_small, const ConvSpec& spec, const T* weights, T* scratch_cols,
                           T* grad_u, T* grad_w, T* grad_b) {
    const std::size_t h_big = 2 * h_small, w_big = 2 * w_small;
    const std::size_t hw = h_small * w_small;
    const std::size_t ck = spec.out_channels * ConvSpec::kernel * ConvSpec::kernel;
    const std::size_t in_stride = spec.in_channels * hw, out_stride = spec.out_channels * h_big * w_big;

    parallel_for(0, batch, [=](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            T* col = scratch_cols + b * hw * ck;
            detail::im2col(grad_y + b * out_stride, spec.out_channels, h_big, w_big, col);
            matmul_nt(weights, col, grad_u + b * in_stride, spec.in_channels, ck, hw);
        }
    });

    parallel_for(0, spec.in_channels, [=](std::size_t c0, std::size_t c1) {
        for (std::size_t ci = c0; ci < c1; ++ci) {
            T* wrow = grad_w + ci * ck;
            for (std::size_t i = 0; i < ck; ++i) wrow[i] = T(0);
            for (std::size_t b = 0; b < batch; ++b) {
                const T* urow = u + b * in_stride + ci * hw;
                const T* col = scratch_cols + b * hw * ck;
                for (std::size_t r = 0; r < hw; ++r) {
                    T g = urow[r];
                    const T* crow = col + r * ck;
                    for (std::size_t i = 0; i < ck; ++i) wrow[i] += g * crow[i];
                }
            }
        }
    });

    parallel_for(0, spec.out_channels, [=](std::size_t o0, std::size_t o1) {
        for (std::size_t o = o0; o < o1; ++o) {
            T sum = T(0);
            for (std::size_t b = 0; b < batch; ++b) {
                const T* plane = grad_y + b * out_stride + o * h_big * w_big;
                for (std::size_t i = 0; i < h_big * w_big; ++i) sum += plane[i];
            }
            grad_b[o] = sum;
        }
    });
}

template <typename T>
ConvGrads<T> deconv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input,
                               const ConvSpec& spec, const Tensor<T>& weights) {
    detail::check_conv_args(cached_input, spec, weights, static_cast<const Tensor<T>*>(nullptr),
                            Shape{spec.in_channels, spec.out_channels, ConvSpec::kernel, ConvSpec::kernel},
                            spec.out_channels, spec.in_channels, "deconv2d_backward");
    const std::size_t h_small = cached_input.extent(1), w_small = cached_input.extent(2);
    const std::size_t h_big = 2 * h_small, w_big = 2 * w_small;
    require_shape(grad_out, {spec.out_channels, h_big, w_big}, "deconv2d_backward: grad_out");
    const std::size_t hw = h_small * w_small;
    const std::size_t ck = spec.out_channels * ConvSpec::kernel * ConvSpec::kernel;

    ConvGrads<T> g{Tensor<T>({spec.in_channels, h_small, w_small}),
                   Tensor<T>({spec.in_channels, spec.out_channels, ConvSpec::kernel, ConvSpec::kernel}),
                   Tensor<T>({spec.out_channels})};

    // grad wrt input is the mirror convolution of grad_out
    Tensor<T> col({hw, ck});
    detail::im2col(grad_out.data(), spec.out_channels, h_big, w_big, col.data());
    matmul_nt(weights.data(), col.data(), g.input.data(), spec.in_channels, ck, hw);

    matmul_nn(cached_input.data(), col.data(), g.weights.data(), spec.in_channels, hw, ck);

    for (std::size_t o = 0; o < spec.out_channels; ++o) {
        T sum = T(0);
        const T* plane = grad_out.data() + o * h_big * w_big;
        for (std::size_t i = 0; i < h_big * w_big; ++i) sum += plane[i];
        g.bias[o] = sum;
    }
    return g;
}

}  // namespace stylemem
