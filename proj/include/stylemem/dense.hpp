#pragma once

#include <cstddef>

#include "stylemem/gemm.hpp"
#include "stylemem/tensor.hpp"

namespace stylemem {

template <typename T>
struct DenseGrads {
    Tensor<T> input;
    Tensor<T> weights;
    Tensor<T> bias;
};

// Affine map of one sample: out = x * W + b, weights [n x k] row-major.
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias) {
    if (weights.rank() != 2)
        fail(ErrorCode::shape_mismatch, "dense_forward: weights must be rank-2, got " + shape_to_string(weights.shape()));
    const std::size_t n = weights.extent(0), k = weights.extent(1);
    if (input.size() != n)
        fail(ErrorCode::shape_mismatch, "dense_forward: input length " + std::to_string(input.size()) +
                                            " does not match weight rows " + std::to_string(n));
    if (bias.size() != k)
        fail(ErrorCode::shape_mismatch, "dense_forward: bias length " + std::to_string(bias.size()) +
                                            " does not match weight cols " + std::to_string(k));
    Tensor<T> out({k});
    matmul_nn(input.data(), weights.data(), out.data(), 1, n, k);
    for (std::size_t j = 0; j < k; ++j) out[j] += bias[j];
    return out;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input,
                             const Tensor<T>& weights) {
    const std::size_t n = weights.extent(0), k = weights.extent(1);
    if (grad_out.size() != k)
        fail(ErrorCode::shape_mismatch, "dense_backward: grad_out length " + std::to_string(grad_out.size()) +
                                            " does not match weight cols " + std::to_string(k));
    if (cached_input.size() != n)
        fail(ErrorCode::shape_mismatch, "dense_backward: cached input length " + std::to_string(cached_input.size()) +
                                            " does not match weight rows " + std::to_string(n));
    DenseGrads<T> g{Tensor<T>(cached_input.shape()), Tensor<T>(weights.shape()), Tensor<T>({k})};
    matmul_nt(grad_out.data(), weights.data(), g.input.data(), 1, k, n);
    // grad_W[i,j] = x[i] * grad_out[j]
    matmul_tn(cached_input.data(), grad_out.data(), g.weights.data(), 1, n, k);
    for (std::size_t j = 0; j < k; ++j) g.bias[j] = grad_out[j];
    return g;
}

// Batched forms on [B x n] matrices, used by the training loop.

template <typename T>
void dense_forward_batch(const T* x, const T* w, const T* b, T* y, std::size_t batch, std::size_t n,
                         std::size_t k) {
    matmul_nn(x, w, y, batch, n, k);
    parallel_for(0, batch, [=](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            T* row = y + r * k;
            for (std::size_t j = 0; j < k; ++j) row[j] += b[j];
        }
    });
}

// grad_x [B x n], grad_w [n x k] and grad_b [k] from grad_y [B x k].
// Weight/bias sums run over the batch in ascending index order.
template <typename T>
void dense_backward_batch(const T* grad_y, const T* x, const T* w, T* grad_x, T* grad_w, T* grad_b,
                          std::size_t batch, std::size_t n, std::size_t k) {
    matmul_nt(grad_y, w, grad_x, batch, k, n);
    matmul_tn(x, grad_y, grad_w, batch, n, k);
    for (std::size_t j = 0; j < k; ++j) grad_b[j] = T(0);
    for (std::size_t r = 0; r < batch; ++r) {
        const T* row = grad_y + r * k;
        for (std::size_t j = 0; j < k; ++j) grad_b[j] += row[j];
    }
}

}  // namespace stylemem
