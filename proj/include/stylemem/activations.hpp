#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "stylemem/parallel.hpp"
#include "stylemem/tensor.hpp"

namespace stylemem {

// Elementwise activations, each with the matching backward. Raw-span forms
// run inside the training loop; Tensor forms are the public surface.

template <typename T>
void relu_inplace(T* x, std::size_t n) {
    parallel_for(0, n, [=](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) x[i] = x[i] > T(0) ? x[i] : T(0);
    });
}

// grad_in = grad_out where pre-activation > 0, else 0.
template <typename T>
void relu_backward_span(const T* pre, const T* grad_out, T* grad_in, std::size_t n) {
    parallel_for(0, n, [=](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) grad_in[i] = pre[i] > T(0) ? grad_out[i] : T(0);
    });
}

template <typename T>
void sigmoid_inplace(T* x, std::size_t n) {
    parallel_for(0, n, [=](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) x[i] = T(1) / (T(1) + std::exp(-x[i]));
    });
}

// grad_in = grad_out * s * (1 - s), with s the sigmoid output.
template <typename T>
void sigmoid_backward_span(const T* out, const T* grad_out, T* grad_in, std::size_t n) {
    parallel_for(0, n, [=](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) grad_in[i] = grad_out[i] * out[i] * (T(1) - out[i]);
    });
}

// Row-wise softmax over [rows x cols], max-subtracted for stability.
template <typename T>
void softmax_rows(const T* logits, T* probs, std::size_t rows, std::size_t cols) {
    parallel_for(0, rows, [=](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const T* z = logits + r * cols;
            T* p = probs + r * cols;
            T mx = z[0];
            for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, z[j]);
            T sum = T(0);
            for (std::size_t j = 0; j < cols; ++j) {
                p[j] = std::exp(z[j] - mx);
                sum += p[j];
            }
            T inv = T(1) / sum;
            for (std::size_t j = 0; j < cols; ++j) p[j] *= inv;
        }
    });
}

// grad_logits = J_softmax^T grad_probs = p .* (grad_probs - <grad_probs, p>),
// accumulated into grad_logits.
template <typename T>
void softmax_backward_rows(const T* probs, const T* grad_probs, T* grad_logits, std::size_t rows,
                           std::size_t cols) {
    parallel_for(0, rows, [=](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const T* p = probs + r * cols;
            const T* g = grad_probs + r * cols;
            T* gz = grad_logits + r * cols;
            T inner = T(0);
            for (std::size_t j = 0; j < cols; ++j) inner += g[j] * p[j];
            for (std::size_t j = 0; j < cols; ++j) gz[j] += p[j] * (g[j] - inner);
        }
    });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& t) {
    Tensor<T> out = t;
    relu_inplace(out.data(), out.size());
    return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& pre, const Tensor<T>& grad_out) {
    require_same_shape(pre, grad_out, "relu_backward");
    Tensor<T> grad_in(pre.shape());
    relu_backward_span(pre.data(), grad_out.data(), grad_in.data(), pre.size());
    return grad_in;
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& t) {
    Tensor<T> out = t;
    sigmoid_inplace(out.data(), out.size());
    return out;
}

template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& out, const Tensor<T>& grad_out) {
    require_same_shape(out, grad_out, "sigmoid_backward");
    Tensor<T> grad_in(out.shape());
    sigmoid_backward_span(out.data(), grad_out.data(), grad_in.data(), out.size());
    return grad_in;
}

// Softmax over a vector (rank-1 tensor).
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
    if (logits.rank() != 1)
        fail(ErrorCode::shape_mismatch, "softmax: expected a vector, got " + shape_to_string(logits.shape()));
    Tensor<T> probs(logits.shape());
    softmax_rows(logits.data(), probs.data(), 1, logits.size());
    return probs;
}

template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& probs, const Tensor<T>& grad_probs) {
    require_same_shape(probs, grad_probs, "softmax_backward");
    Tensor<T> grad_logits(probs.shape());
    softmax_backward_rows(probs.data(), grad_probs.data(), grad_logits.data(), 1, probs.size());
    return grad_logits;
}

}  // namespace stylemem
