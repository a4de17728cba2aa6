#pragma once

#include <cmath>
#include <cstdint>

#include "stylemem/tensor.hpp"

namespace stylemem {

// Bias-corrected Adam moments for one parameter tensor.
template <typename T>
struct AdamState {
    Tensor<T> first_moment;
    Tensor<T> second_moment;
    std::int64_t step_count = 0;
    double learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    AdamState(const Shape& param_shape, double lr)
        : first_moment(param_shape), second_moment(param_shape), learning_rate(lr) {}
};

// One Adam update: param -= lr * m_hat / (sqrt(v_hat) + eps).
// Bias corrections are evaluated in double regardless of T.
template <typename T>
void adam_step(Tensor<T>& param, const Tensor<T>& grad, AdamState<T>& state) {
    require_same_shape(param, grad, "adam_step");
    require_same_shape(param, state.first_moment, "adam_step (first moment)");
    require_same_shape(param, state.second_moment, "adam_step (second moment)");

    state.step_count += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const T corr1 = static_cast<T>(1.0 / (1.0 - std::pow(b1, static_cast<double>(state.step_count))));
    const T corr2 = static_cast<T>(1.0 / (1.0 - std::pow(b2, static_cast<double>(state.step_count))));
    const T lr = static_cast<T>(state.learning_rate);
    const T eps = static_cast<T>(state.epsilon);
    const T tb1 = static_cast<T>(b1), tb2 = static_cast<T>(b2);

    T* p = param.data();
    T* m = state.first_moment.data();
    T* v = state.second_moment.data();
    const T* g = grad.data();
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = tb1 * m[i] + (T(1) - tb1) * g[i];
        v[i] = tb2 * v[i] + (T(1) - tb2) * g[i] * g[i];
        T m_hat = m[i] * corr1;
        T v_hat = v[i] * corr2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace stylemem
