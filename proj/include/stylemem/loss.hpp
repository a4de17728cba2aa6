#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "stylemem/tensor.hpp"

namespace stylemem {

template <typename T>
inline void require_one_hot(const Tensor<T>& target, const char* op) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] == T(1))
            ++ones;
        else if (target[i] != T(0))
            fail(ErrorCode::bad_argument,
                 std::string(op) + ": target is not one-hot (entry " + std::to_string(i) + " is neither 0 nor 1)");
    }
    if (ones != 1)
        fail(ErrorCode::bad_argument,
             std::string(op) + ": target is not one-hot (" + std::to_string(ones) + " entries equal 1)");
}

// Categorical cross-entropy -sum(target * log(probs)) on an already-softmaxed
// vector. Training uses the fused logits form below instead.
template <typename T>
T classifier_loss(const Tensor<T>& target, const Tensor<T>& probs) {
    require_same_shape(target, probs, "classifier_loss");
    require_one_hot(target, "classifier_loss");
    T loss = T(0);
    for (std::size_t i = 0; i < target.size(); ++i)
        if (target[i] == T(1)) loss -= std::log(probs[i]);
    return loss;
}

// log(sum(exp(z))) with max-subtraction.
template <typename T>
inline T log_sum_exp(const T* z, std::size_t n) {
    T mx = z[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, z[i]);
    T sum = T(0);
    for (std::size_t i = 0; i < n; ++i) sum += std::exp(z[i] - mx);
    return mx + std::log(sum);
}

// Fused cross-entropy on logits: loss = logsumexp(z) - z[label].
template <typename T>
inline T cross_entropy_from_logits(const T* logits, std::size_t n, std::size_t label) {
    return log_sum_exp(logits, n) - logits[label];
}

// Squared Euclidean distance, summed over all entries (no averaging).
template <typename T>
T reconstruction_loss(const Tensor<T>& recon, const Tensor<T>& input) {
    require_same_shape(recon, input, "reconstruction_loss");
    T loss = T(0);
    for (std::size_t i = 0; i < recon.size(); ++i) {
        T d = recon[i] - input[i];
        loss += d * d;
    }
    return loss;
}

// Weighted sum of the two objectives: L_y + alpha * L_r.
template <typename T>
T joint_loss(T classifier, T reconstruction, T alpha) {
    if (alpha < T(0))
        fail(ErrorCode::bad_argument, "joint_loss: alpha must be >= 0, got " + std::to_string(alpha));
    return classifier + alpha * reconstruction;
}

}  // namespace stylemem
