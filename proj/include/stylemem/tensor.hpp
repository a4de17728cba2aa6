#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "stylemem/error.hpp"

namespace stylemem {

using Shape = std::vector<std::size_t>;

inline std::string shape_to_string(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << 'x';
        os << s[i];
    }
    os << ']';
    return os.str();
}

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

// Dense row-major n-dimensional array. The single value type for images,
// activations, weights and gradients.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape) : shape_(std::move(shape)) {
        for (std::size_t d : shape_)
            if (d == 0) fail(ErrorCode::shape_mismatch, "tensor extent must be positive, got shape " + shape_to_string(shape_));
        data_.assign(shape_numel(shape_), T(0));
    }

    Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_numel(shape_) != data_.size())
            fail(ErrorCode::shape_mismatch,
                 "tensor data length " + std::to_string(data_.size()) + " does not match shape " + shape_to_string(shape_));
    }

    Tensor(std::initializer_list<std::size_t> shape, std::initializer_list<T> data)
        : Tensor(Shape(shape), std::vector<T>(data)) {}

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, T value) {
        Tensor t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), value);
        return t;
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    // Reshape in place; element count must be preserved.
    Tensor& reshape(Shape shape) {
        if (shape_numel(shape) != data_.size())
            fail(ErrorCode::shape_mismatch,
                 "cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
        shape_ = std::move(shape);
        return *this;
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (const T& v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return Tensor<U>(shape_, std::move(out));
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

template <typename T>
inline void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (!a.same_shape(b))
        fail(ErrorCode::shape_mismatch,
             std::string(op) + ": shapes differ, " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
}

template <typename T>
inline void require_shape(const Tensor<T>& t, const Shape& want, const char* what) {
    if (t.shape() != want)
        fail(ErrorCode::shape_mismatch,
             std::string(what) + ": expected shape " + shape_to_string(want) + ", got " + shape_to_string(t.shape()));
}

}  // namespace stylemem
