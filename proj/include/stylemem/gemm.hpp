#pragma once

#include <cstddef>
#include <cstring>

#include "stylemem/parallel.hpp"

namespace stylemem {

// Small matrix-multiply kernels used by the dense and convolution layers.
// All matrices are dense row-major. Parallelism is over output rows only and
// each element keeps a fixed summation order, so results are bitwise
// reproducible for any thread count.
//
// The kernels use GCC/Clang vector extensions (32-byte lanes) with scalar
// tails; the lane split and the tail order are part of each element's
// definition, not left to the autovectorizer.

namespace detail {

template <typename T>
struct VecOf;
template <>
struct VecOf<float> {
    typedef float type __attribute__((vector_size(32)));  // 8 lanes
    static constexpr std::size_t lanes = 8;
};
template <>
struct VecOf<double> {
    typedef double type __attribute__((vector_size(32)));  // 4 lanes
    static constexpr std::size_t lanes = 4;
};

template <typename T>
inline typename VecOf<T>::type vload(const T* p) {
    typename VecOf<T>::type v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

template <typename T>
inline void vstore(T* p, typename VecOf<T>::type v) {
    std::memcpy(p, &v, sizeof v);
}

template <typename T>
inline T vsum(typename VecOf<T>::type v) {
    if constexpr (VecOf<T>::lanes == 8)
        return ((v[0] + v[1]) + (v[2] + v[3])) + ((v[4] + v[5]) + (v[6] + v[7]));
    else
        return (v[0] + v[1]) + (v[2] + v[3]);
}

// dot(a, b) over k entries: four vector accumulators, then lanes, then the
// scalar tail.
template <typename T>
inline T dot_rows(const T* a, const T* b, std::size_t k) {
    using V = typename VecOf<T>::type;
    constexpr std::size_t L = VecOf<T>::lanes;
    V acc0{}, acc1{}, acc2{}, acc3{};
    std::size_t p = 0;
    for (; p + 4 * L <= k; p += 4 * L) {
        acc0 += vload(a + p) * vload(b + p);
        acc1 += vload(a + p + L) * vload(b + p + L);
        acc2 += vload(a + p + 2 * L) * vload(b + p + 2 * L);
        acc3 += vload(a + p + 3 * L) * vload(b + p + 3 * L);
    }
    for (; p + L <= k; p += L) acc0 += vload(a + p) * vload(b + p);
    T total = vsum<T>((acc0 + acc1) + (acc2 + acc3));
    for (; p < k; ++p) total += a[p] * b[p];
    return total;
}

// crow += av * brow over n entries
template <typename T>
inline void axpy_row(T av, const T* brow, T* crow, std::size_t n) {
    using V = typename VecOf<T>::type;
    constexpr std::size_t L = VecOf<T>::lanes;
    V va{};
    va += av;  // broadcast
    std::size_t j = 0;
    for (; j + 2 * L <= n; j += 2 * L) {
        vstore(crow + j, vload(crow + j) + va * vload(brow + j));
        vstore(crow + j + L, vload(crow + j + L) + va * vload(brow + j + L));
    }
    for (; j + L <= n; j += L) vstore(crow + j, vload(crow + j) + va * vload(brow + j));
    for (; j < n; ++j) crow[j] += av * brow[j];
}

}  // namespace detail

// C[M x N] = A[M x K] * B[K x N]   (C += ... when accumulate)
// Rows are processed in blocks of four so each B row is reused from registers
// and caches; every C element still accumulates k in ascending order.
template <typename T>
void matmul_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
               bool accumulate = false) {
    parallel_for(0, m, [=](std::size_t i0, std::size_t i1) {
        std::size_t i = i0;
        for (; i + 4 <= i1; i += 4) {
            T* c0 = c + i * n;
            T* c1 = c0 + n;
            T* c2 = c1 + n;
            T* c3 = c2 + n;
            if (!accumulate)
                for (std::size_t j = 0; j < n; ++j) c0[j] = c1[j] = c2[j] = c3[j] = T(0);
            const T* a0 = a + i * k;
            for (std::size_t p = 0; p < k; ++p) {
                const T* brow = b + p * n;
                detail::axpy_row(a0[p], brow, c0, n);
                detail::axpy_row(a0[p + k], brow, c1, n);
                detail::axpy_row(a0[p + 2 * k], brow, c2, n);
                detail::axpy_row(a0[p + 3 * k], brow, c3, n);
            }
        }
        for (; i < i1; ++i) {
            T* crow = c + i * n;
            if (!accumulate)
                for (std::size_t j = 0; j < n; ++j) crow[j] = T(0);
            const T* arow = a + i * k;
            for (std::size_t p = 0; p < k; ++p) detail::axpy_row(arow[p], b + p * n, crow, n);
        }
    });
}

// C[M x N] = A[M x K] * B[N x K]^T
template <typename T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
               bool accumulate = false) {
    parallel_for(0, m, [=](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            const T* arow = a + i * k;
            T* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                T v = detail::dot_rows(arow, b + j * k, k);
                crow[j] = accumulate ? crow[j] + v : v;
            }
        }
    });
}

// C[M x N] = A[K x M]^T * B[K x N]
// Same four-row blocking as matmul_nn; A is read down a column (stride M).
template <typename T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t k, std::size_t m, std::size_t n,
               bool accumulate = false) {
    parallel_for(0, m, [=](std::size_t i0, std::size_t i1) {
        std::size_t i = i0;
        for (; i + 4 <= i1; i += 4) {
            T* c0 = c + i * n;
            T* c1 = c0 + n;
            T* c2 = c1 + n;
            T* c3 = c2 + n;
            if (!accumulate)
                for (std::size_t j = 0; j < n; ++j) c0[j] = c1[j] = c2[j] = c3[j] = T(0);
            for (std::size_t p = 0; p < k; ++p) {
                const T* arow = a + p * m + i;
                const T* brow = b + p * n;
                detail::axpy_row(arow[0], brow, c0, n);
                detail::axpy_row(arow[1], brow, c1, n);
                detail::axpy_row(arow[2], brow, c2, n);
                detail::axpy_row(arow[3], brow, c3, n);
            }
        }
        for (; i < i1; ++i) {
            T* crow = c + i * n;
            if (!accumulate)
                for (std::size_t j = 0; j < n; ++j) crow[j] = T(0);
            for (std::size_t p = 0; p < k; ++p) detail::axpy_row(a[p * m + i], b + p * n, crow, n);
        }
    });
}

}  // namespace stylemem
