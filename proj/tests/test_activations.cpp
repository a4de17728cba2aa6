#include "doctest.h"

#include <cmath>

#include "stylemem/activations.hpp"
#include "stylemem/rng.hpp"

using namespace stylemem;

TEST_CASE("relu and sigmoid point values") {
    Tensor<double> t({3}, {-3.0, 0.0, 3.0});
    auto r = relu(t);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
    CHECK(r[2] == 3.0);

    Tensor<double> z({1}, {0.0});
    CHECK(sigmoid(z)[0] == doctest::Approx(0.5).epsilon(1e-15));

    Tensor<double> big({2}, {40.0, -40.0});
    auto s = sigmoid(big);
    CHECK(s[0] > 0.0);
    CHECK(s[0] < 1.0 + 1e-15);
    CHECK(s[1] > 0.0);
    CHECK(s.all_finite());
}

TEST_CASE("softmax of equal logits is uniform") {
    auto p = softmax(Tensor<double>::full({10}, 3.7));
    for (std::size_t i = 0; i < 10; ++i) CHECK(p[i] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("softmax sums to one and is shift invariant") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Pcg32 rng(seed);
        Tensor<double> z({7});
        for (auto& v : z) v = rng.next_double() * 20.0 - 10.0;
        auto p = softmax(z);
        double sum = 0.0;
        for (auto v : p) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-12);

        Tensor<double> zs = z;
        for (auto& v : zs) v += 123.456;
        auto ps = softmax(zs);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::fabs(ps[i] - p[i]) <= 1e-12);
    }
}

TEST_CASE("softmax stays finite on extreme logits") {
    Tensor<double> z({4}, {1000.0, -1000.0, 999.5, 0.0});
    auto p = softmax(z);
    CHECK(p.all_finite());
    double sum = 0.0;
    for (auto v : p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

namespace {

// directional check of a Jacobian-transpose product against finite differences
template <typename Fwd, typename Bwd>
void check_jvp(Fwd&& fwd, Bwd&& bwd, std::size_t n, std::uint64_t seed, double h = 1e-6) {
    Pcg32 rng(seed);
    Tensor<double> x({n}), cograd({n});
    for (auto& v : x) v = rng.next_double() * 2.0 - 1.0 + 0.05;  // bias away from relu kink
    for (auto& v : cograd) v = rng.next_double() * 2.0 - 1.0;

    auto grad = bwd(x, cograd);
    for (std::size_t i = 0; i < n; ++i) {
        Tensor<double> xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        auto fp = fwd(xp), fm = fwd(xm);
        double fd = 0.0;
        for (std::size_t j = 0; j < n; ++j) fd += cograd[j] * (fp[j] - fm[j]) / (2.0 * h);
        CHECK(std::fabs(grad[i] - fd) < 1e-6 * std::max(1.0, std::fabs(fd)));
    }
}

}  // namespace

TEST_CASE("activation backwards match finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        check_jvp([](const Tensor<double>& x) { return relu(x); },
                  [](const Tensor<double>& x, const Tensor<double>& g) { return relu_backward(x, g); }, 9, seed);
        check_jvp([](const Tensor<double>& x) { return sigmoid(x); },
                  [](const Tensor<double>& x, const Tensor<double>& g) {
                      return sigmoid_backward(sigmoid(x), g);
                  },
                  9, seed);
        check_jvp([](const Tensor<double>& x) { return softmax(x); },
                  [](const Tensor<double>& x, const Tensor<double>& g) {
                      return softmax_backward(softmax(x), g);
                  },
                  9, seed);
    }
}
