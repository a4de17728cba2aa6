#include "doctest.h"

#include <cmath>

#include "stylemem/activations.hpp"
#include "stylemem/loss.hpp"
#include "stylemem/rng.hpp"

using namespace stylemem;

TEST_CASE("classifier loss point values") {
    // probability 1 on the true class
    Tensor<double> onehot({3}, {0.0, 1.0, 0.0});
    CHECK(classifier_loss(onehot, onehot) == 0.0);

    // uniform prediction over 10 classes
    Tensor<double> t10 = Tensor<double>::zeros({10});
    t10[4] = 1.0;
    auto uniform = Tensor<double>::full({10}, 0.1);
    CHECK(classifier_loss(t10, uniform) == doctest::Approx(std::log(10.0)).epsilon(1e-12));

    // true class 2 with predicted probability 0.5
    Tensor<double> t({3}, {0.0, 0.0, 1.0});
    Tensor<double> p({3}, {0.2, 0.3, 0.5});
    CHECK(classifier_loss(t, p) == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("classifier loss rejects non-one-hot targets") {
    Tensor<double> p({3}, {0.2, 0.3, 0.5});
    CHECK_THROWS_AS(classifier_loss(Tensor<double>({3}, {0.5, 0.5, 0.0}), p), Error);
    CHECK_THROWS_AS(classifier_loss(Tensor<double>({3}, {1.0, 1.0, 0.0}), p), Error);
    CHECK_THROWS_AS(classifier_loss(Tensor<double>::zeros({3}), p), Error);
}

TEST_CASE("fused logits form matches the naive cross entropy") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Pcg32 rng(seed + 1000);
        std::size_t n = 2 + rng.next_below(24);
        std::vector<double> z(n);
        for (auto& v : z) v = rng.next_double() * 30.0 - 15.0;
        std::size_t label = rng.next_below(static_cast<std::uint32_t>(n));

        // naive reference in long double: -log(exp(z_l) / sum exp(z))
        long double sum = 0.0L;
        for (auto v : z) sum += expl(static_cast<long double>(v));
        long double want = -logl(expl(static_cast<long double>(z[label])) / sum);

        double got = cross_entropy_from_logits(z.data(), n, label);
        CHECK(std::fabs(got - static_cast<double>(want)) <= 1e-10 * std::max(1.0, std::fabs(got)));
        CHECK(got >= 0.0);
    }
}

TEST_CASE("reconstruction loss point values and properties") {
    Tensor<double> x({4}, {0.1, 0.2, 0.3, 0.4});
    CHECK(reconstruction_loss(x, x) == 0.0);

    Tensor<double> y = x;
    y[2] += 1.0;
    CHECK(reconstruction_loss(y, x) == doctest::Approx(1.0).epsilon(1e-15));

    Tensor<double> a({2}, {0.5, 0.1});
    Tensor<double> b({2}, {0.2, 0.5});
    CHECK(reconstruction_loss(a, b) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(reconstruction_loss(a, b) == reconstruction_loss(b, a));

    CHECK_THROWS_AS(reconstruction_loss(x, a), Error);

    // zero iff equal
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Pcg32 rng(seed);
        Tensor<double> u({6}), v({6});
        for (std::size_t i = 0; i < 6; ++i) {
            u[i] = rng.next_double();
            v[i] = rng.next_double();
        }
        if (u[0] == v[0]) v[0] += 0.25;
        CHECK(reconstruction_loss(u, v) > 0.0);
    }
}

TEST_CASE("joint loss arithmetic and validation") {
    CHECK(joint_loss(1.0, 2.0, 0.05) == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(joint_loss(3.25, 17.0, 0.0) == 3.25);
    CHECK_THROWS_AS(joint_loss(1.0, 1.0, -0.1), Error);

    // monotone nondecreasing in each argument for alpha >= 0
    Pcg32 rng(7);
    for (int i = 0; i < 50; ++i) {
        double ly = rng.next_double() * 5.0;
        double lr = rng.next_double() * 5.0;
        double alpha = rng.next_double();
        double d = rng.next_double();
        CHECK(joint_loss(ly + d, lr, alpha) >= joint_loss(ly, lr, alpha));
        CHECK(joint_loss(ly, lr + d, alpha) >= joint_loss(ly, lr, alpha));
    }
}
