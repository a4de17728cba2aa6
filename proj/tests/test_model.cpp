#include "doctest.h"

#include <cmath>

#include "stylemem/model.hpp"
#include "stylemem/train.hpp"
#include "support/model_fd.hpp"

using namespace stylemem;

namespace {

Tensor<double> random_image_rows(std::size_t batch, std::size_t pixels, std::uint64_t seed) {
    Pcg32 rng(seed);
    Tensor<double> x({batch, pixels});
    for (auto& v : x) v = 0.05 + 0.9 * rng.next_double();
    return x;
}

std::vector<int> random_labels(std::size_t batch, std::size_t classes, std::uint64_t seed) {
    Pcg32 rng(seed);
    std::vector<int> l(batch);
    for (auto& v : l) v = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(classes)));
    return l;
}

// finite differences on tiny networks lose more to scheduling than they gain
// from two cores
struct SerialGuard {
    unsigned saved = thread_count();
    SerialGuard() { set_thread_count(1); }
    ~SerialGuard() { set_thread_count(saved); }
};

template <typename T>
double grad_abs_sum(const ModelParams<T>& grads, bool decoder_only) {
    double s = 0.0;
    visit_params(grads, [&](const char* name, const Tensor<T>& t) {
        std::string n(name);
        bool is_decoder = n.rfind("dfc", 0) == 0 || n.rfind("deconv", 0) == 0;
        if (is_decoder != decoder_only) return;
        for (std::size_t i = 0; i < t.size(); ++i) s += std::fabs(static_cast<double>(t[i]));
    });
    return s;
}

}  // namespace

TEST_CASE("encoder produces the contracted latent shapes") {
    for (std::size_t classes : {std::size_t(10), std::size_t(26)}) {
        auto params = init_params<float>(ArchConfig::standard(classes), 7);
        Tensor<float> img({1, 28, 28});
        Pcg32 rng(9);
        for (auto& v : img) v = static_cast<float>(rng.next_double());

        auto enc = encode(params, img);
        CHECK(enc.code.class_probs.shape() == Shape{classes});
        CHECK(enc.code.style.shape() == Shape{16});
        double sum = 0.0;
        for (auto v : enc.code.class_probs) sum += v;
        CHECK(std::fabs(sum - 1.0) < 1e-6);
        for (auto v : enc.code.style) {
            CHECK(v > 0.0f);
            CHECK(v < 1.0f);
        }

        // deterministic: the same input twice gives bitwise-identical codes
        auto enc2 = encode(params, img);
        for (std::size_t i = 0; i < classes; ++i) CHECK(enc.code.class_probs[i] == enc2.code.class_probs[i]);
        for (std::size_t i = 0; i < 16; ++i) CHECK(enc.code.style[i] == enc2.code.style[i]);
    }
}

TEST_CASE("zero image with zero-initialized biases yields a uniform class vector") {
    auto params = init_params<double>(ArchConfig::standard(10), 3);
    auto enc = encode(params, Tensor<double>::zeros({1, 28, 28}));
    for (auto v : enc.code.class_probs) CHECK(v == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("decode maps any valid code to a 28x28 image, deterministically") {
    auto params = init_params<double>(ArchConfig::standard(10), 11);
    LatentCode<double> code;
    code.class_probs = one_hot<double>(3, 10);  // exact one-hot is accepted
    code.style = Tensor<double>::full({16}, 0.5);

    auto img = decode(params, code);
    CHECK(img.shape() == Shape{1, 28, 28});
    for (auto v : img) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    auto img2 = decode(params, code);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(img[i] == img2[i]);

    LatentCode<double> bad;
    bad.class_probs = Tensor<double>::zeros({9});
    bad.style = Tensor<double>::full({16}, 0.5);
    CHECK_THROWS_AS(decode(params, bad), Error);
    bad.class_probs = one_hot<double>(0, 10);
    bad.style = Tensor<double>::full({15}, 0.5);
    CHECK_THROWS_AS(decode(params, bad), Error);
}

TEST_CASE("encode rejects wrong input shapes") {
    auto params = init_params<float>(ArchConfig::standard(10), 5);
    CHECK_THROWS_AS(encode(params, Tensor<float>::zeros({1, 27, 28})), Error);
}

TEST_CASE("alpha=0 leaves decoder gradients identically zero") {
    ArchConfig arch = ArchConfig::reduced(3);
    auto params = init_params<double>(arch, 21);
    auto x = random_image_rows(4, arch.pixels(), 22);
    auto labels = random_labels(4, arch.num_classes, 23);

    BatchCache<double> cache;
    model_forward(params, x, cache);
    ModelParams<double> grads(arch);
    JointWorkspace<double> ws;
    joint_backward(params, cache, x, labels, 0.0, GradFlags{}, grads, ws);

    CHECK(grad_abs_sum(grads, /*decoder_only=*/true) == 0.0);
    CHECK(grad_abs_sum(grads, /*decoder_only=*/false) > 0.0);
}

TEST_CASE("omitting the classifier loss with a detached code zeroes the classifier head") {
    ArchConfig arch = ArchConfig::reduced(3);
    auto params = init_params<double>(arch, 31);
    auto x = random_image_rows(4, arch.pixels(), 32);
    auto labels = random_labels(4, arch.num_classes, 33);

    BatchCache<double> cache;
    model_forward(params, x, cache);
    ModelParams<double> grads(arch);
    JointWorkspace<double> ws;

    GradFlags detached;
    detached.include_classifier_loss = false;
    detached.detach_code = true;
    joint_backward(params, cache, x, labels, 0.05, detached, grads, ws);

    double class_head = 0.0;
    for (auto v : grads.class_w) class_head += std::fabs(v);
    for (auto v : grads.class_b) class_head += std::fabs(v);
    CHECK(class_head == 0.0);
    // decoder still learns
    CHECK(grad_abs_sum(grads, /*decoder_only=*/true) > 0.0);

    // without detaching, the decoder's use of y reaches the classifier head
    GradFlags recon_only;
    recon_only.include_classifier_loss = false;
    joint_backward(params, cache, x, labels, 0.05, recon_only, grads, ws);
    double through_decoder = 0.0;
    for (auto v : grads.class_w) through_decoder += std::fabs(v);
    CHECK(through_decoder > 0.0);
}

TEST_CASE("end-to-end joint gradient matches finite differences on the reduced architecture") {
    SerialGuard serial;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ArchConfig arch = ArchConfig::reduced(3);
        auto params = init_params<double>(arch, seed * 101);
        auto x = random_image_rows(2, arch.pixels(), seed * 101 + 1);
        auto labels = random_labels(2, arch.num_classes, seed * 101 + 2);

        auto result = fdcheck::check_model_gradient(params, x, labels, 0.05);
        CAPTURE(seed);
        CHECK(result.coordinates > 3000);
        CHECK(result.max_rel_error < 1e-4);
    }
}

TEST_CASE("single-sample batch gradient matches finite differences") {
    SerialGuard serial;
    ArchConfig arch = ArchConfig::reduced(4);
    auto params = init_params<double>(arch, 77);
    auto x = random_image_rows(1, arch.pixels(), 78);
    std::vector<int> labels{2};
    auto result = fdcheck::check_model_gradient(params, x, labels, 0.05);
    CHECK(result.max_rel_error < 1e-4);
}
