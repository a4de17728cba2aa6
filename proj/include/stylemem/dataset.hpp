#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stylemem/idx.hpp"
#include "stylemem/rng.hpp"
#include "stylemem/tensor.hpp"

namespace stylemem {

enum class DatasetKind { mnist, emnist_letters };

inline const char* dataset_kind_name(DatasetKind k) {
    return k == DatasetKind::mnist ? "mnist" : "emnist-letters";
}

inline DatasetKind dataset_kind_from_name(const std::string& name) {
    if (name == "mnist") return DatasetKind::mnist;
    if (name == "emnist-letters") return DatasetKind::emnist_letters;
    fail(ErrorCode::bad_argument, "unknown dataset '" + name + "' (expected mnist or emnist-letters)");
}

inline LabelScheme label_scheme_for(DatasetKind k) {
    return k == DatasetKind::mnist ? LabelScheme::mnist : LabelScheme::emnist_letters;
}

// Immutable after load: images [N,1,rows,cols] with pixels in [0,1], one
// class index per image.
template <typename T>
struct Dataset {
    Tensor<T> images;
    std::vector<int> labels;
    std::size_t num_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t image_pixels() const { return images.size() / std::max<std::size_t>(1, images.extent(0)); }

    const T* image(std::size_t i) const { return images.data() + i * image_pixels(); }
    T* image(std::size_t i) { return images.data() + i * image_pixels(); }
};

// In-place transpose of one square image plane; EMNIST files store images
// transposed relative to MNIST orientation. Involution.
template <typename T>
void orient_emnist(T* image, std::size_t side) {
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = r + 1; c < side; ++c) std::swap(image[r * side + c], image[c * side + r]);
}

template <typename T>
Tensor<T> orient_emnist(const Tensor<T>& image) {
    if (image.rank() < 2) fail(ErrorCode::shape_mismatch, "orient_emnist: expected a 2-d image");
    std::size_t side = image.extent(image.rank() - 1);
    if (image.extent(image.rank() - 2) != side || image.size() != side * side)
        fail(ErrorCode::shape_mismatch, "orient_emnist: expected one square image, got " +
                                            shape_to_string(image.shape()));
    Tensor<T> out = image;
    orient_emnist(out.data(), side);
    return out;
}

namespace detail {
inline std::filesystem::path resolve_idx_file(const std::filesystem::path& dir, const std::string& stem,
                                              std::string& missing_list) {
    std::filesystem::path raw = dir / stem;
    if (std::filesystem::exists(raw)) return raw;
    std::filesystem::path gz = dir / (stem + ".gz");
    if (std::filesystem::exists(gz)) return gz;
    if (!missing_list.empty()) missing_list += ", ";
    missing_list += stem + "[.gz]";
    return {};
}

inline std::pair<std::string, std::string> split_file_stems(DatasetKind kind, const std::string& split) {
    if (kind == DatasetKind::mnist) {
        std::string prefix = split == "train" ? "train" : "t10k";
        return {prefix + "-images-idx3-ubyte", prefix + "-labels-idx1-ubyte"};
    }
    return {"emnist-letters-" + split + "-images-idx3-ubyte", "emnist-letters-" + split + "-labels-idx1-ubyte"};
}
}  // namespace detail

inline bool dataset_present(DatasetKind kind, const std::filesystem::path& dir, const std::string& split) {
    std::string missing;
    auto [img_stem, lbl_stem] = detail::split_file_stems(kind, split);
    auto a = detail::resolve_idx_file(dir, img_stem, missing);
    auto b = detail::resolve_idx_file(dir, lbl_stem, missing);
    return !a.empty() && !b.empty();
}

// Load one split ("train" or "test"), normalizing pixels and fixing EMNIST
// orientation. Missing files produce an actionable list of expected names.
template <typename T>
Dataset<T> load_dataset(DatasetKind kind, const std::filesystem::path& dir, const std::string& split) {
    std::string missing;
    auto [img_stem, lbl_stem] = detail::split_file_stems(kind, split);
    auto img_path = detail::resolve_idx_file(dir, img_stem, missing);
    auto lbl_path = detail::resolve_idx_file(dir, lbl_stem, missing);
    if (img_path.empty() || lbl_path.empty())
        fail(ErrorCode::data_missing,
             "dataset files not found in " + dir.string() + ": expected " + missing);

    Dataset<T> ds;
    ds.images = parse_idx_images<T>(read_file_bytes(img_path));
    ds.labels = parse_idx_labels(read_file_bytes(lbl_path), label_scheme_for(kind));
    ds.num_classes = label_class_count(label_scheme_for(kind));
    if (ds.images.extent(0) != ds.labels.size())
        fail(ErrorCode::data_format, "dataset: " + std::to_string(ds.images.extent(0)) + " images but " +
                                         std::to_string(ds.labels.size()) + " labels");
    if (kind == DatasetKind::emnist_letters) {
        std::size_t side = ds.images.extent(2);
        for (std::size_t i = 0; i < ds.images.extent(0); ++i) orient_emnist(ds.image(i), side);
    }
    return ds;
}

// Additive Gaussian pixel noise, clamped back to [0,1]. The clean image stays
// the reconstruction target; this only perturbs the encoder input.
template <typename T>
void inject_noise_span(const T* clean, T* noisy, std::size_t n, double sigma, GaussianStream& gauss) {
    if (sigma < 0.0) fail(ErrorCode::bad_argument, "inject_noise: sigma must be >= 0");
    if (sigma == 0.0) {
        std::copy(clean, clean + n, noisy);
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = static_cast<double>(clean[i]) + sigma * gauss.next();
        noisy[i] = static_cast<T>(v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v));
    }
}

template <typename T>
Tensor<T> inject_noise(const Tensor<T>& x, double sigma, std::uint64_t seed) {
    GaussianStream gauss(seed);
    Tensor<T> out(x.shape());
    inject_noise_span(x.data(), out.data(), x.size(), sigma, gauss);
    return out;
}

// Seeded epoch shuffle into fixed-size batches; every sample appears exactly
// once per epoch and the final short batch is kept.
class BatchIterator {
public:
    BatchIterator(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch)
        : batch_size_(batch_size) {
        if (batch_size == 0) fail(ErrorCode::bad_argument, "batch size must be positive");
        order_.resize(dataset_size);
        for (std::size_t i = 0; i < dataset_size; ++i) order_[i] = static_cast<std::uint32_t>(i);
        Pcg32 rng(mix_seed({seed, epoch, rng_stream::shuffle}));
        for (std::size_t i = dataset_size; i > 1; --i) {
            std::size_t j = rng.next_below(static_cast<std::uint32_t>(i));
            std::swap(order_[i - 1], order_[j]);
        }
    }

    std::size_t batch_count() const { return (order_.size() + batch_size_ - 1) / batch_size_; }

    // indices of batch b, in visitation order
    std::vector<std::uint32_t> batch(std::size_t b) const {
        std::size_t begin = b * batch_size_;
        std::size_t end = std::min(order_.size(), begin + batch_size_);
        return {order_.begin() + begin, order_.begin() + end};
    }

    const std::vector<std::uint32_t>& order() const { return order_; }

private:
    std::size_t batch_size_;
    std::vector<std::uint32_t> order_;
};

}  // namespace stylemem
