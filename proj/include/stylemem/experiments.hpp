#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "stylemem/dataset.hpp"
#include "stylemem/eval.hpp"
#include "stylemem/model.hpp"

namespace stylemem {

// ---- reconstruction (autoencoding with the network's own prediction) ----

template <typename T>
struct ReconstructionSample {
    std::size_t index = 0;
    int label = 0;
    int prediction = 0;
    double confidence = 0.0;
    double recon_error = 0.0;
    Tensor<T> original;
    Tensor<T> reconstruction;
};

template <typename T>
std::vector<ReconstructionSample<T>> reconstruct_samples(const ModelParams<T>& params,
                                                         const Dataset<T>& ds,
                                                         const std::vector<std::size_t>& indices) {
    const ArchConfig& a = params.arch;
    std::vector<ReconstructionSample<T>> out;
    out.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= ds.size())
            fail(ErrorCode::bad_argument, "reconstruct: index " + std::to_string(idx) + " outside dataset of " +
                                              std::to_string(ds.size()));
        ReconstructionSample<T> s;
        s.index = idx;
        s.label = ds.labels[idx];
        s.original = Tensor<T>({1, a.input_side, a.input_side});
        std::copy(ds.image(idx), ds.image(idx) + a.pixels(), s.original.begin());

        auto enc = encode(params, s.original);
        std::size_t best = 0;
        for (std::size_t j = 1; j < a.num_classes; ++j)
            if (enc.code.class_probs[j] > enc.code.class_probs[best]) best = j;
        s.prediction = static_cast<int>(best);
        s.confidence = static_cast<double>(enc.code.class_probs[best]);
        s.reconstruction = decode(params, enc.code);

        double lr = 0.0;
        for (std::size_t i = 0; i < s.original.size(); ++i) {
            double d = static_cast<double>(s.reconstruction[i]) - static_cast<double>(s.original[i]);
            lr += d * d;
        }
        s.recon_error = lr;
        out.push_back(std::move(s));
    }
    return out;
}

// ---- one-hot label correction ----

template <typename T>
struct CorrectionResult {
    int prediction = 0;
    double confidence = 0.0;
    Tensor<T> style;             // shared bit-identically by both decodes
    Tensor<T> predicted_recon;   // decode(y_pred, m)
    Tensor<T> corrected_recon;   // decode(onehot(true_label), m)
};

template <typename T>
CorrectionResult<T> correct_and_reconstruct(const ModelParams<T>& params, const Tensor<T>& x,
                                            std::size_t true_label) {
    const ArchConfig& a = params.arch;
    if (true_label >= a.num_classes)
        fail(ErrorCode::bad_argument, "correct: label " + std::to_string(true_label) + " outside " +
                                          std::to_string(a.num_classes) + " classes");
    auto enc = encode(params, x);
    CorrectionResult<T> r;
    std::size_t best = 0;
    for (std::size_t j = 1; j < a.num_classes; ++j)
        if (enc.code.class_probs[j] > enc.code.class_probs[best]) best = j;
    r.prediction = static_cast<int>(best);
    r.confidence = static_cast<double>(enc.code.class_probs[best]);
    r.style = enc.code.style;

    r.predicted_recon = decode(params, enc.code);
    LatentCode<T> corrected{one_hot<T>(true_label, a.num_classes), enc.code.style};
    r.corrected_recon = decode(params, corrected);
    return r;
}

// decode(onehot(target_class), style taken from another sample); no quality
// contract, emitted for inspection
template <typename T>
Tensor<T> transfer_style(const ModelParams<T>& params, std::size_t target_class, const Tensor<T>& style) {
    LatentCode<T> code{one_hot<T>(target_class, params.arch.num_classes), style};
    return decode(params, code);
}

// ---- exact nearest neighbours in image space vs style-memory space ----

enum class NeighborSpace { image, style };

inline const char* neighbor_space_name(NeighborSpace s) {
    return s == NeighborSpace::image ? "image" : "style";
}

struct NeighborEntry {
    std::size_t index = 0;
    int label = 0;
    double image_distance = 0.0;
    double style_distance = 0.0;
};

struct NeighborReport {
    std::size_t query_index = 0;
    NeighborSpace space = NeighborSpace::image;
    std::vector<NeighborEntry> neighbors;     // ascending by queried-space distance, ties by index
    double mean_image_distance = 0.0;
    double mean_style_distance = 0.0;
    std::vector<std::size_t> class_histogram;  // neighbour labels only, query excluded
};

namespace detail {
template <typename T>
double sq_dist(const T* a, const T* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += d * d;
    }
    return s;
}
}  // namespace detail

// Exact (non-approximate) k nearest by Euclidean norm over flattened pixels
// or over the style vectors. `styles` holds one style row per dataset sample,
// from clean encodings.
template <typename T>
NeighborReport nearest_neighbors(const Dataset<T>& ds, const std::vector<std::vector<T>>& styles,
                                 std::size_t query, NeighborSpace space, std::size_t k = 97) {
    const std::size_t n = ds.size();
    if (styles.size() != n)
        fail(ErrorCode::bad_argument, "neighbors: style table size " + std::to_string(styles.size()) +
                                          " != dataset size " + std::to_string(n));
    if (query >= n) fail(ErrorCode::bad_argument, "neighbors: query index outside dataset");
    if (k >= n)
        fail(ErrorCode::bad_argument, "neighbors: k=" + std::to_string(k) +
                                          " must be smaller than the dataset size " + std::to_string(n));

    const std::size_t pixels = ds.image_pixels();
    const std::size_t style_dim = styles[query].size();

    std::vector<std::pair<double, std::size_t>> keyed;  // (squared distance in queried space, index)
    keyed.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == query) continue;
        double d2 = space == NeighborSpace::image
                        ? detail::sq_dist(ds.image(query), ds.image(i), pixels)
                        : detail::sq_dist(styles[query].data(), styles[i].data(), style_dim);
        keyed.emplace_back(d2, i);
    }
    std::partial_sort(keyed.begin(), keyed.begin() + k, keyed.end());

    NeighborReport r;
    r.query_index = query;
    r.space = space;
    r.class_histogram.assign(ds.num_classes, 0);
    r.neighbors.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        NeighborEntry e;
        e.index = keyed[j].second;
        e.label = ds.labels[e.index];
        e.image_distance = std::sqrt(detail::sq_dist(ds.image(query), ds.image(e.index), pixels));
        e.style_distance = std::sqrt(detail::sq_dist(styles[query].data(), styles[e.index].data(), style_dim));
        r.mean_image_distance += e.image_distance;
        r.mean_style_distance += e.style_distance;
        r.class_histogram[static_cast<std::size_t>(e.label)] += 1;
        r.neighbors.push_back(e);
    }
    r.mean_image_distance /= static_cast<double>(k);
    r.mean_style_distance /= static_cast<double>(k);
    return r;
}

// ---- style interpolation (convex combinations of two style memories) ----

template <typename T>
struct InterpolationFrame {
    double lambda = 0.0;
    Tensor<T> style;  // lambda*m1 + (1-lambda)*m2
    Tensor<T> image;
};

template <typename T>
struct InterpolationTrack {
    std::size_t class_label = 0;
    Tensor<T> style_a, style_b;  // m1, m2
    std::vector<InterpolationFrame<T>> frames;
};

inline std::string lambda_to_string(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Fig-style default: lambda from 0.1 to 1.0 in steps of 0.1.
inline std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
    return grid;
}

template <typename T>
InterpolationTrack<T> interpolate_styles(const ModelParams<T>& params, std::size_t class_label,
                                         const Tensor<T>& style_a, const Tensor<T>& style_b,
                                         const std::vector<double>& lambda_grid) {
    const ArchConfig& a = params.arch;
    if (style_a.size() != a.style_units || style_b.size() != a.style_units)
        fail(ErrorCode::shape_mismatch, "interpolate: style vectors must have length " +
                                            std::to_string(a.style_units));
    InterpolationTrack<T> track;
    track.class_label = class_label;
    track.style_a = style_a;
    track.style_b = style_b;
    Tensor<T> class_vec = one_hot<T>(class_label, a.num_classes);

    for (double lambda : lambda_grid) {
        if (lambda < 0.0 || lambda > 1.0)
            fail(ErrorCode::bad_argument, "interpolate: lambda " + lambda_to_string(lambda) + " outside [0,1]");
        InterpolationFrame<T> f;
        f.lambda = lambda;
        f.style = Tensor<T>({a.style_units});
        const T l = static_cast<T>(lambda);
        for (std::size_t i = 0; i < a.style_units; ++i)
            f.style[i] = l * style_a[i] + (T(1) - l) * style_b[i];
        f.image = decode(params, LatentCode<T>{class_vec, f.style});
        track.frames.push_back(std::move(f));
    }
    return track;
}

// ---- misclassification signal from reconstruction error ----

struct DetectorSweepRow {
    double threshold = 0.0;
    double precision = 0.0;  // flagged-and-misclassified / flagged
    double recall = 0.0;     // flagged-and-misclassified / misclassified
};

struct MisclassificationReport {
    std::size_t correct_count = 0;
    std::size_t misclassified_count = 0;
    double mean_recon_correct = 0.0;
    bool has_misclassified = false;
    double mean_recon_misclassified = 0.0;  // meaningful only when has_misclassified
    std::vector<DetectorSweepRow> sweep;
};

// Partition evaluation records by correctness and sweep a reconstruction-error
// threshold as a misclassification flag.
template <typename T>
MisclassificationReport misclassification_detector(const std::vector<SampleRecord<T>>& records,
                                                   std::size_t max_sweep_rows = 200) {
    MisclassificationReport r;
    double sum_correct = 0.0, sum_wrong = 0.0;
    for (const auto& rec : records) {
        if (rec.prediction == rec.label) {
            r.correct_count += 1;
            sum_correct += rec.recon_error;
        } else {
            r.misclassified_count += 1;
            sum_wrong += rec.recon_error;
        }
    }
    if (r.correct_count) r.mean_recon_correct = sum_correct / static_cast<double>(r.correct_count);
    r.has_misclassified = r.misclassified_count > 0;
    if (!r.has_misclassified) return r;  // degenerate partition, reported explicitly
    r.mean_recon_misclassified = sum_wrong / static_cast<double>(r.misclassified_count);

    std::vector<double> errors;
    errors.reserve(records.size());
    for (const auto& rec : records) errors.push_back(rec.recon_error);
    std::sort(errors.begin(), errors.end());
    std::vector<double> thresholds;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
        if (errors[i] < errors[i + 1]) thresholds.push_back(0.5 * (errors[i] + errors[i + 1]));
    if (thresholds.size() > max_sweep_rows) {
        std::vector<double> kept;
        for (std::size_t i = 0; i < max_sweep_rows; ++i)
            kept.push_back(thresholds[i * (thresholds.size() - 1) / (max_sweep_rows - 1)]);
        thresholds.swap(kept);
    }

    for (double th : thresholds) {
        std::size_t flagged = 0, hits = 0;
        for (const auto& rec : records) {
            if (rec.recon_error > th) {
                flagged += 1;
                hits += (rec.prediction != rec.label);
            }
        }
        DetectorSweepRow row;
        row.threshold = th;
        row.precision = flagged ? static_cast<double>(hits) / static_cast<double>(flagged) : 0.0;
        row.recall = static_cast<double>(hits) / static_cast<double>(r.misclassified_count);
        r.sweep.push_back(row);
    }
    return r;
}

}  // namespace stylemem
