#pragma once

#include <algorithm>
#include <vector>

#include "stylemem/dataset.hpp"
#include "stylemem/model.hpp"

namespace stylemem {

// One evaluated sample: what the classifier said, how sure it was, how well
// the decoder rebuilt the input, and the style memory it produced.
template <typename T>
struct SampleRecord {
    int label = 0;
    int prediction = 0;
    double confidence = 0.0;
    double recon_error = 0.0;
    std::vector<T> style;
};

template <typename T>
struct EvalResult {
    double accuracy = 0.0;
    double mean_recon_error = 0.0;
    std::vector<SampleRecord<T>> records;
};

// Clean-input evaluation (no noise injection): accuracy over argmax(y) plus a
// per-sample record for the downstream experiments. Chunked internally.
template <typename T>
EvalResult<T> evaluate(const ModelParams<T>& params, const Dataset<T>& ds, std::size_t chunk = 250) {
    if (ds.size() == 0) fail(ErrorCode::bad_argument, "evaluate: dataset is empty");
    const ArchConfig& a = params.arch;
    const std::size_t pixels = ds.image_pixels();
    if (pixels != a.pixels())
        fail(ErrorCode::shape_mismatch, "evaluate: dataset images have " + std::to_string(pixels) +
                                            " pixels, model expects " + std::to_string(a.pixels()));

    EvalResult<T> r;
    r.records.resize(ds.size());
    BatchCache<T> cache;
    std::size_t correct = 0;
    double recon_sum = 0.0;

    for (std::size_t begin = 0; begin < ds.size(); begin += chunk) {
        const std::size_t n = std::min(chunk, ds.size() - begin);
        Tensor<T> rows({n, pixels});
        std::copy(ds.image(begin), ds.image(begin) + n * pixels, rows.begin());
        model_forward(params, rows, cache);

        for (std::size_t s = 0; s < n; ++s) {
            SampleRecord<T>& rec = r.records[begin + s];
            rec.label = ds.labels[begin + s];
            const T* probs = cache.probs.data() + s * a.num_classes;
            std::size_t best = 0;
            for (std::size_t j = 1; j < a.num_classes; ++j)
                if (probs[j] > probs[best]) best = j;
            rec.prediction = static_cast<int>(best);
            rec.confidence = static_cast<double>(probs[best]);
            const T* recon = cache.recon.data() + s * pixels;
            const T* x = rows.data() + s * pixels;
            double lr = 0.0;
            for (std::size_t i = 0; i < pixels; ++i) {
                double d = static_cast<double>(recon[i]) - static_cast<double>(x[i]);
                lr += d * d;
            }
            rec.recon_error = lr;
            const T* style = cache.style.data() + s * a.style_units;
            rec.style.assign(style, style + a.style_units);

            correct += (rec.prediction == rec.label);
            recon_sum += lr;
        }
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
    r.mean_recon_error = recon_sum / static_cast<double>(ds.size());
    return r;
}

}  // namespace stylemem
