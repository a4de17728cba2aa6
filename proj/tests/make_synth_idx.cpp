// Writes a procedural glyph dataset as IDX files with MNIST or EMNIST-letters
// naming, so the CLI and acceptance checks can run end-to-end without real
// downloads. Usage:
//   make_synth_idx <out_dir> <n_train> <n_test> <classes:10|26> <seed>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "stylemem/dataset.hpp"
#include "stylemem/idx.hpp"
#include "support/synth.hpp"

using namespace stylemem;

namespace {

void write_split(const std::filesystem::path& dir, const std::string& img_name,
                 const std::string& lbl_name, std::size_t n, std::size_t classes, std::uint64_t seed) {
    auto ds = synth::make_dataset<float>(n, classes, seed);
    LabelScheme scheme = classes == 26 ? LabelScheme::emnist_letters : LabelScheme::mnist;
    if (scheme == LabelScheme::emnist_letters) {
        // EMNIST files store transposed images; the loader undoes this
        const std::size_t side = ds.images.extent(2);
        for (std::size_t i = 0; i < ds.size(); ++i) orient_emnist(ds.image(i), side);
    }
    write_file_bytes(dir / img_name, serialize_idx_images(ds.images));
    write_file_bytes(dir / lbl_name, serialize_idx_labels(ds.labels, scheme));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 6) {
        std::fprintf(stderr, "usage: %s <out_dir> <n_train> <n_test> <classes:10|26> <seed>\n", argv[0]);
        return 2;
    }
    std::filesystem::path dir = argv[1];
    std::size_t n_train = std::strtoull(argv[2], nullptr, 10);
    std::size_t n_test = std::strtoull(argv[3], nullptr, 10);
    std::size_t classes = std::strtoull(argv[4], nullptr, 10);
    std::uint64_t seed = std::strtoull(argv[5], nullptr, 10);
    if (classes != 10 && classes != 26) {
        std::fprintf(stderr, "classes must be 10 (mnist naming) or 26 (emnist-letters naming)\n");
        return 2;
    }
    std::filesystem::create_directories(dir);

    if (classes == 10) {
        write_split(dir, "train-images-idx3-ubyte", "train-labels-idx1-ubyte", n_train, classes, seed);
        write_split(dir, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", n_test, classes, seed + 1);
    } else {
        write_split(dir, "emnist-letters-train-images-idx3-ubyte", "emnist-letters-train-labels-idx1-ubyte",
                    n_train, classes, seed);
        write_split(dir, "emnist-letters-test-images-idx3-ubyte", "emnist-letters-test-labels-idx1-ubyte",
                    n_test, classes, seed + 1);
    }
    std::printf("wrote %zu train / %zu test synthetic samples (%zu classes) to %s\n", n_train, n_test,
                classes, dir.string().c_str());
    return 0;
}
