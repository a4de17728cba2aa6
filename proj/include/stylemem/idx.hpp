#pragma once

#include <zlib.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "stylemem/bytes.hpp"
#include "stylemem/error.hpp"
#include "stylemem/tensor.hpp"

namespace stylemem {

// IDX container parsing (the MNIST/EMNIST distribution format): big-endian
// magic, big-endian extents, then the raw payload.

constexpr std::uint32_t idx_image_magic = 0x00000803;  // unsigned byte, 3 dims
constexpr std::uint32_t idx_label_magic = 0x00000801;  // unsigned byte, 1 dim

enum class LabelScheme {
    mnist,           // labels 0..9 taken verbatim
    emnist_letters,  // raw labels 1..26 shifted to 0..25
};

inline std::size_t label_class_count(LabelScheme scheme) {
    return scheme == LabelScheme::mnist ? 10 : 26;
}

namespace detail {
inline std::uint32_t read_be32_checked(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                                       const char* what) {
    if (offset + 4 > bytes.size())
        fail(ErrorCode::data_format, std::string("idx: truncated while reading ") + what + " at byte offset " +
                                         std::to_string(offset));
    return get_u32be(bytes.data() + offset);
}
}  // namespace detail

// Parse an image file into [N,1,rows,cols] with pixels b/255 in [0,1].
template <typename T>
Tensor<T> parse_idx_images(const std::vector<std::uint8_t>& bytes) {
    std::uint32_t magic = detail::read_be32_checked(bytes, 0, "magic");
    if (magic != idx_image_magic) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "idx: bad image magic 0x%08x at byte offset 0", magic);
        fail(ErrorCode::data_format, buf);
    }
    std::uint64_t n = detail::read_be32_checked(bytes, 4, "image count");
    std::uint64_t rows = detail::read_be32_checked(bytes, 8, "row count");
    std::uint64_t cols = detail::read_be32_checked(bytes, 12, "column count");
    if (rows == 0 || cols == 0 || n == 0)
        fail(ErrorCode::data_format, "idx: zero extent in header (n=" + std::to_string(n) + ", rows=" +
                                         std::to_string(rows) + ", cols=" + std::to_string(cols) + ")");
    std::uint64_t payload = n * rows * cols;
    if (payload / rows / cols != n || payload > (std::uint64_t(1) << 40))
        fail(ErrorCode::data_format, "idx: header dimensions overflow a sane payload size");
    if (bytes.size() != 16 + payload)
        fail(ErrorCode::data_format, "idx: payload truncated, expected " + std::to_string(payload) +
                                         " pixel bytes from byte offset 16, file holds " +
                                         std::to_string(bytes.size() - 16));

    Tensor<T> images({static_cast<std::size_t>(n), 1, static_cast<std::size_t>(rows),
                      static_cast<std::size_t>(cols)});
    const std::uint8_t* src = bytes.data() + 16;
    T* dst = images.data();
    constexpr T scale = T(1) / T(255);
    for (std::uint64_t i = 0; i < payload; ++i) dst[i] = static_cast<T>(src[i]) * scale;
    return images;
}

// Parse a label file; EMNIST-letters raw labels 1..26 are shifted to 0..25.
inline std::vector<int> parse_idx_labels(const std::vector<std::uint8_t>& bytes, LabelScheme scheme) {
    std::uint32_t magic = detail::read_be32_checked(bytes, 0, "magic");
    if (magic != idx_label_magic) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "idx: bad label magic 0x%08x at byte offset 0", magic);
        fail(ErrorCode::data_format, buf);
    }
    std::uint64_t n = detail::read_be32_checked(bytes, 4, "label count");
    if (bytes.size() != 8 + n)
        fail(ErrorCode::data_format, "idx: label payload mismatch, header declares " + std::to_string(n) +
                                         " labels from byte offset 8, file holds " +
                                         std::to_string(bytes.size() - 8));

    const int offset = scheme == LabelScheme::emnist_letters ? 1 : 0;
    const int classes = static_cast<int>(label_class_count(scheme));
    std::vector<int> labels(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        int raw = bytes[8 + i];
        int shifted = raw - offset;
        if (shifted < 0 || shifted >= classes)
            fail(ErrorCode::data_format, "idx: label " + std::to_string(raw) + " at byte offset " +
                                             std::to_string(8 + i) + " outside the declared class range");
        labels[i] = shifted;
    }
    return labels;
}

// Writers, used for fixtures and for exporting synthetic datasets. Pixels are
// mapped back with round(p*255), the exact inverse of the parser's b/255.
template <typename T>
std::vector<std::uint8_t> serialize_idx_images(const Tensor<T>& images) {
    if (images.rank() != 4 || images.extent(1) != 1)
        fail(ErrorCode::shape_mismatch, "serialize_idx_images: expected [N,1,rows,cols], got " +
                                            shape_to_string(images.shape()));
    std::vector<std::uint8_t> out;
    out.reserve(16 + images.size());
    put_u32be(out, idx_image_magic);
    put_u32be(out, static_cast<std::uint32_t>(images.extent(0)));
    put_u32be(out, static_cast<std::uint32_t>(images.extent(2)));
    put_u32be(out, static_cast<std::uint32_t>(images.extent(3)));
    for (std::size_t i = 0; i < images.size(); ++i) {
        double p = static_cast<double>(images[i]);
        p = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
        out.push_back(static_cast<std::uint8_t>(p * 255.0 + 0.5));
    }
    return out;
}

inline std::vector<std::uint8_t> serialize_idx_labels(const std::vector<int>& labels, LabelScheme scheme) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    put_u32be(out, idx_label_magic);
    put_u32be(out, static_cast<std::uint32_t>(labels.size()));
    const int offset = scheme == LabelScheme::emnist_letters ? 1 : 0;
    for (int l : labels) out.push_back(static_cast<std::uint8_t>(l + offset));
    return out;
}

// Whole-file read; paths ending in .gz are inflated transparently via zlib.
inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io_failure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (path.extension() != ".gz") return bytes;

    std::vector<std::uint8_t> plain;
    plain.resize(std::max<std::size_t>(bytes.size() * 4, 1 << 20));
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)  // 16+: expect a gzip wrapper
        fail(ErrorCode::io_failure, "zlib: inflateInit failed for " + path.string());
    zs.next_in = bytes.data();
    zs.avail_in = static_cast<uInt>(bytes.size());
    std::size_t written = 0;
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        if (written == plain.size()) plain.resize(plain.size() * 2);
        zs.next_out = plain.data() + written;
        zs.avail_out = static_cast<uInt>(plain.size() - written);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            fail(ErrorCode::data_format, "gzip: corrupt stream in " + path.string());
        }
        written = plain.size() - zs.avail_out;
    }
    inflateEnd(&zs);
    plain.resize(written);
    return plain;
}

inline void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io_failure, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::io_failure, "short write to " + path.string());
}

}  // namespace stylemem
