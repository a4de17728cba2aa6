#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stylemem/bytes.hpp"
#include "stylemem/idx.hpp"
#include "stylemem/tensor.hpp"

namespace stylemem {

enum class ImageFormat { pgm, png };

inline ImageFormat image_format_from_name(const std::string& name) {
    if (name == "pgm") return ImageFormat::pgm;
    if (name == "png") return ImageFormat::png;
    fail(ErrorCode::bad_argument, "unknown image format '" + name + "' (expected pgm or png)");
}

inline const char* image_format_extension(ImageFormat f) { return f == ImageFormat::pgm ? ".pgm" : ".png"; }

// 8-bit grayscale raster with row-major bytes.
struct GrayImage {
    std::size_t width = 0, height = 0;
    std::vector<std::uint8_t> pixels;
};

// round(255 * clamp(p, 0, 1)), halves up
template <typename T>
inline std::uint8_t pixel_to_byte(T p) {
    double v = static_cast<double>(p);
    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return static_cast<std::uint8_t>(std::floor(255.0 * v + 0.5));
}

// Tiles laid out row-major with 1-pixel gray separators. rows*cols may exceed
// the tile count; missing cells stay at the separator shade.
template <typename T>
GrayImage compose_grid(const std::vector<Tensor<T>>& tiles, std::size_t rows, std::size_t cols) {
    if (tiles.empty()) fail(ErrorCode::bad_argument, "compose_grid: no tiles given");
    if (rows * cols < tiles.size())
        fail(ErrorCode::bad_argument, "compose_grid: " + std::to_string(tiles.size()) + " tiles do not fit " +
                                          std::to_string(rows) + "x" + std::to_string(cols) + " cells");
    const std::size_t side = tiles.front().shape().back();
    for (const auto& t : tiles)
        if (t.size() != side * side)
            fail(ErrorCode::shape_mismatch, "compose_grid: mixed tile sizes");

    constexpr std::uint8_t separator_shade = 128;
    GrayImage img;
    img.width = cols * side + (cols - 1);
    img.height = rows * side + (rows - 1);
    img.pixels.assign(img.width * img.height, separator_shade);

    for (std::size_t t = 0; t < tiles.size(); ++t) {
        const std::size_t r = t / cols, c = t % cols;
        const std::size_t y0 = r * (side + 1), x0 = c * (side + 1);
        const Tensor<T>& tile = tiles[t];
        for (std::size_t y = 0; y < side; ++y)
            for (std::size_t x = 0; x < side; ++x)
                img.pixels[(y0 + y) * img.width + (x0 + x)] = pixel_to_byte(tile[y * side + x]);
    }
    return img;
}

inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

namespace detail {
inline void put_png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                          const std::vector<std::uint8_t>& body) {
    put_u32be(out, static_cast<std::uint32_t>(body.size()));
    std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), body.begin(), body.end());
    put_u32be(out, crc32(out.data() + crc_start, out.size() - crc_start));
}
}  // namespace detail

// Minimal grayscale PNG: filter 0 on every row, zlib stream made of stored
// deflate blocks. Byte-for-byte deterministic, no compressor involved.
inline std::vector<std::uint8_t> encode_png(const GrayImage& img) {
    std::vector<std::uint8_t> out{137, 'P', 'N', 'G', 13, 10, 26, 10};

    std::vector<std::uint8_t> ihdr;
    put_u32be(ihdr, static_cast<std::uint32_t>(img.width));
    put_u32be(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});  // 8-bit gray, deflate, adaptive, no interlace
    detail::put_png_chunk(out, "IHDR", ihdr);

    std::vector<std::uint8_t> raw;
    raw.reserve(img.height * (img.width + 1));
    for (std::size_t y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        raw.insert(raw.end(), img.pixels.begin() + y * img.width, img.pixels.begin() + (y + 1) * img.width);
    }

    std::vector<std::uint8_t> idat{0x78, 0x01};  // zlib header, 32K window, no preset
    std::size_t off = 0;
    while (off < raw.size()) {
        std::size_t len = std::min<std::size_t>(65535, raw.size() - off);
        bool final = off + len == raw.size();
        idat.push_back(final ? 1 : 0);  // BFINAL, BTYPE=00 (stored)
        idat.push_back(static_cast<std::uint8_t>(len));
        idat.push_back(static_cast<std::uint8_t>(len >> 8));
        idat.push_back(static_cast<std::uint8_t>(~len));
        idat.push_back(static_cast<std::uint8_t>(~len >> 8));
        idat.insert(idat.end(), raw.begin() + off, raw.begin() + off + len);
        off += len;
    }
    put_u32be(idat, adler32(raw.data(), raw.size()));
    detail::put_png_chunk(out, "IDAT", idat);
    detail::put_png_chunk(out, "IEND", {});
    return out;
}

// Compose and write a tile grid in the requested format.
template <typename T>
void write_grid(const std::vector<Tensor<T>>& tiles, std::size_t rows, std::size_t cols,
                const std::filesystem::path& path, ImageFormat format = ImageFormat::pgm) {
    GrayImage img = compose_grid(tiles, rows, cols);
    write_file_bytes(path, format == ImageFormat::pgm ? encode_pgm(img) : encode_png(img));
}

}  // namespace stylemem
