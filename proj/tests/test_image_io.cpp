#include "doctest.h"

#include <zlib.h>

#include "stylemem/image_io.hpp"
#include "stylemem/rng.hpp"

using namespace stylemem;

TEST_CASE("single-tile PGM carries the documented header and payload") {
    std::vector<Tensor<double>> tiles{Tensor<double>::zeros({28, 28})};
    auto img = compose_grid(tiles, 1, 1);
    CHECK(img.width == 28);
    CHECK(img.height == 28);
    auto bytes = encode_pgm(img);

    std::string header(bytes.begin(), bytes.begin() + 13);
    CHECK(header == "P5\n28 28\n255\n");
    // all-black tile: every payload byte is zero
    for (std::size_t i = 13; i < bytes.size(); ++i) CHECK(bytes[i] == 0);
    CHECK(bytes.size() == 13 + 28 * 28);
}

TEST_CASE("pixel mapping rounds halves up") {
    CHECK(pixel_to_byte(0.5) == 128);  // 127.5 rounds up
    CHECK(pixel_to_byte(0.0) == 0);
    CHECK(pixel_to_byte(1.0) == 255);
    CHECK(pixel_to_byte(-3.0) == 0);
    CHECK(pixel_to_byte(7.0) == 255);
    CHECK(pixel_to_byte(1.0 / 255.0) == 1);
}

TEST_CASE("grids interleave one-pixel separators") {
    std::vector<Tensor<double>> tiles;
    for (int t = 0; t < 4; ++t) tiles.push_back(Tensor<double>::full({2, 2}, t == 0 ? 1.0 : 0.0));
    auto img = compose_grid(tiles, 2, 2);
    CHECK(img.width == 5);
    CHECK(img.height == 5);
    // separator row/column carry the fill shade
    for (std::size_t x = 0; x < 5; ++x) CHECK(img.pixels[2 * 5 + x] == 128);
    for (std::size_t y = 0; y < 5; ++y) CHECK(img.pixels[y * 5 + 2] == 128);
    // first tile is white, the rest black
    CHECK(img.pixels[0] == 255);
    CHECK(img.pixels[3] == 0);
    CHECK(img.pixels[3 * 5 + 0] == 0);
}

TEST_CASE("grid preconditions") {
    std::vector<Tensor<double>> none;
    CHECK_THROWS_AS(compose_grid(none, 1, 1), Error);
    std::vector<Tensor<double>> three(3, Tensor<double>::zeros({2, 2}));
    CHECK_THROWS_AS(compose_grid(three, 1, 2), Error);
}

TEST_CASE("PNG output decodes back to the same raster") {
    std::vector<Tensor<double>> tiles;
    Pcg32 rng(4);
    Tensor<double> t({9, 9});
    for (auto& v : t) v = rng.next_double();
    tiles.push_back(t);
    auto img = compose_grid(tiles, 1, 1);
    auto png = encode_png(img);

    const std::uint8_t signature[8] = {137, 'P', 'N', 'G', 13, 10, 26, 10};
    for (int i = 0; i < 8; ++i) CHECK(png[i] == signature[i]);

    // IHDR: length 13, width/height big-endian, 8-bit grayscale
    CHECK(get_u32be(png.data() + 8) == 13);
    CHECK(std::string(png.begin() + 12, png.begin() + 16) == "IHDR");
    CHECK(get_u32be(png.data() + 16) == img.width);
    CHECK(get_u32be(png.data() + 20) == img.height);
    CHECK(png[24] == 8);
    CHECK(png[25] == 0);
    // IHDR CRC covers type + body
    CHECK(get_u32be(png.data() + 29) == crc32(png.data() + 12, 17));

    // inflate the IDAT and compare rows (filter byte 0 + pixels)
    std::size_t idat_len = get_u32be(png.data() + 33);
    CHECK(std::string(png.begin() + 37, png.begin() + 41) == "IDAT");
    std::vector<std::uint8_t> raw(img.height * (img.width + 1));
    uLongf raw_len = raw.size();
    int rc = uncompress(raw.data(), &raw_len, png.data() + 41, idat_len);
    REQUIRE(rc == Z_OK);
    REQUIRE(raw_len == raw.size());
    for (std::size_t y = 0; y < img.height; ++y) {
        CHECK(raw[y * (img.width + 1)] == 0);
        for (std::size_t x = 0; x < img.width; ++x)
            CHECK(raw[y * (img.width + 1) + 1 + x] == img.pixels[y * img.width + x]);
    }
}

TEST_CASE("image files are written deterministically") {
    auto dir = std::filesystem::temp_directory_path() / "stylemem_img_test";
    std::filesystem::create_directories(dir);
    std::vector<Tensor<float>> tiles(3, Tensor<float>::full({4, 4}, 0.25f));
    write_grid(tiles, 1, 3, dir / "a.pgm", ImageFormat::pgm);
    write_grid(tiles, 1, 3, dir / "b.pgm", ImageFormat::pgm);
    write_grid(tiles, 1, 3, dir / "a.png", ImageFormat::png);
    write_grid(tiles, 1, 3, dir / "b.png", ImageFormat::png);
    CHECK(read_file_bytes(dir / "a.pgm") == read_file_bytes(dir / "b.pgm"));
    CHECK(read_file_bytes(dir / "a.png") == read_file_bytes(dir / "b.png"));
    std::filesystem::remove_all(dir);
}
