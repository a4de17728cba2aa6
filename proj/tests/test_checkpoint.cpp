#include "doctest.h"

#include <filesystem>

#include "stylemem/checkpoint.hpp"

using namespace stylemem;

namespace {

Checkpoint<float> make_checkpoint(std::uint64_t seed) {
    Checkpoint<float> ck;
    ck.dataset_id = "mnist";
    ck.config = TrainConfig::desk_preset();
    ck.config.seed = seed;
    ck.epochs_completed = 4;
    ck.params = init_params<float>(ArchConfig::reduced(10), seed);
    ck.optimizer.reset(ck.params, ck.config.learning_rate);
    // make the moments non-trivial
    Pcg32 rng(seed + 1);
    for (auto& st : ck.optimizer.states) {
        st.step_count = 17;
        for (auto& v : st.first_moment) v = static_cast<float>(rng.next_double() - 0.5);
        for (auto& v : st.second_moment) v = static_cast<float>(rng.next_double());
    }
    return ck;
}

}  // namespace

TEST_CASE("checkpoint round-trips every tensor bit-exactly") {
    auto ck = make_checkpoint(5);
    auto bytes = serialize_checkpoint(ck);
    auto loaded = deserialize_checkpoint<float>(bytes);

    CHECK(loaded.dataset_id == "mnist");
    CHECK(loaded.epochs_completed == 4);
    CHECK(loaded.config.learning_rate == ck.config.learning_rate);
    CHECK(loaded.config.seed == ck.config.seed);
    CHECK(loaded.params.arch == ck.params.arch);

    std::vector<const Tensor<float>*> a, b;
    visit_params(ck.params, [&](const char*, const Tensor<float>& t) { a.push_back(&t); });
    visit_params(loaded.params, [&](const char*, const Tensor<float>& t) { b.push_back(&t); });
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i]->shape() == b[i]->shape());
        for (std::size_t j = 0; j < a[i]->size(); ++j) CHECK((*a[i])[j] == (*b[i])[j]);
    }
    for (std::size_t i = 0; i < ck.optimizer.states.size(); ++i) {
        CHECK(loaded.optimizer.states[i].step_count == 17);
        for (std::size_t j = 0; j < ck.optimizer.states[i].first_moment.size(); ++j) {
            CHECK(loaded.optimizer.states[i].first_moment[j] == ck.optimizer.states[i].first_moment[j]);
            CHECK(loaded.optimizer.states[i].second_moment[j] == ck.optimizer.states[i].second_moment[j]);
        }
    }

    // save -> load -> save reproduces the byte stream
    CHECK(serialize_checkpoint(loaded) == bytes);
}

TEST_CASE("checkpoint survives the filesystem round trip") {
    auto dir = std::filesystem::temp_directory_path() / "stylemem_ckpt_test";
    std::filesystem::create_directories(dir);
    auto ck = make_checkpoint(9);
    save_checkpoint(ck, dir / "model.ckpt");
    auto loaded = load_checkpoint<float>(dir / "model.ckpt");
    CHECK(serialize_checkpoint(loaded) == serialize_checkpoint(ck));
    std::filesystem::remove_all(dir);
}

TEST_CASE("flipping one payload byte trips the checksum") {
    auto bytes = serialize_checkpoint(make_checkpoint(6));
    bytes[bytes.size() / 2] ^= 0x40;
    CHECK_THROWS_WITH_AS(deserialize_checkpoint<float>(bytes), doctest::Contains("checksum"), Error);
    try {
        deserialize_checkpoint<float>(bytes);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::checksum_mismatch);
    }
}

TEST_CASE("an unsupported format version is rejected explicitly") {
    auto bytes = serialize_checkpoint(make_checkpoint(7));
    // rewrite the version field to 0 and fix up the trailing checksum
    bytes[8] = 0;
    std::uint32_t crc = crc32(bytes.data(), bytes.size() - 4);
    bytes[bytes.size() - 4] = static_cast<std::uint8_t>(crc);
    bytes[bytes.size() - 3] = static_cast<std::uint8_t>(crc >> 8);
    bytes[bytes.size() - 2] = static_cast<std::uint8_t>(crc >> 16);
    bytes[bytes.size() - 1] = static_cast<std::uint8_t>(crc >> 24);

    CHECK_THROWS_WITH_AS(deserialize_checkpoint<float>(bytes), doctest::Contains("version"), Error);
    try {
        deserialize_checkpoint<float>(bytes);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::checkpoint_version);
    }
}

TEST_CASE("precision and garbage are rejected with the right categories") {
    auto bytes = serialize_checkpoint(make_checkpoint(8));
    CHECK_THROWS_WITH_AS(deserialize_checkpoint<double>(bytes), doctest::Contains("precision"), Error);

    std::vector<std::uint8_t> garbage{'n', 'o', 't', ' ', 'a', ' ', 'c', 'k', 'p', 't', '!', '!', '!', '!',
                                      '!', '!', '!', '!'};
    CHECK_THROWS_AS(deserialize_checkpoint<float>(garbage), Error);
}
