#pragma once

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "stylemem/bytes.hpp"
#include "stylemem/idx.hpp"
#include "stylemem/model.hpp"
#include "stylemem/train.hpp"

namespace stylemem {

// Checkpoint file layout (all multi-byte integers little-endian):
//
//   magic      8 bytes  "STYLEMEM"
//   version    u32      currently 1
//   precision  u8       0 = f32, 1 = f64
//   dataset    u32 len + bytes
//   arch       7 x u64  input_side, conv1/conv2 filters, fc1/fc2 units,
//                       style units, classes
//   config     f64 alpha, f64 learning_rate, u64 epochs, u64 batch_size,
//              f64 sigma, u64 seed
//   progress   u64 epochs_completed, u64 adam_step_count
//   tensors    u32 count, then per tensor:
//              u32 name_len + name, u32 rank, rank x u64 dims, payload
//              (params in visit order, then "adam1."/"adam2." moments)
//   checksum   u32 CRC-32 of every preceding byte
//
// The byte stream is a pure function of the state, so save -> load -> save
// reproduces the file exactly.

constexpr char checkpoint_magic[8] = {'S', 'T', 'Y', 'L', 'E', 'M', 'E', 'M'};
constexpr std::uint32_t checkpoint_version = 1;

template <typename T>
struct Checkpoint {
    std::string dataset_id;
    TrainConfig config;
    std::uint64_t epochs_completed = 0;
    ModelParams<T> params;
    Optimizer<T> optimizer;
};

namespace detail {

template <typename T>
void put_scalar_le(std::vector<std::uint8_t>& out, T v) {
    if constexpr (sizeof(T) == 4) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_u32le(out, bits);
    } else {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64le(out, bits);
    }
}

template <typename T>
T get_scalar_le(const std::uint8_t* p) {
    if constexpr (sizeof(T) == 4) {
        std::uint32_t bits = get_u32le(p);
        T v;
        std::memcpy(&v, &bits, 4);
        return v;
    } else {
        std::uint64_t bits = get_u64le(p);
        T v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
}

template <typename T>
void put_tensor(std::vector<std::uint8_t>& out, const std::string& name, const Tensor<T>& t) {
    put_u32le(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32le(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_u64le(out, d);
    for (std::size_t i = 0; i < t.size(); ++i) put_scalar_le(out, t[i]);
}

struct Reader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) {
        if (pos + n > bytes.size())
            fail(ErrorCode::checkpoint_format, std::string("checkpoint truncated while reading ") + what +
                                                   " at byte " + std::to_string(pos));
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = get_u32le(bytes.data() + pos);
        pos += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = get_u64le(bytes.data() + pos);
        pos += 8;
        return v;
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return bytes[pos++];
    }
    double f64(const char* what) {
        need(8, what);
        double v = get_f64le(bytes.data() + pos);
        pos += 8;
        return v;
    }
    std::string str(const char* what) {
        std::uint32_t len = u32(what);
        need(len, what);
        std::string s(bytes.begin() + pos, bytes.begin() + pos + len);
        pos += len;
        return s;
    }
    template <typename T>
    Tensor<T> tensor(const std::string& want_name) {
        std::string name = str("tensor name");
        if (name != want_name)
            fail(ErrorCode::checkpoint_format,
                 "checkpoint tensor order mismatch: expected '" + want_name + "', found '" + name + "'");
        std::uint32_t rank = u32("tensor rank");
        Shape shape(rank);
        for (auto& d : shape) d = u64("tensor dim");
        Tensor<T> t(shape);
        need(t.size() * sizeof(T), "tensor payload");
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = get_scalar_le<T>(bytes.data() + pos);
            pos += sizeof(T);
        }
        return t;
    }
};

}  // namespace detail

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint<T>& ck) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), checkpoint_magic, checkpoint_magic + 8);
    put_u32le(out, checkpoint_version);
    out.push_back(sizeof(T) == 4 ? 0 : 1);
    put_u32le(out, static_cast<std::uint32_t>(ck.dataset_id.size()));
    out.insert(out.end(), ck.dataset_id.begin(), ck.dataset_id.end());

    const ArchConfig& a = ck.params.arch;
    for (std::uint64_t v : {a.input_side, a.conv1_filters, a.conv2_filters, a.fc1_units, a.fc2_units,
                            a.style_units, a.num_classes})
        put_u64le(out, v);

    put_f64le(out, ck.config.alpha);
    put_f64le(out, ck.config.learning_rate);
    put_u64le(out, ck.config.epochs);
    put_u64le(out, ck.config.batch_size);
    put_f64le(out, ck.config.sigma);
    put_u64le(out, ck.config.seed);

    put_u64le(out, ck.epochs_completed);
    std::uint64_t steps = ck.optimizer.states.empty()
                              ? 0
                              : static_cast<std::uint64_t>(ck.optimizer.states.front().step_count);
    put_u64le(out, steps);

    std::uint32_t tensor_count = 0;
    visit_params(ck.params, [&](const char*, const Tensor<T>&) { tensor_count += 3; });
    put_u32le(out, tensor_count);

    visit_params(ck.params, [&](const char* name, const Tensor<T>& t) { detail::put_tensor(out, name, t); });
    std::size_t idx = 0;
    visit_params(ck.params, [&](const char* name, const Tensor<T>&) {
        detail::put_tensor(out, std::string("adam1.") + name, ck.optimizer.states[idx].first_moment);
        ++idx;
    });
    idx = 0;
    visit_params(ck.params, [&](const char* name, const Tensor<T>&) {
        detail::put_tensor(out, std::string("adam2.") + name, ck.optimizer.states[idx].second_moment);
        ++idx;
    });

    put_u32le(out, crc32(out.data(), out.size()));
    return out;
}

inline Precision peek_checkpoint_precision(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 13 || std::memcmp(bytes.data(), checkpoint_magic, 8) != 0)
        fail(ErrorCode::checkpoint_format, "not a checkpoint file (bad magic)");
    return bytes[12] == 0 ? Precision::f32 : Precision::f64;
}

template <typename T>
Checkpoint<T> deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 17 || std::memcmp(bytes.data(), checkpoint_magic, 8) != 0)
        fail(ErrorCode::checkpoint_format, "not a checkpoint file (bad magic)");

    // verify the trailing whole-file checksum before trusting any field
    std::uint32_t stored = get_u32le(bytes.data() + bytes.size() - 4);
    std::uint32_t actual = crc32(bytes.data(), bytes.size() - 4);
    if (stored != actual) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "checkpoint checksum mismatch (stored 0x%08x, computed 0x%08x)",
                      stored, actual);
        fail(ErrorCode::checksum_mismatch, buf);
    }

    detail::Reader r{bytes, 8};
    std::uint32_t version = r.u32("version");
    if (version != checkpoint_version)
        fail(ErrorCode::checkpoint_version, "checkpoint format version " + std::to_string(version) +
                                                " is not supported (this reader handles version " +
                                                std::to_string(checkpoint_version) + ")");
    std::uint8_t precision = r.u8("precision");
    std::uint8_t want = sizeof(T) == 4 ? 0 : 1;
    if (precision != want)
        fail(ErrorCode::checkpoint_format,
             std::string("checkpoint precision is ") + (precision == 0 ? "f32" : "f64") +
                 ", requested " + (want == 0 ? "f32" : "f64"));

    Checkpoint<T> ck;
    ck.dataset_id = r.str("dataset id");

    ArchConfig a;
    a.input_side = r.u64("arch.input_side");
    a.conv1_filters = r.u64("arch.conv1_filters");
    a.conv2_filters = r.u64("arch.conv2_filters");
    a.fc1_units = r.u64("arch.fc1_units");
    a.fc2_units = r.u64("arch.fc2_units");
    a.style_units = r.u64("arch.style_units");
    a.num_classes = r.u64("arch.num_classes");

    ck.config.alpha = r.f64("config.alpha");
    ck.config.learning_rate = r.f64("config.learning_rate");
    ck.config.epochs = r.u64("config.epochs");
    ck.config.batch_size = r.u64("config.batch_size");
    ck.config.sigma = r.f64("config.sigma");
    ck.config.seed = r.u64("config.seed");
    ck.config.precision = sizeof(T) == 4 ? Precision::f32 : Precision::f64;

    ck.epochs_completed = r.u64("epochs_completed");
    std::uint64_t steps = r.u64("adam_step_count");

    std::uint32_t tensor_count = r.u32("tensor count");
    ck.params = ModelParams<T>(a);
    std::uint32_t expected = 0;
    visit_params(ck.params, [&](const char*, const Tensor<T>&) { expected += 3; });
    if (tensor_count != expected)
        fail(ErrorCode::checkpoint_format, "checkpoint holds " + std::to_string(tensor_count) +
                                               " tensors, architecture requires " + std::to_string(expected));

    visit_params(ck.params, [&](const char* name, Tensor<T>& t) {
        Tensor<T> loaded = r.template tensor<T>(name);
        if (loaded.shape() != t.shape())
            fail(ErrorCode::checkpoint_format, std::string("checkpoint tensor '") + name +
                                                   "' has shape " + shape_to_string(loaded.shape()) +
                                                   ", architecture requires " + shape_to_string(t.shape()));
        t = std::move(loaded);
    });

    ck.optimizer.reset(ck.params, ck.config.learning_rate);
    std::size_t idx = 0;
    visit_params(ck.params, [&](const char* name, const Tensor<T>&) {
        ck.optimizer.states[idx].first_moment = r.template tensor<T>(std::string("adam1.") + name);
        ck.optimizer.states[idx].step_count = static_cast<std::int64_t>(steps);
        ++idx;
    });
    idx = 0;
    visit_params(ck.params, [&](const char* name, const Tensor<T>&) {
        ck.optimizer.states[idx].second_moment = r.template tensor<T>(std::string("adam2.") + name);
        ++idx;
    });

    if (r.pos != bytes.size() - 4)
        fail(ErrorCode::checkpoint_format, "checkpoint has trailing bytes after the tensor table");
    return ck;
}

template <typename T>
void save_checkpoint(const Checkpoint<T>& ck, const std::filesystem::path& path) {
    write_file_bytes(path, serialize_checkpoint(ck));
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
    return deserialize_checkpoint<T>(read_file_bytes(path));
}

}  // namespace stylemem
