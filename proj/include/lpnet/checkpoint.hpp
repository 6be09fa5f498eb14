#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "lpnet/nets.hpp"

namespace lpnet {

/// Checkpoint layout (all integers little-endian):
///   magic "LPRL" | u32 version | u32 arch_len | arch bytes
///   u32 record_count | records
/// record: u32 name_len | name | u32 rank | u32 dims[rank] | f64 payload
struct CheckpointRecord {
    std::string name;
    Tensor tensor;
};

struct Checkpoint {
    std::string arch;
    std::vector<CheckpointRecord> records;

    const Tensor* find(const std::string& name) const {
        for (const CheckpointRecord& r : records)
            if (r.name == name) return &r.tensor;
        return nullptr;
    }
};

namespace detail {

inline void put_u32_le(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {
        static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f64_le(std::ostream& out, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint32_t get_u32_le(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    check(in.good(), ErrorKind::data, path + ": truncated checkpoint");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

inline double get_f64_le(std::istream& in, const std::string& path) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    check(in.good(), ErrorKind::data, path + ": truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

} // namespace detail

inline void checkpoint_save(const std::string& path, const std::string& arch,
                            const std::vector<CheckpointRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    check(out.good(), ErrorKind::data, "cannot write checkpoint " + path);
    out.write("LPRL", 4);
    detail::put_u32_le(out, 1u);
    detail::put_u32_le(out, static_cast<std::uint32_t>(arch.size()));
    out.write(arch.data(), static_cast<std::streamsize>(arch.size()));
    detail::put_u32_le(out, static_cast<std::uint32_t>(records.size()));
    for (const CheckpointRecord& r : records) {
        detail::put_u32_le(out, static_cast<std::uint32_t>(r.name.size()));
        out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
        detail::put_u32_le(out, static_cast<std::uint32_t>(r.tensor.rank()));
        for (std::size_t d : r.tensor.shape)
            detail::put_u32_le(out, static_cast<std::uint32_t>(d));
        for (double v : r.tensor.data) detail::put_f64_le(out, v);
    }
    check(out.good(), ErrorKind::data, "write failed for checkpoint " + path);
}

inline Checkpoint checkpoint_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), ErrorKind::data, "cannot open checkpoint " + path);
    char magic[4];
    in.read(magic, 4);
    check(in.good() && std::memcmp(magic, "LPRL", 4) == 0, ErrorKind::data,
          path + ": bad checkpoint magic at offset 0");
    const std::uint32_t version = detail::get_u32_le(in, path);
    check(version == 1u, ErrorKind::data,
          path + ": unsupported checkpoint version " + std::to_string(version));
    Checkpoint ck;
    const std::uint32_t arch_len = detail::get_u32_le(in, path);
    ck.arch.resize(arch_len);
    in.read(ck.arch.data(), arch_len);
    check(in.good(), ErrorKind::data, path + ": truncated architecture string");
    const std::uint32_t count = detail::get_u32_le(in, path);
    ck.records.resize(count);
    for (CheckpointRecord& r : ck.records) {
        const std::uint32_t name_len = detail::get_u32_le(in, path);
        r.name.resize(name_len);
        in.read(r.name.data(), name_len);
        check(in.good(), ErrorKind::data, path + ": truncated record name");
        const std::uint32_t rank = detail::get_u32_le(in, path);
        Shape shape(rank);
        for (std::uint32_t i = 0; i < rank; ++i) shape[i] = detail::get_u32_le(in, path);
        r.tensor = Tensor(shape);
        for (double& v : r.tensor.data) v = detail::get_f64_le(in, path);
    }
    return ck;
}

/// Saves arch + all trainable parameters (+ caller extras, e.g. the
/// normalization mean under "norm.mean").
inline void save_network(const std::string& path, Network& net,
                         std::vector<CheckpointRecord> extra = {}) {
    std::vector<CheckpointRecord> records;
    for (const Param& p : net.parameters()) records.push_back({p.name, *p.tensor});
    for (CheckpointRecord& r : extra) records.push_back(std::move(r));
    checkpoint_save(path, net.describe(), records);
}

/// Rebuilds the architecture and restores every trainable parameter.
inline Network load_network(const Checkpoint& ck, Rng& rng) {
    Network net = network_from_arch(ck.arch, rng);
    for (const Param& p : net.parameters()) {
        const Tensor* rec = ck.find(p.name);
        check(rec != nullptr, ErrorKind::data,
              "checkpoint is missing parameter '" + p.name + "'");
        check(rec->shape == p.tensor->shape, ErrorKind::data,
              "checkpoint parameter '" + p.name + "' has shape " + shape_str(rec->shape) +
                  ", network expects " + shape_str(p.tensor->shape));
        p.tensor->data = rec->data;
    }
    net.post_step(); // re-syncs activation specs from restored parameters
    return net;
}

} // namespace lpnet
