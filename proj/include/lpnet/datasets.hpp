#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "lpnet/rng.hpp"
#include "lpnet/tensor.hpp"

namespace lpnet {

struct Dataset {
    Tensor images; // [N,C,H,W], values in [0,1]
    std::vector<std::size_t> labels;
    std::size_t classes = 10;

    std::size_t size() const { return labels.size(); }
};

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), ErrorKind::data, "cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

/// Transparently inflates gzip/zlib streams; plain data passes through.
inline std::vector<unsigned char> maybe_inflate(std::vector<unsigned char> bytes,
                                                const std::string& path) {
    if (bytes.size() < 2 || bytes[0] != 0x1f || bytes[1] != 0x8b) return bytes;
    z_stream zs{};
    check(inflateInit2(&zs, 15 + 32) == Z_OK, ErrorKind::data,
          "zlib init failed for " + path);
    std::vector<unsigned char> out;
    out.reserve(bytes.size() * 4);
    std::array<unsigned char, 1 << 15> buf;
    zs.next_in = bytes.data();
    zs.avail_in = static_cast<uInt>(bytes.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = buf.data();
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw Error(ErrorKind::data, "corrupt gzip stream in " + path);
        }
        out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
    }
    inflateEnd(&zs);
    return out;
}

inline std::uint32_t read_u32_be(const std::vector<unsigned char>& b, std::size_t off,
                                 const std::string& path) {
    check(off + 4 <= b.size(), ErrorKind::data,
          path + ": truncated at offset " + std::to_string(off));
    return (static_cast<std::uint32_t>(b[off]) << 24) |
           (static_cast<std::uint32_t>(b[off + 1]) << 16) |
           (static_cast<std::uint32_t>(b[off + 2]) << 8) |
           static_cast<std::uint32_t>(b[off + 3]);
}

/// Resolves `path` or `path + ".gz"`.
inline std::string resolve_maybe_gz(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    if (fs::exists(path + ".gz")) return path + ".gz";
    throw Error(ErrorKind::data, "missing dataset file " + path + " (or .gz)");
}

} // namespace detail

/// IDX image file (magic 0x00000803, big-endian dims) -> [N,1,H,W] in [0,1].
inline Tensor load_idx_images(const std::string& path) {
    const auto bytes = detail::maybe_inflate(detail::read_file_bytes(path), path);
    const std::uint32_t magic = detail::read_u32_be(bytes, 0, path);
    check(magic == 0x00000803u, ErrorKind::data,
          path + ": bad image magic at offset 0 (got 0x" + [&] {
              char b[16];
              std::snprintf(b, sizeof b, "%08x", magic);
              return std::string(b);
          }() + ", want 0x00000803)");
    const std::size_t n = detail::read_u32_be(bytes, 4, path);
    const std::size_t h = detail::read_u32_be(bytes, 8, path);
    const std::size_t w = detail::read_u32_be(bytes, 12, path);
    check(bytes.size() == 16 + n * h * w, ErrorKind::data,
          path + ": declared dimensions " + std::to_string(n) + "x" + std::to_string(h) +
              "x" + std::to_string(w) + " disagree with payload of " +
              std::to_string(bytes.size() - 16) + " bytes");
    Tensor images({n, 1, h, w});
    for (std::size_t i = 0; i < n * h * w; ++i)
        images.data[i] = static_cast<double>(bytes[16 + i]) / 255.0;
    return images;
}

/// IDX label file (magic 0x00000801) -> class ids.
inline std::vector<std::size_t> load_idx_labels(const std::string& path) {
    const auto bytes = detail::maybe_inflate(detail::read_file_bytes(path), path);
    const std::uint32_t magic = detail::read_u32_be(bytes, 0, path);
    check(magic == 0x00000801u, ErrorKind::data,
          path + ": bad label magic at offset 0");
    const std::size_t n = detail::read_u32_be(bytes, 4, path);
    check(bytes.size() == 8 + n, ErrorKind::data,
          path + ": declared count " + std::to_string(n) + " disagrees with payload");
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = bytes[8 + i];
    return labels;
}

inline void write_idx_images(const std::string& path, const Tensor& images) {
    check(images.rank() == 4 && images.dim(1) == 1, ErrorKind::usage,
          "write_idx_images: expected [N,1,H,W], got " + shape_str(images.shape));
    std::ofstream out(path, std::ios::binary);
    check(out.good(), ErrorKind::data, "cannot write " + path);
    auto put_u32 = [&](std::uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    put_u32(0x00000803u);
    put_u32(static_cast<std::uint32_t>(images.dim(0)));
    put_u32(static_cast<std::uint32_t>(images.dim(2)));
    put_u32(static_cast<std::uint32_t>(images.dim(3)));
    for (double v : images.data) {
        const auto byte = static_cast<unsigned char>(
            std::clamp(std::lround(v * 255.0), 0L, 255L));
        out.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

inline void write_idx_labels(const std::string& path, const std::vector<std::size_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    check(out.good(), ErrorKind::data, "cannot write " + path);
    auto put_u32 = [&](std::uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    put_u32(0x00000801u);
    put_u32(static_cast<std::uint32_t>(labels.size()));
    for (std::size_t l : labels) {
        const auto byte = static_cast<unsigned char>(l);
        out.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

struct Mnist {
    Dataset train, test;
};

/// Loads the four canonical IDX files (plain or .gz) from a directory.
inline Mnist load_mnist(const std::string& dir) {
    namespace fs = std::filesystem;
    auto file = [&](const char* name) {
        return detail::resolve_maybe_gz((fs::path(dir) / name).string());
    };
    Mnist m;
    m.train.images = load_idx_images(file("train-images-idx3-ubyte"));
    m.train.labels = load_idx_labels(file("train-labels-idx1-ubyte"));
    m.test.images = load_idx_images(file("t10k-images-idx3-ubyte"));
    m.test.labels = load_idx_labels(file("t10k-labels-idx1-ubyte"));
    check(m.train.images.dim(0) == m.train.labels.size(), ErrorKind::data,
          dir + ": train image/label counts disagree");
    check(m.test.images.dim(0) == m.test.labels.size(), ErrorKind::data,
          dir + ": test image/label counts disagree");
    m.train.classes = m.test.classes = 10;
    return m;
}

/// CIFAR-10 binary batches: 1 label byte + 3072 pixel bytes per record.
inline Dataset load_cifar10_file(const std::string& path, std::size_t expected_records = 0) {
    const auto bytes = detail::read_file_bytes(path);
    constexpr std::size_t kRecord = 3073;
    check(bytes.size() % kRecord == 0, ErrorKind::data,
          path + ": size " + std::to_string(bytes.size()) +
              " is not a multiple of the 3073-byte record stride");
    const std::size_t n = bytes.size() / kRecord;
    check(expected_records == 0 || n == expected_records, ErrorKind::data,
          path + ": holds " + std::to_string(n) + " records, expected " +
              std::to_string(expected_records));
    Dataset ds;
    ds.images = Tensor({n, 3, 32, 32});
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* rec = bytes.data() + i * kRecord;
        check(rec[0] < 10, ErrorKind::data,
              path + ": label " + std::to_string(rec[0]) + " out of range in record " +
                  std::to_string(i));
        ds.labels[i] = rec[0];
        for (std::size_t j = 0; j < 3072; ++j)
            ds.images.data[i * 3072 + j] = static_cast<double>(rec[1 + j]) / 255.0;
    }
    return ds;
}

struct Cifar10 {
    Dataset train, test;
};

inline Cifar10 load_cifar10(const std::string& dir) {
    namespace fs = std::filesystem;
    Cifar10 c;
    std::vector<Dataset> parts;
    for (int b = 1; b <= 5; ++b)
        parts.push_back(load_cifar10_file(
            (fs::path(dir) / ("data_batch_" + std::to_string(b) + ".bin")).string(), 10000));
    c.train.images = Tensor({50000, 3, 32, 32});
    c.train.labels.reserve(50000);
    std::size_t off = 0;
    for (const Dataset& p : parts) {
        std::copy(p.images.data.begin(), p.images.data.end(),
                  c.train.images.data.begin() + off);
        off += p.images.numel();
        c.train.labels.insert(c.train.labels.end(), p.labels.begin(), p.labels.end());
    }
    c.test = load_cifar10_file((fs::path(dir) / "test_batch.bin").string(), 10000);
    c.train.classes = c.test.classes = 10;
    return c;
}

/// Stratified split: per class, round(fraction * count) samples move to the
/// validation set; order within each split follows the original dataset.
inline std::pair<Dataset, Dataset> split_validation(const Dataset& ds, double fraction,
                                                    std::uint64_t seed) {
    check(fraction > 0.0 && fraction < 1.0, ErrorKind::usage,
          "split_validation: fraction must lie in (0,1)");
    check(ds.size() > 0, ErrorKind::usage, "split_validation: empty dataset");
    std::vector<std::vector<std::size_t>> by_class(ds.classes);
    for (std::size_t i = 0; i < ds.labels.size(); ++i) by_class[ds.labels[i]].push_back(i);
    Rng rng(seed);
    std::vector<bool> goes_val(ds.size(), false);
    for (auto& idxs : by_class) {
        // Fisher-Yates on the class's index list, then tag the prefix.
        for (std::size_t i = idxs.size(); i > 1; --i)
            std::swap(idxs[i - 1], idxs[rng.uniform_index(i)]);
        const auto take = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(idxs.size())));
        for (std::size_t i = 0; i < take; ++i) goes_val[idxs[i]] = true;
    }
    const std::size_t per = ds.images.numel() / ds.size();
    auto gather = [&](bool val) {
        Dataset out;
        out.classes = ds.classes;
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (goes_val[i] == val) keep.push_back(i);
        out.images = Tensor({keep.size(), ds.images.dim(1), ds.images.dim(2), ds.images.dim(3)});
        out.labels.reserve(keep.size());
        for (std::size_t k = 0; k < keep.size(); ++k) {
            std::copy(ds.images.data.begin() + keep[k] * per,
                      ds.images.data.begin() + (keep[k] + 1) * per,
                      out.images.data.begin() + k * per);
            out.labels.push_back(ds.labels[keep[k]]);
        }
        return out;
    };
    return {gather(false), gather(true)};
}

/// First `limit` examples (0 = everything).
inline Dataset subset(const Dataset& ds, std::size_t limit) {
    if (limit == 0 || limit >= ds.size()) return ds;
    Dataset out;
    out.classes = ds.classes;
    const std::size_t per = ds.images.numel() / ds.size();
    out.images = Tensor({limit, ds.images.dim(1), ds.images.dim(2), ds.images.dim(3)});
    std::copy(ds.images.data.begin(), ds.images.data.begin() + limit * per,
              out.images.data.begin());
    out.labels.assign(ds.labels.begin(), ds.labels.begin() + limit);
    return out;
}

/// Mean value per channel over a [N,C,H,W] batch.
inline std::vector<double> channel_mean(const Tensor& images) {
    check(images.rank() == 4 && images.dim(0) > 0, ErrorKind::data,
          "channel_mean: expected [N,C,H,W], got " + shape_str(images.shape));
    const std::size_t N = images.dim(0), C = images.dim(1);
    const std::size_t plane = images.dim(2) * images.dim(3);
    std::vector<double> mean(C, 0.0);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c) {
            const double* p = images.data.data() + (n * C + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) mean[c] += p[i];
        }
    for (double& m : mean) m /= static_cast<double>(N * plane);
    return mean;
}

/// Zero-centering: subtracts the per-channel mean in place.
inline void zero_center(Tensor& images, const std::vector<double>& mean) {
    check(images.rank() == 4 && images.dim(1) == mean.size(), ErrorKind::data,
          "zero_center: mean size " + std::to_string(mean.size()) +
              " does not match batch " + shape_str(images.shape));
    const std::size_t N = images.dim(0), C = images.dim(1);
    const std::size_t plane = images.dim(2) * images.dim(3);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c) {
            double* p = images.data.data() + (n * C + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) p[i] -= mean[c];
        }
}

} // namespace lpnet
