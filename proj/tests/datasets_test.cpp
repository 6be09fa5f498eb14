#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <unistd.h>

#include <zlib.h>

#include "lpnet/datasets.hpp"
#include "lpnet/synth.hpp"

using namespace lpnet;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("lpnet_ds_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

using Datasets = TempDir;

// Byte-quantized image batch so the u8 round-trip is exact.
Tensor quantized_batch(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t({n, 1, h, w});
    for (double& v : t.data)
        v = static_cast<double>(rng.uniform_index(256)) / 255.0;
    return t;
}

void gzip_file(const std::string& src, const std::string& dst) {
    std::ifstream in(src, std::ios::binary);
    ASSERT_TRUE(in.good());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    gzFile gz = gzopen(dst.c_str(), "wb");
    ASSERT_NE(gz, nullptr);
    ASSERT_EQ(gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size())),
              static_cast<int>(bytes.size()));
    gzclose(gz);
}

TEST_F(Datasets, IdxImagesRoundTrip) {
    Tensor want = quantized_batch(7, 9, 11, 3);
    write_idx_images(path("imgs"), want);
    Tensor got = load_idx_images(path("imgs"));
    ASSERT_EQ(got.shape, want.shape);
    for (std::size_t i = 0; i < want.numel(); ++i) ASSERT_DOUBLE_EQ(got[i], want[i]);

    const std::vector<std::size_t> labels{0, 3, 9, 2, 5, 1, 7};
    write_idx_labels(path("labels"), labels);
    EXPECT_EQ(load_idx_labels(path("labels")), labels);
}

TEST_F(Datasets, GzipStreamsAreTransparent) {
    Tensor want = quantized_batch(4, 5, 5, 4);
    write_idx_images(path("imgs"), want);
    gzip_file(path("imgs"), path("imgs.gz"));
    Tensor got = load_idx_images(path("imgs.gz"));
    ASSERT_EQ(got.shape, want.shape);
    for (std::size_t i = 0; i < want.numel(); ++i) ASSERT_DOUBLE_EQ(got[i], want[i]);

    // corrupt gzip payload fails loudly
    {
        std::fstream f(path("imgs.gz"), std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(20);
        f.put('\x7f');
    }
    EXPECT_THROW(load_idx_images(path("imgs.gz")), Error);
}

TEST_F(Datasets, IdxErrorsNameOffsetsAndExpectations) {
    {
        std::ofstream out(path("bad_magic"), std::ios::binary);
        const unsigned char b[16] = {0, 0, 8, 4, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1};
        out.write(reinterpret_cast<const char*>(b), 16);
    }
    try {
        load_idx_images(path("bad_magic"));
        FAIL() << "expected bad magic error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::data);
        const std::string msg = e.what();
        EXPECT_NE(msg.find("offset 0"), std::string::npos) << msg;
        EXPECT_NE(msg.find("0x00000804"), std::string::npos) << msg;
        EXPECT_NE(msg.find("0x00000803"), std::string::npos) << msg;
    }

    {
        std::ofstream out(path("short"), std::ios::binary);
        const unsigned char b[3] = {0, 0, 8};
        out.write(reinterpret_cast<const char*>(b), 3);
    }
    try {
        load_idx_images(path("short"));
        FAIL() << "expected truncation error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
    }

    Tensor imgs = quantized_batch(2, 3, 3, 5);
    write_idx_images(path("trunc"), imgs);
    fs::resize_file(path("trunc"), 16 + 2 * 3 * 3 - 4);
    EXPECT_THROW(load_idx_images(path("trunc")), Error);

    EXPECT_THROW(load_idx_images(path("nonexistent")), Error);

    // label loader rejects the image magic
    write_idx_images(path("imgs"), imgs);
    EXPECT_THROW(load_idx_labels(path("imgs")), Error);
}

TEST_F(Datasets, MnistDirectoryLayoutWithMixedCompression) {
    Tensor train_imgs = quantized_batch(10, 28, 28, 6);
    Tensor test_imgs = quantized_batch(5, 28, 28, 7);
    std::vector<std::size_t> train_labels{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<std::size_t> test_labels{1, 3, 5, 7, 9};

    write_idx_images(path("train-images-idx3-ubyte"), train_imgs);
    write_idx_labels(path("train-labels-idx1-ubyte"), train_labels);
    write_idx_images(path("t10k-images-idx3-ubyte.plain"), test_imgs);
    gzip_file(path("t10k-images-idx3-ubyte.plain"), path("t10k-images-idx3-ubyte.gz"));
    fs::remove(path("t10k-images-idx3-ubyte.plain"));
    write_idx_labels(path("t10k-labels-idx1-ubyte"), test_labels);

    Mnist m = load_mnist(dir_.string());
    EXPECT_EQ(m.train.size(), 10u);
    EXPECT_EQ(m.test.size(), 5u);
    EXPECT_EQ(m.train.labels, train_labels);
    EXPECT_EQ(m.test.labels, test_labels);
    for (std::size_t i = 0; i < test_imgs.numel(); ++i)
        ASSERT_DOUBLE_EQ(m.test.images[i], test_imgs[i]);

    fs::remove(path("train-labels-idx1-ubyte"));
    EXPECT_THROW(load_mnist(dir_.string()), Error);
}

TEST_F(Datasets, Cifar10RecordsAndValidation) {
    {
        std::ofstream out(path("batch.bin"), std::ios::binary);
        for (unsigned rec = 0; rec < 3; ++rec) {
            const unsigned char label = static_cast<unsigned char>(rec * 3);
            out.put(static_cast<char>(label));
            for (std::size_t j = 0; j < 3072; ++j)
                out.put(static_cast<char>((rec + j) % 256));
        }
    }
    Dataset ds = load_cifar10_file(path("batch.bin"));
    ASSERT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.images.shape, (Shape{3, 3, 32, 32}));
    EXPECT_EQ(ds.labels, (std::vector<std::size_t>{0, 3, 6}));
    EXPECT_DOUBLE_EQ(ds.images[0], 0.0 / 255.0);
    EXPECT_DOUBLE_EQ(ds.images[1], 1.0 / 255.0);
    EXPECT_DOUBLE_EQ(ds.images[3072], 1.0 / 255.0); // second record starts at (rec + 0) = 1

    EXPECT_THROW(load_cifar10_file(path("batch.bin"), 5), Error);

    fs::resize_file(path("batch.bin"), 3073 * 3 - 1);
    EXPECT_THROW(load_cifar10_file(path("batch.bin")), Error);

    {
        std::ofstream out(path("badlabel.bin"), std::ios::binary);
        out.put(static_cast<char>(11));
        for (std::size_t j = 0; j < 3072; ++j) out.put('\0');
    }
    EXPECT_THROW(load_cifar10_file(path("badlabel.bin")), Error);
}

TEST(DatasetOps, StratifiedSplitKeepsClassBalanceAndOrder) {
    Dataset ds = make_synth_digits(1000, 12); // labels cycle 0..9, 100 each
    auto [train, val] = split_validation(ds, 0.15, 42);
    EXPECT_EQ(train.size(), 850u);
    EXPECT_EQ(val.size(), 150u);

    std::map<std::size_t, std::size_t> val_counts;
    for (std::size_t l : val.labels) ++val_counts[l];
    EXPECT_EQ(val_counts.size(), 10u);
    for (const auto& [cls, count] : val_counts) EXPECT_EQ(count, 15u) << "class " << cls;

    // different seeds pick different validation subsets
    auto [t2, v2] = split_validation(ds, 0.15, 43);
    bool differs = v2.labels != val.labels;
    for (std::size_t i = 0; !differs && i < v2.images.numel(); ++i)
        differs = v2.images[i] != val.images[i];
    EXPECT_TRUE(differs);
    EXPECT_EQ(t2.size(), 850u);

    EXPECT_THROW(split_validation(ds, 0.0, 1), Error);
    EXPECT_THROW(split_validation(ds, 1.0, 1), Error);
}

TEST(DatasetOps, SplitPreservesSourceOrderWithinEachSide) {
    // traceable 1x1 images: pixel value encodes the source index
    Dataset ds;
    ds.classes = 10;
    ds.images = Tensor({20, 1, 1, 1});
    for (std::size_t i = 0; i < 20; ++i) {
        ds.images.data[i] = static_cast<double>(i);
        ds.labels.push_back(i % 10);
    }
    auto [train, val] = split_validation(ds, 0.5, 9);
    EXPECT_EQ(train.size(), 10u);
    EXPECT_EQ(val.size(), 10u);
    for (std::size_t i = 1; i < train.size(); ++i)
        EXPECT_LT(train.images[i - 1], train.images[i]);
    for (std::size_t i = 1; i < val.size(); ++i)
        EXPECT_LT(val.images[i - 1], val.images[i]);
    for (std::size_t i = 0; i < train.size(); ++i)
        EXPECT_EQ(train.labels[i], static_cast<std::size_t>(train.images[i]) % 10);
}

TEST(DatasetOps, SubsetTakesThePrefix) {
    Dataset ds = make_synth_digits(20, 13);
    Dataset s = subset(ds, 7);
    EXPECT_EQ(s.size(), 7u);
    EXPECT_EQ(s.images.dim(0), 7u);
    for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(s.labels[i], ds.labels[i]);
    for (std::size_t i = 0; i < s.images.numel(); ++i)
        ASSERT_DOUBLE_EQ(s.images[i], ds.images[i]);
    EXPECT_EQ(subset(ds, 0).size(), 20u);
    EXPECT_EQ(subset(ds, 99).size(), 20u);
}

TEST(DatasetOps, ZeroCenteringRemovesTheChannelMean) {
    Tensor images({2, 2, 1, 2},
                  {1.0, 3.0, 10.0, 20.0, 5.0, 7.0, 30.0, 40.0});
    const std::vector<double> mean = channel_mean(images);
    ASSERT_EQ(mean.size(), 2u);
    EXPECT_DOUBLE_EQ(mean[0], 4.0);
    EXPECT_DOUBLE_EQ(mean[1], 25.0);
    zero_center(images, mean);
    const std::vector<double> after = channel_mean(images);
    EXPECT_NEAR(after[0], 0.0, 1e-12);
    EXPECT_NEAR(after[1], 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(images[0], -3.0);
    EXPECT_DOUBLE_EQ(images[2], -15.0);

    EXPECT_THROW(zero_center(images, {0.0}), Error);
}

TEST(DatasetOps, SynthDigitsAreBalancedDeterministicAndInked) {
    Dataset a = make_synth_digits(50, 21);
    Dataset b = make_synth_digits(50, 21);
    Dataset c = make_synth_digits(50, 22);
    EXPECT_EQ(a.images.shape, (Shape{50, 1, 28, 28}));
    for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(a.labels[i], i % 10);
    for (std::size_t i = 0; i < a.images.numel(); ++i)
        ASSERT_DOUBLE_EQ(a.images[i], b.images[i]);
    bool differs = false;
    for (std::size_t i = 0; !differs && i < a.images.numel(); ++i)
        differs = a.images[i] != c.images[i];
    EXPECT_TRUE(differs);

    for (std::size_t i = 0; i < 50; ++i) {
        double ink = 0.0;
        for (std::size_t j = 0; j < 28 * 28; ++j) {
            const double v = a.images[i * 28 * 28 + j];
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 1.0);
            if (v > 0.1) ink += 1.0;
        }
        ink /= 28.0 * 28.0;
        EXPECT_GT(ink, 0.02) << "image " << i << " is blank";
        EXPECT_LT(ink, 0.6) << "image " << i << " is flooded";
    }

    Mnist m = make_synth_mnist(30, 10, 5);
    EXPECT_EQ(m.train.size(), 30u);
    EXPECT_EQ(m.test.size(), 10u);
    bool train_test_differ = false;
    for (std::size_t i = 0; !train_test_differ && i < m.test.images.numel(); ++i)
        train_test_differ = m.train.images[i] != m.test.images[i];
    EXPECT_TRUE(train_test_differ);
}

} // namespace
