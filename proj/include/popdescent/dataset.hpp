#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "popdescent/rng.hpp"

namespace popdescent {

// A labelled minibatch: row-major inputs (size x features) and one integer
// class label per row.
struct Batch {
    std::vector<double> inputs;
    std::vector<int> targets;
    std::size_t features = 0;

    std::size_t size() const noexcept { return targets.size(); }

    void validate() const {
        if (targets.empty()) throw std::invalid_argument("batch must contain at least one example");
        if (inputs.size() != targets.size() * features)
            throw std::invalid_argument("batch inputs do not match targets count");
    }
};

struct Dataset {
    std::vector<double> inputs;  // row-major, size() x features
    std::vector<int> targets;
    std::size_t features = 0;

    std::size_t size() const noexcept { return targets.size(); }

    Batch row_batch(const std::vector<std::size_t>& rows) const {
        Batch b;
        b.features = features;
        b.targets.reserve(rows.size());
        b.inputs.reserve(rows.size() * features);
        for (std::size_t r : rows) {
            b.targets.push_back(targets[r]);
            b.inputs.insert(b.inputs.end(), inputs.begin() + static_cast<std::ptrdiff_t>(r * features),
                            inputs.begin() + static_cast<std::ptrdiff_t>((r + 1) * features));
        }
        return b;
    }

    // The whole dataset as one batch (used for full-partition evaluations).
    Batch as_batch() const {
        Batch b;
        b.features = features;
        b.inputs = inputs;
        b.targets = targets;
        return b;
    }

    int class_count() const {
        int maxc = 0;
        for (int t : targets) maxc = std::max(maxc, t);
        return maxc + 1;
    }
};

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& path, std::size_t offset) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in)
        throw std::runtime_error(path + ": truncated header at offset " + std::to_string(offset));
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace detail

// Reads an IDX image/label file pair (the FMNIST/MNIST on-disk format):
// big-endian magic 0x00000803 for images and 0x00000801 for labels, big-endian
// dimension sizes, then the raw byte payload. Pixels are scaled to [0, 1].
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open " + labels_path);

    const std::uint32_t img_magic = detail::read_be32(img, images_path, 0);
    if (img_magic != 0x00000803u)
        throw std::runtime_error(images_path + ": bad magic at offset 0 (expected 0x00000803, got 0x" +
                                 [&] { char b[16]; std::snprintf(b, sizeof b, "%08x", img_magic); return std::string(b); }() + ")");
    const std::uint32_t count = detail::read_be32(img, images_path, 4);
    const std::uint32_t rows = detail::read_be32(img, images_path, 8);
    const std::uint32_t cols = detail::read_be32(img, images_path, 12);

    const std::uint32_t lab_magic = detail::read_be32(lab, labels_path, 0);
    if (lab_magic != 0x00000801u)
        throw std::runtime_error(labels_path + ": bad magic at offset 0 (expected 0x00000801)");
    const std::uint32_t lab_count = detail::read_be32(lab, labels_path, 4);
    if (lab_count != count)
        throw std::runtime_error("image/label count mismatch: " + std::to_string(count) + " images vs " +
                                 std::to_string(lab_count) + " labels");

    Dataset ds;
    ds.features = static_cast<std::size_t>(rows) * cols;
    ds.inputs.resize(static_cast<std::size_t>(count) * ds.features);
    ds.targets.resize(count);

    std::vector<unsigned char> pixel_row(ds.features);
    for (std::uint32_t i = 0; i < count; ++i) {
        img.read(reinterpret_cast<char*>(pixel_row.data()), static_cast<std::streamsize>(ds.features));
        if (!img)
            throw std::runtime_error(images_path + ": truncated payload at offset " +
                                     std::to_string(16 + std::size_t(i) * ds.features));
        for (std::size_t j = 0; j < ds.features; ++j)
            ds.inputs[std::size_t(i) * ds.features + j] = pixel_row[j] / 255.0;
        char label;
        lab.read(&label, 1);
        if (!lab)
            throw std::runtime_error(labels_path + ": truncated payload at offset " +
                                     std::to_string(8 + std::size_t(i)));
        ds.targets[i] = static_cast<unsigned char>(label);
    }
    return ds;
}

enum class SyntheticKind { blobs, two_moons };

inline SyntheticKind synthetic_from_name(const std::string& name) {
    if (name == "blobs") return SyntheticKind::blobs;
    if (name == "two_moons") return SyntheticKind::two_moons;
    throw std::invalid_argument("unknown synthetic dataset '" + name + "'");
}

// Deterministic 2-D two-class datasets; class counts balanced within one.
// blobs: Gaussian clouds around (-2, 0) and (+2, 0).
// two_moons: the interleaved half-circles, plus isotropic noise.
inline Dataset make_synthetic(SyntheticKind kind, std::size_t n, double noise, RngStream& rng) {
    if (n < 4) throw std::invalid_argument("make_synthetic: need n >= 4");
    Dataset ds;
    ds.features = 2;
    ds.inputs.reserve(n * 2);
    ds.targets.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        double x, y;
        if (kind == SyntheticKind::blobs) {
            x = (label == 0 ? -2.0 : 2.0) + rng.gaussian(0.0, noise);
            y = rng.gaussian(0.0, noise);
        } else {
            const double t = std::numbers::pi * rng.uniform();
            if (label == 0) {
                x = std::cos(t);
                y = std::sin(t);
            } else {
                x = 1.0 - std::cos(t);
                y = 0.5 - std::sin(t);
            }
            x += rng.gaussian(0.0, noise);
            y += rng.gaussian(0.0, noise);
        }
        ds.inputs.push_back(x);
        ds.inputs.push_back(y);
        ds.targets.push_back(label);
    }
    return ds;
}

// Counts accesses to the held-out test partition. The allowance starts at
// zero, so tuning code cannot read the test set at all; the harness grants
// exactly one read per (method, seed) right before final reporting.
class GuardedTestSet {
public:
    GuardedTestSet() = default;
    explicit GuardedTestSet(Dataset data) : data_(std::move(data)) {}

    void grant(std::size_t additional = 1) { allowance_ += additional; }

    const Dataset& acquire() {
        if (accesses_ >= allowance_)
            throw std::runtime_error("test-set hygiene violation: access " +
                                     std::to_string(accesses_ + 1) + " exceeds allowance " +
                                     std::to_string(allowance_));
        ++accesses_;
        return data_;
    }

    std::size_t accesses() const noexcept { return accesses_; }
    std::size_t size() const noexcept { return data_.size(); }

private:
    Dataset data_;
    std::size_t accesses_ = 0;
    std::size_t allowance_ = 0;
};

struct SplitFractions {
    double train = 0.8;
    double cross_validation = 0.1;
    double test = 0.1;
};

struct DatasetSplit {
    Dataset train;
    Dataset cross_validation;
    GuardedTestSet test;
};

// Shuffles once, then carves disjoint train/cv/test partitions of the
// requested sizes. `max_train` > 0 additionally caps the train partition.
inline DatasetSplit split(const Dataset& data, const SplitFractions& fractions, RngStream& rng,
                          std::size_t max_train = 0) {
    if (!(fractions.train > 0.0) || !(fractions.cross_validation > 0.0) || !(fractions.test > 0.0))
        throw std::invalid_argument("split: all fractions must be positive");
    if (fractions.train + fractions.cross_validation + fractions.test > 1.0 + 1e-12)
        throw std::invalid_argument("split: fractions must sum to at most 1");

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    const auto n = static_cast<double>(data.size());
    std::size_t n_train = static_cast<std::size_t>(n * fractions.train);
    const std::size_t n_cv = static_cast<std::size_t>(n * fractions.cross_validation);
    const std::size_t n_test = static_cast<std::size_t>(n * fractions.test);
    if (max_train > 0) n_train = std::min(n_train, max_train);
    if (n_train == 0 || n_cv == 0 || n_test == 0)
        throw std::invalid_argument("split: a partition came out empty; dataset too small");

    auto take = [&](std::size_t begin, std::size_t count) {
        std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                      order.begin() + static_cast<std::ptrdiff_t>(begin + count));
        Batch b = data.row_batch(rows);
        Dataset part;
        part.features = b.features;
        part.inputs = std::move(b.inputs);
        part.targets = std::move(b.targets);
        return part;
    };

    DatasetSplit out;
    out.train = take(0, n_train);
    out.cross_validation = take(n_train, n_cv);
    out.test = GuardedTestSet(take(n_train + n_cv, n_test));
    return out;
}

// Seeded random access into a dataset's batches. `draw(k)` is a pure function
// of (seed, k): the k-th i.i.d. minibatch, rows sampled with replacement.
// `epoch_batch(e, k)` is the k-th slice of a per-epoch shuffle, covering the
// whole dataset once per epoch.
class BatchSampler {
public:
    BatchSampler(const Dataset& data, std::size_t batch_size, RngStream stream)
        : data_(&data), batch_size_(batch_size), stream_(stream) {
        if (batch_size_ == 0) throw std::invalid_argument("batch size must be positive");
        if (data.size() == 0) throw std::invalid_argument("cannot sample from an empty dataset");
    }

    std::size_t batch_size() const noexcept { return batch_size_; }

    std::size_t batches_per_epoch() const noexcept {
        return std::max<std::size_t>(1, data_->size() / batch_size_);
    }

    Batch draw(std::uint64_t index) const {
        RngStream rng = stream_.derive(index);
        std::vector<std::size_t> rows(std::min(batch_size_, data_->size()));
        for (auto& r : rows) r = static_cast<std::size_t>(rng.uniform_below(data_->size()));
        return data_->row_batch(rows);
    }

    Batch epoch_batch(std::uint64_t epoch, std::size_t k) const {
        const std::size_t per = batches_per_epoch();
        if (k >= per) throw std::invalid_argument("epoch batch index out of range");
        RngStream rng = stream_.derive(kEpochTag, epoch);
        std::vector<std::size_t> order(data_->size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        const std::size_t begin = k * batch_size_;
        const std::size_t end = std::min(begin + batch_size_, order.size());
        std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                      order.begin() + static_cast<std::ptrdiff_t>(end));
        return data_->row_batch(rows);
    }

private:
    static constexpr std::uint64_t kEpochTag = 0xe70c;

    const Dataset* data_;
    std::size_t batch_size_;
    RngStream stream_;
};

}  // namespace popdescent
