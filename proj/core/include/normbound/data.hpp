#ifndef NORMBOUND_DATA_HPP
#define NORMBOUND_DATA_HPP

#include "normbound/diagnostics.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace normbound {

// Row-major dataset: inputs n x m_x (image pixels scaled to [0,1]),
// one-hot targets n x m_y.
struct Dataset {
    std::size_t n = 0;
    std::size_t input_dim = 0;
    std::size_t target_dim = 0;
    std::vector<double> inputs;
    std::vector<double> targets;

    std::span<const double> input(std::size_t i) const {
        return {inputs.data() + i * input_dim, input_dim};
    }
    std::span<const double> target(std::size_t i) const {
        return {targets.data() + i * target_dim, target_dim};
    }
    DatasetSample sample(std::size_t i) const {
        auto xi = input(i);
        auto yi = target(i);
        return {{xi.begin(), xi.end()}, {yi.begin(), yi.end()}};
    }
    std::vector<DatasetSample> samples() const;
};

// IDX container (big-endian magic + dims, raw unsigned bytes):
//   images 0x00000803 with dims (count, rows, cols), labels 0x00000801.
// Pixels are divided by 255, labels one-hot encoded with label L mapped to
// component L (0-indexed).
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, std::size_t class_count);

// Fixture writers, exact inverses of load_idx for byte-representable data.
void write_idx_images(const std::filesystem::path& path, const Dataset& ds,
                      std::size_t rows, std::size_t cols);
void write_idx_labels(const std::filesystem::path& path, const Dataset& ds);

// Gaussian blobs: class c is centered at separation * u_c for orthonormal-ish
// random directions u_c, unit covariance, deterministic under seed.
Dataset synthetic(std::size_t classes, std::size_t per_class, std::size_t dim,
                  double separation, std::uint64_t seed);

// Uniform subsample without replacement (1 <= n <= dataset.n), seeded.
Dataset subset(const Dataset& ds, std::size_t n, std::uint64_t seed);

// Flat-theta checkpoint format: 8-byte little-endian count header followed by
// little-endian binary64 values.
void save_theta(const std::filesystem::path& path, std::span<const double> theta);
std::vector<double> load_theta(const std::filesystem::path& path);

} // namespace normbound

#endif
