#include "normbound/data.hpp"

#include "normbound/errors.hpp"
#include "normbound/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace normbound {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_u32_be(std::ifstream& in, const std::filesystem::path& path,
                          std::size_t offset) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) {
        throw data_error(path.string() + ": truncated at byte offset " + std::to_string(offset));
    }
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_u32_be(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::vector<unsigned char> read_bytes(std::ifstream& in, std::size_t count,
                                      const std::filesystem::path& path, std::size_t offset) {
    std::vector<unsigned char> bytes(count);
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count))) {
        const auto got = static_cast<std::size_t>(in.gcount());
        throw data_error(path.string() + ": truncated at byte offset " +
                         std::to_string(offset + got));
    }
    return bytes;
}

} // namespace

std::vector<DatasetSample> Dataset::samples() const {
    std::vector<DatasetSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample(i));
    return out;
}

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, std::size_t class_count) {
    if (class_count == 0) throw data_error("load_idx: class_count must be positive");

    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw data_error(images_path.string() + ": cannot open");
    const std::uint32_t img_magic = read_u32_be(img, images_path, 0);
    if (img_magic != kImageMagic) {
        throw data_error(images_path.string() + ": bad magic at byte offset 0 (expected 0x00000803)");
    }
    const std::uint32_t count = read_u32_be(img, images_path, 4);
    const std::uint32_t rows = read_u32_be(img, images_path, 8);
    const std::uint32_t cols = read_u32_be(img, images_path, 12);
    const std::size_t pixels = std::size_t(rows) * cols;
    const auto img_bytes = read_bytes(img, std::size_t(count) * pixels, images_path, 16);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw data_error(labels_path.string() + ": cannot open");
    const std::uint32_t lab_magic = read_u32_be(lab, labels_path, 0);
    if (lab_magic != kLabelMagic) {
        throw data_error(labels_path.string() + ": bad magic at byte offset 0 (expected 0x00000801)");
    }
    const std::uint32_t lab_count = read_u32_be(lab, labels_path, 4);
    if (lab_count != count) {
        throw data_error(labels_path.string() + ": label count " + std::to_string(lab_count) +
                         " does not match image count " + std::to_string(count));
    }
    const auto lab_bytes = read_bytes(lab, lab_count, labels_path, 8);

    Dataset ds;
    ds.n = count;
    ds.input_dim = pixels;
    ds.target_dim = class_count;
    ds.inputs.resize(ds.n * ds.input_dim);
    ds.targets.assign(ds.n * ds.target_dim, 0.0);
    for (std::size_t i = 0; i < img_bytes.size(); ++i) {
        ds.inputs[i] = static_cast<double>(img_bytes[i]) / 255.0;
    }
    for (std::size_t i = 0; i < ds.n; ++i) {
        const unsigned label = lab_bytes[i];
        if (label >= class_count) {
            throw data_error(labels_path.string() + ": label " + std::to_string(label) +
                             " >= class_count at byte offset " + std::to_string(8 + i));
        }
        ds.targets[i * class_count + label] = 1.0;
    }
    return ds;
}

void write_idx_images(const std::filesystem::path& path, const Dataset& ds,
                      std::size_t rows, std::size_t cols) {
    if (rows * cols != ds.input_dim) {
        throw data_error("write_idx_images: rows*cols must equal the input dimension");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error(path.string() + ": cannot open for writing");
    write_u32_be(out, kImageMagic);
    write_u32_be(out, static_cast<std::uint32_t>(ds.n));
    write_u32_be(out, static_cast<std::uint32_t>(rows));
    write_u32_be(out, static_cast<std::uint32_t>(cols));
    for (double v : ds.inputs) {
        const long b = std::lround(v * 255.0);
        if (b < 0 || b > 255) throw data_error("write_idx_images: pixel outside [0, 1]");
        const unsigned char c = static_cast<unsigned char>(b);
        out.write(reinterpret_cast<const char*>(&c), 1);
    }
}

void write_idx_labels(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error(path.string() + ": cannot open for writing");
    write_u32_be(out, kLabelMagic);
    write_u32_be(out, static_cast<std::uint32_t>(ds.n));
    for (std::size_t i = 0; i < ds.n; ++i) {
        const auto t = ds.target(i);
        const auto it = std::find(t.begin(), t.end(), 1.0);
        if (it == t.end()) throw data_error("write_idx_labels: target row is not one-hot");
        const unsigned char c = static_cast<unsigned char>(it - t.begin());
        out.write(reinterpret_cast<const char*>(&c), 1);
    }
}

Dataset synthetic(std::size_t classes, std::size_t per_class, std::size_t dim,
                  double separation, std::uint64_t seed) {
    if (classes == 0 || per_class == 0 || dim == 0) {
        throw domain_error("synthetic: classes, per_class and dim must be positive");
    }
    if (!(separation >= 0)) throw domain_error("synthetic: separation must be >= 0");
    Rng rng(seed);

    // random class directions, Gram-Schmidt as far as the dimension allows
    std::vector<std::vector<double>> dirs(classes, std::vector<double>(dim));
    for (std::size_t c = 0; c < classes; ++c) {
        auto& u = dirs[c];
        for (auto& v : u) v = rng.normal();
        for (std::size_t prev = 0; prev < c && prev < dim; ++prev) {
            double dot = 0;
            for (std::size_t j = 0; j < dim; ++j) dot += u[j] * dirs[prev][j];
            for (std::size_t j = 0; j < dim; ++j) u[j] -= dot * dirs[prev][j];
        }
        double norm2 = 0;
        for (double v : u) norm2 += v * v;
        const double norm = std::sqrt(norm2);
        if (norm > 1e-12) {
            for (auto& v : u) v /= norm;
        }
    }

    Dataset ds;
    ds.n = classes * per_class;
    ds.input_dim = dim;
    ds.target_dim = classes;
    ds.inputs.resize(ds.n * dim);
    ds.targets.assign(ds.n * classes, 0.0);
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            double* x = ds.inputs.data() + row * dim;
            for (std::size_t j = 0; j < dim; ++j) {
                x[j] = separation * dirs[c][j] + rng.normal();
            }
            ds.targets[row * classes + c] = 1.0;
        }
    }
    return ds;
}

Dataset subset(const Dataset& ds, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw domain_error("subset: n must be positive");
    if (n > ds.n) throw domain_error("subset: n exceeds dataset size");
    Rng rng(seed);
    std::vector<std::size_t> idx(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) idx[i] = i;
    // partial Fisher-Yates: the first n entries form the sample
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(ds.n - i));
        std::swap(idx[i], idx[j]);
    }
    Dataset out;
    out.n = n;
    out.input_dim = ds.input_dim;
    out.target_dim = ds.target_dim;
    out.inputs.resize(n * ds.input_dim);
    out.targets.resize(n * ds.target_dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = ds.input(idx[i]);
        const auto y = ds.target(idx[i]);
        std::copy(x.begin(), x.end(), out.inputs.begin() + i * ds.input_dim);
        std::copy(y.begin(), y.end(), out.targets.begin() + i * ds.target_dim);
    }
    return out;
}

void save_theta(const std::filesystem::path& path, std::span<const double> theta) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint writer assumes a little-endian host");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error(path.string() + ": cannot open for writing");
    const std::uint64_t count = theta.size();
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(theta.data()),
              static_cast<std::streamsize>(theta.size() * sizeof(double)));
    if (!out) throw data_error(path.string() + ": write failed");
}

std::vector<double> load_theta(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error(path.string() + ": cannot open");
    std::uint64_t count = 0;
    if (!in.read(reinterpret_cast<char*>(&count), 8)) {
        throw data_error(path.string() + ": truncated header");
    }
    std::vector<double> theta(count);
    if (!in.read(reinterpret_cast<char*>(theta.data()),
                 static_cast<std::streamsize>(count * sizeof(double)))) {
        throw data_error(path.string() + ": truncated payload");
    }
    return theta;
}

} // namespace normbound
