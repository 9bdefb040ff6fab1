#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "normbound/data.hpp"
#include "normbound/errors.hpp"
#include "normbound/loss.hpp"
#include "normbound/optim.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>

using namespace normbound;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path p = fs::temp_directory_path() / "normbound_data_test";
    fs::create_directories(p);
    return p;
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("hand-crafted idx fixture loads exactly") {
    const auto dir = temp_dir();
    // two 2x2 images; headers written byte by byte
    const std::vector<unsigned char> images{
        0x00, 0x00, 0x08, 0x03, // magic for 3-d unsigned-byte data
        0x00, 0x00, 0x00, 0x02, // count
        0x00, 0x00, 0x00, 0x02, // rows
        0x00, 0x00, 0x00, 0x02, // cols
        0,    51,   102,  153,  // image 0
        204,  255,  0,    255,  // image 1
    };
    const std::vector<unsigned char> labels{
        0x00, 0x00, 0x08, 0x01, // magic for 1-d unsigned-byte data
        0x00, 0x00, 0x00, 0x02, // count
        7,    0,
    };
    write_bytes(dir / "imgs", images);
    write_bytes(dir / "labs", labels);

    const Dataset ds = load_idx(dir / "imgs", dir / "labs", 10);
    CHECK(ds.n == 2);
    CHECK(ds.input_dim == 4);
    CHECK(ds.target_dim == 10);
    const std::vector<double> row0{0.0, 51.0 / 255.0, 102.0 / 255.0, 153.0 / 255.0};
    for (std::size_t i = 0; i < 4; ++i) CHECK(ds.input(0)[i] == row0[i]);
    CHECK(ds.input(1)[3] == 1.0);

    // label byte 7 maps to component 7 (0-indexed)
    CHECK(ds.target(0)[7] == 1.0);
    CHECK(ds.target(1)[0] == 1.0);
    for (std::size_t i = 0; i < ds.n; ++i) {
        double sum = 0;
        std::size_t ones = 0;
        for (double v : ds.target(i)) {
            sum += v;
            if (v == 1.0) ++ones;
        }
        CHECK(sum == 1.0);
        CHECK(ones == 1);
    }
}

TEST_CASE("idx error reporting") {
    const auto dir = temp_dir();

    SUBCASE("wrong magic") {
        write_bytes(dir / "bad_magic", {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 0});
        write_bytes(dir / "labs0", {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 0});
        CHECK_THROWS_WITH_AS(load_idx(dir / "bad_magic", dir / "labs0", 10),
                             doctest::Contains("bad magic"), data_error);
    }

    SUBCASE("truncated payload reports the byte offset") {
        write_bytes(dir / "trunc",
                    {0x00, 0x00, 0x08, 0x03, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x02,
                     0x00, 0x00, 0x00, 0x02, 17});
        write_bytes(dir / "labs1", {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x01, 3});
        CHECK_THROWS_WITH_AS(load_idx(dir / "trunc", dir / "labs1", 10),
                             doctest::Contains("offset"), data_error);
    }

    SUBCASE("label out of range") {
        write_bytes(dir / "img1",
                    {0x00, 0x00, 0x08, 0x03, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01,
                     0x00, 0x00, 0x00, 0x01, 99});
        write_bytes(dir / "lab_big", {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x01, 9});
        CHECK_THROWS_WITH_AS(load_idx(dir / "img1", dir / "lab_big", 5),
                             doctest::Contains("class_count"), data_error);
    }

    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_idx(dir / "nope", dir / "nope2", 10), data_error);
    }
}

TEST_CASE("idx round trip") {
    const auto dir = temp_dir();
    Rng rng(3);
    Dataset ds;
    ds.n = 17;
    ds.input_dim = 9; // 3x3
    ds.target_dim = 4;
    ds.inputs.resize(ds.n * ds.input_dim);
    ds.targets.assign(ds.n * ds.target_dim, 0.0);
    for (auto& v : ds.inputs) v = static_cast<double>(rng.below(256)) / 255.0;
    for (std::size_t i = 0; i < ds.n; ++i) ds.targets[i * 4 + rng.below(4)] = 1.0;

    write_idx_images(dir / "rt_imgs", ds, 3, 3);
    write_idx_labels(dir / "rt_labs", ds);
    const Dataset back = load_idx(dir / "rt_imgs", dir / "rt_labs", 4);
    CHECK(back.inputs == ds.inputs);
    CHECK(back.targets == ds.targets);

    // the writer emits the documented magic bytes
    std::ifstream in(dir / "rt_imgs", std::ios::binary);
    unsigned char magic[4];
    in.read(reinterpret_cast<char*>(magic), 4);
    CHECK(magic[0] == 0x00);
    CHECK(magic[1] == 0x00);
    CHECK(magic[2] == 0x08);
    CHECK(magic[3] == 0x03);
}

TEST_CASE("synthetic blobs") {
    SUBCASE("deterministic under the seed") {
        const Dataset a = synthetic(3, 20, 8, 2.0, 42);
        const Dataset b = synthetic(3, 20, 8, 2.0, 42);
        CHECK(a.inputs == b.inputs);
        CHECK(a.targets == b.targets);
        const Dataset c = synthetic(3, 20, 8, 2.0, 43);
        CHECK(a.inputs != c.inputs);
    }

    SUBCASE("zero separation collapses the class means") {
        const Dataset ds = synthetic(4, 3000, 6, 0.0, 7);
        for (std::size_t cls = 0; cls < 4; ++cls) {
            std::vector<double> mean(6, 0.0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < ds.n; ++i) {
                if (ds.target(i)[cls] != 1.0) continue;
                for (std::size_t j = 0; j < 6; ++j) mean[j] += ds.input(i)[j];
                ++count;
            }
            for (double v : mean) CHECK(std::abs(v / double(count)) < 0.1);
        }
    }

    SUBCASE("separated blobs are linearly classifiable") {
        const Dataset ds = synthetic(2, 100, 8, 10.0, 11);
        ModelConfig mc;
        mc.input_dim = 8;
        mc.output_dim = 2;
        const ParamModel model = build(mc);
        const LossKind ce = parse_loss_kind("softmax_ce", 1.0, 2);
        auto state = make_sgd(std::vector<double>(model.theta_count, 0.0), 0.05, 0.0);
        Rng rng(13);
        const auto samples = ds.samples();
        for (int t = 0; t < 200; ++t) {
            std::vector<double> grad(model.theta_count, 0.0);
            for (int b = 0; b < 16; ++b) {
                const auto& z = samples[rng.below(samples.size())];
                auto fwd = forward(model, state.theta, z.x);
                const auto g = vjp_params(fwd.tape, loss_grad_output(ce, fwd.output, z.y));
                for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i] / 16.0;
            }
            sgd_step(state, grad);
        }
        std::size_t correct = 0;
        for (const auto& z : samples) {
            const auto out = forward(model, state.theta, z.x).output;
            const std::size_t pred = std::max_element(out.begin(), out.end()) - out.begin();
            if (z.y[pred] == 1.0) ++correct;
        }
        CHECK(double(correct) / double(samples.size()) >= 0.99);
    }
}

TEST_CASE("subset sampling") {
    const Dataset ds = synthetic(3, 10, 4, 1.0, 5);

    SUBCASE("full-size subset is a permutation") {
        const Dataset p = subset(ds, ds.n, 9);
        std::multiset<double> a(ds.inputs.begin(), ds.inputs.end());
        std::multiset<double> b(p.inputs.begin(), p.inputs.end());
        CHECK(a == b);
        CHECK(p.inputs != ds.inputs); // almost surely shuffled
    }

    SUBCASE("seeded and bounded") {
        const Dataset s1 = subset(ds, 10, 21);
        const Dataset s2 = subset(ds, 10, 21);
        CHECK(s1.inputs == s2.inputs);
        CHECK_THROWS_AS(subset(ds, 0, 1), domain_error);
        CHECK_THROWS_AS(subset(ds, ds.n + 1, 1), domain_error);
    }
}

TEST_CASE("flat-theta checkpoints round trip") {
    const auto dir = temp_dir();
    std::vector<double> theta{1.5, -2.25, 0.0, 1e-300, 3.14159};
    save_theta(dir / "theta.bin", theta);
    CHECK(load_theta(dir / "theta.bin") == theta);

    // 8-byte count header + 8 bytes per value
    CHECK(fs::file_size(dir / "theta.bin") == 8 + theta.size() * 8);

    write_bytes(dir / "short.bin", {1, 0, 0, 0, 0, 0, 0, 0}); // promises 1 value, has none
    CHECK_THROWS_AS(load_theta(dir / "short.bin"), data_error);
}
