#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// End-to-end checks of the installed command surface: subcommand names,
// global flags and exit codes (0 ok, 2 config, 3 data, 4 numeric).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(NB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path temp_dir(const std::string& leaf) {
    const fs::path p = fs::temp_directory_path() / "normbound_cli_test" / leaf;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& data_section = "") {
    const fs::path p = dir / "exp.cfg";
    std::ofstream out(p);
    out << R"(
seed = 5
model.input_dim = 4
model.output_dim = 2
model.hidden_width = 6
loss.kind = mse
optimizer.steps = 30
optimizer.batch_size = 8
diagnostics.stride = 5
diagnostics.batch_size = 4
diagnostics.pearson_window = 3
sweep.k_list = 0, 1
sweep.seeds = 2
)";
    if (data_section.empty()) {
        out << R"(
data.source = synthetic
data.classes = 2
data.per_class = 30
data.dim = 4
data.separation = 3
)";
    } else {
        out << data_section;
    }
    out << "output_dir = " << (dir / "run").string() << "\n";
    return p;
}

} // namespace

TEST_CASE("train, report and analyze round trip with exit code 0") {
    const auto dir = temp_dir("roundtrip");
    const auto cfg = write_config(dir);
    CHECK(run("train --config " + cfg.string()) == 0);
    CHECK(fs::exists(dir / "run" / "trace.csv"));
    CHECK(run("report --run " + (dir / "run").string()) == 0);
    CHECK(fs::exists(dir / "run" / "bounds.svg"));
    CHECK(run("analyze --config " + cfg.string() + " --checkpoint " +
              (dir / "run" / "checkpoint_final.bin").string()) == 0);
    CHECK(fs::exists(dir / "run" / "analysis.csv"));
    CHECK(run("depth-sweep --config " + cfg.string()) == 0);
    CHECK(run("gic --config " + cfg.string()) == 0);
}

TEST_CASE("seed override changes the trace") {
    const auto dir = temp_dir("seed");
    const auto cfg = write_config(dir);
    CHECK(run("train --config " + cfg.string() + " --out " + (dir / "a").string()) == 0);
    CHECK(run("train --config " + cfg.string() + " --out " + (dir / "b").string() +
              " --seed 6") == 0);
    std::ifstream fa(dir / "a" / "trace.csv"), fb(dir / "b" / "trace.csv");
    std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(a != b);
}

TEST_CASE("config errors exit with 2") {
    const auto dir = temp_dir("cfgerr");
    CHECK(run("train --config " + (dir / "missing.cfg").string()) == 2);
    const fs::path bad = dir / "bad.cfg";
    std::ofstream(bad) << "unknown.key = 1\n";
    CHECK(run("train --config " + bad.string()) == 2);
}

TEST_CASE("data errors exit with 3") {
    const auto dir = temp_dir("dataerr");
    const auto cfg = write_config(dir, "data.source = idx\ndata.classes = 2\ndata.images = " +
                                           (dir / "no_imgs").string() + "\ndata.labels = " +
                                           (dir / "no_labs").string() + "\n");
    CHECK(run("train --config " + cfg.string()) == 3);

    const auto cfg2 = write_config(temp_dir("dataerr2"));
    CHECK(run("report --run " + (dir / "nope").string()) == 3);
    CHECK(run("analyze --config " + cfg2.string() + " --checkpoint " +
              (dir / "nope.bin").string()) == 3);
}
