#include "rkpod/csv.hpp"

#include "rkpod/bench.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace rkpod;
using test::random_mask;
using test::random_matrix;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("rkpod_csv_test_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("masked CSV round-trips values and mask exactly") {
    TempDir dir;
    Rng rng(211);
    Matrix values = random_matrix(12, 5, rng, 3.0);
    values(0, 0) = 1.0 / 3.0;  // exercise full-precision output
    values(1, 1) = 1e-17;
    BoolMatrix mask = random_mask(12, 5, 0.7, rng);
    MaskedMatrix m(values, mask);

    write_masked_csv(dir.file("data.csv"), m);
    MaskedMatrix back = read_masked_csv(dir.file("data.csv"));
    CHECK(back.values() == m.values());
    CHECK(back.mask() == m.mask());

    write_mask_csv(dir.file("mask.csv"), m.mask());
    CHECK(read_mask_csv(dir.file("mask.csv")) == m.mask());
}

TEST_CASE("full matrix CSV round-trips bit-exactly") {
    TempDir dir;
    Rng rng(223);
    Matrix values = random_matrix(7, 3, rng, 100.0);
    write_matrix_csv(dir.file("m.csv"), values);
    CHECK(read_matrix_csv(dir.file("m.csv")) == values);
}

TEST_CASE("labels CSV round-trip") {
    TempDir dir;
    IntVector labels(5);
    labels << 0, 3, 1, 2, 0;
    write_labels_csv(dir.file("labels.csv"), labels);
    CHECK(read_labels_csv(dir.file("labels.csv")) == labels);
}

TEST_CASE("parse errors carry row and column positions") {
    TempDir dir;
    {
        std::ofstream out(dir.file("bad.csv"));
        out << "1.5,2.5\n3.5,oops\n";
    }
    CHECK_THROWS_WITH_AS(read_matrix_csv(dir.file("bad.csv")),
                         doctest::Contains("row 2, column 2"), std::runtime_error);
}

TEST_CASE("NA tokens, headers and delimiters are configurable") {
    TempDir dir;
    {
        std::ofstream out(dir.file("custom.csv"));
        out << "h1;h2\n1.0;?\n?;4.0\n";
    }
    CsvOptions opts;
    opts.header = true;
    opts.delimiter = ';';
    opts.na_tokens = {"?"};
    MaskedMatrix m = read_masked_csv(dir.file("custom.csv"), opts);
    CHECK(m.rows() == 2);
    CHECK(m.observed(0, 0));
    CHECK_FALSE(m.observed(0, 1));
    CHECK_FALSE(m.observed(1, 0));
    CHECK(m.values()(1, 1) == 4.0);
}

TEST_CASE("ragged rows are rejected") {
    TempDir dir;
    {
        std::ofstream out(dir.file("ragged.csv"));
        out << "1,2\n3\n";
    }
    CHECK_THROWS_AS(read_masked_csv(dir.file("ragged.csv")), std::runtime_error);
}

TEST_CASE("empty cells default to missing") {
    TempDir dir;
    {
        std::ofstream out(dir.file("gaps.csv"));
        out << "1,,3\n,5,6\n";
    }
    MaskedMatrix m = read_masked_csv(dir.file("gaps.csv"));
    CHECK_FALSE(m.observed(0, 1));
    CHECK_FALSE(m.observed(1, 0));
    CHECK(m.values()(1, 1) == 5.0);
}

TEST_CASE("generated dataset files round-trip into the same masked matrix") {
    namespace fs = std::filesystem;
    TempDir dir;
    ExperimentConfig config;
    config.mixture = MixtureSpec::low_dim(40);
    MissingnessSpec cell;
    cell.kind = MissingnessSpec::Kind::Mnar1;
    cell.proportion = 0.2;
    config.cells = {cell};
    config.replications = 1;
    config.seed = 424242;
    config.out_dir = dir.file("gen");
    run_generate(config);

    fs::path base = fs::path(dir.file("gen")) / "mnar1_20_rep0";
    MaskedMatrix ingested = read_masked_csv(base.string() + "_data.csv");
    Matrix complete = read_matrix_csv(base.string() + "_complete.csv");
    BoolMatrix mask = read_mask_csv(base.string() + "_mask.csv");
    MaskedMatrix reference = project(complete, mask);
    CHECK(ingested.values() == reference.values());
    CHECK(ingested.mask() == reference.mask());
    IntVector labels = read_labels_csv(base.string() + "_labels.csv");
    CHECK(labels.size() == 40);
    CHECK(labels.maxCoeff() <= 3);

    // Same config and seed twice produces byte-identical files.
    config.out_dir = dir.file("gen2");
    run_generate(config);
    auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    for (const char* name : {"_data.csv", "_mask.csv", "_labels.csv", "_complete.csv"}) {
        fs::path other = fs::path(dir.file("gen2")) / "mnar1_20_rep0";
        CHECK(slurp(base.string() + name) == slurp(other.string() + name));
    }
    CHECK(slurp((fs::path(dir.file("gen")) / "manifest.txt").string()) ==
          slurp((fs::path(dir.file("gen2")) / "manifest.txt").string()));
}
