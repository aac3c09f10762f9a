#pragma once

#include "rkpod/metrics.hpp"
#include "rkpod/pipeline.hpp"
#include "rkpod/synthetic.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rkpod {

// One missingness cell of the experiment grid. Logistic mechanisms take their
// slope from `slope` when finite, otherwise it is calibrated per replication
// so the expected missing proportion hits `proportion`. The offset defaults
// to 3.0 for p <= 10 and 2.0 otherwise when NaN.
struct MissingnessSpec {
    enum class Kind { Mcar, Mar, Mnar1, Mnar2 };
    Kind kind = Kind::Mcar;
    double proportion = 0.1;
    double slope = std::numeric_limits<double>::quiet_NaN();
    double offset = std::numeric_limits<double>::quiet_NaN();
};

MissingnessSpec::Kind mechanism_from_string(const std::string& name);
std::string to_string(MissingnessSpec::Kind kind);

// Applies the mechanism; returns the (possibly calibrated) slope through
// used_slope when given.
MaskedMatrix apply_missingness(const Matrix& values, const MissingnessSpec& spec, Rng& rng,
                               double* used_slope = nullptr);

struct ExperimentConfig {
    MixtureSpec mixture;
    std::vector<MissingnessSpec> cells;
    std::vector<std::pair<std::string, FitConfig>> methods;
    int replications = 1;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_dir = ".";
    int surrogate_n = 100000;
    int surrogate_restarts = 10;
    int validation_n = 400;
    std::string na_token = "NA";
};

struct BenchRow {
    std::string method;
    std::string mechanism;
    double proportion = 0.0;
    int replication = 0;
    EvalReport report;
    std::uint64_t seed = 0;
    std::string error;  // nonempty when this cell failed; the run continues
};

// Full grid: per (cell, replication) generate data, run every method, and
// evaluate MSE against the large-sample surrogate centers, CER against the
// generating labels, and predictive CER on a fresh complete validation
// sample. Replications run in parallel; every byte of the output is
// determined by the config and seed except the wall-time columns.
std::vector<BenchRow> run_bench(const ExperimentConfig& config, std::ostream* log = nullptr);

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);
void write_bench_summary_csv(const std::string& path, const std::vector<BenchRow>& rows);

// Writes data/mask/labels/complete CSVs per (cell, replication) plus the true
// centers and a manifest recording seeds and calibrated parameters. Uses the
// same seed derivations as run_bench, so generated files reproduce the bench
// inputs exactly.
void run_generate(const ExperimentConfig& config, std::ostream* log = nullptr);

// Key = value lines; includes a hash of the configuration.
void write_manifest(const std::string& path, const ExperimentConfig& config,
                    const std::vector<std::pair<std::string, std::string>>& extra);

}  // namespace rkpod
