#include "rkpod/bench.hpp"

#include "rkpod/csv.hpp"
#include "rkpod/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace rkpod {

namespace {

constexpr std::uint64_t kTagSurrogate = 0x10;
constexpr std::uint64_t kTagData = 0x11;
constexpr std::uint64_t kTagMissing = 0x12;
constexpr std::uint64_t kTagValidation = 0x13;
constexpr std::uint64_t kTagFit = 0x14;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string cell_tag(const MissingnessSpec& cell) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%02d", to_string(cell.kind).c_str(),
                  static_cast<int>(std::lround(cell.proportion * 100)));
    return buf;
}

double default_offset(const MissingnessSpec& spec, Index p) {
    if (std::isfinite(spec.offset)) return spec.offset;
    return p <= 10 ? 3.0 : 2.0;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string describe_config(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "n=" << config.mixture.n << ";p=" << config.mixture.p << ";k=" << config.mixture.k
        << ";d=" << config.mixture.d << ";a=" << config.mixture.a << ";reps=" << config.replications
        << ";seed=" << config.seed << ";surrogate_n=" << config.surrogate_n
        << ";validation_n=" << config.validation_n;
    for (const auto& cell : config.cells) {
        out << ";cell=" << to_string(cell.kind) << ":" << cell.proportion;
    }
    for (const auto& [name, cfg] : config.methods) {
        out << ";method=" << name << ":lambda=" << cfg.lambda << ":restarts=" << cfg.restarts;
    }
    return out.str();
}

}  // namespace

MissingnessSpec::Kind mechanism_from_string(const std::string& name) {
    if (name == "mcar") return MissingnessSpec::Kind::Mcar;
    if (name == "mar") return MissingnessSpec::Kind::Mar;
    if (name == "mnar1") return MissingnessSpec::Kind::Mnar1;
    if (name == "mnar2") return MissingnessSpec::Kind::Mnar2;
    throw std::invalid_argument("unknown missingness mechanism: " + name);
}

std::string to_string(MissingnessSpec::Kind kind) {
    switch (kind) {
        case MissingnessSpec::Kind::Mcar: return "mcar";
        case MissingnessSpec::Kind::Mar: return "mar";
        case MissingnessSpec::Kind::Mnar1: return "mnar1";
        case MissingnessSpec::Kind::Mnar2: return "mnar2";
    }
    return "?";
}

MaskedMatrix apply_missingness(const Matrix& values, const MissingnessSpec& spec, Rng& rng,
                               double* used_slope) {
    if (used_slope) *used_slope = std::numeric_limits<double>::quiet_NaN();
    switch (spec.kind) {
        case MissingnessSpec::Kind::Mcar:
            return apply_mcar(values, spec.proportion, rng);
        case MissingnessSpec::Kind::Mnar2:
            return apply_mnar2(values, spec.proportion);
        case MissingnessSpec::Kind::Mar: {
            double offset = default_offset(spec, values.cols());
            double slope = std::isfinite(spec.slope)
                               ? spec.slope
                               : calibrate_logistic(values, LogisticMechanism::Mar, offset, spec.proportion);
            if (used_slope) *used_slope = slope;
            return apply_mar(values, slope, offset, rng);
        }
        case MissingnessSpec::Kind::Mnar1: {
            double offset = default_offset(spec, values.cols());
            double slope = std::isfinite(spec.slope)
                               ? spec.slope
                               : calibrate_logistic(values, LogisticMechanism::Mnar1, offset, spec.proportion);
            if (used_slope) *used_slope = slope;
            return apply_mnar1(values, slope, offset, rng);
        }
    }
    throw std::logic_error("apply_missingness: unreachable");
}

std::vector<BenchRow> run_bench(const ExperimentConfig& config, std::ostream* log) {
    config.mixture.validate();
    if (config.replications < 1) throw std::invalid_argument("run_bench: replications must be >= 1");
    if (config.cells.empty() || config.methods.empty()) {
        throw std::invalid_argument("run_bench: needs at least one cell and one method");
    }

    if (log) *log << "computing surrogate centers (N=" << config.surrogate_n << ")\n";
    Rng surrogate_rng(derive_seed(config.seed, {kTagSurrogate}));
    Centers surrogate =
        surrogate_truth(config.mixture, config.surrogate_n, surrogate_rng, config.surrogate_restarts);

    const int cells = static_cast<int>(config.cells.size());
    const int methods = static_cast<int>(config.methods.size());
    const int tasks = cells * config.replications;
    std::vector<std::vector<BenchRow>> slots(static_cast<std::size_t>(tasks));

    parallel_for(tasks, config.workers, [&](int task) {
        const int c = task / config.replications;
        const int rep = task % config.replications;
        const MissingnessSpec& cell = config.cells[static_cast<std::size_t>(c)];
        const auto cu = static_cast<std::uint64_t>(c);
        const auto ru = static_cast<std::uint64_t>(rep);

        Rng data_rng(derive_seed(config.seed, {kTagData, cu, ru}));
        MixtureSample sample = gen_mixture(config.mixture, data_rng);
        Rng miss_rng(derive_seed(config.seed, {kTagMissing, cu, ru}));
        MaskedMatrix masked = apply_missingness(sample.values, cell, miss_rng);

        MixtureSpec vspec = config.mixture;
        vspec.n = config.validation_n;
        Rng val_rng(derive_seed(config.seed, {kTagValidation, cu, ru}));
        MixtureSample validation = gen_mixture(vspec, val_rng);

        std::vector<BenchRow>& rows = slots[static_cast<std::size_t>(task)];
        rows.reserve(static_cast<std::size_t>(methods));
        for (int mi = 0; mi < methods; ++mi) {
            const auto& [name, method_cfg] = config.methods[static_cast<std::size_t>(mi)];
            BenchRow row;
            row.method = name;
            row.mechanism = to_string(cell.kind);
            row.proportion = cell.proportion;
            row.replication = rep;
            row.seed = derive_seed(config.seed, {kTagFit, cu, ru, static_cast<std::uint64_t>(mi)});
            try {
                FitConfig cfg = method_cfg;
                cfg.workers = 1;  // tasks are already parallel
                auto t0 = std::chrono::steady_clock::now();
                MethodFit fit = fit_method(masked, config.mixture.k, cfg, row.seed);
                auto t1 = std::chrono::steady_clock::now();
                row.report.mse = mse_centers(fit.fit.centers, surrogate);
                row.report.cer = cer(fit.fit.membership, sample.labels);
                row.report.predictive_cer =
                    predictive_cer(fit.fit.centers, validation.values, validation.labels);
                row.report.active_features = static_cast<int>(fit.fit.active.size());
                row.report.wall_time_sec = std::chrono::duration<double>(t1 - t0).count();
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
        if (log) {
            std::ostringstream line;
            line << "cell " << cell_tag(cell) << " rep " << rep << " done\n";
            *log << line.str();
        }
    });

    std::vector<BenchRow> out;
    out.reserve(static_cast<std::size_t>(tasks * methods));
    for (auto& rows : slots) {
        for (auto& row : rows) out.push_back(std::move(row));
    }
    return out;
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "method,mechanism,proportion,replication,mse,cer,predictive_cer,active_features,seed,error,"
           "wall_time_sec\n";
    for (const auto& row : rows) {
        out << row.method << ',' << row.mechanism << ',' << format_number(row.proportion) << ','
            << row.replication << ',';
        if (row.error.empty()) {
            out << format_number(row.report.mse) << ',' << format_number(row.report.cer) << ','
                << format_number(row.report.predictive_cer) << ',' << row.report.active_features;
        } else {
            out << ",,,";
        }
        out << ',' << row.seed << ',' << row.error << ','
            << (row.error.empty() ? format_number(row.report.wall_time_sec) : std::string()) << '\n';
    }
}

void write_bench_summary_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    struct Cell {
        std::vector<double> mse, cer, pcer, active, time;
        int failures = 0;
    };
    std::map<std::tuple<std::string, std::string, double>, Cell> cells;
    for (const auto& row : rows) {
        Cell& cell = cells[{row.method, row.mechanism, row.proportion}];
        if (!row.error.empty()) {
            cell.failures += 1;
            continue;
        }
        cell.mse.push_back(row.report.mse);
        cell.cer.push_back(row.report.cer);
        cell.pcer.push_back(row.report.predictive_cer);
        cell.active.push_back(static_cast<double>(row.report.active_features));
        cell.time.push_back(row.report.wall_time_sec);
    }
    auto mean = [](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto sd = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        double m = mean(v);
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "method,mechanism,proportion,replications,failures,mean_mse,sd_mse,mean_cer,sd_cer,"
           "mean_predictive_cer,sd_predictive_cer,mean_active_features,mean_wall_time_sec\n";
    for (const auto& [key, cell] : cells) {
        out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << format_number(std::get<2>(key))
            << ',' << cell.mse.size() << ',' << cell.failures << ',' << format_number(mean(cell.mse))
            << ',' << format_number(sd(cell.mse)) << ',' << format_number(mean(cell.cer)) << ','
            << format_number(sd(cell.cer)) << ',' << format_number(mean(cell.pcer)) << ','
            << format_number(sd(cell.pcer)) << ',' << format_number(mean(cell.active)) << ','
            << format_number(mean(cell.time)) << '\n';
    }
}

void run_generate(const ExperimentConfig& config, std::ostream* log) {
    config.mixture.validate();
    if (config.replications < 1) throw std::invalid_argument("run_generate: replications must be >= 1");
    if (config.cells.empty()) throw std::invalid_argument("run_generate: needs at least one cell");
    std::filesystem::create_directories(config.out_dir);
    const std::filesystem::path dir(config.out_dir);

    write_matrix_csv((dir / "truth_centers.csv").string(), config.mixture.true_centers());

    std::vector<std::pair<std::string, std::string>> manifest_extra;
    for (std::size_t c = 0; c < config.cells.size(); ++c) {
        const MissingnessSpec& cell = config.cells[c];
        for (int rep = 0; rep < config.replications; ++rep) {
            const auto cu = static_cast<std::uint64_t>(c);
            const auto ru = static_cast<std::uint64_t>(rep);
            std::uint64_t data_seed = derive_seed(config.seed, {kTagData, cu, ru});
            std::uint64_t miss_seed = derive_seed(config.seed, {kTagMissing, cu, ru});
            Rng data_rng(data_seed);
            MixtureSample sample = gen_mixture(config.mixture, data_rng);
            Rng miss_rng(miss_seed);
            double used_slope;
            MaskedMatrix masked = apply_missingness(sample.values, cell, miss_rng, &used_slope);

            std::string stem = cell_tag(cell) + "_rep" + std::to_string(rep);
            write_masked_csv((dir / (stem + "_data.csv")).string(), masked, config.na_token);
            write_mask_csv((dir / (stem + "_mask.csv")).string(), masked.mask());
            write_labels_csv((dir / (stem + "_labels.csv")).string(), sample.labels);
            write_matrix_csv((dir / (stem + "_complete.csv")).string(), sample.values);

            manifest_extra.emplace_back(stem + "_seed_data", std::to_string(data_seed));
            manifest_extra.emplace_back(stem + "_seed_missing", std::to_string(miss_seed));
            if (std::isfinite(used_slope)) {
                manifest_extra.emplace_back(stem + "_calibrated_slope", format_number(used_slope));
            }
            if (log) *log << "wrote " << stem << "\n";
        }
    }
    write_manifest((dir / "manifest.txt").string(), config, manifest_extra);
}

void write_manifest(const std::string& path, const ExperimentConfig& config,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    std::string desc = describe_config(config);
    out << "config_hash = " << fnv1a(desc) << "\n";
    out << "config = " << desc << "\n";
    out << "master_seed = " << config.seed << "\n";
    out << "seed_scheme = splitmix64 chain: master -> (stage tag, cell, replication) -> (restart | arm)\n";
    out << "na_token = " << config.na_token << "\n";
    out << "version = 1\n";
    for (const auto& [key, value] : extra) out << key << " = " << value << "\n";
}

}  // namespace rkpod
