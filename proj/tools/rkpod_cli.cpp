// Command-line front end: dataset generation and ingestion, fitting, tuning
// parameter selection, batch benchmarking and evaluation, all with
// deterministic seeding.

#include "rkpod/bench.hpp"
#include "rkpod/csv.hpp"
#include "rkpod/tuning.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace rkpod;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

MixtureSpec mixture_from_flags(const std::string& preset, int n, int p, int k, int d, double a) {
    MixtureSpec spec;
    if (preset == "p10") {
        spec = MixtureSpec::low_dim();
    } else if (preset == "p100a08") {
        spec = MixtureSpec::high_dim();
    } else if (preset == "p100a1") {
        spec = MixtureSpec::high_dim(3000, 1.0);
    } else if (preset == "custom") {
        spec.n = n;
        spec.p = p;
        spec.k = k;
        spec.d = d;
        spec.a = a;
        spec.sigma_diag = Vector::Constant(p, 1.0);
    } else {
        throw CLI::ValidationError("--preset", "unknown preset: " + preset);
    }
    if (n > 0) spec.n = n;
    return spec;
}

std::vector<MissingnessSpec> cells_from_flags(const std::string& mechanisms,
                                              const std::string& proportions) {
    std::vector<MissingnessSpec> cells;
    for (const std::string& mech : split_list(mechanisms)) {
        for (const std::string& prop : split_list(proportions)) {
            MissingnessSpec cell;
            cell.kind = mechanism_from_string(mech);
            cell.proportion = std::stod(prop);
            cells.push_back(cell);
        }
    }
    return cells;
}

struct MethodFlags {
    std::string method = "kpod";
    std::string penalty;
    std::string gl_variant = "ridge";
    std::string weights = "adaptive";
    std::string init = "impt";
    int restarts = 100;
    double lambda = 0.0;
    int max_outer = 200;
    int max_inner = 100;
    double tol = 1e-6;
    std::string sparse_fractions;
};

void add_method_flags(CLI::App* cmd, MethodFlags& flags) {
    cmd->add_option("--method", flags.method, "kmeans | kpod | rkpod-gl | rkpod-l0 | rkpod (with --penalty)");
    cmd->add_option("--penalty", flags.penalty, "l0 | gl (with --method rkpod)");
    cmd->add_option("--gl-variant", flags.gl_variant, "ridge | quadratic");
    cmd->add_option("--weights", flags.weights, "adaptive | uniform");
    cmd->add_option("--init", flags.init, "comp | impt | sparse");
    cmd->add_option("--restarts", flags.restarts, "initialization restarts");
    cmd->add_option("--lambda", flags.lambda, "regularization strength");
    cmd->add_option("--max-outer", flags.max_outer, "outer iteration cap");
    cmd->add_option("--max-inner", flags.max_inner, "inner iteration cap");
    cmd->add_option("--tol", flags.tol, "relative loss-change tolerance");
    cmd->add_option("--sparse-fractions", flags.sparse_fractions,
                    "comma list of fractions for sparse initialization");
}

FitConfig config_from_flags(const MethodFlags& flags) {
    FitConfig cfg;
    std::string method = flags.method;
    if (method == "rkpod") {
        if (flags.penalty == "l0") {
            method = "rkpod-l0";
        } else if (flags.penalty == "gl") {
            method = "rkpod-gl";
        } else {
            throw CLI::ValidationError("--penalty", "use --penalty l0 or --penalty gl with --method rkpod");
        }
    }
    cfg.method = method_from_string(method);
    cfg.lambda = flags.lambda;
    if (flags.gl_variant == "ridge") {
        cfg.gl_variant = PenaltySpec::GlVariant::RidgeMM;
    } else if (flags.gl_variant == "quadratic") {
        cfg.gl_variant = PenaltySpec::GlVariant::Quadratic;
    } else {
        throw CLI::ValidationError("--gl-variant", "unknown variant: " + flags.gl_variant);
    }
    if (flags.weights == "adaptive") {
        cfg.weights = WeightScheme::Adaptive;
    } else if (flags.weights == "uniform") {
        cfg.weights = WeightScheme::Uniform;
    } else {
        throw CLI::ValidationError("--weights", "unknown scheme: " + flags.weights);
    }
    if (flags.init == "comp") {
        cfg.init = InitKind::Comp;
    } else if (flags.init == "impt") {
        cfg.init = InitKind::Impt;
    } else if (flags.init == "sparse") {
        cfg.init = InitKind::Sparse;
    } else {
        throw CLI::ValidationError("--init", "unknown strategy: " + flags.init);
    }
    cfg.restarts = flags.restarts;
    cfg.outer.max_outer = flags.max_outer;
    cfg.outer.tol = flags.tol;
    cfg.outer.inner.max_iter = flags.max_inner;
    cfg.outer.inner.tol = flags.tol;
    for (const std::string& f : split_list(flags.sparse_fractions)) {
        cfg.sparse_fractions.push_back(std::stod(f));
    }
    return cfg;
}

MaskedMatrix load_data(const std::string& data_path, const std::string& mask_path,
                       const CsvOptions& opts) {
    if (mask_path.empty()) return read_masked_csv(data_path, opts);
    CsvOptions raw = opts;
    raw.na_tokens.push_back("NA");  // masked cells may carry placeholders
    MaskedMatrix with_na = read_masked_csv(data_path, raw);
    BoolMatrix mask = read_mask_csv(mask_path, opts);
    if (mask.rows() != with_na.rows() || mask.cols() != with_na.cols()) {
        throw std::runtime_error("mask and data dimensions differ");
    }
    for (Index i = 0; i < mask.rows(); ++i) {
        for (Index j = 0; j < mask.cols(); ++j) {
            if (mask(i, j) && !with_na.observed(i, j)) {
                throw std::runtime_error("mask marks cell (" + std::to_string(i + 1) + ", " +
                                         std::to_string(j + 1) + ") observed but the data file has no value");
            }
        }
    }
    return MaskedMatrix(with_na.values(), mask);
}

void write_fit_outputs(const std::string& out_dir, const MaskedMatrix& data, const MethodFit& fit,
                       const FitConfig& cfg, bool check_optimality) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_matrix_csv((dir / "centers.csv").string(), fit.fit.centers);
    write_labels_csv((dir / "membership.csv").string(), fit.fit.membership);
    Matrix trace(static_cast<Index>(fit.fit.loss_trace.size()), 1);
    for (std::size_t t = 0; t < fit.fit.loss_trace.size(); ++t) {
        trace(static_cast<Index>(t), 0) = fit.fit.loss_trace[t];
    }
    write_matrix_csv((dir / "loss_trace.csv").string(), trace);
    if (fit.weights_used.size() > 0) {
        write_matrix_csv((dir / "weights.csv").string(), fit.weights_used);
    }

    std::ofstream diag(dir / "diagnostics.txt");
    diag << "method = " << to_string(cfg.method) << "\n";
    diag << "lambda = " << cfg.lambda << "\n";
    diag << "final_loss = " << fit.fit.final_loss() << "\n";
    diag << "outer_iters = " << fit.fit.outer_iters << "\n";
    diag << "inner_iters_total = " << fit.fit.inner_iters_total << "\n";
    diag << "converged = " << (fit.fit.converged ? "true" : "false") << "\n";
    diag << "seed = " << fit.fit.seed << "\n";
    diag << "active_features =";
    for (int j : fit.fit.active) diag << ' ' << j;
    diag << "\n";
    std::vector<int> missing_cols;
    for (Index j = 0; j < data.cols(); ++j) {
        bool any = false;
        for (Index i = 0; i < data.rows() && !any; ++i) any = data.observed(i, j);
        if (!any) missing_cols.push_back(static_cast<int>(j));
    }
    diag << "fully_missing_columns =";
    for (int j : missing_cols) diag << ' ' << j;
    diag << "\n";

    if (check_optimality && (cfg.method == Method::RegGl || cfg.method == Method::RegL0)) {
        PenaltySpec spec = cfg.method == Method::RegL0
                               ? PenaltySpec::l0(cfg.lambda)
                               : PenaltySpec::group_lasso(cfg.lambda, fit.weights_used, cfg.gl_variant);
        FixedPointReport report = fixed_point_check(data, fit.fit, spec);
        std::ofstream pout(dir / "optimality.csv");
        pout << "feature,is_zero,threshold_lhs,threshold_rhs,condition_holds,value_check_maxerr\n";
        for (const auto& rec : report.records) {
            pout << rec.feature << ',' << (rec.is_zero ? 1 : 0) << ',' << rec.threshold_lhs << ','
                 << rec.threshold_rhs << ',' << (rec.condition_holds ? 1 : 0) << ','
                 << rec.value_check_maxerr << '\n';
        }
        diag << "optimality_all_hold = " << (report.all_hold ? "true" : "false") << "\n";
    }
}

void write_tuning_csv(const std::string& path, const TuningResult& result) {
    std::ofstream out(path);
    out << "lambda,criterion_value,active_features\n";
    for (std::size_t s = 0; s < result.grid.size(); ++s) {
        out << result.grid[s] << ',' << result.criterion_values[s] << ',' << result.active_counts[s]
            << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clustering toolkit for high-dimensional data with missing entries"};
    app.require_subcommand(1);

    // Shared flags.
    std::string preset = "p10";
    int n = 0, p = 10, k = 4, d = 2;
    double a = 2.0;
    std::string mechanisms = "mcar";
    std::string proportions = "0.3";
    int replications = 1;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_dir = "out";
    std::string na_token = "NA";
    std::string data_path, mask_path;
    bool header = false;
    std::string delimiter = ",";

    auto add_data_flags = [&](CLI::App* cmd) {
        cmd->add_option("--data", data_path, "values CSV (missing cells as NA tokens)")->required();
        cmd->add_option("--mask", mask_path, "optional 0/1 observation mask CSV");
        cmd->add_flag("--header", header, "skip a header line");
        cmd->add_option("--delimiter", delimiter, "cell delimiter");
        cmd->add_option("--na-token", na_token, "token marking missing cells");
        cmd->add_option("--k", k, "number of clusters")->required();
    };
    auto csv_options = [&]() {
        CsvOptions opts;
        opts.header = header;
        opts.delimiter = delimiter.empty() ? ',' : delimiter[0];
        opts.na_tokens = {na_token, "NaN", ""};
        return opts;
    };

    auto add_grid_flags = [&](CLI::App* cmd) {
        cmd->add_option("--preset", preset, "p10 | p100a08 | p100a1 | custom");
        cmd->add_option("--n", n, "sample size override");
        cmd->add_option("--p", p, "features (custom preset)");
        cmd->add_option("--k", k, "clusters (custom preset)");
        cmd->add_option("--d", d, "informative features (custom preset)");
        cmd->add_option("--a", a, "signal magnitude (custom preset)");
        cmd->add_option("--mechanisms", mechanisms, "comma list: mcar,mar,mnar1,mnar2");
        cmd->add_option("--proportions", proportions, "comma list of missing proportions");
        cmd->add_option("--replications", replications, "replications per cell");
    };

    // generate
    auto* gen = app.add_subcommand("generate", "write synthetic dataset files");
    add_grid_flags(gen);
    gen->add_option("--seed", seed, "master seed");
    gen->add_option("--out", out_dir, "output directory");
    gen->add_option("--na-token", na_token, "token for missing cells");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "fit one method to a dataset");
    MethodFlags fit_flags;
    add_data_flags(fit_cmd);
    add_method_flags(fit_cmd, fit_flags);
    bool check_optimality = false;
    fit_cmd->add_flag("--check-optimality,--check-prop21", check_optimality,
                      "audit the converged fit feature by feature");
    fit_cmd->add_option("--seed", seed, "master seed");
    fit_cmd->add_option("--workers", workers, "parallel restarts");
    fit_cmd->add_option("--out", out_dir, "output directory");

    // tune
    auto* tune_cmd = app.add_subcommand("tune", "select lambda on a grid");
    MethodFlags tune_flags;
    add_data_flags(tune_cmd);
    add_method_flags(tune_cmd, tune_flags);
    std::string criterion = "instability";
    std::string grid_spec = "default";
    int splits = 30;
    bool bootstrap = false;
    bool shared_weights = false;
    tune_cmd->add_option("--criterion", criterion, "bic | instability | both");
    tune_cmd->add_option("--grid", grid_spec,
                         "default (per-sample scale, multiplied by n) or comma list of raw lambdas");
    tune_cmd->add_option("--splits", splits, "instability repetitions B");
    tune_cmd->add_flag("--bootstrap", bootstrap, "bootstrap splits instead of tri-partition");
    tune_cmd->add_flag("--shared-weights", shared_weights,
                       "reuse the full-data pilot weights inside instability arms");
    tune_cmd->add_option("--seed", seed, "master seed");
    tune_cmd->add_option("--workers", workers, "parallel arms");
    tune_cmd->add_option("--out", out_dir, "output directory");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "run the full experiment grid");
    add_grid_flags(bench_cmd);
    std::string methods = "kpod,rkpod-l0";
    MethodFlags bench_flags;
    bench_cmd->add_option("--methods", methods,
                          "comma list of methods, each optionally method:init");
    bench_cmd->add_option("--lambda", bench_flags.lambda, "fixed lambda for regularized methods");
    bench_cmd->add_option("--init", bench_flags.init, "comp | impt | sparse");
    bench_cmd->add_option("--restarts", bench_flags.restarts, "restarts per fit");
    bench_cmd->add_option("--weights", bench_flags.weights, "adaptive | uniform");
    bench_cmd->add_option("--gl-variant", bench_flags.gl_variant, "ridge | quadratic");
    int surrogate_n = 100000;
    int validation_n = 400;
    bench_cmd->add_option("--surrogate-n", surrogate_n, "surrogate-truth sample size");
    bench_cmd->add_option("--validation-n", validation_n, "validation sample size");
    bench_cmd->add_option("--seed", seed, "master seed");
    bench_cmd->add_option("--workers", workers, "parallel replications");
    bench_cmd->add_option("--out", out_dir, "output directory");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score fitted centers/labels against truth");
    std::string centers_path, truth_path, labels_path, labels_true_path;
    std::string validation_path, validation_labels_path, append_path;
    eval_cmd->add_option("--centers", centers_path, "estimated centers CSV")->required();
    eval_cmd->add_option("--truth", truth_path, "true centers CSV")->required();
    eval_cmd->add_option("--labels", labels_path, "estimated membership CSV");
    eval_cmd->add_option("--labels-true", labels_true_path, "true labels CSV");
    eval_cmd->add_option("--validation", validation_path, "complete validation values CSV");
    eval_cmd->add_option("--validation-labels", validation_labels_path, "validation labels CSV");
    eval_cmd->add_option("--append-to", append_path, "append one result row to this CSV");
    bool matched_mse = false;
    eval_cmd->add_flag("--matched-mse", matched_mse, "also report bijective-matching MSE");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            ExperimentConfig config;
            config.mixture = mixture_from_flags(preset, n, p, k, d, a);
            config.cells = cells_from_flags(mechanisms, proportions);
            config.replications = replications;
            config.seed = seed;
            config.out_dir = out_dir;
            config.na_token = na_token;
            run_generate(config, &std::cout);
            return 0;
        }

        if (fit_cmd->parsed()) {
            MaskedMatrix data = load_data(data_path, mask_path, csv_options());
            FitConfig cfg = config_from_flags(fit_flags);
            cfg.workers = workers;
            MethodFit fit = fit_method(data, k, cfg, seed);
            write_fit_outputs(out_dir, data, fit, cfg, check_optimality);
            std::cout << "final_loss = " << fit.fit.final_loss()
                      << ", active_features = " << fit.fit.active.size()
                      << ", outer_iters = " << fit.fit.outer_iters << "\n";
            return 0;
        }

        if (tune_cmd->parsed()) {
            MaskedMatrix data = load_data(data_path, mask_path, csv_options());
            FitConfig base = config_from_flags(tune_flags);
            std::vector<double> grid;
            if (grid_spec == "default") {
                grid = default_lambda_grid();
                for (double& l : grid) l *= static_cast<double>(data.rows());
            } else {
                for (const std::string& g : split_list(grid_spec)) grid.push_back(std::stod(g));
            }
            TuneOpts opts;
            opts.B = splits;
            opts.scheme = bootstrap ? SplitScheme::Bootstrap : SplitScheme::Tripartition;
            opts.share_pilot_weights = shared_weights;
            opts.seed = seed;
            opts.workers = workers;
            std::filesystem::create_directories(out_dir);
            const std::filesystem::path dir(out_dir);
            std::vector<std::pair<std::string, Criterion>> runs;
            if (criterion == "bic" || criterion == "both") runs.emplace_back("bic", Criterion::Bic);
            if (criterion == "instability" || criterion == "both") {
                runs.emplace_back("instability", Criterion::Instability);
            }
            if (runs.empty()) throw CLI::ValidationError("--criterion", "unknown criterion: " + criterion);
            for (const auto& [name, crit] : runs) {
                TuningResult result = select_lambda(data, k, base, grid, crit, opts);
                write_tuning_csv((dir / ("tuning_" + name + ".csv")).string(), result);
                std::cout << name << ": chosen_lambda = " << result.chosen_lambda
                          << ", active_features = " << result.active_counts[result.chosen_index]
                          << "\n";
            }
            return 0;
        }

        if (bench_cmd->parsed()) {
            ExperimentConfig config;
            config.mixture = mixture_from_flags(preset, n, p, k, d, a);
            config.cells = cells_from_flags(mechanisms, proportions);
            config.replications = replications;
            config.seed = seed;
            config.workers = workers;
            config.out_dir = out_dir;
            config.surrogate_n = surrogate_n;
            config.validation_n = validation_n;
            // A method entry may carry its own init strategy as method:init,
            // so one run can bench e.g. kpod:comp against kpod:impt.
            for (const std::string& entry : split_list(methods)) {
                MethodFlags mf = bench_flags;
                std::size_t colon = entry.find(':');
                if (colon == std::string::npos) {
                    mf.method = entry;
                } else {
                    mf.method = entry.substr(0, colon);
                    mf.init = entry.substr(colon + 1);
                }
                config.methods.emplace_back(entry, config_from_flags(mf));
            }
            std::vector<BenchRow> rows = run_bench(config, &std::cout);
            std::filesystem::create_directories(out_dir);
            const std::filesystem::path dir(out_dir);
            write_bench_csv((dir / "results.csv").string(), rows);
            write_bench_summary_csv((dir / "summary.csv").string(), rows);
            write_manifest((dir / "manifest.txt").string(), config, {});
            std::cout << "wrote " << (dir / "results.csv").string() << "\n";
            return 0;
        }

        if (eval_cmd->parsed()) {
            CsvOptions opts;
            Centers est = read_matrix_csv(centers_path, opts);
            Centers truth = read_matrix_csv(truth_path, opts);
            EvalReport report;
            report.mse = mse_centers(est, truth);
            report.active_features = static_cast<int>(active_features(est).size());
            std::cout << "mse = " << report.mse << "\n";
            if (matched_mse) {
                std::cout << "matched_mse = " << mse_centers_matched(est, truth) << "\n";
            }
            if (!labels_path.empty() && !labels_true_path.empty()) {
                IntVector est_labels = read_labels_csv(labels_path, opts);
                IntVector true_labels = read_labels_csv(labels_true_path, opts);
                report.cer = cer(est_labels, true_labels);
                std::cout << "cer = " << report.cer << "\n";
            }
            if (!validation_path.empty() && !validation_labels_path.empty()) {
                Matrix validation = read_matrix_csv(validation_path, opts);
                IntVector vlabels = read_labels_csv(validation_labels_path, opts);
                report.predictive_cer = predictive_cer(est, validation, vlabels);
                std::cout << "predictive_cer = " << report.predictive_cer << "\n";
            }
            if (!append_path.empty()) {
                bool fresh = !std::filesystem::exists(append_path);
                std::ofstream out(append_path, std::ios::app);
                if (fresh) out << "mse,cer,predictive_cer,active_features\n";
                out << report.mse << ',' << report.cer << ',' << report.predictive_cer << ','
                    << report.active_features << '\n';
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
