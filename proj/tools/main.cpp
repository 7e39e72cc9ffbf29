// Command-line front end: preprocess, gap, train-ae, experiment, plot.
// Every subcommand is a thin wrapper over the library; exit codes are
// 0 success, 1 usage error, 2 data error, 3 numerical error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "featlearn/pipeline.hpp"
#include "featlearn/plot.hpp"
#include "featlearn/serialize.hpp"

namespace fl = featlearn;

namespace {

struct GlobalArgs {
    std::uint64_t seed = 42;
    bool sequential = false;
    int threads = 1;
    std::string out_dir = "out";
    std::string config_path;
};

int effective_threads(const GlobalArgs& g) { return g.sequential ? 1 : std::max(1, g.threads); }

void write_run_meta(const GlobalArgs& g, const std::string& command,
                    const std::vector<std::pair<std::string, std::uint64_t>>& seeds) {
    fl::json j{{"command", command}, {"seed", g.seed}, {"sequential", g.sequential}};
    for (const auto& [name, value] : seeds) j["seeds"][name] = value;
    fl::write_json_file(g.out_dir + "/run_meta.json", j);
}

fl::SplitRatios parse_ratios(const std::vector<double>& r) {
    if (r.size() != 3) {
        throw fl::Error(fl::errc::bad_ratios, "--split needs exactly 3 values");
    }
    return fl::SplitRatios{r[0], r[1], r[2]};
}

int cmd_preprocess(const GlobalArgs& g, const std::string& input, char delimiter,
                   Eigen::Index target_col, const std::vector<std::string>& hist_args) {
    std::filesystem::create_directories(g.out_dir);
    const fl::RawTable raw = fl::load_table(input, delimiter);
    const Eigen::Index tc = target_col < 0 ? raw.n_cols - 1 : target_col;

    const fl::ColumnCensus cen = fl::census(fl::classify_columns(raw, tc));
    auto [ds, scaler] = fl::fit_preprocess(raw, tc);

    fl::write_dataset_csv(g.out_dir + "/processed.csv", ds, delimiter);
    fl::json js = scaler;
    fl::write_json_file(g.out_dir + "/scaler.json", js);
    write_run_meta(g, "preprocess", {});

    std::printf("dropped=%d continuous=%d binary=%d\n", cen.dropped, cen.continuous, cen.binary);
    std::printf("rows=%lld features=%lld -> %s/processed.csv\n",
                static_cast<long long>(ds.rows()), static_cast<long long>(ds.cols()),
                g.out_dir.c_str());

    if (!hist_args.empty()) {
        if (hist_args.size() != 2 || hist_args[0] != "target") {
            throw fl::Error(fl::errc::bad_config, "--histogram expects: target <bins>");
        }
        const int bins = std::stoi(hist_args[1]);
        const std::vector<double> yv(ds.y.data(), ds.y.data() + ds.y.size());
        const fl::Histogram h = fl::histogram(yv, bins);
        std::vector<double> left(h.counts.size()), right(h.counts.size()), count(h.counts.size());
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            left[i] = h.bin_edges[i];
            right[i] = h.bin_edges[i + 1];
            count[i] = static_cast<double>(h.counts[i]);
        }
        fl::write_csv(g.out_dir + "/target_hist.csv", {"bin_left", "bin_right", "count"},
                      {left, right, count});
        fl::render_plot(fl::histogram_spec(h, "scaled target", "standardized feedback count"),
                        g.out_dir + "/target_hist.svg");
        std::printf("histogram: %d bins -> %s/target_hist.{csv,svg}\n", bins, g.out_dir.c_str());
    }
    return 0;
}

int cmd_gap(const GlobalArgs& g, const std::string& input, char delimiter, Eigen::Index target_col,
            const std::string& variant, int B, int k_max, const std::string& box) {
    std::filesystem::create_directories(g.out_dir);
    const fl::RawTable raw = fl::load_table(input, delimiter);
    const fl::Dataset ds = fl::dataset_from_table(raw, target_col);

    fl::GapOptions opts;
    opts.B = B;
    opts.k_max = k_max;
    opts.threads = effective_threads(g);
    if (box == "axis")
        opts.box = fl::ReferenceBox::AxisAligned;
    else if (box == "pc")
        opts.box = fl::ReferenceBox::PcaAligned;
    else
        throw fl::Error(fl::errc::bad_config, "--box must be 'axis' or 'pc'");

    const bool run_re = variant == "re" || variant == "both";
    const bool run_ev = variant == "ev" || variant == "both";
    if (!run_re && !run_ev) {
        throw fl::Error(fl::errc::bad_config, "--variant must be 're', 'ev' or 'both'");
    }

    std::vector<std::pair<std::string, std::uint64_t>> seeds;
    std::string summary;
    auto run_variant = [&](fl::GapVariant v, std::uint64_t stream, const char* tag,
                           const char* stem, const char* title) {
        const std::uint64_t seed = fl::derive_seed(g.seed, stream);
        seeds.emplace_back(stem, seed);
        fl::Rng rng(seed);
        const fl::GapReport report = fl::gap_test(ds.X, v, opts, rng);
        fl::json j = report;
        fl::write_json_file(g.out_dir + "/" + stem + ".json", j);
        std::vector<double> ks(report.gap.size());
        for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = static_cast<double>(i + 1);
        fl::write_csv(g.out_dir + "/" + stem + "_gap.csv", {"k", "gap"}, {ks, report.gap});
        fl::write_csv(g.out_dir + "/" + stem + "_se.csv", {"k", "se"}, {ks, report.se});
        fl::render_plot(fl::gap_plot_spec(report, title), g.out_dir + "/" + stem + ".svg");
        if (!summary.empty()) summary += ", ";
        summary += "k*=" + std::to_string(report.k_star) + " (" + tag + ")";
        if (report.no_elbow) summary += " [no elbow]";
    };

    if (run_re)
        run_variant(fl::GapVariant::ReconstructionError, 1, "RE", "gap_reconstruction_error",
                    "gap statistic, reconstruction error");
    if (run_ev)
        run_variant(fl::GapVariant::ExplainedVariation, 2, "EV", "gap_explained_variation",
                    "gap statistic, explained variation");

    write_run_meta(g, "gap", seeds);
    std::printf("%s\n", summary.c_str());
    return 0;
}

int cmd_train_ae(const GlobalArgs& g, const std::string& input, char delimiter,
                 Eigen::Index target_col, const std::vector<double>& split_ratios,
                 fl::GridSearchOptions search, bool no_search, int hidden, double lambda) {
    std::filesystem::create_directories(g.out_dir);
    const fl::RawTable raw = fl::load_table(input, delimiter);
    const fl::Dataset full = fl::dataset_from_table(raw, target_col);
    const auto [train_ds, val_ds, test_ds] =
        fl::split(full, parse_ratios(split_ratios), g.seed);
    (void)test_ds; // reserved for the experiment command

    std::vector<std::pair<std::string, std::uint64_t>> seeds{{"split", g.seed}};

    fl::AeConfig cfg;
    cfg.sparsity = search.rho;
    cfg.learning_rate = search.learning_rate;
    cfg.max_iters = search.max_iters;
    cfg.tol = search.tol;
    if (no_search) {
        cfg.n_hidden = hidden;
        cfg.weight_decay = lambda;
    } else {
        const std::uint64_t search_seed = fl::derive_seed(g.seed, 3);
        seeds.emplace_back("grid_search", search_seed);
        fl::Rng rng(search_seed);
        const fl::GridSearchResult result = fl::grid_search(train_ds, val_ds, search, rng);
        fl::json j = result;
        fl::write_json_file(g.out_dir + "/ae_grid_search.json", j);
        std::vector<double> hs(result.hidden_grid.size());
        for (std::size_t i = 0; i < hs.size(); ++i)
            hs[i] = static_cast<double>(result.hidden_grid[i]);
        fl::write_csv(g.out_dir + "/ae_val_rmse.csv", {"hidden_units", "validation_rmse"},
                      {hs, result.val_rmse_per_hidden});
        fl::render_plot(fl::val_rmse_plot_spec(result), g.out_dir + "/ae_val_rmse.svg");
        cfg.n_hidden = result.best_hidden;
        cfg.weight_decay = result.best_lambda;
        std::printf("grid search: lambda=%g hidden=%d\n", result.best_lambda,
                    result.best_hidden);
    }
    cfg.init_seed = fl::derive_seed(g.seed, 4);
    seeds.emplace_back("ae_init", cfg.init_seed);

    const fl::TrainResult trained = fl::train(train_ds.X, cfg);
    fl::json jp = trained.params;
    fl::write_json_file(g.out_dir + "/ae_params.json", jp);
    write_run_meta(g, "train-ae", seeds);
    std::printf("trained: hidden=%d lambda=%g final_loss=%.6f iters=%zu\n", cfg.n_hidden,
                cfg.weight_decay, trained.loss_trace.back(), trained.loss_trace.size() - 1);
    return 0;
}

int cmd_experiment(const GlobalArgs& g, bool seed_given, bool out_given) {
    if (g.config_path.empty()) {
        throw fl::Error(fl::errc::bad_config, "experiment needs --config <file.json>");
    }
    fl::ExperimentConfig cfg = fl::experiment_config_from_json(fl::read_json_file(g.config_path));
    if (seed_given) cfg.seed = g.seed;
    if (out_given || cfg.out_dir.empty()) cfg.out_dir = g.out_dir;
    cfg.threads = effective_threads(g);

    const fl::ExperimentReport report = fl::run_experiment(cfg);

    // render figures from the artifacts the run wrote
    for (const char* stem : {"gap_reconstruction_error", "gap_explained_variation"}) {
        const std::string path = cfg.out_dir + "/" + std::string(stem) + ".json";
        if (std::filesystem::exists(path)) {
            fl::GapReport gr = fl::read_json_file(path).get<fl::GapReport>();
            fl::render_plot(fl::gap_plot_spec(gr, stem), cfg.out_dir + "/" + stem + ".svg");
        }
    }
    if (std::filesystem::exists(cfg.out_dir + "/ae_grid_search.json")) {
        fl::GridSearchResult gs =
            fl::read_json_file(cfg.out_dir + "/ae_grid_search.json").get<fl::GridSearchResult>();
        fl::render_plot(fl::val_rmse_plot_spec(gs), cfg.out_dir + "/ae_val_rmse.svg");
    }
    for (const char* stem : {"target_hist_train", "target_hist_test"}) {
        const std::string path = cfg.out_dir + "/" + std::string(stem) + ".json";
        if (std::filesystem::exists(path)) {
            fl::Histogram h = fl::read_json_file(path).get<fl::Histogram>();
            fl::render_plot(fl::histogram_spec(h, stem, "standardized feedback count"),
                            cfg.out_dir + "/" + stem + ".svg");
        }
    }

    std::cout << fl::report_table(report);
    std::printf("report: %s/report.json (split %s)\n", cfg.out_dir.c_str(),
                report.split_fingerprint.c_str());
    return 0;
}

int cmd_plot(const GlobalArgs& g, const std::string& spec_path, std::string output) {
    const fl::json j = fl::read_json_file(spec_path);
    fl::PlotSpec spec = j.get<fl::PlotSpec>();
    if (output.empty()) output = j.value("output", "");
    if (output.empty()) {
        throw fl::Error(fl::errc::bad_config,
                        "no output path: set 'output' in the spec or pass --output");
    }
    if (output.find('/') == std::string::npos) {
        std::filesystem::create_directories(g.out_dir);
        output = g.out_dir + "/" + output;
    }
    fl::render_plot(spec, output);
    std::printf("wrote %s\n", output.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"unsupervised feature learning for blog feedback prediction"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--seed", g.seed, "master seed; every other seed derives from it");
    app.add_flag("--sequential", g.sequential, "force single-threaded deterministic execution");
    app.add_option("--threads", g.threads, "worker threads for reference resampling");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--config", g.config_path, "experiment config (JSON)");

    std::string input;
    char delimiter = ',';
    Eigen::Index target_col = -1;

    auto* pre = app.add_subcommand("preprocess", "classify, drop zero columns, center & scale");
    pre->add_option("--input", input, "raw table (DSV, target last by default)")->required();
    pre->add_option("--delimiter", delimiter, "cell delimiter");
    pre->add_option("--target-col", target_col, "target column index, -1 = last");
    std::vector<std::string> hist_args;
    pre->add_option("--histogram", hist_args, "emit a histogram: target <bins>")->expected(2);

    auto* gap = app.add_subcommand("gap", "gap tests for the number of principal components");
    gap->add_option("--input", input, "processed table (DSV, target last by default)")->required();
    gap->add_option("--delimiter", delimiter, "cell delimiter");
    gap->add_option("--target-col", target_col, "target column index, -1 = last");
    std::string variant = "both";
    int B = 20;
    int k_max = 0;
    std::string box = "axis";
    gap->add_option("--variant", variant, "re | ev | both");
    gap->add_option("--B", B, "number of uniform reference samples");
    gap->add_option("--kmax", k_max, "largest k to evaluate, 0 = all");
    gap->add_option("--box", box, "reference box: axis | pc");

    auto* tae = app.add_subcommand("train-ae", "grid-search and train the sparse autoencoder");
    tae->add_option("--input", input, "processed table (DSV, target last by default)")->required();
    tae->add_option("--delimiter", delimiter, "cell delimiter");
    tae->add_option("--target-col", target_col, "target column index, -1 = last");
    std::vector<double> split_ratios{0.6, 0.2, 0.2};
    tae->add_option("--split", split_ratios, "train,val,test ratios")->expected(3);
    fl::GridSearchOptions search;
    tae->add_option("--hidden-grid", search.hidden_grid, "hidden unit grid");
    tae->add_option("--lambda-grid", search.lambda_grid, "weight decay grid");
    tae->add_option("--rho", search.rho, "L1 sparsity coefficient");
    tae->add_option("--folds", search.folds, "cross-validation folds");
    tae->add_option("--lr", search.learning_rate, "gradient descent step size");
    tae->add_option("--max-iters", search.max_iters, "iteration budget");
    tae->add_option("--tol", search.tol, "stop when the loss decrease falls below this");
    std::string metric = "downstream";
    tae->add_option("--metric", metric, "downstream | reconstruction");
    bool no_search = false;
    int hidden = 5;
    double lambda = 1e-4;
    tae->add_flag("--no-search", no_search, "skip the grid search");
    tae->add_option("--hidden", hidden, "hidden units (with --no-search)");
    tae->add_option("--lambda", lambda, "weight decay (with --no-search)");

    auto* exp = app.add_subcommand("experiment", "run the preprocessing x model grid");

    auto* plot = app.add_subcommand("plot", "render an SVG from a plot spec (JSON)");
    std::string spec_path;
    std::string output;
    plot->add_option("--spec", spec_path, "plot spec JSON")->required();
    plot->add_option("--output", output, "output SVG path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1; // usage errors
    }

    try {
        if (pre->parsed()) return cmd_preprocess(g, input, delimiter, target_col, hist_args);
        if (gap->parsed()) return cmd_gap(g, input, delimiter, target_col, variant, B, k_max, box);
        if (tae->parsed()) {
            if (metric == "reconstruction")
                search.metric = fl::AeMetric::ReconstructionRmse;
            else if (metric != "downstream")
                throw fl::Error(fl::errc::bad_config,
                                "--metric must be 'downstream' or 'reconstruction'");
            return cmd_train_ae(g, input, delimiter, target_col, split_ratios, search, no_search,
                                hidden, lambda);
        }
        if (exp->parsed())
            return cmd_experiment(g, app.count("--seed") > 0, app.count("--out") > 0);
        if (plot->parsed()) return cmd_plot(g, spec_path, output);
    } catch (const fl::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
