#include "featlearn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "featlearn/serialize.hpp"

namespace featlearn {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

const char* method_name(MethodKind m) {
    switch (m) {
    case MethodKind::Baseline: return "baseline";
    case MethodKind::Pca: return "pca";
    case MethodKind::SparseAe: return "sparse_ae";
    }
    return "unknown";
}

const char* model_name(ModelKind m) { return m == ModelKind::Linear ? "linear" : "tree"; }

Cell parse_cell(const std::string& token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) {
        throw Error(errc::bad_config, "cell '" + token + "' must look like method:model");
    }
    const std::string method = token.substr(0, colon);
    const std::string model = token.substr(colon + 1);
    Cell cell{};
    if (method == "baseline")
        cell.method = MethodKind::Baseline;
    else if (method == "pca")
        cell.method = MethodKind::Pca;
    else if (method == "ae" || method == "sparse_ae")
        cell.method = MethodKind::SparseAe;
    else
        throw Error(errc::bad_config, "unknown method '" + method + "' in cell '" + token + "'");
    if (model == "linear")
        cell.model = ModelKind::Linear;
    else if (model == "tree")
        cell.model = ModelKind::Tree;
    else
        throw Error(errc::bad_config, "unknown model '" + model + "' in cell '" + token + "'");
    return cell;
}

std::string cell_name(const Cell& cell) {
    return std::string(method_name(cell.method)) + ":" + model_name(cell.model);
}

FeatureBuild build_features(MethodKind method, const Splits& splits, const MethodSettings& ms) {
    const auto t0 = std::chrono::steady_clock::now();
    FeatureBuild fb;

    switch (method) {
    case MethodKind::Baseline: {
        fb.train = splits.train.X;
        fb.val = splits.val.X;
        fb.test = splits.test.X;
        fb.description = "baseline (centered & scaled features)";
        break;
    }
    case MethodKind::Pca: {
        fb.pca_model = fit_pca(splits.train.X);
        int k = 0;
        if (ms.pca_k) {
            k = *ms.pca_k;
        } else {
            if (!ms.gap_re && !ms.gap_ev) {
                throw Error(errc::bad_config, "PCA auto mode needs at least one gap variant");
            }
            if (ms.gap_re) {
                Rng re_rng(derive_seed(ms.seed, 1));
                fb.gap_re =
                    gap_test(splits.train.X, GapVariant::ReconstructionError, ms.gap, re_rng);
            }
            if (ms.gap_ev) {
                Rng ev_rng(derive_seed(ms.seed, 2));
                fb.gap_ev =
                    gap_test(splits.train.X, GapVariant::ExplainedVariation, ms.gap, ev_rng);
            }
            // on disagreement both are recorded; reconstruction error decides
            k = fb.gap_re ? fb.gap_re->k_star : fb.gap_ev->k_star;
        }
        fb.pca_k_used = k;
        fb.train = project(*fb.pca_model, splits.train.X, k);
        fb.val = project(*fb.pca_model, splits.val.X, k);
        fb.test = project(*fb.pca_model, splits.test.X, k);
        fb.description = "pca (k=" + std::to_string(k) + ")";
        break;
    }
    case MethodKind::SparseAe: {
        AeConfig cfg;
        if (ms.ae_fixed) {
            cfg = *ms.ae_fixed;
        } else {
            Rng search_rng(derive_seed(ms.seed, 3));
            fb.grid = grid_search(splits.train, splits.val, ms.ae_search, search_rng);
            cfg.n_hidden = fb.grid->best_hidden;
            cfg.weight_decay = fb.grid->best_lambda;
            cfg.sparsity = ms.ae_search.rho;
            cfg.learning_rate = ms.ae_search.learning_rate;
            cfg.max_iters = ms.ae_search.max_iters;
            cfg.tol = ms.ae_search.tol;
            cfg.init_seed = derive_seed(ms.seed, 4);
        }
        const TrainResult trained = train(splits.train.X, cfg);
        fb.ae_params = trained.params;
        fb.ae_config_used = cfg;
        fb.train = encode(trained.params, splits.train.X);
        fb.val = encode(trained.params, splits.val.X);
        fb.test = encode(trained.params, splits.test.X);
        fb.description = "sparse_ae (h=" + std::to_string(cfg.n_hidden) +
                         ", lambda=" + std::to_string(cfg.weight_decay) + ")";
        break;
    }
    }

    fb.seconds = seconds_since(t0);
    return fb;
}

namespace {

double score_model(ModelKind model, const FeatureBuild& fb, const Splits& splits,
                   const TreeConfig& tree_cfg) {
    if (model == ModelKind::Linear) {
        const LinearModel lm = fit_linear(fb.train, splits.train.y);
        return rmse(predict_linear(lm, fb.test), splits.test.y);
    }
    const TreeModel tm = fit_tree(fb.train, splits.train.y, tree_cfg);
    return rmse(predict_tree(tm, fb.test), splits.test.y);
}

} // namespace

CellScore run_cell(MethodKind method, ModelKind model, const Splits& splits,
                   const MethodSettings& ms, const TreeConfig& tree_cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const FeatureBuild fb = build_features(method, splits, ms);
    CellScore score;
    score.cell = Cell{method, model};
    score.test_rmse = score_model(model, fb, splits, tree_cfg);
    score.seconds = seconds_since(t0);
    return score;
}

std::string fingerprint_splits(const SplitIndices& idx) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&hash](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            hash ^= (v >> (8 * byte)) & 0xffULL;
            hash *= 0x100000001b3ULL;
        }
    };
    for (const auto* part : {&idx.train, &idx.val, &idx.test}) {
        for (const std::size_t i : *part) mix(i);
        mix(0xffffffffffffffffULL);
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

namespace {

void to_json(json& j, const CellResult& r) {
    j = json{{"cell", cell_name(r.cell)},
             {"method", method_name(r.cell.method)},
             {"model", model_name(r.cell.model)},
             {"test_rmse", r.test_rmse},
             {"seconds", r.seconds}};
    if (r.improvement)
        j["improvement"] = *r.improvement;
    else
        j["improvement"] = nullptr;
}

json report_to_json(const ExperimentReport& report) {
    json cells = json::array();
    for (const auto& c : report.cells) {
        json jc;
        to_json(jc, c);
        cells.push_back(jc);
    }
    json j{{"cells", cells},
           {"seed", report.seed},
           {"split_seed", report.split_seed},
           {"method_seeds", report.method_seeds},
           {"split_fingerprint", report.split_fingerprint},
           {"n_train", report.n_train},
           {"n_val", report.n_val},
           {"n_test", report.n_test},
           {"target_sd", report.target_sd},
           {"rmse_destandardized", report.rmse_destandardized},
           {"census", {{"dropped", report.feature_census.dropped},
                       {"continuous", report.feature_census.continuous},
                       {"binary", report.feature_census.binary}}},
           {"total_seconds", report.total_seconds}};
    j["k_star_re"] = report.k_star_re ? json(*report.k_star_re) : json(nullptr);
    j["k_star_ev"] = report.k_star_ev ? json(*report.k_star_ev) : json(nullptr);
    j["pca_k_used"] = report.pca_k_used ? json(*report.pca_k_used) : json(nullptr);
    j["ae_lambda"] = report.ae_lambda ? json(*report.ae_lambda) : json(nullptr);
    j["ae_hidden"] = report.ae_hidden ? json(*report.ae_hidden) : json(nullptr);
    return j;
}

std::string format_cell(const std::optional<double>& v) {
    if (!v) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(4) << *v;
    return out.str();
}

std::string format_improvement(const std::optional<double>& v) {
    if (!v) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << (*v * 100.0) << "%";
    return out.str();
}

} // namespace

// Aligned-column text table: one row per method, RMSE and improvement per model.
std::string report_table(const ExperimentReport& report) {
    const std::vector<MethodKind> methods{MethodKind::Baseline, MethodKind::Pca,
                                          MethodKind::SparseAe};
    const std::vector<ModelKind> models{ModelKind::Linear, ModelKind::Tree};

    std::map<std::pair<int, int>, const CellResult*> by_cell;
    for (const auto& c : report.cells)
        by_cell[{static_cast<int>(c.cell.method), static_cast<int>(c.cell.model)}] = &c;

    std::ostringstream out;
    out << std::left << std::setw(22) << "method" << std::right << std::setw(14) << "linear_rmse"
        << std::setw(14) << "linear_impr" << std::setw(14) << "tree_rmse" << std::setw(14)
        << "tree_impr" << '\n';
    for (const MethodKind m : methods) {
        bool any = false;
        for (const ModelKind mod : models)
            if (by_cell.count({static_cast<int>(m), static_cast<int>(mod)})) any = true;
        if (!any) continue;
        out << std::left << std::setw(22) << method_name(m) << std::right;
        for (const ModelKind mod : models) {
            const auto it = by_cell.find({static_cast<int>(m), static_cast<int>(mod)});
            if (it == by_cell.end()) {
                out << std::setw(14) << "-" << std::setw(14) << "-";
            } else {
                out << std::setw(14) << format_cell(it->second->test_rmse) << std::setw(14)
                    << format_improvement(it->second->improvement);
            }
        }
        out << '\n';
    }
    return out.str();
}

namespace {

void write_gap_outputs(const std::string& dir, const std::string& stem, const GapReport& report) {
    json j = report;
    write_json_file(dir + "/" + stem + ".json", j);
    std::vector<double> ks(report.gap.size());
    for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = static_cast<double>(i + 1);
    write_csv(dir + "/" + stem + "_gap.csv", {"k", "gap"}, {ks, report.gap});
    write_csv(dir + "/" + stem + "_se.csv", {"k", "se"}, {ks, report.se});
}

void write_histogram_outputs(const std::string& dir, const std::string& stem, const Histogram& h) {
    std::vector<double> left(h.counts.size());
    std::vector<double> right(h.counts.size());
    std::vector<double> count(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        left[i] = h.bin_edges[i];
        right[i] = h.bin_edges[i + 1];
        count[i] = static_cast<double>(h.counts[i]);
    }
    write_csv(dir + "/" + stem + ".csv", {"bin_left", "bin_right", "count"}, {left, right, count});
    json j = h;
    write_json_file(dir + "/" + stem + ".json", j);
}

void write_feature_outputs(const std::string& dir, const FeatureBuild& fb, MethodKind method) {
    if (method == MethodKind::Pca) {
        if (fb.gap_re) write_gap_outputs(dir, "gap_reconstruction_error", *fb.gap_re);
        if (fb.gap_ev) write_gap_outputs(dir, "gap_explained_variation", *fb.gap_ev);
    }
    if (method == MethodKind::SparseAe) {
        if (fb.ae_params) {
            json j = *fb.ae_params;
            write_json_file(dir + "/ae_params.json", j);
        }
        if (fb.grid) {
            json j = *fb.grid;
            write_json_file(dir + "/ae_grid_search.json", j);
            std::vector<double> hs(fb.grid->hidden_grid.size());
            for (std::size_t i = 0; i < hs.size(); ++i)
                hs[i] = static_cast<double>(fb.grid->hidden_grid[i]);
            write_csv(dir + "/ae_val_rmse.csv", {"hidden_units", "validation_rmse"},
                      {hs, fb.grid->val_rmse_per_hidden});
        }
    }
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();

    const RawTable raw = load_table(cfg.data_path, cfg.delimiter);
    const Eigen::Index target_col = cfg.target_col < 0 ? raw.n_cols - 1 : cfg.target_col;

    ExperimentReport report;
    report.seed = cfg.seed;
    report.split_seed = cfg.seed;
    report.feature_census = census(classify_columns(raw, target_col));

    // shared splits for every cell
    const SplitIndices idx = split_indices(static_cast<std::size_t>(raw.n_rows), cfg.ratios,
                                           cfg.seed);
    report.split_fingerprint = fingerprint_splits(idx);

    Splits splits;
    double target_sd = 1.0;
    if (cfg.scale_after_split) {
        auto take_rows = [&raw](const std::vector<std::size_t>& rows) {
            RawTable sub;
            sub.n_rows = static_cast<Eigen::Index>(rows.size());
            sub.n_cols = raw.n_cols;
            sub.values.resize(sub.n_rows, sub.n_cols);
            for (std::size_t i = 0; i < rows.size(); ++i)
                sub.values.row(static_cast<Eigen::Index>(i)) =
                    raw.values.row(static_cast<Eigen::Index>(rows[i]));
            return sub;
        };
        const RawTable train_raw = take_rows(idx.train);
        auto [train_ds, scaler] = fit_preprocess(train_raw, target_col);
        splits.train = std::move(train_ds);
        splits.val = apply_preprocess(take_rows(idx.val), target_col, scaler);
        splits.test = apply_preprocess(take_rows(idx.test), target_col, scaler);
        target_sd = scaler.target_sd;
    } else {
        auto [ds, scaler] = fit_preprocess(raw, target_col);
        splits.train = subset(ds, idx.train);
        splits.val = subset(ds, idx.val);
        splits.test = subset(ds, idx.test);
        target_sd = scaler.target_sd;
    }
    report.n_train = splits.train.rows();
    report.n_val = splits.val.rows();
    report.n_test = splits.test.rows();
    report.target_sd = target_sd;
    report.rmse_destandardized = cfg.destandardize_rmse;

    std::vector<Cell> cells = cfg.cells;
    if (cells.empty()) {
        for (const MethodKind m : {MethodKind::Baseline, MethodKind::Pca, MethodKind::SparseAe})
            for (const ModelKind mod : {ModelKind::Linear, ModelKind::Tree})
                cells.push_back(Cell{m, mod});
    }

    const bool writing = !cfg.out_dir.empty();
    if (writing) std::filesystem::create_directories(cfg.out_dir);

    // one transform per method, shared by both models
    std::map<int, FeatureBuild> builds;
    std::map<int, MethodSettings> settings;
    report.method_seeds.clear();
    for (const MethodKind m : {MethodKind::Baseline, MethodKind::Pca, MethodKind::SparseAe})
        report.method_seeds.push_back(derive_seed(cfg.seed, 100 + static_cast<int>(m)));

    auto settings_for = [&](MethodKind m) {
        MethodSettings ms;
        ms.seed = report.method_seeds[static_cast<std::size_t>(m)];
        ms.pca_k = cfg.pca_k;
        ms.gap = cfg.gap;
        ms.gap.threads = cfg.threads;
        ms.gap_re = cfg.gap_re;
        ms.gap_ev = cfg.gap_ev;
        ms.ae_search = cfg.ae_search;
        if (cfg.ae_hidden && cfg.ae_lambda) {
            AeConfig fixed;
            fixed.n_hidden = *cfg.ae_hidden;
            fixed.weight_decay = *cfg.ae_lambda;
            fixed.sparsity = cfg.ae_search.rho;
            fixed.learning_rate = cfg.ae_search.learning_rate;
            fixed.max_iters = cfg.ae_search.max_iters;
            fixed.tol = cfg.ae_search.tol;
            fixed.init_seed = derive_seed(ms.seed, 4);
            ms.ae_fixed = fixed;
        }
        return ms;
    };

    auto flush_outputs = [&]() {
        if (!writing) return;
        report.total_seconds = seconds_since(t0);
        write_json_file(cfg.out_dir + "/report.json", report_to_json(report));
        std::ofstream table(cfg.out_dir + "/table.txt", std::ios::binary);
        table << report_table(report);
        for (const auto& [method, fb] : builds)
            write_feature_outputs(cfg.out_dir, fb, static_cast<MethodKind>(method));
        const int bins = 50;
        std::vector<double> ytr(splits.train.y.data(), splits.train.y.data() + splits.train.y.size());
        std::vector<double> yte(splits.test.y.data(), splits.test.y.data() + splits.test.y.size());
        write_histogram_outputs(cfg.out_dir, "target_hist_train", histogram(ytr, bins));
        write_histogram_outputs(cfg.out_dir, "target_hist_test", histogram(yte, bins));
    };

    for (const Cell& cell : cells) {
        const int mkey = static_cast<int>(cell.method);
        try {
            double build_seconds = 0.0; // transform cost lands on its first cell
            if (!builds.count(mkey)) {
                settings[mkey] = settings_for(cell.method);
                builds[mkey] = build_features(cell.method, splits, settings[mkey]);
                const FeatureBuild& fb = builds[mkey];
                build_seconds = fb.seconds;
                if (cell.method == MethodKind::Pca) {
                    report.pca_k_used = fb.pca_k_used;
                    if (fb.gap_re) report.k_star_re = fb.gap_re->k_star;
                    if (fb.gap_ev) report.k_star_ev = fb.gap_ev->k_star;
                }
                if (cell.method == MethodKind::SparseAe && fb.ae_config_used) {
                    report.ae_lambda = fb.ae_config_used->weight_decay;
                    report.ae_hidden = fb.ae_config_used->n_hidden;
                }
            }
            const auto cell_t0 = std::chrono::steady_clock::now();
            CellResult result;
            result.cell = cell;
            result.test_rmse = score_model(cell.model, builds[mkey], splits, cfg.tree);
            if (cfg.destandardize_rmse) result.test_rmse *= target_sd;
            result.seconds = seconds_since(cell_t0) + build_seconds;
            report.cells.push_back(result);
        } catch (const Error& e) {
            flush_outputs(); // keep partial results on disk
            throw Error(e.code(), "cell " + cell_name(cell) + ": " + e.what());
        }
    }

    // improvements against the baseline cell of the same model
    for (auto& cell : report.cells) {
        if (cell.cell.method == MethodKind::Baseline) {
            cell.improvement = 0.0;
            continue;
        }
        for (const auto& base : report.cells) {
            if (base.cell.method == MethodKind::Baseline && base.cell.model == cell.cell.model) {
                cell.improvement = 1.0 - cell.test_rmse / base.test_rmse;
                break;
            }
        }
    }

    report.total_seconds = seconds_since(t0);
    flush_outputs();
    return report;
}

Dataset dataset_from_table(const RawTable& raw, Eigen::Index target_col) {
    const Eigen::Index tc = target_col < 0 ? raw.n_cols - 1 : target_col;
    if (tc >= raw.n_cols) {
        throw Error(errc::bad_config, "target column out of range");
    }
    Dataset ds;
    ds.kinds = classify_columns(raw, tc);
    ds.X.resize(raw.n_rows, raw.n_cols - 1);
    Eigen::Index out = 0;
    for (Eigen::Index j = 0; j < raw.n_cols; ++j) {
        if (j == tc) continue;
        ds.X.col(out++) = raw.values.col(j);
    }
    ds.y = raw.values.col(tc);
    return ds;
}

std::vector<std::pair<ModelKind, std::vector<MethodStanding>>>
compare_methods(const ExperimentReport& report) {
    std::vector<std::pair<ModelKind, std::vector<MethodStanding>>> out;
    for (const ModelKind model : {ModelKind::Linear, ModelKind::Tree}) {
        std::vector<const CellResult*> cells;
        for (const auto& c : report.cells)
            if (c.cell.model == model) cells.push_back(&c);
        if (cells.empty()) continue;

        const CellResult* baseline = nullptr;
        for (const auto* c : cells)
            if (c->cell.method == MethodKind::Baseline) baseline = c;
        if (!baseline) {
            throw Error(errc::missing_baseline, std::string("no baseline cell for model '") +
                                                    model_name(model) + "'");
        }
        std::vector<MethodStanding> standings;
        for (const auto* c : cells) {
            standings.push_back(MethodStanding{c->cell.method, c->test_rmse,
                                               1.0 - c->test_rmse / baseline->test_rmse});
        }
        std::sort(standings.begin(), standings.end(),
                  [](const MethodStanding& a, const MethodStanding& b) {
                      if (a.test_rmse != b.test_rmse) return a.test_rmse < b.test_rmse;
                      return static_cast<int>(a.method) < static_cast<int>(b.method);
                  });
        out.emplace_back(model, std::move(standings));
    }
    return out;
}

} // namespace featlearn
