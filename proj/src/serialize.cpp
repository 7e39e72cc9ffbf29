#include "featlearn/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace featlearn {

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) row_major.push_back(m(i, j));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", row_major}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw Error(errc::bad_config, "matrix data length does not match rows*cols");
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[k++];
    return m;
}

std::string kind_to_string(ColumnKind k) { return column_kind_name(k); }

ColumnKind kind_from_string(const std::string& s) {
    if (s == "all_zero") return ColumnKind::AllZero;
    if (s == "binary") return ColumnKind::Binary;
    if (s == "continuous") return ColumnKind::Continuous;
    throw Error(errc::bad_config, "unknown column kind '" + s + "'");
}

} // namespace

void to_json(json& j, const ScalerParams& p) {
    std::vector<std::string> kinds;
    kinds.reserve(p.kinds.size());
    for (const ColumnKind k : p.kinds) kinds.push_back(kind_to_string(k));
    j = json{{"dropped_indices", p.dropped_indices}, {"kinds", kinds},
             {"means", p.means},                     {"sds", p.sds},
             {"target_mean", p.target_mean},         {"target_sd", p.target_sd}};
}

void from_json(const json& j, ScalerParams& p) {
    p.dropped_indices = j.at("dropped_indices").get<std::vector<Eigen::Index>>();
    p.kinds.clear();
    for (const auto& s : j.at("kinds")) p.kinds.push_back(kind_from_string(s.get<std::string>()));
    p.means = j.at("means").get<std::vector<double>>();
    p.sds = j.at("sds").get<std::vector<double>>();
    p.target_mean = j.at("target_mean").get<double>();
    p.target_sd = j.at("target_sd").get<double>();
}

void to_json(json& j, const Histogram& h) {
    j = json{{"bin_edges", h.bin_edges}, {"counts", h.counts}};
}

void from_json(const json& j, Histogram& h) {
    h.bin_edges = j.at("bin_edges").get<std::vector<double>>();
    h.counts = j.at("counts").get<std::vector<std::int64_t>>();
}

void to_json(json& j, const GapReport& r) {
    j = json{{"variant", gap_variant_name(r.variant)},
             {"B", r.B},
             {"log_w", r.log_w},
             {"expected_log_w", r.expected_log_w},
             {"sd", r.sd},
             {"se", r.se},
             {"gap", r.gap},
             {"k_star", r.k_star},
             {"no_elbow", r.no_elbow}};
}

void from_json(const json& j, GapReport& r) {
    const auto variant = j.at("variant").get<std::string>();
    if (variant == "reconstruction_error")
        r.variant = GapVariant::ReconstructionError;
    else if (variant == "explained_variation")
        r.variant = GapVariant::ExplainedVariation;
    else
        throw Error(errc::bad_config, "unknown gap variant '" + variant + "'");
    r.B = j.at("B").get<int>();
    r.log_w = j.at("log_w").get<std::vector<double>>();
    r.expected_log_w = j.at("expected_log_w").get<std::vector<double>>();
    r.sd = j.at("sd").get<std::vector<double>>();
    r.se = j.at("se").get<std::vector<double>>();
    r.gap = j.at("gap").get<std::vector<double>>();
    r.k_star = j.at("k_star").get<int>();
    r.no_elbow = j.at("no_elbow").get<bool>();
}

void to_json(json& j, const AeParams& p) {
    j = json{{"n_inputs", p.W1.rows()},
             {"n_hidden", p.W1.cols()},
             {"W1", matrix_to_json(p.W1)},
             {"b1", to_vec(p.b1)},
             {"W2", matrix_to_json(p.W2)},
             {"b2", to_vec(p.b2)}};
}

void from_json(const json& j, AeParams& p) {
    p.W1 = matrix_from_json(j.at("W1"));
    p.W2 = matrix_from_json(j.at("W2"));
    p.b1 = to_eigen(j.at("b1").get<std::vector<double>>());
    p.b2 = to_eigen(j.at("b2").get<std::vector<double>>());
}

void to_json(json& j, const GridSearchResult& r) {
    j = json{{"best_lambda", r.best_lambda},
             {"best_hidden", r.best_hidden},
             {"lambda_grid", r.lambda_grid},
             {"hidden_grid", r.hidden_grid},
             {"cv_table", r.cv_table},
             {"selected_hidden_per_lambda", r.selected_hidden_per_lambda},
             {"val_rmse_per_lambda", r.val_rmse_per_lambda},
             {"val_rmse_per_hidden", r.val_rmse_per_hidden}};
}

void from_json(const json& j, GridSearchResult& r) {
    r.best_lambda = j.at("best_lambda").get<double>();
    r.best_hidden = j.at("best_hidden").get<int>();
    r.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    r.hidden_grid = j.at("hidden_grid").get<std::vector<int>>();
    r.cv_table = j.at("cv_table").get<std::vector<std::vector<double>>>();
    r.selected_hidden_per_lambda = j.at("selected_hidden_per_lambda").get<std::vector<int>>();
    r.val_rmse_per_lambda = j.at("val_rmse_per_lambda").get<std::vector<double>>();
    r.val_rmse_per_hidden = j.at("val_rmse_per_hidden").get<std::vector<double>>();
}

void to_json(json& j, const LinearModel& m) {
    j = json{{"intercept", m.intercept}, {"coefficients", to_vec(m.coefficients)}};
}

void from_json(const json& j, LinearModel& m) {
    m.intercept = j.at("intercept").get<double>();
    m.coefficients = to_eigen(j.at("coefficients").get<std::vector<double>>());
}

namespace {

void append_preorder(const TreeModel& m, int node_id, json& out) {
    const TreeNode& node = m.nodes[static_cast<std::size_t>(node_id)];
    if (node.is_leaf()) {
        out.push_back(json{{"leaf", true}, {"prediction", node.prediction}, {"count", node.count}});
        return;
    }
    out.push_back(json{{"leaf", false}, {"feature", node.feature}, {"threshold", node.threshold}});
    append_preorder(m, node.left, out);
    append_preorder(m, node.right, out);
}

int rebuild_preorder(const json& nodes, std::size_t& pos, TreeModel& m) {
    if (pos >= nodes.size()) {
        throw Error(errc::bad_config, "truncated tree node list");
    }
    const json& j = nodes[pos++];
    const int id = static_cast<int>(m.nodes.size());
    m.nodes.emplace_back();
    if (j.at("leaf").get<bool>()) {
        m.nodes[static_cast<std::size_t>(id)].prediction = j.at("prediction").get<double>();
        m.nodes[static_cast<std::size_t>(id)].count = j.at("count").get<int>();
        return id;
    }
    const int feature = j.at("feature").get<int>();
    const double threshold = j.at("threshold").get<double>();
    const int left = rebuild_preorder(nodes, pos, m);
    const int right = rebuild_preorder(nodes, pos, m);
    TreeNode& node = m.nodes[static_cast<std::size_t>(id)];
    node.feature = feature;
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    return id;
}

} // namespace

void to_json(json& j, const TreeModel& m) {
    json nodes = json::array();
    if (!m.nodes.empty()) append_preorder(m, 0, nodes);
    j = json{{"n_features", m.n_features}, {"nodes", nodes}};
}

void from_json(const json& j, TreeModel& m) {
    m.nodes.clear();
    m.n_features = j.at("n_features").get<Eigen::Index>();
    const json& nodes = j.at("nodes");
    if (!nodes.empty()) {
        std::size_t pos = 0;
        rebuild_preorder(nodes, pos, m);
        if (pos != nodes.size()) {
            throw Error(errc::bad_config, "trailing tree nodes after pre-order rebuild");
        }
    }
}

void to_json(json& j, const PlotSpec& s) {
    const char* kind = s.kind == PlotKind::Histogram ? "histogram"
                       : s.kind == PlotKind::Line    ? "line"
                                                     : "line_with_band";
    json series = json::array();
    for (const Series& ser : s.series)
        series.push_back(json{{"name", ser.name}, {"x", ser.x}, {"y", ser.y}});
    j = json{{"kind", kind},
             {"series", series},
             {"x_label", s.x_label},
             {"y_label", s.y_label},
             {"title", s.title}};
    if (s.band) j["band"] = json{{"lower", s.band->lower}, {"upper", s.band->upper}};
}

void from_json(const json& j, PlotSpec& s) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "histogram")
        s.kind = PlotKind::Histogram;
    else if (kind == "line")
        s.kind = PlotKind::Line;
    else if (kind == "line_with_band")
        s.kind = PlotKind::LineWithBand;
    else
        throw Error(errc::bad_config, "unknown plot kind '" + kind + "'");
    s.series.clear();
    for (const auto& ser : j.at("series")) {
        Series out;
        out.name = ser.value("name", "");
        out.x = ser.at("x").get<std::vector<double>>();
        out.y = ser.at("y").get<std::vector<double>>();
        s.series.push_back(std::move(out));
    }
    s.x_label = j.value("x_label", "");
    s.y_label = j.value("y_label", "");
    s.title = j.value("title", "");
    if (j.contains("band") && !j.at("band").is_null()) {
        Band band;
        band.lower = j.at("band").at("lower").get<std::vector<double>>();
        band.upper = j.at("band").at("upper").get<std::vector<double>>();
        s.band = std::move(band);
    } else {
        s.band.reset();
    }
}

namespace {

void check_keys(const json& j, const std::string& scope,
                const std::vector<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw Error(errc::bad_config, "unknown config key '" +
                                              (scope.empty() ? key : scope + "." + key) + "'");
        }
    }
}

template <typename T>
T get_key(const json& j, const std::string& scope, const std::string& key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(errc::bad_config, "config key '" +
                                          (scope.empty() ? key : scope + "." + key) +
                                          "' has the wrong type");
    }
}

} // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
    check_keys(j, "", {"data", "delimiter", "target_col", "split", "gap", "pca", "ae", "tree",
                       "cells", "out", "seed", "threads", "destandardize_rmse"});
    ExperimentConfig cfg;
    cfg.data_path = get_key<std::string>(j, "", "data", "");
    if (cfg.data_path.empty()) {
        throw Error(errc::bad_config, "config key 'data' is required");
    }
    const auto delim = get_key<std::string>(j, "", "delimiter", ",");
    if (delim.size() != 1) {
        throw Error(errc::bad_config, "config key 'delimiter' must be a single character");
    }
    cfg.delimiter = delim[0];
    cfg.target_col = get_key<Eigen::Index>(j, "", "target_col", -1);
    cfg.seed = get_key<std::uint64_t>(j, "", "seed", 42);
    cfg.threads = get_key<int>(j, "", "threads", 1);
    cfg.out_dir = get_key<std::string>(j, "", "out", "");
    cfg.destandardize_rmse = get_key<bool>(j, "", "destandardize_rmse", false);

    if (j.contains("split")) {
        const json& js = j.at("split");
        check_keys(js, "split", {"ratios", "seed", "scale_after_split"});
        const auto ratios = get_key<std::vector<double>>(js, "split", "ratios", {0.6, 0.2, 0.2});
        if (ratios.size() != 3) {
            throw Error(errc::bad_config, "config key 'split.ratios' needs 3 values");
        }
        cfg.ratios = SplitRatios{ratios[0], ratios[1], ratios[2]};
        cfg.seed = get_key<std::uint64_t>(js, "split", "seed", cfg.seed);
        cfg.scale_after_split = get_key<bool>(js, "split", "scale_after_split", false);
    }

    if (j.contains("gap")) {
        const json& jg = j.at("gap");
        check_keys(jg, "gap", {"B", "k_max", "box", "variants"});
        cfg.gap.B = get_key<int>(jg, "gap", "B", 20);
        cfg.gap.k_max = get_key<int>(jg, "gap", "k_max", 0);
        const auto box = get_key<std::string>(jg, "gap", "box", "axis");
        if (box == "axis")
            cfg.gap.box = ReferenceBox::AxisAligned;
        else if (box == "pc")
            cfg.gap.box = ReferenceBox::PcaAligned;
        else
            throw Error(errc::bad_config, "config key 'gap.box' must be 'axis' or 'pc'");
        const auto variants =
            get_key<std::vector<std::string>>(jg, "gap", "variants", {"re", "ev"});
        cfg.gap_re = cfg.gap_ev = false;
        for (const auto& v : variants) {
            if (v == "re")
                cfg.gap_re = true;
            else if (v == "ev")
                cfg.gap_ev = true;
            else
                throw Error(errc::bad_config, "config key 'gap.variants' accepts 're' and 'ev'");
        }
    }

    if (j.contains("pca")) {
        const json& jp = j.at("pca");
        check_keys(jp, "pca", {"k"});
        if (jp.contains("k") && !jp.at("k").is_null())
            cfg.pca_k = get_key<int>(jp, "pca", "k", 2);
    }

    if (j.contains("ae")) {
        const json& ja = j.at("ae");
        check_keys(ja, "ae", {"hidden_grid", "lambda_grid", "rho", "folds", "learning_rate",
                              "max_iters", "tol", "metric", "hidden", "lambda"});
        cfg.ae_search.hidden_grid =
            get_key<std::vector<int>>(ja, "ae", "hidden_grid", cfg.ae_search.hidden_grid);
        cfg.ae_search.lambda_grid =
            get_key<std::vector<double>>(ja, "ae", "lambda_grid", cfg.ae_search.lambda_grid);
        cfg.ae_search.rho = get_key<double>(ja, "ae", "rho", cfg.ae_search.rho);
        cfg.ae_search.folds = get_key<int>(ja, "ae", "folds", cfg.ae_search.folds);
        cfg.ae_search.learning_rate =
            get_key<double>(ja, "ae", "learning_rate", cfg.ae_search.learning_rate);
        cfg.ae_search.max_iters = get_key<int>(ja, "ae", "max_iters", cfg.ae_search.max_iters);
        cfg.ae_search.tol = get_key<double>(ja, "ae", "tol", cfg.ae_search.tol);
        const auto metric = get_key<std::string>(ja, "ae", "metric", "downstream");
        if (metric == "downstream")
            cfg.ae_search.metric = AeMetric::DownstreamRmse;
        else if (metric == "reconstruction")
            cfg.ae_search.metric = AeMetric::ReconstructionRmse;
        else
            throw Error(errc::bad_config,
                        "config key 'ae.metric' must be 'downstream' or 'reconstruction'");
        if (ja.contains("hidden") && !ja.at("hidden").is_null())
            cfg.ae_hidden = get_key<int>(ja, "ae", "hidden", 5);
        if (ja.contains("lambda") && !ja.at("lambda").is_null())
            cfg.ae_lambda = get_key<double>(ja, "ae", "lambda", 1e-4);
    }

    if (j.contains("tree")) {
        const json& jt = j.at("tree");
        check_keys(jt, "tree", {"max_depth", "min_samples_leaf", "min_samples_split"});
        cfg.tree.max_depth = get_key<int>(jt, "tree", "max_depth", -1);
        cfg.tree.min_samples_leaf = get_key<int>(jt, "tree", "min_samples_leaf", 5);
        cfg.tree.min_samples_split = get_key<int>(jt, "tree", "min_samples_split", 10);
    }

    if (j.contains("cells")) {
        for (const auto& c : j.at("cells"))
            cfg.cells.push_back(parse_cell(c.get<std::string>()));
    }
    return cfg;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(errc::missing_file, "cannot write '" + path + "'");
    }
    out << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(errc::missing_file, "cannot open '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw Error(errc::bad_config, "malformed JSON in '" + path + "': " + e.what());
    }
    return j;
}

namespace {

// shortest decimal form that parses back to the same double
std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, ptr};
}

} // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (columns.empty() || header.size() != columns.size()) {
        throw Error(errc::bad_config, "CSV header and column count differ");
    }
    for (const auto& col : columns) {
        if (col.size() != columns[0].size()) {
            throw Error(errc::length_mismatch, "CSV columns have unequal lengths");
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(errc::missing_file, "cannot write '" + path + "'");
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out << ',';
        out << header[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < columns[0].size(); ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out << ',';
            out << format_double(columns[c][r]);
        }
        out << '\n';
    }
}

void write_dataset_csv(const std::string& path, const Dataset& ds, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(errc::missing_file, "cannot write '" + path + "'");
    }
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.cols(); ++j) {
            if (j) out << delimiter;
            out << format_double(ds.X(i, j));
        }
        if (ds.cols() > 0) out << delimiter;
        out << format_double(ds.y(i)) << '\n';
    }
}

} // namespace featlearn
