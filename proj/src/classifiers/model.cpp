#include "common.hpp"

#include "llt/artifact_file.hpp"
#include "llt/parallel.hpp"

#include <cmath>

#include <fmt/format.h>

namespace llt {

namespace detail {
Label knn_predict(const KnnModel& knn, std::span<const double> q);
double rbf_decision(const RbfSvmModel& svm, std::span<const double> q);
Label forest_predict(const ForestModel& forest, std::span<const double> q);
}  // namespace detail

std::string_view model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Knn: return "knn";
        case ModelKind::LinearSvm: return "svm-linear";
        case ModelKind::RbfSvm: return "svm";
        case ModelKind::RandomForest: return "rf";
        case ModelKind::Mlp: return "mlp";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    for (ModelKind k : {ModelKind::Knn, ModelKind::LinearSvm, ModelKind::RbfSvm, ModelKind::RandomForest, ModelKind::Mlp})
        if (model_kind_name(k) == name) return k;
    throw ParameterError(fmt::format("unknown model kind '{}' (expected knn, svm, svm-linear, rf or mlp)", name));
}

std::string_view metric_name(DistanceMetric metric) {
    return metric == DistanceMetric::Chebyshev ? "chebyshev" : "euclidean";
}

DistanceMetric parse_metric(std::string_view name) {
    if (name == "chebyshev") return DistanceMetric::Chebyshev;
    if (name == "euclidean") return DistanceMetric::Euclidean;
    throw ParameterError(fmt::format("unknown distance metric '{}' (expected chebyshev or euclidean)", name));
}

void Hyperparams::validate() const {
    if (knn_k == 0) throw ParameterError("knn_k must be positive");
    if (rf_estimators == 0 || rf_depth == 0 || rf_min_leaf == 0) throw ParameterError("forest sizes must be positive");
    if (!(svm_C > 0.0) || !std::isfinite(svm_C)) throw ParameterError("svm_C must be positive");
    if (rbf_gamma && !(*rbf_gamma > 0.0 && std::isfinite(*rbf_gamma))) throw ParameterError("rbf_gamma must be positive");
    if (!(smo_tolerance > 0.0) || smo_max_iter == 0) throw ParameterError("SMO tolerance and iteration cap must be positive");
    if (linear_epochs == 0) throw ParameterError("linear_epochs must be positive");
    if (mlp_hidden == 0 || mlp_epochs == 0) throw ParameterError("mlp_hidden and mlp_epochs must be positive");
    if (!(mlp_lr > 0.0) || !std::isfinite(mlp_lr)) throw ParameterError("mlp_lr must be positive");
}

bool Hyperparams::standardize_for(ModelKind kind) const {
    if (standardize) return *standardize;
    return kind == ModelKind::LinearSvm || kind == ModelKind::Mlp;
}

namespace detail {

void check_training_set(const Matrix& x, std::span<const Label> y, std::string_view who) {
    if (x.rows() == 0 || x.cols() == 0) throw ParameterError(fmt::format("{}: empty training set", who));
    if (x.rows() != y.size())
        throw ParameterError(fmt::format("{}: {} feature rows but {} labels", who, x.rows(), y.size()));
    for (Label l : y)
        if (l == Label::Unlabeled) throw ParameterError(fmt::format("{}: training labels must be Normal or Ectopic", who));
    for (double v : x.data())
        if (!std::isfinite(v)) throw ParameterError(fmt::format("{}: non-finite feature value", who));
}

std::optional<Label> single_class(std::span<const Label> y) {
    for (Label l : y)
        if (l != y.front()) return std::nullopt;
    return y.front();
}

Matrix scaled_inputs(const Matrix& x, bool enabled, FeatureScaler& scaler) {
    if (!enabled) {
        scaler = {};
        return x;
    }
    scaler = FeatureScaler::fit(x);
    return scaler.apply(x);
}

std::vector<std::pair<std::string, std::string>> base_meta(ModelKind kind, const Matrix& x, std::span<const Label> y,
                                                           const Hyperparams& hp) {
    std::size_t normal = 0;
    for (Label l : y) normal += l == Label::Normal;
    std::vector<std::pair<std::string, std::string>> m{
        {"train_rows", std::to_string(x.rows())},
        {"train_normal", std::to_string(normal)},
        {"train_ectopic", std::to_string(y.size() - normal)},
        {"seed", std::to_string(hp.seed)},
        {"standardize", hp.standardize_for(kind) ? "true" : "false"},
    };
    switch (kind) {
        case ModelKind::Knn:
            m.emplace_back("knn_k", std::to_string(hp.knn_k));
            m.emplace_back("knn_metric", std::string(metric_name(hp.knn_metric)));
            break;
        case ModelKind::LinearSvm:
            m.emplace_back("svm_C", format_double(hp.svm_C));
            m.emplace_back("linear_epochs", std::to_string(hp.linear_epochs));
            break;
        case ModelKind::RbfSvm:
            m.emplace_back("svm_C", format_double(hp.svm_C));
            m.emplace_back("smo_tolerance", format_double(hp.smo_tolerance));
            break;
        case ModelKind::RandomForest:
            m.emplace_back("rf_estimators", std::to_string(hp.rf_estimators));
            m.emplace_back("rf_depth", std::to_string(hp.rf_depth));
            m.emplace_back("rf_min_leaf", std::to_string(hp.rf_min_leaf));
            break;
        case ModelKind::Mlp:
            m.emplace_back("mlp_hidden", std::to_string(hp.mlp_hidden));
            m.emplace_back("mlp_epochs", std::to_string(hp.mlp_epochs));
            m.emplace_back("mlp_lr", format_double(hp.mlp_lr));
            m.emplace_back("activation", "tanh");
            break;
    }
    return m;
}

}  // namespace detail

TrainedModel fit_model(ModelKind kind, const Matrix& x, std::span<const Label> y, const Hyperparams& hp) {
    switch (kind) {
        case ModelKind::Knn: return knn_fit(x, y, hp);
        case ModelKind::LinearSvm: return linear_svm_fit(x, y, hp);
        case ModelKind::RbfSvm: return rbf_svm_fit(x, y, hp);
        case ModelKind::RandomForest: return rf_fit(x, y, hp);
        case ModelKind::Mlp: return mlp_fit(x, y, hp);
    }
    throw ParameterError("unknown model kind");
}

namespace {

std::vector<double> prepared(const TrainedModel& model, std::span<const double> features) {
    if (features.size() != model.feature_dim)
        throw ParameterError(fmt::format("feature dimension mismatch: model expects {}, got {}", model.feature_dim,
                                         features.size()));
    std::vector<double> q(features.begin(), features.end());
    model.scaler.apply(q);
    return q;
}

}  // namespace

double svm_decision(const TrainedModel& model, std::span<const double> features) {
    const auto q = prepared(model, features);
    if (const auto* lin = std::get_if<LinearSvmModel>(&model.params)) return dot(lin->w, q) + lin->b;
    if (const auto* rbf = std::get_if<RbfSvmModel>(&model.params)) return detail::rbf_decision(*rbf, q);
    throw ParameterError("decision scores are only defined for SVM models");
}

Label predict(const TrainedModel& model, std::span<const double> features) {
    const auto q = prepared(model, features);
    return std::visit(
        [&](const auto& m) -> Label {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KnnModel>) {
                return detail::knn_predict(m, q);
            } else if constexpr (std::is_same_v<T, LinearSvmModel>) {
                return detail::sign_label(dot(m.w, q) + m.b);
            } else if constexpr (std::is_same_v<T, RbfSvmModel>) {
                return detail::sign_label(detail::rbf_decision(m, q));
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                return detail::forest_predict(m, q);
            } else {
                const auto [pn, pe] = m.forward(q);
                return pn >= pe ? Label::Normal : Label::Ectopic;
            }
        },
        model.params);
}

std::vector<Label> predict_all(const TrainedModel& model, const Matrix& x) {
    std::vector<Label> out(x.rows());
    parallel_for(x.rows(), [&](std::size_t r) { out[r] = predict(model, x.row(r)); });
    return out;
}

// ---- persistence ----

std::string render_model(const TrainedModel& model) {
    ArtifactText a;
    a.magic = "llt-model";
    a.set("kind", std::string(model_kind_name(model.kind)));
    a.set("feature_dim", std::to_string(model.feature_dim));
    if (!model.scaler.empty()) {
        a.payload.push_back("scaler_mean " + join_doubles(model.scaler.mean));
        a.payload.push_back("scaler_scale " + join_doubles(model.scaler.scale));
    }
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KnnModel>) {
                a.set("k", std::to_string(m.k));
                a.set("metric", std::string(metric_name(m.metric)));
                for (std::size_t r = 0; r < m.x.rows(); ++r)
                    a.payload.push_back(fmt::format("row {} {}", label_token(m.y[r]), join_doubles(m.x.row(r))));
            } else if constexpr (std::is_same_v<T, LinearSvmModel>) {
                a.set("bias", format_double(m.b));
                a.payload.push_back("w " + join_doubles(m.w));
            } else if constexpr (std::is_same_v<T, RbfSvmModel>) {
                a.set("gamma", format_double(m.gamma));
                a.set("bias", format_double(m.b));
                for (std::size_t r = 0; r < m.support.rows(); ++r)
                    a.payload.push_back(fmt::format("sv {} {}", format_double(m.coef[r]), join_doubles(m.support.row(r))));
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                a.set("trees", std::to_string(m.trees.size()));
                for (std::size_t t = 0; t < m.trees.size(); ++t)
                    for (const auto& n : m.trees[t].nodes)
                        a.payload.push_back(fmt::format("node {} {} {} {} {} {} {}", t, n.feature, format_double(n.threshold),
                                                        n.left, n.right, format_double(n.p_normal), n.depth));
            } else {
                a.set("inputs", std::to_string(m.inputs));
                a.set("hidden", std::to_string(m.hidden));
                a.payload.push_back("params " + join_doubles(m.params));
            }
        },
        model.params);
    for (const auto& [k, v] : model.train_meta) a.set("meta." + k, v);
    return render_artifact(a);
}

namespace {

std::size_t to_size(const std::string& s, std::string_view what) {
    const long long v = parse_int_or_throw(s, what);
    if (v < 0) throw ParseError(fmt::format("{}: must not be negative", what));
    return static_cast<std::size_t>(v);
}

std::vector<double> doubles_after(std::string_view line, std::size_t skip_tokens, std::string_view what) {
    std::vector<double> out;
    std::size_t token = 0;
    for (auto part : split(line, ' ')) {
        if (token++ < skip_tokens) continue;
        out.push_back(parse_double_or_throw(part, what));
    }
    return out;
}

}  // namespace

TrainedModel parse_model(std::string_view text) {
    const ArtifactText a = parse_artifact(text, "llt-model");
    TrainedModel model;
    model.kind = parse_model_kind(a.get("kind"));
    model.feature_dim = to_size(a.get("feature_dim"), "feature_dim");
    if (model.feature_dim == 0) throw ParseError("model feature_dim must be positive");
    for (const auto& [k, v] : a.header)
        if (k.rfind("meta.", 0) == 0) model.train_meta.emplace_back(k.substr(5), v);

    auto expect_dim = [&](std::size_t got, std::string_view what) {
        if (got != model.feature_dim)
            throw ParseError(fmt::format("model {}: expected {} values, got {}", what, model.feature_dim, got));
    };
    auto tag_of = [](const std::string& line) { return line.substr(0, line.find(' ')); };

    KnnModel knn;
    std::vector<std::vector<double>> knn_rows, sv_rows;
    RbfSvmModel rbf;
    LinearSvmModel lin;
    ForestModel forest;
    MlpModel mlp;
    for (const auto& line : a.payload) {
        const std::string tag = tag_of(line);
        if (tag == "scaler_mean") {
            model.scaler.mean = doubles_after(line, 1, "scaler mean");
            expect_dim(model.scaler.mean.size(), "scaler mean");
        } else if (tag == "scaler_scale") {
            model.scaler.scale = doubles_after(line, 1, "scaler scale");
            expect_dim(model.scaler.scale.size(), "scaler scale");
        } else if (tag == "row" && model.kind == ModelKind::Knn) {
            const auto parts = split(line, ' ');
            if (parts.size() < 2) throw ParseError("model knn row: missing label");
            knn.y.push_back(parse_label_token(parts[1]));
            knn_rows.push_back(doubles_after(line, 2, "knn row"));
            expect_dim(knn_rows.back().size(), "knn row");
        } else if (tag == "w" && model.kind == ModelKind::LinearSvm) {
            lin.w = doubles_after(line, 1, "svm weights");
            expect_dim(lin.w.size(), "svm weights");
        } else if (tag == "sv" && model.kind == ModelKind::RbfSvm) {
            auto v = doubles_after(line, 1, "support vector");
            if (v.empty()) throw ParseError("model support vector: missing coefficient");
            rbf.coef.push_back(v.front());
            v.erase(v.begin());
            expect_dim(v.size(), "support vector");
            sv_rows.push_back(std::move(v));
        } else if (tag == "node" && model.kind == ModelKind::RandomForest) {
            const auto parts = split(line, ' ');
            if (parts.size() != 8) throw ParseError("model tree node: expected 7 fields");
            const std::size_t t = to_size(std::string(parts[1]), "tree index");
            if (t >= forest.trees.size()) forest.trees.resize(t + 1);
            TreeNode n;
            n.feature = static_cast<int>(parse_int_or_throw(parts[2], "node feature"));
            n.threshold = parse_double_or_throw(parts[3], "node threshold");
            n.left = static_cast<int>(parse_int_or_throw(parts[4], "node left"));
            n.right = static_cast<int>(parse_int_or_throw(parts[5], "node right"));
            n.p_normal = parse_double_or_throw(parts[6], "node probability");
            n.depth = static_cast<int>(parse_int_or_throw(parts[7], "node depth"));
            forest.trees[t].nodes.push_back(n);
        } else if (tag == "params" && model.kind == ModelKind::Mlp) {
            mlp.params = doubles_after(line, 1, "mlp parameters");
        } else if (!trim(line).empty()) {
            throw ParseError(fmt::format("model: unexpected payload line '{}'", tag));
        }
    }

    auto to_matrix = [](const std::vector<std::vector<double>>& rows, std::size_t d) {
        Matrix m(rows.size(), d);
        for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
        return m;
    };
    switch (model.kind) {
        case ModelKind::Knn:
            knn.k = to_size(a.get("k"), "k");
            knn.metric = parse_metric(a.get("metric"));
            if (knn_rows.empty() || knn.k == 0) throw ParseError("model knn: no training rows or k = 0");
            knn.x = to_matrix(knn_rows, model.feature_dim);
            model.params = std::move(knn);
            break;
        case ModelKind::LinearSvm:
            lin.b = parse_double_or_throw(a.get("bias"), "bias");
            expect_dim(lin.w.size(), "svm weights");
            model.params = std::move(lin);
            break;
        case ModelKind::RbfSvm:
            rbf.gamma = parse_double_or_throw(a.get("gamma"), "gamma");
            rbf.b = parse_double_or_throw(a.get("bias"), "bias");
            rbf.support = to_matrix(sv_rows, model.feature_dim);
            model.params = std::move(rbf);
            break;
        case ModelKind::RandomForest: {
            const std::size_t trees = to_size(a.get("trees"), "trees");
            if (forest.trees.size() != trees || trees == 0) throw ParseError("model forest: tree count mismatch");
            for (const auto& tree : forest.trees) {
                if (tree.nodes.empty()) throw ParseError("model forest: empty tree");
                const int n = static_cast<int>(tree.nodes.size());
                for (int i = 0; i < n; ++i) {
                    const auto& node = tree.nodes[static_cast<std::size_t>(i)];
                    if (node.feature < 0) continue;
                    if (node.feature >= static_cast<int>(model.feature_dim) || node.left <= i || node.right <= i ||
                        node.left >= n || node.right >= n)
                        throw ParseError("model forest: malformed node");
                }
            }
            model.params = std::move(forest);
            break;
        }
        case ModelKind::Mlp:
            mlp.inputs = to_size(a.get("inputs"), "inputs");
            mlp.hidden = to_size(a.get("hidden"), "hidden");
            expect_dim(mlp.inputs, "mlp inputs");
            if (mlp.hidden == 0 || mlp.params.size() != MlpModel::param_count(mlp.inputs, mlp.hidden))
                throw ParseError("model mlp: parameter count does not match layer sizes");
            model.params = std::move(mlp);
            break;
    }
    if (model.scaler.mean.size() != model.scaler.scale.size()) throw ParseError("model scaler is incomplete");
    a.require_checksum();
    return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) { write_text_file(path, render_model(model)); }

TrainedModel load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

}  // namespace llt
