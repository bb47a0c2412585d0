#pragma once

// Binary Normal-vs-Ectopic classifiers trained on LLT feature rows.

#include "llt/core.hpp"
#include "llt/llt_features.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace llt {

enum class ModelKind { Knn, LinearSvm, RbfSvm, RandomForest, Mlp };
enum class DistanceMetric { Chebyshev, Euclidean };

/// CLI names: knn, svm-linear, svm, rf, mlp.
std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
std::string_view metric_name(DistanceMetric metric);
DistanceMetric parse_metric(std::string_view name);

struct Hyperparams {
    std::size_t knn_k = 4;
    DistanceMetric knn_metric = DistanceMetric::Chebyshev;

    std::size_t rf_estimators = 10;
    std::size_t rf_depth = 6;
    std::size_t rf_min_leaf = 1;

    double svm_C = 1.0;
    /// Unset: 1 / (feature_dim * variance of all training feature values).
    std::optional<double> rbf_gamma;
    double smo_tolerance = 1e-3;
    std::size_t smo_max_iter = 2'000'000;
    std::size_t linear_epochs = 200;

    std::size_t mlp_hidden = 8;
    std::size_t mlp_epochs = 3000;
    double mlp_lr = 0.5;

    /// Per-feature standardization fitted inside the model. Unset: on for the linear
    /// SVM and the MLP, off for KNN, the RBF SVM and the forest.
    std::optional<bool> standardize;

    std::uint64_t seed = 42;

    void validate() const;
    bool standardize_for(ModelKind kind) const;
    bool operator==(const Hyperparams&) const = default;
};

struct KnnModel {
    Matrix x;
    std::vector<Label> y;
    std::size_t k = 1;
    DistanceMetric metric = DistanceMetric::Chebyshev;
};

struct LinearSvmModel {
    std::vector<double> w;
    double b = 0.0;
};

struct RbfSvmModel {
    Matrix support;             // support vectors
    std::vector<double> coef;   // alpha_i * y_i
    double b = 0.0;             // decision = sum coef_i K(sv_i, x) + b
    double gamma = 1.0;
};

struct TreeNode {
    int feature = -1;           // -1 marks a leaf
    double threshold = 0.0;     // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double p_normal = 0.0;      // fraction of Normal training rows reaching the node
    int depth = 0;
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int max_depth() const;
    bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
};

/// One hidden tanh layer feeding two softmax outputs (index 0 Normal, 1 Ectopic).
/// Parameters are stored flat: W1 (hidden x in, row-major), b1, W2 (2 x hidden), b2.
struct MlpModel {
    std::size_t inputs = 0;
    std::size_t hidden = 0;
    std::vector<double> params;

    static std::size_t param_count(std::size_t inputs, std::size_t hidden) { return hidden * inputs + hidden + 2 * hidden + 2; }
    /// Probabilities of Normal and Ectopic.
    std::pair<double, double> forward(std::span<const double> x) const;
};

/// Mean cross-entropy of the network on (x, labels); fills `grad` (same layout as params) when non-null.
double mlp_loss_and_gradient(const MlpModel& net, const Matrix& x, std::span<const Label> labels, std::vector<double>* grad);

using ModelParams = std::variant<KnnModel, LinearSvmModel, RbfSvmModel, ForestModel, MlpModel>;

struct TrainedModel {
    ModelKind kind = ModelKind::Knn;
    std::size_t feature_dim = 0;
    FeatureScaler scaler;  // empty when inputs are used as-is
    ModelParams params;
    /// Free-form provenance (corpus sizes, seed, hyperparameters), persisted verbatim.
    std::vector<std::pair<std::string, std::string>> train_meta;
};

std::size_t heuristic_k(std::size_t n_train);
double distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric);

/// Receives the iteration count and the current dual variables after every SMO step.
using SmoObserver = std::function<void(std::size_t iteration, std::span<const double> alpha)>;

TrainedModel knn_fit(const Matrix& x, std::span<const Label> y, const Hyperparams& hp);
TrainedModel linear_svm_fit(const Matrix& x, std::span<const Label> y, const Hyperparams& hp);
TrainedModel rbf_svm_fit(const Matrix& x, std::span<const Label> y, const Hyperparams& hp, const SmoObserver& observer = {});
TrainedModel rf_fit(const Matrix& x, std::span<const Label> y, const Hyperparams& hp);
TrainedModel mlp_fit(const Matrix& x, std::span<const Label> y, const Hyperparams& hp);
TrainedModel fit_model(ModelKind kind, const Matrix& x, std::span<const Label> y, const Hyperparams& hp);

/// Throws ParameterError naming the expected and actual dimension on mismatch.
Label predict(const TrainedModel& model, std::span<const double> features);
std::vector<Label> predict_all(const TrainedModel& model, const Matrix& x);

/// Signed score, positive for Normal (linear and RBF SVM only).
double svm_decision(const TrainedModel& model, std::span<const double> features);

struct TuningEntry {
    Hyperparams hp;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
    double selection_score = 0.0;
};

struct TuningResult {
    TrainedModel model;
    Hyperparams best;
    std::vector<TuningEntry> grid;  // in evaluation order
};

/// Fits every grid point on the training rows and keeps the best on the validation rows.
/// SVMs: C in {0.1, 1, 10, 100}, and for the RBF kernel gamma in {0.25, 1, 4} x default;
/// score = validation accuracy. Forest: depth in {4, 6, 8}, estimators in {10, 30};
/// score = validation accuracy - 0.5 |train accuracy - validation accuracy|.
/// KNN and MLP have no grid and are fitted once. Ties keep the earlier grid point.
TuningResult tune_model(ModelKind kind, const Matrix& x_train, std::span<const Label> y_train, const Matrix& x_val,
                        std::span<const Label> y_val, const Hyperparams& base);

double accuracy(const TrainedModel& model, const Matrix& x, std::span<const Label> y);

std::string render_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace llt
