#include "common.hpp"

#include <cmath>

#include <fmt/format.h>

namespace llt {

double accuracy(const TrainedModel& model, const Matrix& x, std::span<const Label> y) {
    if (x.rows() != y.size()) throw ParameterError("accuracy: row and label counts differ");
    if (y.empty()) throw ParameterError("accuracy: no rows");
    const auto pred = predict_all(model, x);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y.size(); ++i) hit += pred[i] == y[i];
    return static_cast<double>(hit) / static_cast<double>(y.size());
}

namespace {

constexpr double kGapWeight = 0.5;

std::vector<Hyperparams> grid_for(ModelKind kind, const Matrix& x_train, const Hyperparams& base) {
    std::vector<Hyperparams> grid;
    switch (kind) {
        case ModelKind::LinearSvm:
            for (double c : {0.1, 1.0, 10.0, 100.0}) {
                Hyperparams hp = base;
                hp.svm_C = c;
                grid.push_back(hp);
            }
            break;
        case ModelKind::RbfSvm: {
            FeatureScaler scaler;
            const Matrix xs = detail::scaled_inputs(x_train, base.standardize_for(kind), scaler);
            const double g0 = base.rbf_gamma.value_or(detail::default_gamma(xs));
            for (double c : {0.1, 1.0, 10.0, 100.0})
                for (double m : {0.25, 1.0, 4.0}) {
                    Hyperparams hp = base;
                    hp.svm_C = c;
                    hp.rbf_gamma = g0 * m;
                    grid.push_back(hp);
                }
            break;
        }
        case ModelKind::RandomForest:
            for (std::size_t depth : {4, 6, 8})
                for (std::size_t trees : {10, 30}) {
                    Hyperparams hp = base;
                    hp.rf_depth = depth;
                    hp.rf_estimators = trees;
                    grid.push_back(hp);
                }
            break;
        case ModelKind::Knn:
        case ModelKind::Mlp:
            grid.push_back(base);
            break;
    }
    return grid;
}

}  // namespace

TuningResult tune_model(ModelKind kind, const Matrix& x_train, std::span<const Label> y_train, const Matrix& x_val,
                        std::span<const Label> y_val, const Hyperparams& base) {
    detail::check_training_set(x_train, y_train, "tuning");
    if (x_val.rows() == 0 || x_val.rows() != y_val.size()) throw ParameterError("tuning: empty or inconsistent validation set");
    TuningResult result;
    bool have = false;
    double best_score = 0.0;
    for (const auto& hp : grid_for(kind, x_train, base)) {
        TuningEntry e;
        e.hp = hp;
        TrainedModel m = fit_model(kind, x_train, y_train, hp);
        e.train_accuracy = accuracy(m, x_train, y_train);
        e.validation_accuracy = accuracy(m, x_val, y_val);
        e.selection_score = e.validation_accuracy;
        if (kind == ModelKind::RandomForest)
            e.selection_score -= kGapWeight * std::abs(e.train_accuracy - e.validation_accuracy);
        if (!have || e.selection_score > best_score) {
            have = true;
            best_score = e.selection_score;
            result.best = hp;
            result.model = std::move(m);
        }
        result.grid.push_back(e);
    }
    result.model.train_meta.emplace_back("tuned_on", "validation");
    return result;
}

}  // namespace llt
