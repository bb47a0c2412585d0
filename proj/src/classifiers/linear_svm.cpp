#include "common.hpp"

#include "llt/random.hpp"

#include <numeric>

namespace llt {

// Pegasos: stochastic sub-gradient descent on
//   (lambda / 2) |[w, b]|^2 + (1 / n) sum_i max(0, 1 - y_i (w . x_i + b)),  lambda = 1 / (C n),
// with the bias treated as a weight on a constant feature and the second half of the iterates averaged.
TrainedModel linear_svm_fit(const Matrix& x_raw, std::span<const Label> y, const Hyperparams& hp) {
    hp.validate();
    detail::check_training_set(x_raw, y, "linear svm");
    TrainedModel model;
    model.kind = ModelKind::LinearSvm;
    model.feature_dim = x_raw.cols();
    const Matrix x = detail::scaled_inputs(x_raw, hp.standardize_for(ModelKind::LinearSvm), model.scaler);

    const std::size_t n = x.rows(), d = x.cols();
    if (const auto only = detail::single_class(y)) {
        // Nothing to separate: a constant decision for the one class seen.
        model.params = LinearSvmModel{std::vector<double>(d, 0.0), detail::label_sign(*only)};
        model.train_meta = detail::base_meta(ModelKind::LinearSvm, x_raw, y, hp);
        model.train_meta.emplace_back("single_class", std::string(label_name(*only)));
        return model;
    }
    const double lambda = 1.0 / (hp.svm_C * static_cast<double>(n));
    std::vector<double> w(d + 1, 0.0), avg(d + 1, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(hp.seed);

    std::size_t t = 0, averaged = 0;
    const std::size_t average_from = hp.linear_epochs / 2;
    for (std::size_t epoch = 0; epoch < hp.linear_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const auto row = x.row(i);
            double margin = w[d];
            for (std::size_t c = 0; c < d; ++c) margin += w[c] * row[c];
            margin *= detail::label_sign(y[i]);
            const double shrink = 1.0 - eta * lambda;
            for (double& v : w) v *= shrink;
            if (margin < 1.0) {
                const double step = eta * detail::label_sign(y[i]);
                for (std::size_t c = 0; c < d; ++c) w[c] += step * row[c];
                w[d] += step;
            }
            if (epoch < average_from) continue;
            const double a = 1.0 / static_cast<double>(++averaged);
            for (std::size_t c = 0; c <= d; ++c) avg[c] += a * (w[c] - avg[c]);
        }
    }
    LinearSvmModel svm;
    svm.b = avg[d];
    avg.pop_back();
    svm.w = std::move(avg);
    model.params = std::move(svm);
    model.train_meta = detail::base_meta(ModelKind::LinearSvm, x_raw, y, hp);
    return model;
}

}  // namespace llt
