#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace llt {

std::size_t heuristic_k(std::size_t n_train) {
    if (n_train == 0) throw ParameterError("heuristic k needs at least one training sample");
    const auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n_train))));
    return std::max<std::size_t>(1, k);
}

double distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric) {
    double acc = 0.0;
    if (metric == DistanceMetric::Chebyshev) {
        for (std::size_t i = 0; i < a.size(); ++i) acc = std::max(acc, std::abs(a[i] - b[i]));
        return acc;
    }
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

TrainedModel knn_fit(const Matrix& x, std::span<const Label> y, const Hyperparams& hp) {
    hp.validate();
    detail::check_training_set(x, y, "knn");
    if (hp.knn_k > x.rows())
        throw ParameterError(fmt::format("knn: k={} exceeds the {} training samples", hp.knn_k, x.rows()));
    TrainedModel model;
    model.kind = ModelKind::Knn;
    model.feature_dim = x.cols();
    KnnModel knn;
    knn.x = detail::scaled_inputs(x, hp.standardize_for(ModelKind::Knn), model.scaler);
    knn.y.assign(y.begin(), y.end());
    knn.k = hp.knn_k;
    knn.metric = hp.knn_metric;
    model.params = std::move(knn);
    model.train_meta = detail::base_meta(ModelKind::Knn, x, y, hp);
    return model;
}

namespace detail {

Label knn_predict(const KnnModel& knn, std::span<const double> q) {
    const std::size_t n = knn.x.rows();
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = {distance(knn.x.row(i), q, knn.metric), i};
    const std::size_t k = std::min(knn.k, n);
    // Equal distances are ordered by training index, so the neighbour set is deterministic.
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());

    std::size_t votes[2] = {0, 0};
    double dist_sum[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < k; ++i) {
        const int c = knn.y[d[i].second] == Label::Normal ? 0 : 1;
        ++votes[c];
        dist_sum[c] += d[i].first;
    }
    if (votes[0] != votes[1]) return votes[0] > votes[1] ? Label::Normal : Label::Ectopic;
    if (dist_sum[0] != dist_sum[1]) return dist_sum[0] < dist_sum[1] ? Label::Normal : Label::Ectopic;
    return Label::Normal;
}

}  // namespace detail

}  // namespace llt
