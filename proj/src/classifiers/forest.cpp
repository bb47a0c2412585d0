#include "common.hpp"

#include "llt/parallel.hpp"
#include "llt/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace llt {

int DecisionTree::max_depth() const {
    int d = 0;
    for (const auto& node : nodes)
        if (node.feature < 0) d = std::max(d, node.depth);
    return d;
}

namespace {

struct TreeBuilder {
    const Matrix& x;
    std::span<const Label> y;
    const Hyperparams& hp;
    Rng rng;
    std::size_t features_per_split;
    DecisionTree tree;

    double gini(std::size_t normal, std::size_t total) const {
        if (total == 0) return 0.0;
        const double p = static_cast<double>(normal) / static_cast<double>(total);
        return 2.0 * p * (1.0 - p);
    }

    int build(std::vector<std::size_t>& idx, int depth) {
        std::size_t normal = 0;
        for (std::size_t i : idx) normal += y[i] == Label::Normal;
        const int id = static_cast<int>(tree.nodes.size());
        TreeNode node;
        node.depth = depth;
        node.p_normal = static_cast<double>(normal) / static_cast<double>(idx.size());
        tree.nodes.push_back(node);

        const bool pure = normal == 0 || normal == idx.size();
        if (pure || depth >= static_cast<int>(hp.rf_depth) || idx.size() < 2 * hp.rf_min_leaf) return id;

        std::vector<std::size_t> features(x.cols());
        std::iota(features.begin(), features.end(), 0);
        rng.shuffle(features);
        features.resize(features_per_split);
        std::sort(features.begin(), features.end());

        const double parent = gini(normal, idx.size()) * static_cast<double>(idx.size());
        double best_cost = parent;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> order = idx;
        for (std::size_t f : features) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
            std::size_t left_normal = 0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                left_normal += y[order[k]] == Label::Normal;
                const double lo = x(order[k], f), hi = x(order[k + 1], f);
                if (!(lo < hi)) continue;
                const std::size_t nl = k + 1, nr = order.size() - nl;
                if (nl < hp.rf_min_leaf || nr < hp.rf_min_leaf) continue;
                const double cost = gini(left_normal, nl) * static_cast<double>(nl) +
                                    gini(normal - left_normal, nr) * static_cast<double>(nr);
                if (cost < best_cost - 1e-12) {
                    best_cost = cost;
                    best_feature = static_cast<int>(f);
                    double mid = lo + (hi - lo) / 2.0;
                    if (!(mid < hi)) mid = lo;
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx) (x(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(i);
        tree.nodes[static_cast<std::size_t>(id)].feature = best_feature;
        tree.nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        tree.nodes[static_cast<std::size_t>(id)].left = l;
        tree.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }
};

}  // namespace

TrainedModel rf_fit(const Matrix& x_raw, std::span<const Label> y, const Hyperparams& hp) {
    hp.validate();
    detail::check_training_set(x_raw, y, "random forest");
    TrainedModel model;
    model.kind = ModelKind::RandomForest;
    model.feature_dim = x_raw.cols();
    const Matrix x = detail::scaled_inputs(x_raw, hp.standardize_for(ModelKind::RandomForest), model.scaler);
    const std::size_t n = x.rows();
    const auto m = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(x.cols())))), 1, x.cols());

    ForestModel forest;
    forest.trees.resize(hp.rf_estimators);
    parallel_for(hp.rf_estimators, [&](std::size_t t) {
        TreeBuilder builder{x, y, hp, Rng(derive_seed(hp.seed, t)), m, {}};
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = builder.rng.index(n);
        std::sort(sample.begin(), sample.end());
        builder.build(sample, 0);
        forest.trees[t] = std::move(builder.tree);
    });
    model.params = std::move(forest);
    model.train_meta = detail::base_meta(ModelKind::RandomForest, x_raw, y, hp);
    return model;
}

namespace detail {

Label forest_predict(const ForestModel& forest, std::span<const double> q) {
    std::size_t votes[2] = {0, 0};
    double prob[2] = {0.0, 0.0};
    for (const auto& tree : forest.trees) {
        std::size_t k = 0;
        while (tree.nodes[k].feature >= 0) {
            const auto& node = tree.nodes[k];
            k = static_cast<std::size_t>(q[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
        }
        const double p = tree.nodes[k].p_normal;
        prob[0] += p;
        prob[1] += 1.0 - p;
        if (p > 0.5) ++votes[0];
        else if (p < 0.5) ++votes[1];
    }
    if (votes[0] != votes[1]) return votes[0] > votes[1] ? Label::Normal : Label::Ectopic;
    if (prob[0] != prob[1]) return prob[0] > prob[1] ? Label::Normal : Label::Ectopic;
    return Label::Normal;
}

}  // namespace detail

}  // namespace llt
