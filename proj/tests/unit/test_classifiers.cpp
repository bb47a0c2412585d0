#include "llt/classifiers.hpp"
#include "llt/parallel.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

namespace llt {
namespace {

constexpr Label N = Label::Normal, E = Label::Ectopic;

struct Data {
    Matrix x;
    std::vector<Label> y;
};

Data rows(std::initializer_list<std::initializer_list<double>> r, std::vector<Label> y) {
    Data d{Matrix(r.size(), r.begin()->size()), std::move(y)};
    std::size_t i = 0;
    for (const auto& row : r) {
        std::copy(row.begin(), row.end(), d.x.row(i).begin());
        ++i;
    }
    return d;
}

/// Two Gaussian blobs in d dimensions, Normal around +shift, Ectopic around -shift.
Data blobs(Rng& rng, std::size_t n_per_class, std::size_t d, double shift, double sigma = 1.0) {
    Data out{Matrix(2 * n_per_class, d), {}};
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const bool normal = i % 2 == 0;
        for (std::size_t c = 0; c < d; ++c) out.x(i, c) = (normal ? shift : -shift) + sigma * rng.normal();
        out.y.push_back(normal ? N : E);
    }
    return out;
}

Data xor_data() { return rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {N, N, E, E}); }

const std::vector<ModelKind> kAllKinds{ModelKind::Knn, ModelKind::LinearSvm, ModelKind::RbfSvm, ModelKind::RandomForest,
                                       ModelKind::Mlp};

Hyperparams quick() {
    Hyperparams hp;
    hp.mlp_epochs = 800;
    hp.linear_epochs = 50;
    return hp;
}

TEST(Names, RoundTrip) {
    for (ModelKind k : kAllKinds) EXPECT_EQ(parse_model_kind(model_kind_name(k)), k);
    EXPECT_EQ(parse_metric("euclidean"), DistanceMetric::Euclidean);
    EXPECT_THROW(parse_model_kind("tree"), ParameterError);
}

TEST(Hyper, Validation) {
    Hyperparams hp;
    EXPECT_NO_THROW(hp.validate());
    hp.knn_k = 0;
    EXPECT_THROW(hp.validate(), ParameterError);
    hp = {};
    hp.svm_C = -1;
    EXPECT_THROW(hp.validate(), ParameterError);
    hp = {};
    EXPECT_TRUE(hp.standardize_for(ModelKind::Mlp));
    EXPECT_FALSE(hp.standardize_for(ModelKind::Knn));
    hp.standardize = true;
    EXPECT_TRUE(hp.standardize_for(ModelKind::Knn));
}

TEST(Knn, HeuristicK) {
    EXPECT_EQ(heuristic_k(3249), 57u);
    EXPECT_EQ(heuristic_k(1), 1u);
    EXPECT_EQ(heuristic_k(10000), 100u);
    EXPECT_THROW(heuristic_k(0), ParameterError);
}

TEST(Knn, DistancesAndSinglePoint) {
    const std::vector<double> a{0, 0}, b{1, 3};
    EXPECT_EQ(distance(a, b, DistanceMetric::Chebyshev), 3.0);
    EXPECT_DOUBLE_EQ(distance(a, b, DistanceMetric::Euclidean), std::sqrt(10.0));
    const auto d = rows({{0.5, 0.5}}, {E});
    Hyperparams hp;
    hp.knn_k = 1;
    const auto m = knn_fit(d.x, d.y, hp);
    Rng rng(1);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(predict(m, std::vector<double>{rng.normal(), rng.normal()}), E);
}

TEST(KnnProperty, UniformScalingLeavesPredictionsUnchanged) {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        auto d = blobs(rng, 30, 5, 0.5);
        Hyperparams hp;
        hp.knn_k = 1 + rng.index(9);
        const auto probe = blobs(rng, 20, 5, 0.5);
        const auto before = predict_all(knn_fit(d.x, d.y, hp), probe.x);
        const double c = rng.uniform(0.01, 100.0);
        Matrix xs = d.x, ps = probe.x;
        for (double& v : xs.data()) v *= c;
        for (double& v : ps.data()) v *= c;
        ASSERT_EQ(predict_all(knn_fit(xs, d.y, hp), ps), before);
    }
}

TEST(LinearSvm, SeparableTwoPoints) {
    const auto d = rows({{-1}, {1}}, {N, E});
    const auto m = linear_svm_fit(d.x, d.y, {});
    EXPECT_EQ(accuracy(m, d.x, d.y), 1.0);
    const double at_mid = svm_decision(m, std::vector<double>{0.0});
    const double at_one = svm_decision(m, std::vector<double>{1.0});
    EXPECT_LT(std::abs(at_mid), 0.2 * std::abs(at_one));
    EXPECT_GT(svm_decision(m, std::vector<double>{-0.3}), 0.0);
    EXPECT_LT(svm_decision(m, std::vector<double>{0.3}), 0.0);
}

TEST(LinearSvm, XorIsNotLinearlySeparable) {
    const auto d = xor_data();
    EXPECT_LE(accuracy(linear_svm_fit(d.x, d.y, {}), d.x, d.y), 0.75);
}

TEST(RbfSvm, SeparatesXor) {
    const auto d = xor_data();
    Hyperparams hp;
    hp.rbf_gamma = 1.0;
    hp.svm_C = 10.0;
    EXPECT_EQ(accuracy(rbf_svm_fit(d.x, d.y, hp), d.x, d.y), 1.0);
}

TEST(RbfSvm, AgreesWithLinearOnSeparablePair) {
    const auto d = rows({{-1}, {1}}, {N, E});
    const auto rbf = rbf_svm_fit(d.x, d.y, {});
    const auto lin = linear_svm_fit(d.x, d.y, {});
    for (double q : {-3.0, -1.0, -0.5, 0.5, 1.0, 3.0})
        EXPECT_EQ(predict(rbf, std::vector<double>{q}), predict(lin, std::vector<double>{q})) << q;
}

TEST(RbfSvmProperty, DualAscentAndFeasibility) {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto d = blobs(rng, 20, 3, 1.5);
        Hyperparams hp;
        hp.rbf_gamma = 0.5;
        hp.svm_C = rng.uniform(0.5, 5.0);
        const std::size_t n = d.x.rows();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = d.y[i] == N ? 1.0 : -1.0;
        Matrix q(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < 3; ++c) s += std::pow(d.x(i, c) - d.x(j, c), 2);
                q(i, j) = y[i] * y[j] * std::exp(-*hp.rbf_gamma * s);
            }
        double previous = 0.0;
        std::vector<double> last;
        std::size_t calls = 0;
        const auto model = rbf_svm_fit(d.x, d.y, hp, [&](std::size_t, std::span<const double> alpha) {
            double lin = 0.0, quad = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                lin += alpha[i];
                for (std::size_t j = 0; j < n; ++j) quad += alpha[i] * q(i, j) * alpha[j];
            }
            const double dual = lin - 0.5 * quad;
            EXPECT_GE(dual, previous - 1e-12 * std::max(1.0, std::abs(previous)));
            previous = dual;
            last.assign(alpha.begin(), alpha.end());
            ++calls;
        });
        ASSERT_GT(calls, 0u);
        double balance = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_GE(last[i], 0.0);
            EXPECT_LE(last[i], hp.svm_C);
            balance += last[i] * y[i];
        }
        EXPECT_NEAR(balance, 0.0, 1e-9);
        const auto& p = std::get<RbfSvmModel>(model.params);
        EXPECT_GT(p.support.rows(), 0u);
        EXPECT_GE(accuracy(model, d.x, d.y), 0.9);
    }
}

TEST(Forest, PureLabelAndStump) {
    const auto pure = rows({{1, 2}, {3, 4}, {5, 6}}, {E, E, E});
    const auto f = rf_fit(pure.x, pure.y, {});
    Rng rng(4);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(predict(f, std::vector<double>{rng.normal(), rng.normal()}), E);

    Data d{Matrix(40, 1), {}};
    for (std::size_t i = 0; i < 40; ++i) {
        const bool normal = i < 20;
        d.x(i, 0) = (normal ? 0.0 : 0.9) + 0.1 * rng.uniform();
        d.y.push_back(normal ? N : E);
    }
    Hyperparams hp;
    hp.rf_depth = 1;
    const auto stump = rf_fit(d.x, d.y, hp);
    EXPECT_EQ(accuracy(stump, d.x, d.y), 1.0);
    for (const auto& tree : std::get<ForestModel>(stump.params).trees) {
        EXPECT_EQ(tree.max_depth(), 1);
        EXPECT_GT(tree.nodes[0].threshold, 0.1);
        EXPECT_LT(tree.nodes[0].threshold, 0.9);
    }
}

TEST(ForestProperty, DepthBoundAndDeterminism) {
    Rng rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        const auto d = blobs(rng, 40, 6, 0.2);
        Hyperparams hp;
        hp.rf_depth = 1 + rng.index(7);
        hp.rf_estimators = 1 + rng.index(12);
        hp.seed = rng.next();
        const auto m = rf_fit(d.x, d.y, hp);
        const auto& forest = std::get<ForestModel>(m.params);
        ASSERT_EQ(forest.trees.size(), hp.rf_estimators);
        for (const auto& t : forest.trees) {
            ASSERT_LE(t.max_depth(), static_cast<int>(hp.rf_depth));
            for (const auto& node : t.nodes) {
                if (node.feature < 0) continue;
                ASSERT_EQ(t.nodes[node.left].depth, node.depth + 1);
                ASSERT_EQ(t.nodes[node.right].depth, node.depth + 1);
            }
        }
        ASSERT_EQ(render_model(rf_fit(d.x, d.y, hp)), render_model(m));
    }
}

TEST(Mlp, GradientMatchesCentralDifferences) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        MlpModel net;
        net.inputs = 1 + rng.index(6);
        net.hidden = 1 + rng.index(8);
        net.params.resize(MlpModel::param_count(net.inputs, net.hidden));
        for (double& p : net.params) p = rng.normal() * 0.7;
        const std::size_t n = 3 + rng.index(10);
        Matrix x(n, net.inputs);
        for (double& v : x.data()) v = rng.normal();
        std::vector<Label> y(n);
        for (auto& l : y) l = rng.index(2) ? N : E;

        std::vector<double> grad;
        mlp_loss_and_gradient(net, x, y, &grad);
        ASSERT_EQ(grad.size(), net.params.size());
        double diff2 = 0.0, norm_a = 0.0, norm_n = 0.0;
        const double h = 1e-5;
        for (std::size_t k = 0; k < net.params.size(); ++k) {
            MlpModel plus = net, minus = net;
            plus.params[k] += h;
            minus.params[k] -= h;
            const double numeric =
                (mlp_loss_and_gradient(plus, x, y, nullptr) - mlp_loss_and_gradient(minus, x, y, nullptr)) / (2 * h);
            diff2 += std::pow(grad[k] - numeric, 2);
            norm_a += grad[k] * grad[k];
            norm_n += numeric * numeric;
        }
        const double rel = std::sqrt(diff2) / std::max(std::sqrt(norm_a) + std::sqrt(norm_n), 1e-300);
        EXPECT_LT(rel, 1e-6) << "trial " << trial;
    }
}

TEST(Mlp, TwoOutputsAndSeparableProblem) {
    Rng rng(7);
    Data d{Matrix(100, 1), {}};
    for (std::size_t i = 0; i < 100; ++i) {
        d.x(i, 0) = rng.uniform(-1.0, 1.0);
        d.y.push_back(d.x(i, 0) < 0 ? N : E);
    }
    Hyperparams hp;
    hp.mlp_epochs = 500;
    const auto m = mlp_fit(d.x, d.y, hp);
    EXPECT_GE(accuracy(m, d.x, d.y), 0.99);
    const auto& net = std::get<MlpModel>(m.params);
    EXPECT_EQ(net.params.size(), MlpModel::param_count(1, hp.mlp_hidden));
    const auto [pn, pe] = net.forward(std::vector<double>{-0.5});
    EXPECT_NEAR(pn + pe, 1.0, 1e-12);
    EXPECT_GT(pn, pe);
}

TEST(Mlp, DivergenceIsReported) {
    Rng rng(8);
    auto d = blobs(rng, 10, 2, 1.0);
    Hyperparams hp;
    // One step this large pushes the output logits past the double range.
    hp.mlp_lr = std::numeric_limits<double>::max();
    hp.mlp_epochs = 200;
    EXPECT_THROW(mlp_fit(d.x, d.y, hp), NumericalError);
}

TEST(AllModels, PureLabelFitsPredictThatLabel) {
    const auto d = rows({{1, 2}, {2, 1}, {3, 3}, {0, 1}}, {N, N, N, N});
    for (ModelKind k : kAllKinds) {
        const auto m = fit_model(k, d.x, d.y, quick());
        for (std::size_t i = 0; i < d.x.rows(); ++i) EXPECT_EQ(predict(m, d.x.row(i)), N) << model_kind_name(k);
        EXPECT_EQ(predict(m, std::vector<double>{-5, 7}), N) << model_kind_name(k);
    }
}

TEST(AllModels, DimensionMismatchNamesBothSizes) {
    Rng rng(9);
    const auto d = blobs(rng, 10, 3, 1.0);
    for (ModelKind k : kAllKinds) {
        const auto m = fit_model(k, d.x, d.y, quick());
        try {
            predict(m, std::vector<double>{1, 2});
            FAIL() << model_kind_name(k);
        } catch (const ParameterError& e) {
            EXPECT_NE(std::string(e.what()).find("model expects 3, got 2"), std::string::npos) << e.what();
        }
    }
}

TEST(AllModels, RejectBadTrainingSets) {
    const auto d = rows({{1, 2}, {2, 1}}, {N, Label::Unlabeled});
    for (ModelKind k : kAllKinds) EXPECT_THROW(fit_model(k, d.x, d.y, quick()), ParameterError);
    const auto shape = rows({{1, 2}, {2, 1}}, {N});
    for (ModelKind k : kAllKinds) EXPECT_THROW(fit_model(k, shape.x, shape.y, quick()), ParameterError);
}

TEST(AllModelsProperty, DeterministicAndRoundTripExact) {
    Rng rng(10);
    const auto d = blobs(rng, 30, 4, 0.6);
    const auto probe = blobs(rng, 25, 4, 0.6);
    for (ModelKind k : kAllKinds) {
        const auto m = fit_model(k, d.x, d.y, quick());
        const auto text = render_model(m);
        EXPECT_EQ(render_model(fit_model(k, d.x, d.y, quick())), text) << model_kind_name(k);
        const auto back = parse_model(text);
        EXPECT_EQ(render_model(back), text);
        EXPECT_EQ(back.kind, k);
        EXPECT_EQ(back.feature_dim, 4u);
        EXPECT_EQ(predict_all(back, probe.x), predict_all(m, probe.x)) << model_kind_name(k);
        EXPECT_GE(accuracy(m, d.x, d.y), 0.8) << model_kind_name(k);

        const auto path = std::filesystem::temp_directory_path() / "llt_model_roundtrip.model";
        save_model(m, path);
        EXPECT_EQ(predict_all(load_model(path), probe.x), predict_all(m, probe.x));
        std::filesystem::remove(path);
    }
}

TEST(ModelFile, TamperingIsDetected) {
    Rng rng(11);
    const auto d = blobs(rng, 5, 2, 1.0);
    auto text = render_model(linear_svm_fit(d.x, d.y, {}));
    const auto pos = text.rfind("w ");
    ASSERT_NE(pos, std::string::npos);
    text.insert(pos + 2, "1");
    EXPECT_THROW(parse_model(text), ParseError);
    EXPECT_THROW(parse_model("llt-law\n"), ParseError);
}

TEST(Parallel, PredictionsIndependentOfWorkerCount) {
    Rng rng(12);
    const auto d = blobs(rng, 50, 5, 0.3);
    const auto probe = blobs(rng, 200, 5, 0.3);
    const auto m = rf_fit(d.x, d.y, {});
    set_worker_count(1);
    const auto one = predict_all(m, probe.x);
    const auto forest_one = render_model(rf_fit(d.x, d.y, {}));
    set_worker_count(4);
    EXPECT_EQ(predict_all(m, probe.x), one);
    EXPECT_EQ(render_model(rf_fit(d.x, d.y, {})), forest_one);
    set_worker_count(0);
    EXPECT_GE(worker_count(), 1u);
}

TEST(Parallel, FirstExceptionPropagates) {
    EXPECT_THROW(parallel_for(100, [](std::size_t i) {
                     if (i == 37) throw ParameterError("boom");
                 }),
                 ParameterError);
}

TEST(Tuning, GridsAndSelection) {
    Rng rng(13);
    const auto tr = blobs(rng, 30, 3, 0.5);
    const auto va = blobs(rng, 30, 3, 0.5);
    const auto lin = tune_model(ModelKind::LinearSvm, tr.x, tr.y, va.x, va.y, quick());
    EXPECT_EQ(lin.grid.size(), 4u);
    const auto rbf = tune_model(ModelKind::RbfSvm, tr.x, tr.y, va.x, va.y, quick());
    ASSERT_EQ(rbf.grid.size(), 12u);
    double best = -1.0;
    for (const auto& e : rbf.grid) best = std::max(best, e.selection_score);
    EXPECT_EQ(accuracy(rbf.model, va.x, va.y), best);
    // The first grid point reaching the best score wins.
    for (const auto& e : rbf.grid) {
        if (e.selection_score == best) {
            EXPECT_EQ(e.hp, rbf.best);
            break;
        }
    }
    const auto rf = tune_model(ModelKind::RandomForest, tr.x, tr.y, va.x, va.y, quick());
    EXPECT_EQ(rf.grid.size(), 6u);
    for (const auto& e : rf.grid)
        EXPECT_DOUBLE_EQ(e.selection_score, e.validation_accuracy - 0.5 * std::abs(e.train_accuracy - e.validation_accuracy));
    EXPECT_EQ(tune_model(ModelKind::Knn, tr.x, tr.y, va.x, va.y, quick()).grid.size(), 1u);
    bool tagged = false;
    for (const auto& [k, v] : rbf.model.train_meta) tagged = tagged || (k == "tuned_on" && v == "validation");
    EXPECT_TRUE(tagged);
}

}  // namespace
}  // namespace llt
