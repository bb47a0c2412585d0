#include "common.hpp"

#include "llt/random.hpp"

#include <cmath>

#include <fmt/format.h>

namespace llt {

namespace {

constexpr double kEarlyStopLoss = 1e-4;

struct Layout {
    std::size_t in, hidden;
    std::size_t w1() const { return 0; }
    std::size_t b1() const { return hidden * in; }
    std::size_t w2() const { return b1() + hidden; }
    std::size_t b2() const { return w2() + 2 * hidden; }
};

// Hidden activations and output logits for one input row.
void forward_row(const MlpModel& net, std::span<const double> x, std::vector<double>& h, double z[2]) {
    const Layout L{net.inputs, net.hidden};
    const auto& p = net.params;
    h.resize(net.hidden);
    for (std::size_t j = 0; j < net.hidden; ++j) {
        double a = p[L.b1() + j];
        for (std::size_t i = 0; i < net.inputs; ++i) a += p[L.w1() + j * net.inputs + i] * x[i];
        h[j] = std::tanh(a);
    }
    for (std::size_t o = 0; o < 2; ++o) {
        double a = p[L.b2() + o];
        for (std::size_t j = 0; j < net.hidden; ++j) a += p[L.w2() + o * net.hidden + j] * h[j];
        z[o] = a;
    }
}

}  // namespace

std::pair<double, double> MlpModel::forward(std::span<const double> x) const {
    std::vector<double> h;
    double z[2];
    forward_row(*this, x, h, z);
    const double m = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

double mlp_loss_and_gradient(const MlpModel& net, const Matrix& x, std::span<const Label> labels, std::vector<double>* grad) {
    const Layout L{net.inputs, net.hidden};
    if (grad) grad->assign(net.params.size(), 0.0);
    const std::size_t n = x.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> h, dh(net.hidden);
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = x.row(r);
        double z[2];
        forward_row(net, row, h, z);
        const double m = std::max(z[0], z[1]);
        const double lse = m + std::log(std::exp(z[0] - m) + std::exp(z[1] - m));
        const std::size_t target = labels[r] == Label::Normal ? 0 : 1;
        loss += lse - z[target];
        if (!grad) continue;

        auto& g = *grad;
        double dz[2];
        for (std::size_t o = 0; o < 2; ++o) dz[o] = (std::exp(z[o] - lse) - (o == target ? 1.0 : 0.0)) * inv_n;
        for (std::size_t j = 0; j < net.hidden; ++j) dh[j] = 0.0;
        for (std::size_t o = 0; o < 2; ++o) {
            g[L.b2() + o] += dz[o];
            for (std::size_t j = 0; j < net.hidden; ++j) {
                g[L.w2() + o * net.hidden + j] += dz[o] * h[j];
                dh[j] += net.params[L.w2() + o * net.hidden + j] * dz[o];
            }
        }
        for (std::size_t j = 0; j < net.hidden; ++j) {
            const double da = dh[j] * (1.0 - h[j] * h[j]);
            g[L.b1() + j] += da;
            for (std::size_t i = 0; i < net.inputs; ++i) g[L.w1() + j * net.inputs + i] += da * row[i];
        }
    }
    return loss * inv_n;
}

TrainedModel mlp_fit(const Matrix& x_raw, std::span<const Label> y, const Hyperparams& hp) {
    hp.validate();
    detail::check_training_set(x_raw, y, "mlp");
    TrainedModel model;
    model.kind = ModelKind::Mlp;
    model.feature_dim = x_raw.cols();
    const Matrix x = detail::scaled_inputs(x_raw, hp.standardize_for(ModelKind::Mlp), model.scaler);

    MlpModel net;
    net.inputs = x.cols();
    net.hidden = hp.mlp_hidden;
    net.params.assign(MlpModel::param_count(net.inputs, net.hidden), 0.0);
    const Layout L{net.inputs, net.hidden};
    Rng rng(hp.seed);
    const double r1 = std::sqrt(6.0 / static_cast<double>(net.inputs + net.hidden));
    const double r2 = std::sqrt(6.0 / static_cast<double>(net.hidden + 2));
    for (std::size_t k = L.w1(); k < L.b1(); ++k) net.params[k] = rng.uniform(-r1, r1);
    for (std::size_t k = L.w2(); k < L.b2(); ++k) net.params[k] = rng.uniform(-r2, r2);

    std::vector<double> grad;
    double first_loss = 0.0, loss = 0.0;
    std::size_t epoch = 0;
    for (; epoch < hp.mlp_epochs; ++epoch) {
        loss = mlp_loss_and_gradient(net, x, y, &grad);
        if (!std::isfinite(loss))
            throw NumericalError(fmt::format("mlp: training diverged at epoch {} (loss is not finite); try a smaller mlp_lr than {}",
                                             epoch, hp.mlp_lr));
        if (epoch == 0) first_loss = loss;
        if (loss < kEarlyStopLoss) break;
        for (std::size_t k = 0; k < grad.size(); ++k) net.params[k] -= hp.mlp_lr * grad[k];
    }
    for (double p : net.params)
        if (!std::isfinite(p)) throw NumericalError("mlp: training diverged (non-finite weights); try a smaller mlp_lr");

    model.params = std::move(net);
    model.train_meta = detail::base_meta(ModelKind::Mlp, x_raw, y, hp);
    model.train_meta.emplace_back("initial_loss", fmt::format("{}", first_loss));
    model.train_meta.emplace_back("final_loss", fmt::format("{}", loss));
    model.train_meta.emplace_back("epochs_run", std::to_string(epoch));
    return model;
}

}  // namespace llt
