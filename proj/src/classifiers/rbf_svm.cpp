#include "common.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>

#include <fmt/format.h>

namespace llt {

namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kCacheBudgetBytes = std::size_t{256} << 20;

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-gamma * d2);
}

// Kernel rows computed on demand; the oldest rows are dropped once the budget is reached.
class KernelRows {
public:
    KernelRows(const Matrix& x, double gamma) : x_(x), gamma_(gamma), rows_(x.rows()) {
        const std::size_t row_bytes = std::max<std::size_t>(1, x.rows() * sizeof(double));
        capacity_ = std::max<std::size_t>(2, kCacheBudgetBytes / row_bytes);
    }

    /// `keep` names a row the caller still holds, which must not be evicted.
    const std::vector<double>& row(std::size_t i, std::size_t keep = SIZE_MAX) {
        if (rows_[i].empty()) {
            if (resident_.size() >= capacity_) {
                if (resident_.front() == keep) {
                    resident_.pop_front();
                    resident_.push_back(keep);
                }
                rows_[resident_.front()].clear();
                rows_[resident_.front()].shrink_to_fit();
                resident_.pop_front();
            }
            auto& r = rows_[i];
            r.resize(x_.rows());
            for (std::size_t k = 0; k < x_.rows(); ++k) r[k] = rbf(x_.row(i), x_.row(k), gamma_);
            resident_.push_back(i);
        }
        return rows_[i];
    }

private:
    const Matrix& x_;
    double gamma_;
    std::vector<std::vector<double>> rows_;
    std::deque<std::size_t> resident_;
    std::size_t capacity_ = 2;
};

}  // namespace

// Dual SMO with second-order working-set selection, following the libsvm solver:
//   min_a 0.5 a^T Q a - e^T a,  0 <= a_i <= C,  y^T a = 0,  Q_ij = y_i y_j K(x_i, x_j).
TrainedModel rbf_svm_fit(const Matrix& x_raw, std::span<const Label> labels, const Hyperparams& hp,
                         const SmoObserver& observer) {
    hp.validate();
    detail::check_training_set(x_raw, labels, "rbf svm");
    TrainedModel model;
    model.kind = ModelKind::RbfSvm;
    model.feature_dim = x_raw.cols();
    const Matrix x = detail::scaled_inputs(x_raw, hp.standardize_for(ModelKind::RbfSvm), model.scaler);
    const double gamma = hp.rbf_gamma.value_or(detail::default_gamma(x));
    const double C = hp.svm_C;
    const std::size_t n = x.rows();
    if (const auto only = detail::single_class(labels)) {
        model.params = RbfSvmModel{Matrix(0, x.cols()), {}, detail::label_sign(*only), gamma};
        model.train_meta = detail::base_meta(ModelKind::RbfSvm, x_raw, labels, hp);
        model.train_meta.emplace_back("single_class", std::string(label_name(*only)));
        return model;
    }

    std::vector<double> y(n), alpha(n, 0.0), G(n, -1.0);
    for (std::size_t i = 0; i < n; ++i) y[i] = detail::label_sign(labels[i]);
    auto upper = [&](std::size_t t) { return alpha[t] >= C; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
    KernelRows kernel(x, gamma);

    std::size_t iter = 0;
    for (;; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t i = -1;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = y[t] > 0 ? (!upper(t) ? -G[t] : -HUGE_VAL) : (!lower(t) ? G[t] : -HUGE_VAL);
            if (v >= gmax && v != -HUGE_VAL) {
                gmax = v;
                i = static_cast<std::ptrdiff_t>(t);
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t j = -1;
        double best = std::numeric_limits<double>::infinity();
        if (i >= 0) {
            const auto& Ki = kernel.row(static_cast<std::size_t>(i));
            for (std::size_t t = 0; t < n; ++t) {
                double grad_diff;
                if (y[t] > 0) {
                    if (lower(t)) continue;
                    grad_diff = gmax + G[t];
                    gmax2 = std::max(gmax2, G[t]);
                } else {
                    if (upper(t)) continue;
                    grad_diff = gmax - G[t];
                    gmax2 = std::max(gmax2, -G[t]);
                }
                if (grad_diff > 0.0) {
                    double quad = 2.0 - 2.0 * Ki[t];
                    if (quad <= 0.0) quad = kTau;
                    const double obj = -(grad_diff * grad_diff) / quad;
                    if (obj <= best) {
                        best = obj;
                        j = static_cast<std::ptrdiff_t>(t);
                    }
                }
            }
        }
        if (i < 0 || j < 0 || gmax + gmax2 < hp.smo_tolerance) break;
        if (iter >= hp.smo_max_iter) {
            std::size_t violators = 0;
            for (std::size_t t = 0; t < n; ++t) {
                const bool in_up = y[t] > 0 ? !upper(t) : !lower(t);
                if (in_up && -y[t] * G[t] + gmax2 > hp.smo_tolerance) ++violators;
            }
            throw NumericalError(fmt::format("rbf svm: SMO did not converge in {} iterations ({} KKT violators, gap {})",
                                             hp.smo_max_iter, violators, gmax + gmax2));
        }

        const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
        const auto& Ki = kernel.row(ui);
        const auto& Kj = kernel.row(uj, ui);
        const double Qij = y[ui] * y[uj] * Ki[uj];
        const double old_i = alpha[ui], old_j = alpha[uj];
        if (y[ui] != y[uj]) {
            double quad = 2.0 + 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-G[ui] - G[uj]) / quad;
            const double diff = alpha[ui] - alpha[uj];
            alpha[ui] += delta;
            alpha[uj] += delta;
            if (diff > 0) {
                if (alpha[uj] < 0) { alpha[uj] = 0; alpha[ui] = diff; }
            } else if (alpha[ui] < 0) {
                alpha[ui] = 0;
                alpha[uj] = -diff;
            }
            if (diff > 0) {
                if (alpha[ui] > C) { alpha[ui] = C; alpha[uj] = C - diff; }
            } else if (alpha[uj] > C) {
                alpha[uj] = C;
                alpha[ui] = C + diff;
            }
        } else {
            double quad = 2.0 - 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (G[ui] - G[uj]) / quad;
            const double sum = alpha[ui] + alpha[uj];
            alpha[ui] -= delta;
            alpha[uj] += delta;
            if (sum > C) {
                if (alpha[ui] > C) { alpha[ui] = C; alpha[uj] = sum - C; }
            } else if (alpha[uj] < 0) {
                alpha[uj] = 0;
                alpha[ui] = sum;
            }
            if (sum > C) {
                if (alpha[uj] > C) { alpha[uj] = C; alpha[ui] = sum - C; }
            } else if (alpha[ui] < 0) {
                alpha[ui] = 0;
                alpha[uj] = sum;
            }
        }
        const double dai = alpha[ui] - old_i, daj = alpha[uj] - old_j;
        for (std::size_t t = 0; t < n; ++t) G[t] += y[t] * (y[ui] * Ki[t] * dai + y[uj] * Kj[t] * daj);
        if (observer) observer(iter + 1, alpha);
    }

    double ub = HUGE_VAL, lb = -HUGE_VAL, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * G[t];
        if (upper(t)) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    RbfSvmModel svm;
    svm.gamma = gamma;
    svm.b = -rho;
    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > 0.0) sv.push_back(t);
    svm.support = Matrix(sv.size(), x.cols());
    for (std::size_t s = 0; s < sv.size(); ++s) {
        std::copy(x.row(sv[s]).begin(), x.row(sv[s]).end(), svm.support.row(s).begin());
        svm.coef.push_back(alpha[sv[s]] * y[sv[s]]);
    }
    model.params = std::move(svm);
    model.train_meta = detail::base_meta(ModelKind::RbfSvm, x_raw, labels, hp);
    model.train_meta.emplace_back("gamma", fmt::format("{}", gamma));
    model.train_meta.emplace_back("smo_iterations", std::to_string(iter));
    model.train_meta.emplace_back("support_vectors", std::to_string(sv.size()));
    return model;
}

namespace detail {

double default_gamma(const Matrix& x) {
    const auto& v = x.data();
    if (v.empty()) return 1.0;
    long double mean = 0.0L;
    for (double a : v) mean += a;
    mean /= static_cast<long double>(v.size());
    long double var = 0.0L;
    for (double a : v) var += (a - mean) * (a - mean);
    var /= static_cast<long double>(v.size());
    const double d = static_cast<double>(x.cols());
    return var > 0.0L ? 1.0 / (d * static_cast<double>(var)) : 1.0 / d;
}

double rbf_decision(const RbfSvmModel& svm, std::span<const double> q) {
    double s = svm.b;
    for (std::size_t i = 0; i < svm.coef.size(); ++i) s += svm.coef[i] * rbf(svm.support.row(i), q, svm.gamma);
    return s;
}

}  // namespace detail

}  // namespace llt
