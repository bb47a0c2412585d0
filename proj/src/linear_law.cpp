#include "llt/linear_law.hpp"

#include "llt/artifact_file.hpp"
#include "llt/llt_features.hpp"
#include "llt/tolerances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace llt {

namespace {

Wide wide_abs(Wide x) { return x < 0 ? -x : x; }

// Newton refinement from the double estimate; three steps exceed 113 bits.
Wide wide_sqrt(Wide x) {
    if (!(x > 0)) return 0;
    const double seed = std::sqrt(static_cast<double>(x));
    if (!(seed > 0.0) || !std::isfinite(seed)) return static_cast<Wide>(seed);
    Wide y = seed;
    for (int i = 0; i < 3; ++i) y = (y + x / y) / 2;
    return y;
}

bool wide_finite(Wide x) { return std::isfinite(static_cast<double>(x)); }

struct WideEigen {
    std::vector<Wide> values;   // ascending
    std::vector<Wide> vectors;  // n x n row-major, column i pairs with values[i]
    int sweeps = 0;
};

WideEigen jacobi_wide(std::vector<Wide> a, std::size_t n) {
    std::vector<Wide> v(n * n, Wide(0));
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1;
    auto A = [&](std::size_t i, std::size_t j) -> Wide& { return a[i * n + j]; };
    auto V = [&](std::size_t i, std::size_t j) -> Wide& { return v[i * n + j]; };

    Wide fro2 = 0;
    for (const Wide x : a) {
        if (!wide_finite(x)) throw NumericalError("eigensolver input has non-finite entries");
        fro2 += x * x;
    }
    const Wide stop = static_cast<Wide>(tol::kJacobiOffDiagonal) * wide_sqrt(fro2);

    int sweep = 0;
    for (;; ++sweep) {
        Wide off2 = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) off2 += A(i, j) * A(i, j);
        const Wide off = wide_sqrt(off2);
        if (off <= stop) break;
        if (sweep == tol::kJacobiMaxSweeps)
            throw NumericalError(fmt::format("Jacobi eigensolver did not converge in {} sweeps (off-diagonal norm {:.3e})",
                                             tol::kJacobiMaxSweeps, static_cast<double>(off)));

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Wide apq = A(p, q);
                if (apq == 0) continue;
                const Wide theta = (A(q, q) - A(p, p)) / (2 * apq);
                const Wide t = (theta >= 0 ? Wide(1) : Wide(-1)) / (wide_abs(theta) + wide_sqrt(theta * theta + 1));
                const Wide c = 1 / wide_sqrt(t * t + 1);
                const Wide s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const Wide akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Wide apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                A(p, q) = 0;
                A(q, p) = 0;
                for (std::size_t k = 0; k < n; ++k) {
                    const Wide vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return A(x, x) < A(y, y); });
    WideEigen out;
    out.sweeps = sweep;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = A(order[c], order[c]);
        for (std::size_t r = 0; r < n; ++r) out.vectors[r * n + c] = V(r, order[c]);
    }
    return out;
}

SymmetricEigen to_double(const WideEigen& e, std::size_t n) {
    SymmetricEigen out;
    out.sweeps = e.sweeps;
    out.values.reserve(n);
    for (const Wide x : e.values) out.values.push_back(static_cast<double>(x));
    out.vectors = Matrix(n, n);
    for (std::size_t i = 0; i < n * n; ++i) out.vectors.data()[i] = static_cast<double>(e.vectors[i]);
    return out;
}

std::vector<Wide> entries_of(const CorrelationMatrix& c) {
    const std::size_t n = c.dim();
    std::vector<Wide> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = c.wide(i, j);
    return a;
}

Wide rayleigh(const CorrelationMatrix& c, std::span<const Wide> w) {
    Wide num = 0;
    for (std::size_t i = 0; i < c.dim(); ++i)
        for (std::size_t j = 0; j < c.dim(); ++j) num += w[i] * c.wide(i, j) * w[j];
    return num;
}

}  // namespace

CorrelationMatrix::CorrelationMatrix(std::size_t dim, std::size_t row_count, std::vector<Wide> entries)
    : dim_(dim), row_count_(row_count), entries_(std::move(entries)) {
    if (entries_.size() != dim_ * dim_) throw ParameterError("correlation matrix entry count does not match dimension");
}

CorrelationMatrix CorrelationMatrix::from_matrix(const Matrix& c, std::size_t row_count) {
    if (c.rows() != c.cols()) throw ParameterError("matrix is not square");
    const std::size_t n = c.rows();
    double scale = 0.0;
    for (double x : c.data()) scale = std::max(scale, std::abs(x));
    std::vector<Wide> e(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            if (std::abs(c(i, j) - c(j, i)) > 1e-12 * scale)
                throw ParameterError(fmt::format("matrix is not symmetric at ({}, {})", i, j));
            e[i * n + j] = e[j * n + i] = c(i, j);
        }
    }
    return {n, row_count, std::move(e)};
}

Matrix CorrelationMatrix::to_matrix() const {
    Matrix m(dim_, dim_);
    for (std::size_t i = 0; i < dim_ * dim_; ++i) m.data()[i] = static_cast<double>(entries_[i]);
    return m;
}

double CorrelationMatrix::trace() const {
    Wide t = 0;
    for (std::size_t i = 0; i < dim_; ++i) t += entries_[i * dim_ + i];
    return static_cast<double>(t);
}

double CorrelationMatrix::frobenius() const {
    Wide s = 0;
    for (const Wide x : entries_) s += x * x;
    return static_cast<double>(wide_sqrt(s));
}

CorrelationMatrix correlation(const Matrix& y) {
    const std::size_t k = y.rows();
    const std::size_t n = y.cols();
    if (k == 0) throw ParameterError("correlation needs at least one row");

    // Products of doubles are exact in the wide type; only the additions round.
    std::vector<Wide> upper(n * (n + 1) / 2, Wide(0));
    std::vector<Wide> row(n);
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t i = 0; i < n; ++i) row[i] = y(r, i);
        std::size_t idx = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) upper[idx++] += row[i] * row[j];
    }
    std::vector<Wide> e(n * n);
    std::size_t idx = 0;
    const Wide kk = static_cast<Wide>(k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) e[i * n + j] = e[j * n + i] = upper[idx++] / kk;
    return {n, k, std::move(e)};
}

CorrelationMatrix correlation(const EmbeddedMatrix& y) { return correlation(y.data); }

SymmetricEigen jacobi_eigen(const CorrelationMatrix& c) { return to_double(jacobi_wide(entries_of(c), c.dim()), c.dim()); }

SymmetricEigen jacobi_eigen(const Matrix& a) { return jacobi_eigen(CorrelationMatrix::from_matrix(a)); }

void apply_sign_convention(std::span<double> w) {
    for (double x : w) {
        if (std::abs(x) > tol::kSignComponent) {
            if (x < 0)
                for (double& y : w) y = -y;
            return;
        }
    }
}

EigenPair smallest_eigenpair(const CorrelationMatrix& c) {
    const std::size_t n = c.dim();
    if (n == 0) throw ParameterError("empty correlation matrix");
    const WideEigen e = jacobi_wide(entries_of(c), n);

    EigenPair out;
    const Wide lambda = e.values.front();
    const Wide band = static_cast<Wide>(tol::kNumericZero) * wide_abs(static_cast<Wide>(c.trace()));
    while (out.multiplicity < n && e.values[out.multiplicity] - lambda <= band) ++out.multiplicity;
    out.gap = out.multiplicity < n ? static_cast<double>(e.values[out.multiplicity] - lambda) : 0.0;
    out.lambda = static_cast<double>(lambda);
    out.w.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.w[i] = static_cast<double>(e.vectors[i * n]);
    apply_sign_convention(out.w);

    Wide res2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Wide r = -lambda * static_cast<Wide>(out.w[i]);
        for (std::size_t j = 0; j < n; ++j) r += c.wide(i, j) * static_cast<Wide>(out.w[j]);
        res2 += r * r;
    }
    const double residual = static_cast<double>(wide_sqrt(res2));
    if (residual > tol::kEigenResidual * std::max(1.0, c.frobenius()))
        throw NumericalError(fmt::format("eigenpair residual {:.3e} exceeds tolerance", residual));

    out.spectrum = to_double(e, n);
    return out;
}

LinearLaw fit_law(std::span<const Beat> beats, std::size_t law_length, Label class_tag, const FitOptions& opts) {
    const EmbeddedMatrix y = embed_class(beats, law_length);
    const CorrelationMatrix c = correlation(y);
    const EigenPair pair = smallest_eigenpair(c);
    const std::size_t n = c.dim();
    const double trace = c.trace();

    LinearLaw law;
    law.class_tag = class_tag;
    law.train_row_count = y.rows();
    law.multiplicity = pair.multiplicity;
    law.eigen_gap = pair.gap;
    law.w = pair.w;
    Wide lambda = static_cast<Wide>(pair.lambda);

    if (pair.multiplicity > 1) {
        if (!opts.allow_degenerate) {
            throw NumericalError(fmt::format(
                "rank-deficient: law ambiguous (smallest eigenvalue {:.6e} has multiplicity {} of {})", pair.lambda,
                pair.multiplicity, n));
        }
        const Matrix& v = pair.spectrum.vectors;
        for (std::size_t axis = 0; axis < n; ++axis) {
            std::vector<Wide> proj(n, Wide(0));
            for (std::size_t k = 0; k < pair.multiplicity; ++k)
                for (std::size_t i = 0; i < n; ++i) proj[i] += static_cast<Wide>(v(axis, k)) * static_cast<Wide>(v(i, k));
            Wide norm2 = 0;
            for (const Wide x : proj) norm2 += x * x;
            if (norm2 < Wide(1e-16)) continue;
            const Wide norm = wide_sqrt(norm2);
            for (auto& x : proj) x /= norm;
            for (std::size_t i = 0; i < n; ++i) law.w[i] = static_cast<double>(proj[i]);
            apply_sign_convention(law.w);
            std::vector<Wide> wd(law.w.begin(), law.w.end());
            lambda = rayleigh(c, wd);
            break;
        }
    }

    if (lambda < 0) {
        if (lambda < -static_cast<Wide>(tol::kPsd) * static_cast<Wide>(trace))
            throw NumericalError(fmt::format("correlation matrix is not positive semidefinite (eigenvalue {:.3e})",
                                             static_cast<double>(lambda)));
        lambda = 0;
    }
    law.lambda = static_cast<double>(lambda);

    const double var = law_variance(beats, law);
    const double scale = std::max(law.lambda, var);
    if (std::abs(var - law.lambda) > tol::kVarianceIdentity * scale && scale > tol::kNumericZero * trace)
        throw NumericalError(fmt::format("variance identity violated: residual variance {:.17g} vs eigenvalue {:.17g}",
                                         var, law.lambda));
    return law;
}

double probe_variance(std::span<const Beat> beats, std::span<const double> probe) {
    if (beats.empty()) throw ParameterError("no beats to evaluate");
    long double sum = 0.0L;
    std::size_t count = 0;
    for (const auto& b : beats) {
        for (const double xi : apply_law(b.samples, probe)) sum += static_cast<long double>(xi) * xi;
        count += b.samples.size() - probe.size() + 1;
    }
    return static_cast<double>(sum / static_cast<long double>(count));
}

double law_variance(std::span<const Beat> beats, const LinearLaw& law) { return probe_variance(beats, law.w); }

LawScanReport scan_law_length(const Corpus& train, const Corpus& validation, std::size_t min_len, std::size_t max_len,
                              Label cls) {
    if (min_len < 2 || min_len > max_len || max_len > train.length)
        throw ParameterError(fmt::format("law length range [{}, {}] must lie within [2, {}]", min_len, max_len, train.length));
    if (validation.length != train.length) throw ParameterError("train and validation beat lengths differ");
    const auto fit_beats = train.select(cls);
    const auto val_beats = validation.select(cls);
    if (val_beats.empty()) throw ParameterError("validation corpus has no beats of the scanned class");

    LawScanReport report;
    for (std::size_t len = min_len; len <= max_len; ++len) {
        const LinearLaw law = fit_law(fit_beats, len, cls, {.allow_degenerate = true});
        LawScanEntry e;
        e.law_length = len;
        e.lambda_train = law.lambda;
        e.var_validation = law_variance(val_beats, law);
        const EmbeddedMatrix y = embed_class(fit_beats, len);
        double power = 0.0;
        for (const double x : y.data.data()) power += x * x;
        const double mean_power = power / static_cast<double>(y.data.data().size());
        e.gap = std::abs(e.var_validation - e.lambda_train) / std::max(e.lambda_train, tol::kNumericZero * mean_power);
        e.feature_count = train.length - len + 1;
        e.multiplicity = law.multiplicity;
        report.entries.push_back(e);
    }
    return report;
}

void write_scan_csv(std::ostream& out, const LawScanReport& report) {
    out << "l,lambda_train,var_val,gap,feature_count\n";
    for (const auto& e : report.entries)
        out << e.law_length << ',' << format_double(e.lambda_train) << ',' << format_double(e.var_validation) << ','
            << format_double(e.gap) << ',' << e.feature_count << '\n';
}

}  // namespace llt
