#pragma once

// Linear laws: the unit vector w minimising the mean squared residual (Yw)_k over a
// class's embedded rows, i.e. the eigenvector of C = Y^T Y / K with the smallest
// eigenvalue. That eigenvalue equals the training variance of the residual.

#include "llt/beat.hpp"
#include "llt/core.hpp"
#include "llt/embedding.hpp"

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

namespace llt {

#if defined(__SIZEOF_FLOAT128__)
using Wide = __float128;
#else
using Wide = long double;
#endif

/// C = Y^T Y / K. Accumulated and stored in extended precision so that exact
/// laws produce eigenvalues far below double rounding of the signal power.
class CorrelationMatrix {
public:
    CorrelationMatrix() = default;
    CorrelationMatrix(std::size_t dim, std::size_t row_count, std::vector<Wide> entries);

    /// Wraps an arbitrary symmetric matrix (used for solver tests and tooling).
    static CorrelationMatrix from_matrix(const Matrix& c, std::size_t row_count = 1);

    std::size_t dim() const { return dim_; }
    std::size_t row_count() const { return row_count_; }
    double operator()(std::size_t i, std::size_t j) const { return static_cast<double>(entries_[i * dim_ + j]); }
    Wide wide(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
    Matrix to_matrix() const;
    double trace() const;
    double frobenius() const;

private:
    std::size_t dim_ = 0;
    std::size_t row_count_ = 0;
    std::vector<Wide> entries_;
};

CorrelationMatrix correlation(const Matrix& y);
CorrelationMatrix correlation(const EmbeddedMatrix& y);

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
struct SymmetricEigen {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column i pairs with values[i]
    int sweeps = 0;
};

SymmetricEigen jacobi_eigen(const CorrelationMatrix& c);
SymmetricEigen jacobi_eigen(const Matrix& a);

struct EigenPair {
    double lambda = 0.0;
    std::vector<double> w;           // unit norm, first significant component positive
    std::size_t multiplicity = 1;    // eigenvalues numerically equal to lambda
    double gap = 0.0;                // distance to the next distinct eigenvalue
    SymmetricEigen spectrum;
};

EigenPair smallest_eigenpair(const CorrelationMatrix& c);

/// Flip w so its first component with |w_i| > kSignComponent is positive.
void apply_sign_convention(std::span<double> w);

struct LinearLaw {
    std::vector<double> w;
    double lambda = 0.0;
    Label class_tag = Label::Normal;
    std::size_t train_row_count = 0;
    std::size_t multiplicity = 1;
    double eigen_gap = 0.0;

    std::size_t length() const { return w.size(); }
    bool operator==(const LinearLaw&) const = default;
};

struct FitOptions {
    /// Accept a repeated smallest eigenvalue; the law becomes the normalized projection
    /// of the lowest-index coordinate axis onto the degenerate eigenspace.
    bool allow_degenerate = false;
};

/// Fit the law of `beats` with `law_length` coefficients. Verifies the variance identity.
LinearLaw fit_law(std::span<const Beat> beats, std::size_t law_length, Label class_tag, const FitOptions& opts = {});

/// Mean of xi^2 over every embedded row of every beat.
double law_variance(std::span<const Beat> beats, const LinearLaw& law);
/// Same quantity for an arbitrary (not necessarily unit) probe vector.
double probe_variance(std::span<const Beat> beats, std::span<const double> probe);

struct LawScanEntry {
    std::size_t law_length = 0;
    double lambda_train = 0.0;
    double var_validation = 0.0;
    double gap = 0.0;  // |var_validation - lambda_train| / max(lambda_train, numeric floor)
    std::size_t feature_count = 0;
    std::size_t multiplicity = 1;
};

struct LawScanReport {
    std::vector<LawScanEntry> entries;  // ascending law length
};

/// Fit on the train corpus's `cls` beats for each length in [min_len, max_len] and
/// evaluate on the validation corpus's `cls` beats.
LawScanReport scan_law_length(const Corpus& train, const Corpus& validation, std::size_t min_len, std::size_t max_len,
                              Label cls = Label::Normal);

void write_scan_csv(std::ostream& out, const LawScanReport& report);

}  // namespace llt
