#pragma once

#include "llt/classifiers.hpp"

namespace llt::detail {

/// Shapes agree, rows are finite, labels are Normal or Ectopic.
void check_training_set(const Matrix& x, std::span<const Label> y, std::string_view who);

/// The only label present, or nullopt when both classes occur.
std::optional<Label> single_class(std::span<const Label> y);

inline double label_sign(Label l) { return l == Label::Normal ? 1.0 : -1.0; }
inline Label sign_label(double score) { return score >= 0.0 ? Label::Normal : Label::Ectopic; }

/// Fits the scaler when `enabled` and returns the transformed copy of x.
Matrix scaled_inputs(const Matrix& x, bool enabled, FeatureScaler& scaler);

/// 1 / (d * variance of every entry of x), the RBF width used when none is given.
double default_gamma(const Matrix& x);

std::vector<std::pair<std::string, std::string>> base_meta(ModelKind kind, const Matrix& x, std::span<const Label> y,
                                                           const Hyperparams& hp);

}  // namespace llt::detail
