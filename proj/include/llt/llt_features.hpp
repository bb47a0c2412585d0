#pragma once

// Law-residual features: a beat is embedded and multiplied by a law's coefficient
// vector, giving one residual per embedded row.

#include "llt/beat.hpp"
#include "llt/core.hpp"
#include "llt/linear_law.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace llt {

/// xi_k = sum_i s[k + l - 1 - i] * w[i], for k in [0, n - l].
std::vector<double> apply_law(std::span<const double> samples, std::span<const double> w);

std::vector<double> transform(const Beat& beat, const LinearLaw& law);

/// Laws keyed by class, iterated in lexicographic order of the class name.
class LawSet {
public:
    explicit LawSet(std::vector<LinearLaw> laws);

    const std::vector<LinearLaw>& laws() const { return laws_; }
    std::size_t law_length() const { return laws_.front().length(); }
    const LinearLaw& at(Label cls) const;

private:
    std::vector<LinearLaw> laws_;
};

enum class FeatureMode { MultiClass, BinaryReference };

struct FeatureSegment {
    Label class_tag = Label::Normal;
    std::size_t length = 0;

    bool operator==(const FeatureSegment&) const = default;
};

struct FeatureVector {
    std::vector<double> xi;
    std::vector<FeatureSegment> layout;
    FeatureMode mode = FeatureMode::BinaryReference;
};

/// Concatenated residuals of every law in the set. nullopt for artifact beats.
std::optional<FeatureVector> stack_features(const Beat& beat, const LawSet& laws);
/// Residuals of the reference-class law only. nullopt for artifact beats.
std::optional<FeatureVector> binary_features(const Beat& beat, const LinearLaw& reference_law);

/// Keep every factor-th element of each segment, starting at its first element.
FeatureVector downsample_features(const FeatureVector& fv, std::size_t factor);

/// Per-feature standardization fitted on training rows.
struct FeatureScaler {
    std::vector<double> mean;
    std::vector<double> scale;  // 1 / stddev, or 1 for constant columns

    static FeatureScaler fit(const Matrix& x);
    bool empty() const { return mean.empty(); }
    void apply(std::span<double> row) const;
    Matrix apply(const Matrix& x) const;
};

/// Feature rows with their labels; artifact beats are kept out of `x` and counted.
struct FeatureTable {
    Matrix x;
    std::vector<Label> labels;
    std::vector<FeatureSegment> layout;
    std::size_t artifact_count = 0;

    std::size_t size() const { return labels.size(); }
};

FeatureTable binary_feature_table(const Corpus& corpus, const LinearLaw& reference_law, std::size_t downsample = 1);
FeatureTable stacked_feature_table(const Corpus& corpus, const LawSet& laws, std::size_t downsample = 1);

/// CSV: a "# layout=Normal:19" comment line, then "<label>,f0,f1,..." rows.
void save_feature_table(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable load_feature_table(const std::filesystem::path& path);
std::string render_feature_table(const FeatureTable& table);
FeatureTable parse_feature_table(std::string_view text);

}  // namespace llt
