#pragma once

// Scoring with Normal as the positive class, the artifact rule, provenance auditing
// and the comparison table against published baselines.

#include "llt/beat.hpp"
#include "llt/classifiers.hpp"
#include "llt/linear_law.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace llt {

struct ConfusionCounts {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
    /// Same tallies with Ectopic as the positive class.
    ConfusionCounts transposed() const { return {tn, tp, fn, fp}; }
    bool operator==(const ConfusionCounts&) const = default;
};

/// Exact non-negative fraction; comparisons cross-multiply so 2/4 == 1/2.
struct Ratio {
    std::uint64_t num = 0, den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Ratio& o) const;
};

struct MetricsReport {
    Ratio acc;
    std::optional<Ratio> se_normal, pp_normal, se_ectopic, pp_ectopic;  // absent on a zero denominator
    ConfusionCounts counts;
    std::size_t artifact_count = 0;
    Role role = Role::Test;
};

ConfusionCounts score(std::span<const Label> predictions, std::span<const Label> truth);
MetricsReport metrics(const ConfusionCounts& counts);

/// Records every stage that consumed a corpus; a fit on the Test role fails the audit.
class ProvenanceLog {
public:
    struct Entry {
        std::string stage;
        Role role;
        bool is_fit;
    };
    void record(std::string stage, Role role, bool is_fit) { entries_.push_back({std::move(stage), role, is_fit}); }
    const std::vector<Entry>& entries() const { return entries_; }
    bool audit_ok() const;
    std::string render() const;

private:
    std::vector<Entry> entries_;
};

struct PipelineConfig {
    std::size_t downsample = 1;
    /// Leave artifact beats out of the tallies instead of scoring them as Ectopic.
    bool exclude_artifacts = false;
};

struct PipelineResult {
    MetricsReport report;
    std::vector<Label> predictions;  // one per beat; artifacts carry the rule label
};

/// Artifact beats are labelled Ectopic without consulting the model; the rest go through
/// the reference-law features and `model`.
PipelineResult evaluate_pipeline(const Corpus& corpus, const LinearLaw& law, const TrainedModel& model,
                                 const PipelineConfig& cfg = {}, ProvenanceLog* log = nullptr);

struct BaselineRow {
    std::string method;
    /// ACC, Se_N, +P_N, Se_E, +P_E in percent.
    std::optional<std::array<double, 5>> validation;
    std::optional<std::array<double, 5>> test;
};
/// Published results for the clinical corpus, used as a static comparison column.
const std::vector<BaselineRow>& published_baselines();
const BaselineRow* find_baseline(std::string_view method);

struct MethodResult {
    std::string method;
    std::string baseline;  // published row to compare against; empty for none
    std::optional<MetricsReport> validation;
    std::optional<MetricsReport> test;
};

std::string compare_markdown(std::span<const MethodResult> results);
std::string compare_csv(std::span<const MethodResult> results);
/// Percent with one decimal, or "n/a" for an absent ratio.
std::string percent(const std::optional<Ratio>& r);

}  // namespace llt
