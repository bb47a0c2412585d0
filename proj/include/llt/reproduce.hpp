#pragma once

// The full two-step protocol: fit the Normal law on the training split, transform every
// role, train each classifier configuration, and score validation and test.

#include "llt/classifiers.hpp"
#include "llt/dataset_io.hpp"
#include "llt/evaluation.hpp"
#include "llt/linear_law.hpp"
#include "llt/preprocess.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace llt {

struct ReproduceConfig {
    std::filesystem::path data_dir;   // train.csv, test.csv, optional validation.csv
    std::filesystem::path out_dir;
    CorpusFormat format = CorpusFormat::Csv;
    PreprocessConfig preprocess;
    std::size_t law_length = 12;
    std::size_t scan_min = 4;
    std::size_t scan_max = 20;
    SplitSpec split;                  // used only when validation.csv is absent
    std::size_t downsample = 1;
    bool exclude_artifacts = false;
    bool tune = true;                 // SVM C and gamma chosen on the validation role
    Hyperparams hp;
    /// Flat key=value rendering of the resolved run configuration, echoed into reports.
    std::vector<std::pair<std::string, std::string>> resolved;
};

struct ReproduceResult {
    LinearLaw law;
    LawScanReport scan;
    double cross_law_ratio = 0.0;     // Ectopic over Normal residual variance under the Normal law
    std::vector<MethodResult> methods;
    ProvenanceLog provenance;
    bool audit_ok = true;
    std::vector<std::string> audit_failures;
    std::size_t train_beats = 0, validation_beats = 0, test_beats = 0;
};

/// Writes law, models, feature tables, plot CSVs and reports into cfg.out_dir.
ReproduceResult run_reproduce(const ReproduceConfig& cfg);

}  // namespace llt
