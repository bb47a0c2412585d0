#pragma once

// Corpus, signal and law files.
//
// Beat CSV: no header, one beat per row, "<label>,v0,...,v{L-1}" with label in
// {N, E, ?}. A trailing '!' on the label (e.g. "E!") marks an artifact beat.
//
// Raw signal CSV: one record per line, "fs;v0,v1,..." or "<label>;fs;v0,v1,...".

#include "llt/beat.hpp"
#include "llt/linear_law.hpp"
#include "llt/preprocess.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace llt {

enum class CorpusFormat { Csv, RawSignalCsv };

struct LabeledSignal {
    Signal signal;
    Label label = Label::Unlabeled;
    std::string source_id;
};

Corpus parse_corpus_csv(std::string_view text, Role role = Role::Train, std::string_view source = "corpus");
std::string render_corpus_csv(const Corpus& corpus);

std::vector<LabeledSignal> parse_signals(std::string_view text, std::string_view source = "signals");

/// Raw signals are run through preprocess_record with `cfg`.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, Role role = Role::Train,
                   const PreprocessConfig& cfg = {});
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);
std::vector<LabeledSignal> load_signals(const std::filesystem::path& path);

struct SplitSpec {
    double train_fraction = 0.40;
    std::uint64_t seed = 0;
    /// Apply the fraction within each label separately.
    bool stratified = false;
};

/// Seeded shuffle; the first floor(fraction * N) shuffled beats go to the train part.
/// Both parts keep the input's relative beat order.
std::pair<Corpus, Corpus> split_train_validation(const Corpus& corpus, const SplitSpec& spec);

std::string render_law(const LinearLaw& law);
LinearLaw parse_law(std::string_view text);
void save_law(const LinearLaw& law, const std::filesystem::path& path);
LinearLaw load_law(const std::filesystem::path& path);

}  // namespace llt
